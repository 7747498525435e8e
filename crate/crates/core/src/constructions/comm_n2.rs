use serde::Serialize;

use super::certificate::{Atom, ClaimedIdentity, FactorCertificate};
use super::lie_rewrite::{form_i_terms, Term};
use super::sumof5::sumof5;
use super::unipotent::{witness_from_form, N2cWitness};
use crate::error::{Error, Result};
use crate::matrix::{square_zero_canonical, MatrixElt};

/// Residual bound advertised by [`commutator_to_squarezeros`].
pub const COMM_N2_TOL: f64 = 1e-9;

pub const UNIT_REPRESENTATION: &str = "1 = sum_k e_k1 [e_12, e_21] e_1k";

#[derive(Clone, Debug, Serialize)]
pub struct CommN2 {
    pub certificate: FactorCertificate,
    /// Number of square-zero summands.
    pub k: usize,
    /// `max ||y_i|| / (||c|| ||d||)`.
    pub c_realized: f64,
}

/// Below this norm an intermediate summand is rounding noise and is treated as zero.
const NOISE: f64 = 1e-13;

fn witness(z: &MatrixElt) -> Result<N2cWitness> {
    if z.op_norm() < NOISE {
        let zero = MatrixElt::zeros(z.dim());
        return Ok(N2cWitness {
            x: zero.clone(),
            e: zero.clone(),
            f: zero,
        });
    }
    let form = square_zero_canonical(z)?;
    let w = witness_from_form(z, &form);
    w.check(1e-10)?;
    Ok(w)
}

/// Five square-zero summands of `[x, r]`.
fn split_single(wit: &N2cWitness, r: &MatrixElt) -> Result<Vec<MatrixElt>> {
    let s = sumof5(wit, r)?;
    let [z1, z2, z3, z4, _] = s.z;
    Ok(vec![z1, z2, z3, z4, s.conjugated])
}

/// Twenty-five square-zero summands of `[[x, r], s]`:
/// `[[x, r], s] = sum_{i<=4} [z_i, s] + w (1 + z5) [x, s'] (1 - z5)` with
/// `s' = (1 - z5) s (1 + z5)`.
fn split_double(wit: &N2cWitness, r: &MatrixElt, s: &MatrixElt) -> Result<Vec<MatrixElt>> {
    let first = sumof5(wit, r)?;
    let mut out = Vec::with_capacity(25);
    for z in &first.z[..4] {
        out.extend(split_single(&witness(z)?, s)?);
    }
    let one = MatrixElt::identity(s.dim());
    let z5 = &first.z[4];
    let g = &one + z5;
    let gi = &one - z5;
    let s_prime = &(&gi * s) * &g;
    for y in split_single(wit, &s_prime)? {
        out.push((&(&g * &y) * &gi).scale_re(first.weight));
    }
    Ok(out)
}

/// Write `[c, d]` in `M_n`, `n >= 2`, as a sum of square-zero matrices.
pub fn commutator_to_squarezeros(c: &MatrixElt, d: &MatrixElt) -> Result<CommN2> {
    c.check_same_dim(d)?;
    let n = c.dim();
    if n < 2 {
        return Err(Error::Precondition(
            "M_1 is commutative; need dimension at least 2".into(),
        ));
    }
    let target = c.commutator(d);
    let (nc, nd) = (c.op_norm(), d.op_norm());
    if nc == 0.0 || nd == 0.0 {
        let cert = FactorCertificate::seal(
            "commN2",
            target,
            Vec::new(),
            ClaimedIdentity::SumEqualsTarget,
            COMM_N2_TOL,
        )?;
        return Ok(CommN2 {
            certificate: cert,
            k: 0,
            c_realized: 0.0,
        });
    }
    let ch = c.scale_re(1.0 / nc);
    let dh = d.scale_re(1.0 / nd);
    let x = MatrixElt::unit(n, 0, 1);
    let y = MatrixElt::unit(n, 1, 0);
    let wits = [witness(&x)?, witness(&y)?];
    let mut pieces = Vec::new();
    for k in 0..n {
        let a = &ch * &MatrixElt::unit(n, k, 0);
        let b = MatrixElt::unit(n, 0, k);
        for t in form_i_terms(&a, &b, &dh, &x, &y) {
            match t {
                Term::Bracket { sign, i, r } => pieces.extend(split_single(&wits[i], &r.scale_re(sign))?),
                Term::DoubleBracket { sign, i, r, s } => pieces.extend(split_double(&wits[i], &r.scale_re(sign), &s)?),
                _ => unreachable!("form (i) yields brackets and double brackets only"),
            }
        }
    }
    let scale = nc * nd;
    let ys: Vec<MatrixElt> = pieces.into_iter().map(|p| p.scale_re(scale)).collect();
    let c_realized = ys.iter().map(|y| y.op_norm()).fold(0.0, f64::max) / scale;
    let k = ys.len();
    let atoms = ys.into_iter().map(|z| Atom::SquareZero { z }).collect();
    let tol = COMM_N2_TOL * scale.max(1.0);
    let cert = FactorCertificate::seal("commN2", target, atoms, ClaimedIdentity::SumEqualsTarget, tol)?
        .with_meta("unit_representation", UNIT_REPRESENTATION)
        .with_meta("K", k)
        .with_meta("C_realized", format!("{c_realized:.6e}"));
    Ok(CommN2 {
        certificate: cert,
        k,
        c_realized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::verifier::verify_certificate;
    use crate::matrix::{random_gaussian, InstanceRng};

    #[test]
    fn unit_representation_sums_to_one() {
        let n = 4;
        let mut sum = MatrixElt::zeros(n);
        let xy = MatrixElt::unit(n, 0, 1).commutator(&MatrixElt::unit(n, 1, 0));
        for k in 0..n {
            sum += &(&(&MatrixElt::unit(n, k, 0) * &xy) * &MatrixElt::unit(n, 0, k));
        }
        assert_eq!(sum, MatrixElt::identity(n));
    }

    #[test]
    fn equal_arguments() {
        let mut rng = InstanceRng::new(3);
        let c = random_gaussian(3, &mut rng);
        let r = commutator_to_squarezeros(&c, &c).unwrap();
        assert!(r.certificate.residual < 1e-12);
    }

    #[test]
    fn elementary_pair() {
        let c = MatrixElt::unit(2, 0, 0);
        let d = MatrixElt::unit(2, 0, 1);
        let r = commutator_to_squarezeros(&c, &d).unwrap();
        assert!(r.certificate.target.dist(&d) < 1e-15);
        assert!(r.certificate.residual <= 1e-10);
        assert!(verify_certificate(&r.certificate).pass);
    }

    #[test]
    fn constant_k_at_dim_three() {
        let mut rng = InstanceRng::new(4);
        let mut ks = Vec::new();
        for _ in 0..5 {
            let c = random_gaussian(3, &mut rng);
            let d = random_gaussian(3, &mut rng);
            let c = c.scale_re(1.0 / c.op_norm());
            let d = d.scale_re(1.0 / d.op_norm());
            let r = commutator_to_squarezeros(&c, &d).unwrap();
            let v = verify_certificate(&r.certificate);
            assert!(v.pass, "{:?}", v.failures);
            ks.push(r.k);
        }
        assert!(ks.iter().all(|k| *k == 615), "{ks:?}");
    }

    #[test]
    fn zero_and_dim_one() {
        let r = commutator_to_squarezeros(&MatrixElt::zeros(2), &MatrixElt::identity(2)).unwrap();
        assert!(r.certificate.is_empty());
        assert!(commutator_to_squarezeros(&MatrixElt::identity(1), &MatrixElt::identity(1)).is_err());
    }
}
