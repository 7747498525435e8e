use serde::Serialize;

use super::certificate::{Atom, ClaimedIdentity, FactorCertificate};
use super::unipotent::N2cWitness;
use crate::error::Result;
use crate::matrix::MatrixElt;

/// Residual bound advertised by [`sumof5`].
pub const SUMOF5_TOL: f64 = 1e-10;

/// `[x, r] = z1 + z2 + z3 + z4 + w (1 + z5) x (1 - z5)` with `w = ||r||`.
#[derive(Clone, Debug, Serialize)]
pub struct SumOf5 {
    pub z: [MatrixElt; 5],
    pub weight: f64,
    /// `w (1 + z5) x (1 - z5)`.
    pub conjugated: MatrixElt,
    pub certificate: FactorCertificate,
}

impl SumOf5 {
    /// `||z_i||` for each of the five elements.
    pub fn norms(&self) -> [f64; 5] {
        [0, 1, 2, 3, 4].map(|i| self.z[i].op_norm())
    }
}

/// Split `[x, r]` into square-zero pieces using the witness projections.
///
/// With `m = e r f / ||r||` and `z5 = -m`:
/// `[x, r] = x r (1 - f) - (1 - e) r x + ||r|| (z5 x z5 - x + (1 + z5) x (1 - z5))`.
pub fn sumof5(wit: &N2cWitness, r: &MatrixElt) -> Result<SumOf5> {
    wit.x.check_same_dim(r)?;
    wit.check(1e-10)?;
    let n = r.dim();
    let one = MatrixElt::identity(n);
    let x = &wit.x;
    let target = x.commutator(r);
    let w = r.op_norm();
    let z5 = if w > 0.0 {
        -&(&(&wit.e * r) * &wit.f).scale_re(1.0 / w)
    } else {
        MatrixElt::zeros(n)
    };
    let z1 = &(x * r) * &(&one - &wit.f);
    let z2 = -&(&(&(&one - &wit.e) * r) * x);
    let z3 = (&(&z5 * x) * &z5).scale_re(w);
    let z4 = x.scale_re(-w);
    let mut atoms: Vec<Atom> = [&z1, &z2, &z3, &z4]
        .iter()
        .map(|z| Atom::SquareZero { z: (*z).clone() })
        .collect();
    atoms.push(Atom::Conjugate {
        g: &one + &z5,
        inner: Box::new(Atom::SquareZero { z: x.scale_re(w) }),
    });
    let tol = SUMOF5_TOL * (x.op_norm() * w).max(1.0);
    let certificate = FactorCertificate::seal("sumof5", target, atoms, ClaimedIdentity::SumEqualsTarget, tol)?
        .with_meta("weight", format!("{w:.17e}"));
    let conjugated = (&(&(&one + &z5) * x) * &(&one - &z5)).scale_re(w);
    Ok(SumOf5 {
        conjugated,
        z: [z1, z2, z3, z4, z5],
        weight: w,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::n2c_witness;
    use crate::constructions::verifier::verify_certificate;
    use crate::matrix::{random_gaussian, random_square_zero, InstanceRng};

    fn sq(z: &MatrixElt) -> f64 {
        (z * z).op_norm()
    }

    #[test]
    fn two_by_two_example() {
        let x = MatrixElt::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let r = MatrixElt::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let s = sumof5(&n2c_witness(&x).unwrap(), &r).unwrap();
        let want = MatrixElt::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]);
        assert!(s.certificate.target.dist(&want) < 1e-15);
        assert!(s.certificate.residual < 1e-10);
        assert!(s.norms().iter().all(|v| *v <= 1.0 + 1e-12), "{:?}", s.norms());
        assert!(s.z.iter().all(|z| sq(z) < 1e-10));
    }

    #[test]
    fn zero_r() {
        let x = MatrixElt::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let s = sumof5(&n2c_witness(&x).unwrap(), &MatrixElt::zeros(2)).unwrap();
        assert!(s.certificate.residual <= 1e-12);
        assert!(s.z.iter().all(|z| z.op_norm() == 0.0));
    }

    #[test]
    fn random_instances() {
        let mut rng = InstanceRng::new(8);
        for _ in 0..30 {
            let x = random_square_zero(5, rng.uniform(1.0, 2.0), &mut rng).unwrap();
            let g = random_gaussian(5, &mut rng);
            let r = g.scale_re(rng.uniform(1.0, 2.0) / g.op_norm());
            let s = sumof5(&n2c_witness(&x).unwrap(), &r).unwrap();
            let bound = x.op_norm() * r.op_norm() * (1.0 + 1e-8);
            assert!(s.norms().iter().all(|v| *v <= bound));
            assert!(s.z.iter().all(|z| sq(z) < 1e-10));
            assert!(s.conjugated.dist(&s.certificate.atoms[4].value().unwrap()) < 1e-12);
            let v = verify_certificate(&s.certificate);
            assert!(v.pass, "{v:?}");
        }
    }

    #[test]
    fn small_norms_keep_first_four_bounds() {
        let mut rng = InstanceRng::new(9);
        let x = random_square_zero(4, 0.1, &mut rng).unwrap();
        let r = random_gaussian(4, &mut rng).scale_re(0.01);
        let s = sumof5(&n2c_witness(&x).unwrap(), &r).unwrap();
        let bound = x.op_norm() * r.op_norm() * (1.0 + 1e-8);
        assert!(s.norms()[..4].iter().all(|v| *v <= bound));
        assert!(s.norms()[4] <= 1.0 + 1e-12);
    }
}
