use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use super::certificate::{Atom, ClaimedIdentity, FactorCertificate};
use super::lie_rewrite::{form_i_terms, Term};
use crate::error::{Error, Result};
use crate::matrix::{svd, MatrixElt};

/// Residual bound advertised by [`selfcomm_to_projections`].
pub const COMM_P_TOL: f64 = 1e-9;

/// Off-diagonal pieces are split so that each has norm at most this.
const MAX_PIECE: f64 = 0.9;

#[derive(Clone, Debug, Serialize)]
pub struct CommP {
    pub certificate: FactorCertificate,
    /// Number of signed projections.
    pub k: usize,
}

fn hermitian_eigen(h: &MatrixElt) -> SymmetricEigen<Complex64, nalgebra::Dyn> {
    let m = h.hermitian_part();
    SymmetricEigen::new(m.into_dmatrix())
}

/// Square root of a positive semidefinite matrix; tiny negative eigenvalues are clamped.
/// Accurate only for eigenvalues well away from zero.
/// `sqrt(1 - x x^*)` and `sqrt(1 - x^* x)` from one singular value
/// decomposition, so that the intertwining `C x = x C'` and `C^2 = 1 - x x^*`
/// hold to rounding even when `||x|| = 1`.
fn defect_roots(x: &MatrixElt) -> Result<(MatrixElt, MatrixElt)> {
    let svd = svd(x.as_dmatrix())?;
    let (u, v) = (&svd.u, &svd.v);
    // written as 1 - U diag(1 - c) U^*: singular vectors of zero singular
    // values carry weight zero, so their accuracy does not matter
    let gaps = DVector::from_iterator(
        svd.singular_values.len(),
        svd.singular_values.iter().map(|&s| {
            let c = ((1.0 - s).max(0.0) * (1.0 + s)).sqrt();
            // 1 - c without cancellation
            Complex64::new(s * s / (1.0 + c), 0.0)
        }),
    );
    let d = DMatrix::from_diagonal(&gaps);
    let one = MatrixElt::identity(x.dim());
    let c = &one - &MatrixElt::from_dmatrix(u * &d * u.adjoint()).expect("finite square root");
    let c_adj = &one - &MatrixElt::from_dmatrix(v * &d * v.adjoint()).expect("finite square root");
    Ok((c, c_adj))
}

fn projection_defect(p: &MatrixElt) -> f64 {
    (p * p).dist(p).max(p.hermitian_defect())
}

/// Projection `q_P(x)` for `x` in `P A (1 - P)` with `||x|| <= 1`: in the
/// decomposition `1 = P + (1 - P)` its blocks are
/// `(1 + sqrt(1 - x x^*))/2`, `x/2`, `x^*/2`, `(1 - sqrt(1 - x^* x))/2`.
pub fn q_projection(p: &MatrixElt, x: &MatrixElt) -> Result<MatrixElt> {
    p.check_same_dim(x)?;
    let one = MatrixElt::identity(p.dim());
    let pc = &one - p;
    let off = (&(p * x) * &pc).dist(x);
    if off > 1e-12 * x.op_norm().max(1.0) {
        return Err(Error::Precondition(format!("x is not in P A (1 - P) (defect {off:e})")));
    }
    if x.op_norm() > 1.0 + 1e-12 {
        return Err(Error::Precondition(format!("||x|| = {} exceeds 1", x.op_norm())));
    }
    let xa = x.adjoint();
    let (c, c_adj) = defect_roots(x)?;
    // sqrt(1 - x x^*) is block diagonal with identity on range(1 - P)
    let top = p + &(&(p * &c) * p);
    let bottom = &pc - &(&(&pc * &c_adj) * &pc);
    Ok((&(&top + &bottom) + &(x + &xa)).scale_re(0.5))
}

/// `[P, r]` for skew-adjoint `r` as `sum (q_P(x_j) - q_P(-x_j))`, `x = P r (1 - P)`.
fn skew_bracket(p: &MatrixElt, r: &MatrixElt, sign: i8, out: &mut Vec<Atom>) -> Result<()> {
    let one = MatrixElt::identity(p.dim());
    let x = &(p * r) * &(&one - p);
    let m = (x.op_norm() / MAX_PIECE).ceil().max(1.0);
    let xm = x.scale_re(1.0 / m);
    let plus = q_projection(p, &xm)?;
    let minus = q_projection(p, &-&xm)?;
    for _ in 0..m as usize {
        out.push(Atom::SignedProjection { sign, p: plus.clone() });
        out.push(Atom::SignedProjection {
            sign: -sign,
            p: minus.clone(),
        });
    }
    Ok(())
}

/// `[[P, r], s]` for skew-adjoint `r`, `s`: `[P, r] = sum (Q+ - Q-)`, then each
/// `[Q, s]` is again a difference of projections.
fn skew_double_bracket(p: &MatrixElt, r: &MatrixElt, s: &MatrixElt, out: &mut Vec<Atom>) -> Result<()> {
    let mut inner = Vec::new();
    skew_bracket(p, r, 1, &mut inner)?;
    for a in inner {
        if let Atom::SignedProjection { sign, p: q } = a {
            skew_bracket(&q, s, sign, out)?;
        }
    }
    Ok(())
}

fn unit_vector(p: &MatrixElt, inside: bool) -> Option<DVector<Complex64>> {
    let eig = hermitian_eigen(p);
    (0..p.dim())
        .find(|&k| (eig.eigenvalues[k] > 0.5) == inside)
        .map(|k| eig.eigenvectors.column(k).into_owned())
}

/// `u`, `v`, `q` with `u` in `range P`, `v` in `range (1 - P)`,
/// `q = (u + v)(u + v)^*/2`, so that `1 = sum_k (2 e_k u^*) [P, q] (v e_k^*)`.
fn unit_representation(p: &MatrixElt) -> Result<(DVector<Complex64>, DVector<Complex64>, MatrixElt)> {
    let u = unit_vector(p, true).ok_or_else(|| Error::Precondition("projection is zero".into()))?;
    let v = unit_vector(p, false).ok_or_else(|| Error::Precondition("projection is the identity".into()))?;
    let w = &u + &v;
    let q = MatrixElt::from_dmatrix(&w * w.adjoint() * Complex64::new(0.5, 0.0))?;
    Ok((u, v, q))
}

/// Write `[c^*, c]` for a contraction `c` as a signed sum of projections.
pub fn selfcomm_to_projections(c: &MatrixElt, p: &MatrixElt) -> Result<CommP> {
    c.check_same_dim(p)?;
    let n = c.dim();
    if c.op_norm() > 1.0 + 1e-12 {
        return Err(Error::Precondition(format!("||c|| = {} exceeds 1", c.op_norm())));
    }
    let defect = projection_defect(p);
    if defect > 1e-10 {
        return Err(Error::Precondition(format!(
            "p is not a projection (defect {defect:e})"
        )));
    }
    let (u, v, q) = unit_representation(p)?;
    let ca = c.adjoint();
    let target = ca.commutator(c);
    let projections = [p.clone(), q];
    let mut atoms = Vec::new();
    for k in 0..n {
        let ek = DVector::<Complex64>::from_fn(n, |i, _| {
            if i == k {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let xk = MatrixElt::from_dmatrix(&ek * u.adjoint() * Complex64::new(2.0, 0.0))?;
        let yk = MatrixElt::from_dmatrix(&v * ek.adjoint())?;
        let a = &ca * &xk;
        for t in form_i_terms(&a, &yk, c, &projections[0], &projections[1]) {
            // the target is self-adjoint, so only self-adjoint parts are kept
            match t {
                Term::Bracket { sign, i, r } => {
                    skew_bracket(&projections[i], &r.scale_re(sign).skew_part(), 1, &mut atoms)?;
                }
                Term::DoubleBracket { sign, i, r, s } => {
                    let r = r.scale_re(sign);
                    let iu = Complex64::new(0.0, 1.0);
                    skew_double_bracket(&projections[i], &r.skew_part(), &s.skew_part(), &mut atoms)?;
                    skew_double_bracket(
                        &projections[i],
                        &r.hermitian_part().scale(iu),
                        &s.hermitian_part().scale(-iu),
                        &mut atoms,
                    )?;
                }
                _ => unreachable!("form (i) yields brackets and double brackets only"),
            }
        }
    }
    let k = atoms.len();
    let cert = FactorCertificate::seal("commP", target, atoms, ClaimedIdentity::SumEqualsTarget, COMM_P_TOL)?
        .with_meta(
            "unit_representation",
            "1 = sum_k (2 e_k u^*) [p, q] (v e_k^*), q = (u+v)(u+v)^*/2",
        )
        .with_meta("K", k);
    Ok(CommP { certificate: cert, k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::verifier::verify_certificate;
    use crate::matrix::{random_contraction, InstanceRng};

    #[test]
    fn two_by_two_q() {
        let p = MatrixElt::unit(2, 0, 0);
        let w = Complex64::new(0.3, -0.4);
        let r = MatrixElt::from_fn(2, |i, j| match (i, j) {
            (0, 1) => w,
            (1, 0) => -w.conj(),
            _ => Complex64::new(0.0, 0.0),
        });
        let x = &(&p * &r) * &(&MatrixElt::identity(2) - &p);
        let qp = q_projection(&p, &x).unwrap();
        let qm = q_projection(&p, &-&x).unwrap();
        assert!(projection_defect(&qp) < 1e-11);
        assert!(projection_defect(&qm) < 1e-11);
        assert!((&qp - &qm).dist(&p.commutator(&r)) < 1e-11);
    }

    #[test]
    fn q_is_projection_at_norm_one() {
        let p = MatrixElt::unit(3, 0, 0);
        let x = MatrixElt::unit(3, 0, 2);
        assert!(projection_defect(&q_projection(&p, &x).unwrap()) < 1e-11);
    }

    #[test]
    fn unit_representation_sums_to_one() {
        let p = &MatrixElt::unit(4, 0, 0) + &MatrixElt::unit(4, 1, 1);
        let (u, v, q) = unit_representation(&p).unwrap();
        let pq = p.commutator(&q);
        let mut sum = MatrixElt::zeros(4);
        for k in 0..4 {
            let ek = DVector::<Complex64>::from_fn(4, |i, _| Complex64::new(if i == k { 1.0 } else { 0.0 }, 0.0));
            let xk = MatrixElt::from_dmatrix(&ek * u.adjoint() * Complex64::new(2.0, 0.0)).unwrap();
            let yk = MatrixElt::from_dmatrix(&v * ek.adjoint()).unwrap();
            sum += &(&(&xk * &pq) * &yk);
        }
        assert!(sum.dist(&MatrixElt::identity(4)) < 1e-14);
    }

    #[test]
    fn normal_contraction() {
        let c = MatrixElt::diag(&[
            Complex64::new(0.5, 0.1),
            Complex64::new(-0.2, 0.0),
            Complex64::new(0.0, 0.9),
        ]);
        let p = MatrixElt::unit(3, 0, 0);
        let r = selfcomm_to_projections(&c, &p).unwrap();
        assert!(r.certificate.target.op_norm() < 1e-15);
        assert!(r.certificate.residual < 1e-9);
    }

    #[test]
    fn random_dim_four() {
        let mut rng = InstanceRng::new(6);
        let p = &MatrixElt::unit(4, 0, 0) + &MatrixElt::unit(4, 1, 1);
        for _ in 0..3 {
            let c = random_contraction(4, &mut rng);
            let r = selfcomm_to_projections(&c, &p).unwrap();
            let v = verify_certificate(&r.certificate);
            assert!(v.pass, "{:?}", v.failures);
            assert!(v.max_projection_defect <= 1e-10);
        }
    }

    #[test]
    fn preconditions() {
        let p = MatrixElt::unit(2, 0, 0);
        assert!(selfcomm_to_projections(&MatrixElt::identity(2).scale_re(2.0), &p).is_err());
        assert!(selfcomm_to_projections(&MatrixElt::zeros(2), &MatrixElt::identity(2)).is_err());
        assert!(selfcomm_to_projections(&MatrixElt::zeros(2), &MatrixElt::zeros(2)).is_err());
        assert!(selfcomm_to_projections(&MatrixElt::zeros(2), &MatrixElt::unit(2, 0, 1)).is_err());
    }
}
