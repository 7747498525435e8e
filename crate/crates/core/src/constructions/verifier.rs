//! Re-evaluation of certificates from their atoms alone.
//!
//! Nothing here calls back into the generators or into `Atom::value`;
//! inverses come from an LU solve rather than `MatrixElt::inverse`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::certificate::{Atom, ClaimedIdentity, Factor, FactorCertificate};

/// Tolerance on `z^2 = 0` and `p^2 = p = p^*`.
pub const ATOM_TOL: f64 = 1e-10;

/// Condition number above which a factor is not accepted as invertible.
pub const MAX_CONDITION: f64 = 1e12;

type M = DMatrix<Complex64>;

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub construction: String,
    pub claimed_identity: ClaimedIdentity,
    pub atoms: usize,
    /// Residual recomputed from the atoms.
    pub residual: f64,
    pub claimed_residual: f64,
    pub tolerance: f64,
    pub max_square_zero_defect: f64,
    pub max_projection_defect: f64,
    pub max_condition_number: f64,
    pub failures: Vec<String>,
    pub pass: bool,
}

#[derive(Default)]
struct Tally {
    sq: f64,
    proj: f64,
    cond: f64,
    failures: Vec<String>,
}

impl Tally {
    fn fail(&mut self, at: usize, msg: String) {
        self.failures.push(format!("atom {at}: {msg}"));
    }
}

fn op_norm(m: &M) -> f64 {
    crate::matrix::singular_values(m)[0]
}

fn invert(m: &M, at: usize, t: &mut Tally) -> Option<M> {
    let sv = crate::matrix::singular_values(m);
    let cond = sv[0] / sv[sv.len() - 1];
    t.cond = t.cond.max(cond);
    if !cond.is_finite() || cond > MAX_CONDITION {
        t.fail(at, format!("factor has condition number {cond:e}"));
        return None;
    }
    let n = m.nrows();
    m.clone().lu().solve(&M::identity(n, n))
}

fn exp(b: &M) -> M {
    b.clone().exp()
}

fn factor(f: &Factor, at: usize, t: &mut Tally) -> Option<M> {
    let m = match f {
        Factor::Matrix { m } => m.as_dmatrix().clone(),
        Factor::Exp { b } => exp(b.as_dmatrix()),
        Factor::Commutator { u, v } => {
            let u = factor(u, at, t)?;
            let v = factor(v, at, t)?;
            let ui = invert(&u, at, t)?;
            let vi = invert(&v, at, t)?;
            &u * &v * ui * vi
        }
    };
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        t.fail(at, "non-finite factor".into());
        return None;
    }
    Some(m)
}

fn square_zero(z: &M, at: usize, t: &mut Tally) {
    let n = op_norm(z);
    let d = op_norm(&(z * z)) / n.powi(2).max(1.0);
    t.sq = t.sq.max(d);
    if !(d <= ATOM_TOL) {
        t.fail(at, format!("square-zero defect {d:e}"));
    }
}

fn atom(a: &Atom, at: usize, t: &mut Tally) -> Option<M> {
    match a {
        Atom::Commutator { u, v } => factor(&Factor::commutator(u.clone(), v.clone()), at, t),
        Atom::Conjugate { g, inner } => {
            let g = g.as_dmatrix();
            let gi = invert(g, at, t)?;
            let a = atom(inner, at, t)?;
            Some(g * a * gi)
        }
        Atom::Exp { b } => Some(exp(b.as_dmatrix())),
        Atom::Unipotent { z } => {
            let z = z.as_dmatrix();
            square_zero(z, at, t);
            Some(M::identity(z.nrows(), z.nrows()) + z)
        }
        Atom::SquareZero { z } => {
            let z = z.as_dmatrix();
            square_zero(z, at, t);
            Some(z.clone())
        }
        Atom::SignedProjection { sign, p } => {
            let p = p.as_dmatrix();
            if *sign != 1 && *sign != -1 {
                t.fail(at, format!("sign {sign} is not +-1"));
            }
            let d = op_norm(&(p * p - p)).max(op_norm(&(p - p.adjoint())));
            t.proj = t.proj.max(d);
            if !(d <= ATOM_TOL) {
                t.fail(at, format!("projection defect {d:e}"));
            }
            Some(p * Complex64::new(f64::from(*sign), 0.0))
        }
    }
}

/// Recompute a certificate from its atoms and check every atom invariant.
pub fn verify_certificate(cert: &FactorCertificate) -> VerifyReport {
    let n = cert.target.dim();
    let mut t = Tally::default();
    let mut acc = match cert.claimed_identity {
        ClaimedIdentity::ProductEqualsTarget => M::identity(n, n),
        ClaimedIdentity::SumEqualsTarget => M::zeros(n, n),
    };
    let mut complete = true;
    for (i, a) in cert.atoms.iter().enumerate() {
        if a.dim() != n {
            t.fail(i, format!("dimension {} differs from target dimension {n}", a.dim()));
            complete = false;
            continue;
        }
        match atom(a, i, &mut t) {
            Some(v) => match cert.claimed_identity {
                ClaimedIdentity::ProductEqualsTarget => acc = &acc * v,
                ClaimedIdentity::SumEqualsTarget => acc += v,
            },
            None => complete = false,
        }
    }
    let residual = if complete {
        op_norm(&(acc - cert.target.as_dmatrix()))
    } else {
        f64::INFINITY
    };
    if !(residual <= cert.tolerance) {
        t.failures
            .push(format!("residual {residual:e} exceeds tolerance {:e}", cert.tolerance));
    }
    VerifyReport {
        construction: cert.construction.clone(),
        claimed_identity: cert.claimed_identity,
        atoms: cert.atoms.len(),
        residual,
        claimed_residual: cert.residual,
        tolerance: cert.tolerance,
        max_square_zero_defect: t.sq,
        max_projection_defect: t.proj,
        max_condition_number: t.cond,
        pass: t.failures.is_empty(),
        failures: t.failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::MatrixElt;

    fn cert(atoms: Vec<Atom>, target: MatrixElt, id: ClaimedIdentity) -> FactorCertificate {
        FactorCertificate {
            construction: "test".into(),
            target,
            atoms,
            claimed_identity: id,
            residual: 0.0,
            tolerance: 1e-12,
            metadata: Default::default(),
        }
    }

    #[test]
    fn detects_forged_residual() {
        let c = cert(
            vec![Atom::SquareZero {
                z: MatrixElt::unit(2, 0, 1),
            }],
            MatrixElt::unit(2, 1, 0),
            ClaimedIdentity::SumEqualsTarget,
        );
        let r = verify_certificate(&c);
        assert!(!r.pass);
        assert!((r.residual - 1.0).abs() < 1e-14);
    }

    #[test]
    fn detects_bad_atoms() {
        let c = cert(
            vec![Atom::SquareZero {
                z: MatrixElt::identity(2),
            }],
            MatrixElt::identity(2),
            ClaimedIdentity::SumEqualsTarget,
        );
        let r = verify_certificate(&c);
        assert!(!r.pass);
        assert!(r.max_square_zero_defect > 0.5);

        let c = cert(
            vec![Atom::SignedProjection {
                sign: 1,
                p: MatrixElt::unit(2, 0, 1),
            }],
            MatrixElt::unit(2, 0, 1),
            ClaimedIdentity::SumEqualsTarget,
        );
        assert!(!verify_certificate(&c).pass);

        let c = cert(
            vec![Atom::Commutator {
                u: Factor::matrix(MatrixElt::unit(2, 0, 0)),
                v: Factor::matrix(MatrixElt::identity(2)),
            }],
            MatrixElt::identity(2),
            ClaimedIdentity::ProductEqualsTarget,
        );
        let r = verify_certificate(&c);
        assert!(!r.pass);
        assert!(r.residual.is_infinite());
    }

    #[test]
    fn accepts_group_commutator() {
        let u = MatrixElt::from_real_rows(&[&[2.0, 1.0], &[0.0, 0.5]]);
        let v = MatrixElt::from_real_rows(&[&[1.0, 0.0], &[3.0, 1.0]]);
        let target = u.group_commutator(&v).unwrap();
        let c = cert(
            vec![Atom::Commutator {
                u: Factor::matrix(u),
                v: Factor::matrix(v),
            }],
            target,
            ClaimedIdentity::ProductEqualsTarget,
        );
        let r = verify_certificate(&c);
        assert!(r.pass, "{r:?}");
        assert!(r.residual < 1e-13);
    }
}
