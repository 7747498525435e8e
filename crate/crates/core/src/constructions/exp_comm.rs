use serde::Serialize;

use super::certificate::{Atom, ClaimedIdentity, Factor, FactorCertificate};
use crate::error::{Error, Result};
use crate::matrix::MatrixElt;

#[derive(Clone, Debug, Serialize)]
pub struct ExpComm {
    pub certificate: FactorCertificate,
    pub steps: usize,
    /// `||product - e^{[c, d]}||`.
    pub residual: f64,
    /// `det(product)`; products of commutators are unimodular.
    pub det_re: f64,
    pub det_im: f64,
}

/// Approximate `e^{[c, d]}` by `(h, e^{a/n})^n` with `h = c + (1 + ||c||)`,
/// `a = d h`, so that `h a h^{-1} - a = [c, d]`.
///
/// The advertised tolerance is the first-order splitting bound
/// `||[A, B]|| e^{||A|| + ||B||} / (2n)` for `A = h a h^{-1}`, `B = -a`.
pub fn exp_commutator_factor(c: &MatrixElt, d: &MatrixElt, n: usize) -> Result<ExpComm> {
    c.check_same_dim(d)?;
    if n == 0 {
        return Err(Error::Precondition("need at least one step".into()));
    }
    let dim = c.dim();
    let cd = c.commutator(d);
    let target = cd.exp()?;
    let seal = |atoms: Vec<Atom>, tol: f64| -> Result<ExpComm> {
        let cert = FactorCertificate::seal(
            "exp-comm",
            target.clone(),
            atoms,
            ClaimedIdentity::ProductEqualsTarget,
            tol,
        )?
        .with_meta("steps", n);
        let product = super::certificate::combine(&cert.atoms, cert.claimed_identity, dim)?;
        let det = product.det();
        Ok(ExpComm {
            steps: n,
            residual: cert.residual,
            det_re: det.re,
            det_im: det.im,
            certificate: cert,
        })
    };
    if cd.op_norm() <= f64::EPSILON * c.op_norm() * d.op_norm() {
        return seal(Vec::new(), 1e-12);
    }
    let h = c + &MatrixElt::identity(dim).scale_re(1.0 + c.op_norm());
    let a = d * &h;
    let an = a.scale_re(1.0 / n as f64);
    let conj = &(&h * &a) * &h.inverse()?;
    let bound = conj.commutator(&a).op_norm() * (conj.op_norm() + a.op_norm()).exp() / (2.0 * n as f64);
    let atoms = (0..n)
        .map(|_| Atom::Commutator {
            u: Factor::matrix(h.clone()),
            v: Factor::exp(an.clone()),
        })
        .collect();
    seal(atoms, bound + 1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::verifier::verify_certificate;

    #[test]
    fn commuting_pair_is_empty() {
        let c = MatrixElt::identity(2);
        let r = exp_commutator_factor(&c, &MatrixElt::unit(2, 0, 1), 10).unwrap();
        assert!(r.certificate.is_empty());
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn rate_on_elementary_pair() {
        let c = MatrixElt::unit(2, 0, 1);
        let d = MatrixElt::unit(2, 1, 0);
        let r400 = exp_commutator_factor(&c, &d, 400).unwrap();
        let r800 = exp_commutator_factor(&c, &d, 800).unwrap();
        let r1600 = exp_commutator_factor(&c, &d, 1600).unwrap();
        assert!(r400.residual <= 2e-2, "{}", r400.residual);
        assert!(r1600.residual <= 5e-3, "{}", r1600.residual);
        let ratio = r1600.residual / r800.residual;
        assert!((0.4..=0.65).contains(&ratio), "{ratio}");
        for r in [&r400, &r1600] {
            assert!((r.det_re - 1.0).abs() < 1e-10 && r.det_im.abs() < 1e-10);
        }
        let v = verify_certificate(&r400.certificate);
        assert!(v.pass, "{:?}", v.failures);
    }
}
