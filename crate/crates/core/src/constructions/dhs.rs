use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::MatrixElt;

/// Tolerance on the distance of `sum tr(b_i)` from `2 pi i Z`.
pub const DHS_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct DhsReport {
    pub in_kernel: bool,
    pub trace_sum: Complex64,
    /// `det(e^{b_1} ... e^{b_k})` from the matrix product.
    pub det: Complex64,
    /// Distance of `trace_sum` from `2 pi i Z`.
    pub lattice_distance: f64,
    /// `|det - e^{trace_sum}|`.
    pub det_consistency: f64,
}

/// In `M_n` the kernel condition reads `sum tr(b_i) in 2 pi i Z`, since
/// commutators are exactly the trace-zero matrices.
pub fn dhs_kernel_check(bs: &[MatrixElt]) -> Result<DhsReport> {
    let first = bs.first().ok_or_else(|| Error::Precondition("empty list".into()))?;
    let n = first.dim();
    let mut trace_sum = Complex64::new(0.0, 0.0);
    let mut product = MatrixElt::identity(n);
    for b in bs {
        first.check_same_dim(b)?;
        trace_sum += b.trace();
        product = &product * &b.exp()?;
    }
    let turns = trace_sum.im / (2.0 * PI);
    let lattice_distance = Complex64::new(trace_sum.re, 2.0 * PI * (turns - turns.round())).norm();
    let det = product.det();
    Ok(DhsReport {
        in_kernel: lattice_distance <= DHS_TOL,
        trace_sum,
        det,
        lattice_distance,
        det_consistency: (det - trace_sum.exp()).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{random_gaussian, InstanceRng};

    #[test]
    fn opposite_pair() {
        let mut rng = InstanceRng::new(1);
        let b = random_gaussian(3, &mut rng);
        let r = dhs_kernel_check(&[b.clone(), -&b]).unwrap();
        assert!(r.in_kernel);
        assert!((r.det - 1.0).norm() < 1e-9);
    }

    #[test]
    fn full_turn() {
        let b = MatrixElt::diag(&[Complex64::new(0.0, 2.0 * PI), Complex64::new(0.0, 0.0)]);
        let r = dhs_kernel_check(&[b]).unwrap();
        assert!(r.in_kernel);
        assert!((r.det - 1.0).norm() < 1e-12);
    }

    #[test]
    fn half_turn() {
        let b = MatrixElt::diag(&[Complex64::new(0.0, PI), Complex64::new(0.0, 0.0)]);
        let r = dhs_kernel_check(&[b]).unwrap();
        assert!(!r.in_kernel);
        assert!((r.det + 1.0).norm() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(dhs_kernel_check(&[]).is_err());
        assert!(dhs_kernel_check(&[MatrixElt::zeros(2), MatrixElt::zeros(3)]).is_err());
    }
}
