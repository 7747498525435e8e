use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use super::{MatrixElt, C0};
use crate::error::{Error, Result};

/// Radius around the identity where the Mercator series is used directly.
const SERIES_RADIUS: f64 = 0.5;
/// Target radius for the inverse scaling phase.
const SQRT_TARGET: f64 = 0.25;

/// Principal matrix logarithm.
///
/// Near the identity this sums `log(1 + a)` directly. Otherwise it reduces
/// to Schur form, takes triangular square roots until the factor is close to
/// the identity, sums the series there and scales back.
pub fn mat_log(g: &MatrixElt) -> Result<MatrixElt> {
    if !g.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = g.dim();
    let scale = g.op_norm().max(f64::MIN_POSITIVE);
    let schur = Schur::try_new(g.as_dmatrix().clone(), f64::EPSILON, 0).ok_or(Error::Singular)?;
    let (q, t) = schur.unpack();
    for i in 0..n {
        let lambda = t[(i, i)];
        if lambda.norm() <= 1e-14 * scale {
            return Err(Error::Singular);
        }
        if lambda.re < 0.0 && lambda.im.abs() <= 1e-12 * lambda.norm() {
            return Err(Error::BranchCut(lambda));
        }
    }
    let id = DMatrix::<Complex64>::identity(n, n);
    if g.dist(&MatrixElt::identity(n)) <= SERIES_RADIUS {
        return Ok(MatrixElt(log_series(&(g.as_dmatrix() - &id))));
    }
    let mut t = t;
    let mut k = 0u32;
    while op_norm(&(&t - &id)) > SQRT_TARGET {
        if k > 64 {
            return Err(Error::Precondition("inverse scaling did not converge".into()));
        }
        t = upper_sqrt(&t);
        k += 1;
    }
    let l = log_series(&(&t - &id)) * Complex64::new(2f64.powi(k as i32), 0.0);
    Ok(MatrixElt(&q * l * q.adjoint()))
}

fn op_norm(m: &DMatrix<Complex64>) -> f64 {
    crate::matrix::singular_values(m)[0]
}

/// `log(1 + a)` for `||a|| <= 1/2`.
fn log_series(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows();
    let mut out = DMatrix::<Complex64>::zeros(n, n);
    let mut pow = a.clone();
    let bound = op_norm(a);
    let mut k = 1;
    loop {
        let c = if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
        out += &pow * Complex64::new(c, 0.0);
        if bound.powi(k + 1) / (k + 1) as f64 <= 1e-18 || k > 200 {
            break;
        }
        pow = &pow * a;
        k += 1;
    }
    out
}

/// Principal square root of an upper triangular matrix.
fn upper_sqrt(t: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = t.nrows();
    let mut r = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        r[(i, i)] = t[(i, i)].sqrt();
    }
    for d in 1..n {
        for i in 0..n - d {
            let j = i + d;
            let mut s = t[(i, j)];
            for k in i + 1..j {
                s -= r[(i, k)] * r[(k, j)];
            }
            let den = r[(i, i)] + r[(j, j)];
            r[(i, j)] = if den == C0 { C0 } else { s / den };
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::C1;
    use crate::matrix::{random_gaussian, InstanceRng};

    #[test]
    fn log_of_identity() {
        assert_eq!(mat_log(&MatrixElt::identity(3)).unwrap(), MatrixElt::zeros(3));
    }

    #[test]
    fn round_trip_small() {
        let mut rng = InstanceRng::new(11);
        for _ in 0..20 {
            let a = random_gaussian(4, &mut rng);
            let a = a.scale_re(0.5 / a.op_norm());
            let l = mat_log(&a.exp().unwrap()).unwrap();
            assert!(l.dist(&a) < 1e-11);
        }
    }

    #[test]
    fn round_trip_far_from_identity() {
        let mut rng = InstanceRng::new(12);
        for _ in 0..20 {
            let a = random_gaussian(5, &mut rng);
            let a = a.scale_re(2.5 / a.op_norm());
            let g = a.exp().unwrap();
            let l = mat_log(&g).unwrap();
            assert!(l.exp().unwrap().dist(&g) < 1e-11 * g.op_norm());
        }
    }

    #[test]
    fn branch_cut_and_singular() {
        let g = MatrixElt::diag(&[Complex64::new(-1.0, 0.0), C1]);
        assert!(matches!(mat_log(&g), Err(Error::BranchCut(_))));
        let s = MatrixElt::diag(&[C0, C1]);
        assert!(matches!(mat_log(&s), Err(Error::Singular)));
    }
}
