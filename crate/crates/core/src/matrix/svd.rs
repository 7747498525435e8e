//! Singular value decomposition through `faer`, whose complex SVD converges
//! reliably on rank-deficient inputs.

use faer::Mat;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// `m = U diag(s) V^*` with `s` nonincreasing.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DMatrix<Complex64>,
    pub singular_values: Vec<f64>,
    pub v: DMatrix<Complex64>,
}

fn to_faer(m: &DMatrix<Complex64>) -> Mat<Complex64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn svd(m: &DMatrix<Complex64>) -> Result<Svd> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let s = to_faer(m)
        .svd()
        .map_err(|e| Error::Precondition(format!("singular value decomposition failed: {e:?}")))?;
    let d = s.S().column_vector();
    Ok(Svd {
        u: from_faer(s.U()),
        singular_values: (0..d.nrows()).map(|k| d[k].re).collect(),
        v: from_faer(s.V()),
    })
}

/// Nonincreasing singular values; NaN when they cannot be computed.
pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    let n = m.nrows().min(m.ncols());
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return vec![f64::NAN; n];
    }
    to_faer(m).singular_values().unwrap_or_else(|_| vec![f64::NAN; n])
}
