//! Dense complex matrices as a concrete C*-algebra.

mod logm;
mod random;
mod square_zero;
mod svd;
mod trotter;

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::free_algebra::Substitution;

pub use logm::mat_log;
pub use random::{random_contraction, random_gaussian, random_skew, random_square_zero, random_unitary, InstanceRng};
pub use square_zero::{square_zero_canonical, SquareZeroForm};
pub use svd::{singular_values, svd, Svd};
pub use trotter::{trotter_product, TrotterResult};

/// Dense `dim x dim` complex matrix.
#[derive(Clone, PartialEq)]
pub struct MatrixElt(DMatrix<Complex64>);

pub(crate) const C0: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const C1: Complex64 = Complex64::new(1.0, 0.0);

impl MatrixElt {
    pub fn zeros(dim: usize) -> MatrixElt {
        assert!(dim >= 1, "dimension must be positive");
        MatrixElt(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> MatrixElt {
        assert!(dim >= 1, "dimension must be positive");
        MatrixElt(DMatrix::identity(dim, dim))
    }

    /// Matrix unit `e_ij` with zero-based indices.
    pub fn unit(dim: usize, i: usize, j: usize) -> MatrixElt {
        let mut m = MatrixElt::zeros(dim);
        m.0[(i, j)] = C1;
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(dim: usize, f: F) -> MatrixElt {
        assert!(dim >= 1, "dimension must be positive");
        MatrixElt(DMatrix::from_fn(dim, dim, f))
    }

    pub fn diag(entries: &[Complex64]) -> MatrixElt {
        let n = entries.len();
        MatrixElt::from_fn(n, |i, j| if i == j { entries[i] } else { C0 })
    }

    /// Build from row-major real parts.
    pub fn from_real_rows(rows: &[&[f64]]) -> MatrixElt {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "rows must form a square");
        MatrixElt::from_fn(n, |i, j| Complex64::new(rows[i][j], 0.0))
    }

    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Result<MatrixElt> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(m.nrows(), m.ncols()));
        }
        if m.nrows() == 0 {
            return Err(Error::Precondition("empty matrix".into()));
        }
        Ok(MatrixElt(m))
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.0[(i, j)] = v;
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn check_same_dim(&self, other: &MatrixElt) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(())
    }

    pub fn adjoint(&self) -> MatrixElt {
        MatrixElt(self.0.adjoint())
    }

    pub fn scale(&self, c: Complex64) -> MatrixElt {
        MatrixElt(&self.0 * c)
    }

    pub fn scale_re(&self, c: f64) -> MatrixElt {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn det(&self) -> Complex64 {
        self.0.clone().determinant()
    }

    /// Singular values in descending order.
    pub fn singular_values(&self) -> Vec<f64> {
        singular_values(&self.0)
    }

    /// Operator norm (largest singular value).
    pub fn op_norm(&self) -> f64 {
        if self.0.iter().all(|z| *z == C0) {
            return 0.0;
        }
        singular_values(&self.0)[0]
    }

    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    /// Ratio of extreme singular values; infinite when singular.
    pub fn condition_number(&self) -> f64 {
        let s = self.singular_values();
        let lo = *s.last().unwrap_or(&0.0);
        if lo == 0.0 {
            f64::INFINITY
        } else {
            s[0] / lo
        }
    }

    pub fn inverse(&self) -> Result<MatrixElt> {
        if !self.is_finite() {
            return Err(Error::NonFinite);
        }
        if self.condition_number() > 1e14 {
            return Err(Error::Singular);
        }
        self.0.clone().try_inverse().map(MatrixElt).ok_or(Error::Singular)
    }

    /// Matrix exponential by Pade scaling and squaring.
    pub fn exp(&self) -> Result<MatrixElt> {
        if !self.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(MatrixElt(self.0.exp()))
    }

    pub fn log(&self) -> Result<MatrixElt> {
        mat_log(self)
    }

    /// `[a, b] = ab - ba`.
    pub fn commutator(&self, other: &MatrixElt) -> MatrixElt {
        MatrixElt(&self.0 * &other.0 - &other.0 * &self.0)
    }

    /// `(u, v) = u v u^{-1} v^{-1}`.
    pub fn group_commutator(&self, other: &MatrixElt) -> Result<MatrixElt> {
        Ok(MatrixElt(&self.0 * &other.0 * self.inverse()?.0 * other.inverse()?.0))
    }

    pub fn pow(&self, mut n: u64) -> MatrixElt {
        let mut base = self.clone();
        let mut acc = MatrixElt::identity(self.dim());
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// `||a - b||` in operator norm.
    pub fn dist(&self, other: &MatrixElt) -> f64 {
        (self - other).op_norm()
    }

    /// `||a + a^*||`.
    pub fn skew_defect(&self) -> f64 {
        (self + &self.adjoint()).op_norm()
    }

    /// `||a - a^*||`.
    pub fn hermitian_defect(&self) -> f64 {
        (self - &self.adjoint()).op_norm()
    }

    pub fn hermitian_part(&self) -> MatrixElt {
        (self + &self.adjoint()).scale_re(0.5)
    }

    pub fn skew_part(&self) -> MatrixElt {
        (self - &self.adjoint()).scale_re(0.5)
    }

    /// Direct sum placing `blocks` along the diagonal.
    pub fn block_diag(blocks: &[MatrixElt]) -> MatrixElt {
        let n: usize = blocks.iter().map(|b| b.dim()).sum();
        let mut out = MatrixElt::zeros(n.max(1));
        let mut off = 0;
        for b in blocks {
            let d = b.dim();
            out.0.view_mut((off, off), (d, d)).copy_from(&b.0);
            off += d;
        }
        out
    }
}

impl fmt::Debug for MatrixElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MatrixElt{}", self.0)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&MatrixElt> for &MatrixElt {
            type Output = MatrixElt;
            fn $method(self, rhs: &MatrixElt) -> MatrixElt {
                assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
                MatrixElt(&self.0 $op &rhs.0)
            }
        }
        impl $tr<MatrixElt> for MatrixElt {
            type Output = MatrixElt;
            fn $method(self, rhs: MatrixElt) -> MatrixElt {
                &self $op &rhs
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for &MatrixElt {
    type Output = MatrixElt;
    fn neg(self) -> MatrixElt {
        MatrixElt(-&self.0)
    }
}

impl AddAssign<&MatrixElt> for MatrixElt {
    fn add_assign(&mut self, rhs: &MatrixElt) {
        self.0 += &rhs.0;
    }
}

impl Substitution for MatrixElt {
    fn zero_like(&self) -> Self {
        MatrixElt::zeros(self.dim())
    }

    fn add_scaled_assign(&mut self, other: &Self, c: Complex64) {
        self.0 += &other.0 * c;
    }

    fn mul_within(&self, other: &Self, _budget: usize) -> Self {
        self * other
    }
}

/// Wire form `{"dim": n, "re": [[...]], "im": [[...]]}`.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for MatrixElt {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        MatrixJson {
            dim: n,
            re: (0..n).map(|i| (0..n).map(|j| self.0[(i, j)].re).collect()).collect(),
            im: (0..n).map(|i| (0..n).map(|j| self.0[(i, j)].im).collect()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatrixElt {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = MatrixJson::deserialize(d)?;
        let n = raw.dim;
        let square = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if n == 0 || !square(&raw.re) || !square(&raw.im) {
            return Err(D::Error::custom(format!("matrix rows do not match dim {n}")));
        }
        let m = MatrixElt::from_fn(n, |i, j| Complex64::new(raw.re[i][j], raw.im[i][j]));
        if !m.is_finite() {
            return Err(D::Error::custom("non-finite matrix entry"));
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exp_basics() {
        let z = MatrixElt::zeros(3).exp().unwrap();
        assert_eq!(z, MatrixElt::identity(3));
        let m = MatrixElt::diag(&[c(0.0, PI), c(0.0, -PI)]).exp().unwrap();
        assert!(m.dist(&MatrixElt::identity(2).scale_re(-1.0)) < 1e-13);
    }

    #[test]
    fn op_norm_of_diagonal() {
        let m = MatrixElt::diag(&[c(3.0, 0.0), c(0.0, -4.0)]);
        assert!((m.op_norm() - 4.0).abs() < 1e-14);
        assert!((m.adjoint().op_norm() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn group_commutator_of_commuting_pair_is_identity() {
        let a = MatrixElt::diag(&[c(2.0, 0.0), c(0.5, 1.0)]);
        let b = MatrixElt::diag(&[c(1.0, 1.0), c(3.0, 0.0)]);
        assert!(a.group_commutator(&b).unwrap().dist(&MatrixElt::identity(2)) < 1e-14);
    }

    #[test]
    fn singular_inverse_fails() {
        assert!(matches!(MatrixElt::unit(2, 0, 1).inverse(), Err(Error::Singular)));
    }

    #[test]
    fn json_round_trip() {
        let m = MatrixElt::from_fn(3, |i, j| c(i as f64 / 7.0, j as f64 * 0.1 - 1e-17));
        let text = serde_json::to_string(&m).unwrap();
        let back: MatrixElt = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<MatrixElt>(r#"{"dim":2,"re":[[1]],"im":[[0]]}"#).is_err());
    }

    #[test]
    fn pow_and_block_diag() {
        let m = MatrixElt::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert_eq!(m.pow(5), MatrixElt::from_real_rows(&[&[1.0, 5.0], &[0.0, 1.0]]));
        let b = MatrixElt::block_diag(&[m.clone(), MatrixElt::identity(1)]);
        assert_eq!(b.dim(), 3);
        assert_eq!(b.get(0, 1), C1);
        assert_eq!(b.get(2, 2), C1);
    }
}
