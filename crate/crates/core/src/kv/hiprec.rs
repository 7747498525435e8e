//! Double-double complex matrices, used where residuals fall below the
//! resolution of `f64`.

use num_complex::{Complex, Complex64};
use twofloat::TwoFloat;

use crate::free_algebra::Substitution;
use crate::matrix::MatrixElt;

type Dd = Complex<TwoFloat>;

fn dd(z: Complex64) -> Dd {
    Complex::new(TwoFloat::from(z.re), TwoFloat::from(z.im))
}

fn dd_zero() -> Dd {
    dd(Complex64::new(0.0, 0.0))
}

/// Dense row-major matrix over double-double complex numbers.
#[derive(Clone, Debug)]
pub struct DdMatrix {
    n: usize,
    data: Vec<Dd>,
}

impl DdMatrix {
    pub fn zeros(n: usize) -> DdMatrix {
        DdMatrix {
            n,
            data: vec![dd_zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> DdMatrix {
        let mut m = DdMatrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = dd(Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_matrix(a: &MatrixElt) -> DdMatrix {
        let n = a.dim();
        DdMatrix {
            n,
            data: (0..n * n).map(|k| dd(a.get(k / n, k % n))).collect(),
        }
    }

    /// Round to the nearest `f64` matrix.
    pub fn to_matrix(&self) -> MatrixElt {
        let n = self.n;
        MatrixElt::from_fn(n, |i, j| {
            let z = self.data[i * n + j];
            Complex64::new(f64::from(z.re), f64::from(z.im))
        })
    }

    pub fn add(&self, other: &DdMatrix) -> DdMatrix {
        DdMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &DdMatrix) -> DdMatrix {
        DdMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> DdMatrix {
        DdMatrix {
            n: self.n,
            data: self.data.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, c: Dd) -> DdMatrix {
        DdMatrix {
            n: self.n,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    /// Divide by a real scalar. `TwoFloat / f64` keeps the full low word,
    /// unlike `TwoFloat / TwoFloat`.
    fn div_real(&self, d: f64) -> DdMatrix {
        DdMatrix {
            n: self.n,
            data: self.data.iter().map(|a| Complex::new(a.re / d, a.im / d)).collect(),
        }
    }

    /// `self += c * other` for a real double-double `c`.
    pub(crate) fn axpy_real(&mut self, c: TwoFloat, other: &DdMatrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a = Complex::new(a.re + c * b.re, a.im + c * b.im);
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mul(&self, other: &DdMatrix) -> DdMatrix {
        let n = self.n;
        let mut out = DdMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == dd_zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// Maximum absolute row sum, in `f64`.
    fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| {
                        let z = self.data[i * self.n + j];
                        f64::from(z.re).hypot(f64::from(z.im))
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Taylor series with scaling and squaring.
    pub fn exp(&self) -> DdMatrix {
        let norm = self.norm_inf();
        let squarings = if norm > 0.25 {
            (norm / 0.25).log2().ceil() as i32
        } else {
            0
        };
        let b = self.scale(dd(Complex64::new(2f64.powi(-squarings), 0.0)));
        let bnorm = norm * 2f64.powi(-squarings);
        let mut sum = DdMatrix::identity(self.n);
        let mut term = DdMatrix::identity(self.n);
        let mut bound = 1.0;
        for k in 1..60 {
            term = term.mul(&b).div_real(k as f64);
            sum = sum.add(&term);
            bound *= bnorm / k as f64;
            if bound < 1e-36 {
                break;
            }
        }
        for _ in 0..squarings {
            sum = sum.mul(&sum);
        }
        sum
    }
}

impl Substitution for DdMatrix {
    fn zero_like(&self) -> Self {
        DdMatrix::zeros(self.n)
    }

    fn add_scaled_assign(&mut self, other: &Self, c: Complex64) {
        let c = dd(c);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * c;
        }
    }

    fn mul_within(&self, other: &Self, _budget: usize) -> Self {
        self.mul(other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{random_skew, InstanceRng};

    #[test]
    fn exp_matches_f64() {
        let mut rng = InstanceRng::new(3);
        let a = random_skew(4, 1.5, &mut rng);
        let e = DdMatrix::from_matrix(&a).exp().to_matrix();
        assert!(e.dist(&a.exp().unwrap()) < 1e-14);
    }

    #[test]
    fn resolves_below_f64() {
        // e^{a} e^{-a} = 1 to far beyond double precision
        let mut rng = InstanceRng::new(4);
        let a = DdMatrix::from_matrix(&random_skew(3, 0.7, &mut rng));
        let p = a.exp().mul(&a.neg().exp()).sub(&DdMatrix::identity(3));
        assert!(p.norm_inf() < 1e-28, "{}", p.norm_inf());
    }
}
