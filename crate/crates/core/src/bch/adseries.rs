use num_complex::Complex64;
use serde::Serialize;

use crate::free_algebra::GradedSeries;

/// Univariate power series `c_0 + c_1 t + ... + c_N t^N`, applied to the
/// free algebra as `sum_k c_k ad_z^k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdOperatorSeries {
    pub coeffs: Vec<f64>,
}

impl AdOperatorSeries {
    pub fn new(coeffs: Vec<f64>) -> AdOperatorSeries {
        AdOperatorSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// `e^{s t}` up to `t^n`.
    pub fn exp(s: f64, n: usize) -> AdOperatorSeries {
        let mut c = Vec::with_capacity(n + 1);
        let mut term = 1.0;
        for k in 0..=n {
            if k > 0 {
                term *= s / k as f64;
            }
            c.push(term);
        }
        AdOperatorSeries::new(c)
    }

    /// `(e^{s t} - 1) / t` up to `t^n`.
    pub fn exp_minus_one_over_t(s: f64, n: usize) -> AdOperatorSeries {
        let e = AdOperatorSeries::exp(s, n + 1);
        AdOperatorSeries::new(e.coeffs[1..].to_vec())
    }

    /// `t / (e^{-t} - 1)`.
    pub fn phi(n: usize) -> AdOperatorSeries {
        let den = AdOperatorSeries::exp_minus_one_over_t(-1.0, n);
        AdOperatorSeries::one(n).divide(&den)
    }

    /// `t / (e^t - 1)`, the Bernoulli generating function.
    pub fn psi(n: usize) -> AdOperatorSeries {
        let den = AdOperatorSeries::exp_minus_one_over_t(1.0, n);
        AdOperatorSeries::one(n).divide(&den)
    }

    /// `t / (1 - e^{-t})`.
    pub fn psi_neg(n: usize) -> AdOperatorSeries {
        AdOperatorSeries::phi(n).scaled(-1.0)
    }

    pub fn one(n: usize) -> AdOperatorSeries {
        let mut c = vec![0.0; n + 1];
        c[0] = 1.0;
        AdOperatorSeries::new(c)
    }

    pub fn scaled(&self, s: f64) -> AdOperatorSeries {
        AdOperatorSeries::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Quotient `self / den` by long division; `den` needs nonzero constant
    /// term. The result has the order of `self`.
    pub fn divide(&self, den: &AdOperatorSeries) -> AdOperatorSeries {
        let d0 = den.coeffs[0];
        assert!(d0 != 0.0, "division by a series without constant term");
        let n = self.coeffs.len();
        let mut q = vec![0.0; n];
        for k in 0..n {
            let mut s = self.coeffs[k];
            for j in 1..=k.min(den.coeffs.len() - 1) {
                s -= den.coeffs[j] * q[k - j];
            }
            q[k] = s / d0;
        }
        AdOperatorSeries::new(q)
    }

    pub fn product(&self, other: &AdOperatorSeries) -> AdOperatorSeries {
        let n = self.coeffs.len().min(other.coeffs.len());
        let mut c = vec![0.0; n];
        for i in 0..n {
            for j in 0..n - i {
                c[i + j] += self.coeffs[i] * other.coeffs[j];
            }
        }
        AdOperatorSeries::new(c)
    }

    /// `sum_k c_k ad_z^k (w)`, truncated at the truncation of `w`.
    ///
    /// Stops early once the iterated bracket vanishes.
    pub fn apply(&self, z: &GradedSeries, w: &GradedSeries) -> GradedSeries {
        let mut out = w.scaled_re(self.coeffs[0]);
        let mut term = w.clone();
        for &c in &self.coeffs[1..] {
            term = z.bracket(&term);
            if term.is_zero() {
                break;
            }
            if c != 0.0 {
                out = out.add_scaled(&term, Complex64::new(c, 0.0));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_numbers() {
        // B_0..B_8 = 1, -1/2, 1/6, 0, -1/30, 0, 1/42, 0, -1/30
        let b = [
            1.0,
            -0.5,
            1.0 / 6.0,
            0.0,
            -1.0 / 30.0,
            0.0,
            1.0 / 42.0,
            0.0,
            -1.0 / 30.0,
        ];
        let psi = AdOperatorSeries::psi(8);
        let mut fact = 1.0;
        for (k, (c, bk)) in psi.coeffs.iter().zip(b).enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            assert!((c * fact - bk).abs() < 1e-13, "B_{k}");
        }
    }

    #[test]
    fn phi_leading_terms() {
        let phi = AdOperatorSeries::phi(4);
        let want = [-1.0, -0.5, -1.0 / 12.0, 0.0, 1.0 / 720.0];
        for (c, w) in phi.coeffs.iter().zip(want) {
            assert!((c - w).abs() < 1e-15);
        }
    }

    #[test]
    fn division_inverts_product() {
        let a = AdOperatorSeries::exp(0.3, 6);
        let b = AdOperatorSeries::exp_minus_one_over_t(-2.0, 6);
        let q = a.product(&b).divide(&b);
        for (x, y) in q.coeffs.iter().zip(&a.coeffs) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn exp_of_ad_is_conjugation() {
        let x = GradedSeries::x(5);
        let y = GradedSeries::y(5);
        let e = AdOperatorSeries::exp(1.0, 5).apply(&x, &y);
        let ex = crate::bch::formal_exp(&x);
        let emx = crate::bch::formal_exp(&x.neg());
        let ey = crate::bch::ExpElement {
            unit: Complex64::new(0.0, 0.0),
            body: y.clone(),
        };
        let conj = ex.mul(&ey).mul(&emx);
        assert!(conj.body.max_abs_diff(&e) < 1e-15);
    }
}
