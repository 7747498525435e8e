use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::free_algebra::GradedSeries;

/// Element `unit * 1 + body` of the unitization of the truncated algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpElement {
    pub unit: Complex64,
    pub body: GradedSeries,
}

impl ExpElement {
    pub fn one(truncation: usize) -> ExpElement {
        ExpElement {
            unit: Complex64::new(1.0, 0.0),
            body: GradedSeries::zero(truncation),
        }
    }

    pub fn truncation(&self) -> usize {
        self.body.truncation()
    }

    pub fn mul(&self, other: &ExpElement) -> ExpElement {
        let body = self
            .body
            .mul(&other.body)
            .add(&other.body.scaled(self.unit))
            .add(&self.body.scaled(other.unit));
        ExpElement {
            unit: self.unit * other.unit,
            body,
        }
    }
}

/// `1 + sum_{k>=1} b^k / k!`, truncated.
pub fn formal_exp(b: &GradedSeries) -> ExpElement {
    let n = b.truncation();
    let mut out = ExpElement::one(n);
    let mut pow = b.clone();
    let mut fact = 1.0;
    for k in 1..=n {
        fact *= k as f64;
        if pow.is_zero() {
            break;
        }
        out.body = out.body.add(&pow.scaled_re(1.0 / fact));
        pow = pow.mul(b);
    }
    out
}

/// `sum_{k>=1} (-1)^{k+1} body^k / k`; needs unit coefficient exactly one.
pub fn formal_log(e: &ExpElement) -> Result<GradedSeries> {
    if (e.unit - Complex64::new(1.0, 0.0)).norm() > 1e-14 {
        return Err(Error::UnitCoefficient(e.unit));
    }
    let n = e.truncation();
    let mut out = GradedSeries::zero(n);
    let mut pow = e.body.clone();
    for k in 1..=n {
        if pow.is_zero() {
            break;
        }
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        out = out.add(&pow.scaled_re(sign / k as f64));
        pow = pow.mul(&e.body);
    }
    Ok(out)
}

/// `log(e^p e^q)` in the truncated algebra.
pub fn bch_of(p: &GradedSeries, q: &GradedSeries) -> GradedSeries {
    formal_log(&formal_exp(p).mul(&formal_exp(q))).expect("product of exponentials has unit one")
}
