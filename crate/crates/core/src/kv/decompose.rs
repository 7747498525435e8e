use num_complex::Complex64;
use serde::Serialize;

use super::solve::KvSolution;
use crate::bch::halfhalf_decompose;
use crate::error::Result;
use crate::free_algebra::{GradedSeries, LieSeries, Word};

/// Coefficients of `X` and `Y` in a linear term.
#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct LinearCoeffs {
    pub x: f64,
    pub y: f64,
}

impl LinearCoeffs {
    fn of(p: &GradedSeries) -> LinearCoeffs {
        let c = |w: &str| -> Complex64 { p.coeff(&w.parse::<Word>().expect("letter")) };
        LinearCoeffs {
            x: c("X").re,
            y: c("Y").re,
        }
    }
}

/// `R = R_1 + [X, R'] + [Y, R'']` and likewise for `S`.
#[derive(Clone, Debug)]
pub struct RsDecomposition {
    pub lead_r: GradedSeries,
    pub r_prime: LieSeries,
    pub r_second: LieSeries,
    pub lead_s: GradedSeries,
    pub s_prime: LieSeries,
    pub s_second: LieSeries,
    pub r_residuals: Vec<f64>,
    pub s_residuals: Vec<f64>,
    pub lead_r_coeffs: LinearCoeffs,
    pub lead_s_coeffs: LinearCoeffs,
}

impl RsDecomposition {
    pub fn max_residual(&self) -> f64 {
        self.r_residuals
            .iter()
            .chain(&self.s_residuals)
            .cloned()
            .fold(0.0, f64::max)
    }
}

pub fn rs_decompose(sol: &KvSolution) -> Result<RsDecomposition> {
    let hr = halfhalf_decompose(&sol.r, sol.split_mode)?;
    let hs = halfhalf_decompose(&sol.s, sol.split_mode)?;
    Ok(RsDecomposition {
        lead_r_coeffs: LinearCoeffs::of(&hr.z1),
        lead_s_coeffs: LinearCoeffs::of(&hs.z1),
        lead_r: hr.z1,
        r_prime: hr.p,
        r_second: hr.q,
        lead_s: hs.z1,
        s_prime: hs.p,
        s_second: hs.q,
        r_residuals: hr.residuals,
        s_residuals: hs.residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bch::SplitMode;
    use crate::kv::solve_rs;

    #[test]
    fn lead_terms_and_antisymmetry() {
        for mode in SplitMode::ALL {
            let sol = solve_rs(5, mode).unwrap();
            let d = rs_decompose(&sol).unwrap();
            assert!(d.max_residual() < 1e-12);
            assert_eq!(d.lead_r_coeffs, LinearCoeffs { x: 0.0, y: 0.25 });
            assert_eq!(d.lead_s_coeffs, LinearCoeffs { x: -0.25, y: 0.0 });
            let mirrored = d.lead_r.swap_letters().neg();
            assert!(mirrored.max_abs_diff(&d.lead_s) < 1e-15);
        }
    }
}
