//! The Kashiwara-Vergne flow `R_t`, `S_t` and its matrix certification.

mod ddseries;
mod decompose;
mod hiprec;
mod ode;
mod solve;
mod verify;

use serde::{Deserialize, Serialize};

use crate::bch::{bch_series, kv1_residual, FgSeries, Kv1Report, SplitMode, LIE_TOL};
use crate::error::{Error, Result};
use crate::free_algebra::{GradedSeries, LieSeries};

pub use ddseries::{dd_bch_series, solve_rs_dd, DdSeries, DdSolution};
pub use decompose::{rs_decompose, LinearCoeffs, RsDecomposition};
pub use hiprec::DdMatrix;
pub use ode::{ode_crosscheck, solve_rs_numeric, OdeReport};
pub use solve::{solve_rs, KvSolution, Solver};
pub use verify::{
    bch_residual, evaluate_rs, factorization_residual, kveasy_residual, loglog_slope, radius_sweep,
    verify_factorization, verify_factorization_dd, RsMatrices, SweepReport, DEFAULT_EVAL_RADIUS,
};

#[derive(Serialize, Deserialize)]
struct SolutionJson {
    degree: usize,
    split: SplitMode,
    solver: Solver,
    r: GradedSeries,
    s: GradedSeries,
    f: GradedSeries,
    g: GradedSeries,
    #[serde(default)]
    kv1_residuals: Vec<f64>,
}

impl KvSolution {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SolutionJson {
            degree: self.degree,
            split: self.split_mode,
            solver: self.solver,
            r: self.r.as_series().clone(),
            s: self.s.as_series().clone(),
            f: self.fg.f.as_series().clone(),
            g: self.fg.g.as_series().clone(),
            kv1_residuals: self.kv1.residuals.clone(),
        })
        .expect("solution serialization cannot fail")
    }

    /// Parse and re-check: the series must be Lie and `F`, `G` must satisfy
    /// the first Kashiwara-Vergne equation.
    pub fn from_json(text: &str) -> Result<KvSolution> {
        let raw: SolutionJson = serde_json::from_str(text)?;
        let n = raw.degree;
        if n < 2 || n != raw.r.truncation() || n != raw.s.truncation() {
            return Err(Error::Format(format!("inconsistent degree {n} in solution file")));
        }
        let v = bch_series(n);
        let residuals = kv1_residual(&v, &raw.f, &raw.g);
        let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
        if max_residual > 1e-9 {
            return Err(Error::Format(format!(
                "F, G violate the KV equation (residual {max_residual:e})"
            )));
        }
        Ok(KvSolution {
            degree: n,
            split_mode: raw.split,
            solver: raw.solver,
            r: LieSeries::new(raw.r, LIE_TOL)?,
            s: LieSeries::new(raw.s, LIE_TOL)?,
            fg: FgSeries {
                mode: raw.split,
                f: LieSeries::new(raw.f, LIE_TOL)?,
                g: LieSeries::new(raw.g, LIE_TOL)?,
            },
            kv1: Kv1Report {
                mode: raw.split,
                degree: n,
                residuals,
                max_residual,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let sol = solve_rs(4, SplitMode::Symmetric).unwrap();
        let back = KvSolution::from_json(&sol.to_json()).unwrap();
        assert_eq!(back.r, sol.r);
        assert_eq!(back.s, sol.s);
        assert_eq!(back.split_mode, SplitMode::Symmetric);
    }
}
