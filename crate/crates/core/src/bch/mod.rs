//! Formal exponentials, the Campbell-Baker-Hausdorff series and the series
//! entering the first Kashiwara-Vergne equation.

mod adseries;
mod engine;
mod formal;

pub use adseries::AdOperatorSeries;
pub use engine::{
    bch_series, fg_series, halfhalf_decompose, kv1_check, kv1_residual, kveasy_ab, FgSeries, HalfHalf, Kv1Report,
    KvEasy, SplitMode, LIE_TOL,
};
pub use formal::{bch_of, formal_exp, formal_log, ExpElement};
