//! Truncated free algebra on two generators.

mod eval;
mod json;
mod lie;
mod poly;
mod series;
mod word;

pub use eval::{evaluate, substitute, Horner, Substitution};
pub use json::SeriesJson;
pub use lie::{dsw_project, dsw_project_poly, is_lie, left_nested, right_nested, LieReport, LieSeries};
pub use poly::{WordPoly, DROP_TOL};
pub use series::GradedSeries;
pub use word::{Letter, Word, MAX_DEGREE};
