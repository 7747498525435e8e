use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bch::{kv1_check, AdOperatorSeries, FgSeries, Kv1Report, SplitMode, LIE_TOL};
use crate::error::{Error, Result};
use crate::free_algebra::{is_lie, GradedSeries, Horner, LieSeries, WordPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    GradeRecursion,
    NumericOde,
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Solver::GradeRecursion => "grade-recursion",
            Solver::NumericOde => "numeric-ode",
        })
    }
}

/// Time-one values `R = R_1`, `S = S_1` of the flow, with `R_t = sum t^n rho_n`.
#[derive(Clone, Debug)]
pub struct KvSolution {
    pub degree: usize,
    pub split_mode: SplitMode,
    pub solver: Solver,
    pub r: LieSeries,
    pub s: LieSeries,
    pub fg: FgSeries,
    pub kv1: Kv1Report,
}

impl KvSolution {
    /// Homogeneous component `rho_n`.
    pub fn rho(&self, n: usize) -> WordPoly {
        self.r.grade(n)
    }

    /// Homogeneous component `sigma_n`.
    pub fn sigma(&self, n: usize) -> WordPoly {
        self.s.grade(n)
    }

    /// `R_t = sum t^n rho_n`.
    pub fn r_at(&self, t: f64) -> GradedSeries {
        self.r.as_series().scale_re(t)
    }

    pub fn s_at(&self, t: f64) -> GradedSeries {
        self.s.as_series().scale_re(t)
    }
}

/// Right-hand side of the flow in the form
/// `dR = beta(ad R) F_t(e^{ad R} X, e^{ad S} Y)`, `beta(u) = u/(e^u - 1)`,
/// evaluated at `t = 1`, where `F_t = sum t^{n-1} F_n`.
pub(crate) fn recursion_rhs(
    r: &GradedSeries,
    s: &GradedSeries,
    f: &Horner,
    g: &Horner,
    n: usize,
) -> (GradedSeries, GradedSeries) {
    let x = GradedSeries::x(n);
    let y = GradedSeries::y(n);
    let exp = AdOperatorSeries::exp(1.0, n);
    let beta = AdOperatorSeries::psi(n);
    let xr = exp.apply(r, &x);
    let ys = exp.apply(s, &y);
    let fr = f.eval(&xr, &ys);
    let gs = g.eval(&xr, &ys);
    (beta.apply(r, &fr), beta.apply(s, &gs))
}

/// Solve for `R`, `S` degree by degree.
///
/// Homogeneity `R_t = sum t^n rho_n` turns the flow into
/// `n rho_n = (degree-n part of the right side built from rho_{<n}, sigma_{<n})`.
pub fn solve_rs(n: usize, mode: SplitMode) -> Result<KvSolution> {
    if n < 2 {
        return Err(Error::Precondition(format!("degree {n} must be at least 2")));
    }
    let (_, fg, kv1) = kv1_check(n, mode)?;
    let mut r = GradedSeries::zero(n);
    let mut s = GradedSeries::zero(n);
    for d in 1..=n {
        let f = Horner::new(&fg.f.truncate(d));
        let g = Horner::new(&fg.g.truncate(d));
        let (dr, ds) = recursion_rhs(&r.truncate(d), &s.truncate(d), &f, &g, d);
        let inv = num_complex::Complex64::new(1.0 / d as f64, 0.0);
        let rho = dr.grade(d).scaled(inv);
        let sigma = ds.grade(d).scaled(inv);
        for (name, p) in [("rho", &rho), ("sigma", &sigma)] {
            let dev = is_lie(&GradedSeries::homogeneous(p.clone(), n), LIE_TOL);
            if !dev.is_lie {
                return Err(Error::Recursion {
                    grade: d,
                    detail: format!("{name} is not a Lie element (deviation {:e})", dev.max_deviation()),
                });
            }
            if p.terms().any(|(_, c)| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::Recursion {
                    grade: d,
                    detail: format!("{name} has non-finite coefficients"),
                });
            }
        }
        r.set_grade(rho);
        s.set_grade(sigma);
    }
    Ok(KvSolution {
        degree: n,
        split_mode: mode,
        solver: Solver::GradeRecursion,
        r: LieSeries::new(r, LIE_TOL)?,
        s: LieSeries::new(s, LIE_TOL)?,
        fg,
        kv1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_terms() {
        for mode in SplitMode::ALL {
            let sol = solve_rs(4, mode).unwrap();
            let r1 = GradedSeries::homogeneous(sol.rho(1), 4);
            let s1 = GradedSeries::homogeneous(sol.sigma(1), 4);
            assert!(r1.max_abs_diff(&GradedSeries::parse(4, "0.25Y").unwrap()) < 1e-15);
            assert!(s1.max_abs_diff(&GradedSeries::parse(4, "-0.25X").unwrap()) < 1e-15);
        }
    }

    #[test]
    fn scaling_to_zero_gives_zero() {
        let sol = solve_rs(3, SplitMode::FirstLetter).unwrap();
        assert!(sol.r_at(0.0).is_zero());
        assert!(sol.s_at(0.0).is_zero());
    }

    #[test]
    fn rejects_degree_one() {
        assert!(solve_rs(1, SplitMode::Symmetric).is_err());
    }
}
