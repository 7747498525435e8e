use serde::Serialize;

use super::solve::{KvSolution, Solver};
use crate::bch::{kv1_check, AdOperatorSeries, FgSeries, SplitMode, LIE_TOL};
use crate::error::{Error, Result};
use crate::free_algebra::{GradedSeries, Horner, LieSeries};

/// `F_t = sum t^{n-1} F_n`.
fn at_time(p: &GradedSeries, t: f64) -> GradedSeries {
    let mut out = GradedSeries::zero(p.truncation());
    let mut pow = 1.0;
    for g in p.grades() {
        out.set_grade(g.scaled(num_complex::Complex64::new(pow, 0.0)));
        pow *= t;
    }
    out
}

struct Flow<'a> {
    fg: &'a FgSeries,
    n: usize,
    exp_pos: AdOperatorSeries,
    exp_neg: AdOperatorSeries,
    gain: AdOperatorSeries,
}

impl Flow<'_> {
    /// `dR = r/(1-e^{-r}) F_t(X, e^{-r} e^{s} Y)` and
    /// `dS = s/(1-e^{-s}) G_t(e^{-s} e^{r} X, Y)`.
    fn rhs(&self, t: f64, r: &GradedSeries, s: &GradedSeries) -> (GradedSeries, GradedSeries) {
        let x = GradedSeries::x(self.n);
        let y = GradedSeries::y(self.n);
        let y_arg = self.exp_neg.apply(r, &self.exp_pos.apply(s, &y));
        let x_arg = self.exp_neg.apply(s, &self.exp_pos.apply(r, &x));
        let f = Horner::new(&at_time(&self.fg.f, t)).eval(&x, &y_arg);
        let g = Horner::new(&at_time(&self.fg.g, t)).eval(&x_arg, &y);
        (self.gain.apply(r, &f), self.gain.apply(s, &g))
    }
}

type State = (GradedSeries, GradedSeries);

fn axpy(a: &State, h: f64, k: &State) -> State {
    (a.0.add(&k.0.scaled_re(h)), a.1.add(&k.1.scaled_re(h)))
}

/// Classical fourth-order Runge-Kutta over `[0, t_end]` in `steps` steps.
fn integrate(fg: &FgSeries, t_end: f64, steps: usize) -> State {
    let n = fg.f.truncation();
    let flow = Flow {
        fg,
        n,
        exp_pos: AdOperatorSeries::exp(1.0, n),
        exp_neg: AdOperatorSeries::exp(-1.0, n),
        gain: AdOperatorSeries::psi_neg(n),
    };
    let h = t_end / steps as f64;
    let mut state: State = (GradedSeries::zero(n), GradedSeries::zero(n));
    for k in 0..steps {
        let t = k as f64 * h;
        let k1 = flow.rhs(t, &state.0, &state.1);
        let s2 = axpy(&state, h / 2.0, &k1);
        let k2 = flow.rhs(t + h / 2.0, &s2.0, &s2.1);
        let s3 = axpy(&state, h / 2.0, &k2);
        let k3 = flow.rhs(t + h / 2.0, &s3.0, &s3.1);
        let s4 = axpy(&state, h, &k3);
        let k4 = flow.rhs(t + h, &s4.0, &s4.1);
        let w = h / 6.0;
        state = (
            state
                .0
                .add(&k1.0.scaled_re(w))
                .add(&k2.0.scaled_re(2.0 * w))
                .add(&k3.0.scaled_re(2.0 * w))
                .add(&k4.0.scaled_re(w)),
            state
                .1
                .add(&k1.1.scaled_re(w))
                .add(&k2.1.scaled_re(2.0 * w))
                .add(&k3.1.scaled_re(2.0 * w))
                .add(&k4.1.scaled_re(w)),
        );
    }
    state
}

/// Integrate the flow numerically up to `t = 1`.
pub fn solve_rs_numeric(n: usize, mode: SplitMode, steps: usize) -> Result<KvSolution> {
    if steps < 10 {
        return Err(Error::Precondition(format!(
            "{steps} steps is too few (need at least 10)"
        )));
    }
    if n < 2 {
        return Err(Error::Precondition(format!("degree {n} must be at least 2")));
    }
    let (_, fg, kv1) = kv1_check(n, mode)?;
    let (r, s) = integrate(&fg, 1.0, steps);
    Ok(KvSolution {
        degree: n,
        split_mode: mode,
        solver: Solver::NumericOde,
        r: LieSeries::new(r, LIE_TOL)?,
        s: LieSeries::new(s, LIE_TOL)?,
        fg,
        kv1,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct OdeReport {
    pub steps: usize,
    /// Per-degree `l1` distance between the given and integrated `R`.
    pub r_deviation: Vec<f64>,
    pub s_deviation: Vec<f64>,
    /// Per-degree `l1` distance between `lambda_{1/2} R` and the flow at `t = 1/2`.
    pub r_homogeneity: Vec<f64>,
    pub s_homogeneity: Vec<f64>,
}

fn max(v: &[f64]) -> f64 {
    v.iter().cloned().fold(0.0, f64::max)
}

impl OdeReport {
    pub fn max_deviation(&self) -> f64 {
        max(&self.r_deviation).max(max(&self.s_deviation))
    }

    pub fn max_homogeneity(&self) -> f64 {
        max(&self.r_homogeneity).max(max(&self.s_homogeneity))
    }
}

/// Compare a solution with a fresh numerical integration of the flow.
pub fn ode_crosscheck(sol: &KvSolution, steps: usize) -> Result<OdeReport> {
    if steps < 10 {
        return Err(Error::Precondition(format!(
            "{steps} steps is too few (need at least 10)"
        )));
    }
    let (r1, s1) = integrate(&sol.fg, 1.0, steps);
    let (rh, sh) = integrate(&sol.fg, 0.5, steps.div_ceil(2));
    Ok(OdeReport {
        steps,
        r_deviation: sol.r.grade_distances(&r1),
        s_deviation: sol.s.grade_distances(&s1),
        r_homogeneity: sol.r.scale_re(0.5).grade_distances(&rh),
        s_homogeneity: sol.s.scale_re(0.5).grade_distances(&sh),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kv::solve_rs;

    #[test]
    fn solvers_agree_at_low_degree() {
        let sol = solve_rs(4, SplitMode::FirstLetter).unwrap();
        let rep = ode_crosscheck(&sol, 100).unwrap();
        assert!(rep.r_deviation[0] < 1e-12);
        assert!(rep.max_deviation() < 1e-7, "{rep:?}");
        assert!(rep.max_homogeneity() < 1e-8, "{rep:?}");
    }

    #[test]
    fn rejects_too_few_steps() {
        let sol = solve_rs(3, SplitMode::FirstLetter).unwrap();
        assert!(ode_crosscheck(&sol, 5).is_err());
    }
}
