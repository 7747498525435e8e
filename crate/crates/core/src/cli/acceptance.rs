use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::RunConfig;
use super::report::Check;
use crate::bch::{bch_series, kv1_check, kveasy_ab, SplitMode};
use crate::constructions::{
    commutator_to_squarezeros, dhs_kernel_check, diagonal_pair, exp_commutator_factor, n2c_witness, q_projection,
    selfcomm_to_projections, sumof5, unipotent_factor, unipotent_pair, verify_certificate, Atom,
};
use crate::error::Result;
use crate::free_algebra::{dsw_project, evaluate, is_lie, right_nested, GradedSeries, Word};
use crate::kv::{
    bch_residual, kveasy_residual, ode_crosscheck, radius_sweep, rs_decompose, solve_rs, solve_rs_dd, solve_rs_numeric,
    verify_factorization,
};
use crate::matrix::{
    random_contraction, random_gaussian, random_skew, random_square_zero, trotter_product, InstanceRng, MatrixElt,
};

pub const CRITERIA: [&str; 12] = [
    "BCH series against the matrix logarithm",
    "linear-part decomposition of the BCH series on matrices",
    "first KV equation per grade",
    "conjugated-exponential factorization of e^{x+y}",
    "structure of the flow solution R, S",
    "unipotent elements as commutators of commutators",
    "five square-zero summands of [x, r]",
    "additive commutators as sums of square-zero matrices",
    "self-commutators as signed sums of projections",
    "Trotter rate and multiplicative commutators for e^{[c,d]}",
    "trace condition for products of exponentials",
    "free-algebra properties",
];

/// Result of one acceptance criterion.
#[derive(Clone, Debug, Serialize)]
pub struct Criterion {
    pub id: usize,
    pub title: String,
    pub checks: Vec<Check>,
    pub data: Value,
    pub wall_time: f64,
}

impl Criterion {
    pub fn pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    /// One line: verdict, number, title, and the failing checks if any.
    pub fn line(&self) -> String {
        let failing: Vec<String> = self.checks.iter().filter(|c| !c.pass).map(|c| c.summary()).collect();
        let mut s = format!(
            "criterion {:>2} {}: {} ({} checks, {:.1} s)",
            self.id,
            if self.pass() { "PASS" } else { "FAIL" },
            self.title,
            self.checks.len(),
            self.wall_time
        );
        if !failing.is_empty() {
            s.push_str(" [");
            s.push_str(&failing.join("; "));
            s.push(']');
        }
        s
    }
}

/// Deterministic per-trial generators: trial `i` of block `stream` always
/// sees the same random numbers, whatever the thread count.
fn trials<T, F>(seed: u64, stream: u64, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut InstanceRng) -> T + Sync + Send,
{
    (0..n)
        .into_par_iter()
        .map(|i| f(&mut InstanceRng::stream(seed, (stream << 32) | i as u64)))
        .collect()
}

/// Maximum that propagates NaN.
pub(super) fn worst<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter()
        .fold(0.0, |a, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) })
}

fn or_nan(r: Result<f64>) -> f64 {
    r.unwrap_or(f64::NAN)
}

/// Gaussian matrix rescaled to operator norm `norm`.
pub(super) fn gaussian_with_norm(dim: usize, norm: f64, rng: &mut InstanceRng) -> MatrixElt {
    let g = random_gaussian(dim, rng);
    g.scale_re(norm / g.op_norm())
}

const BCH_ANCHOR: &str = "V(X,Y) = log(e^X e^Y)";
const KVEASY_ANCHOR: &str = "e^x e^y = e^{x+y+[x,a]+[y,b]}";
const KV1_ANCHOR: &str = "V(Y,X) = X + Y - (1 - e^{-ad X})F - (e^{ad Y} - 1)G";
const FACTOR_ANCHOR: &str = "e^{x+y} = (e^R e^x e^{-R})(e^S e^y e^{-S})";
const HALF_ANCHOR: &str = "Z = Z_1 + [X,P] + [Y,Q]";
const N2_ANCHOR: &str = "1 + x = (u, v), x^2 = 0";
const SUM5_ANCHOR: &str = "[x,r] = z1 + z2 + z3 + z4 + (1+z5) x (1-z5)";
const COMMN2_ANCHOR: &str = "[c,d] = y_1 + ... + y_K, y_i^2 = 0";
const COMMP_ANCHOR: &str = "[c*,c] = sum eps_i p_i";
const TROTTER_ANCHOR: &str = "e^{a+b} = lim (e^{a/n} e^{b/n})^n";
const DHS_ANCHOR: &str = "e^{b_1}...e^{b_k} in (G,G) iff sum tr b_i in 2 pi i Z";

fn bch_correctness(cfg: &RunConfig) -> Result<(Vec<Check>, Value)> {
    let n = 10;
    let dim = 4;
    let v = bch_series(n);
    let residuals = trials(cfg.seed, 1, 50, |rng| {
        let total = rng.uniform(0.05, 0.3);
        let share = rng.uniform(0.2, 0.8);
        let x = gaussian_with_norm(dim, total * share, rng);
        let y = gaussian_with_norm(dim, total * (1.0 - share), rng);
        or_nan(bch_residual(&v, &x, &y))
    });
    let x = GradedSeries::x(n);
    let y = GradedSeries::y(n);
    let xy = x.bracket(&y);
    let g2 = xy.scaled_re(0.5);
    let g3 = x
        .bracket(&xy)
        .scaled_re(1.0 / 12.0)
        .add(&y.bracket(&y.bracket(&x)).scaled_re(1.0 / 12.0));
    let vp = dsw_project(&v);
    let tol = cfg.tol("bch-coeff");
    Ok((
        vec![
            Check::at_most(
                "matrix residual, 50 pairs, N = 10",
                BCH_ANCHOR,
                worst(residuals.iter().copied()),
                cfg.tol("bch-residual"),
            ),
            Check::at_most(
                "grade 2 = [X,Y]/2",
                BCH_ANCHOR,
                vp.grade(2).l1_distance(&g2.grade(2)),
                tol,
            ),
            Check::at_most(
                "grade 3 = [X,[X,Y]]/12 + [Y,[Y,X]]/12",
                BCH_ANCHOR,
                vp.grade(3).l1_distance(&g3.grade(3)),
                tol,
            ),
            Check::at_most("Lie membership", BCH_ANCHOR, is_lie(&v, 1e-10).max_deviation(), 1e-10),
        ],
        json!({ "residuals": residuals }),
    ))
}

fn kveasy(cfg: &RunConfig) -> Result<(Vec<Check>, Value)> {
    let n = cfg.degree;
    let radius = 0.04;
    let dim = 4;
    let mut checks = Vec::new();
    for (k, mode) in SplitMode::ALL.into_iter().enumerate() {
        let ab = kveasy_ab(n, mode)?;
        let out = trials(cfg.seed, 2 + 100 * k as u64, 50, |rng| {
            let x = gaussian_with_norm(dim, rng.uniform(0.005, radius), rng);
            let y = gaussian_with_norm(dim, rng.uniform(0.005, radius), rng);
            let res = or_nan(kveasy_residual(&ab, &x, &y));
            let xs = random_skew(dim, rng.uniform(0.005, radius), rng);
            let ys = random_skew(dim, rng.uniform(0.005, radius), rng);
            let skew = match (evaluate(&ab.a, &xs, &ys), evaluate(&ab.b, &xs, &ys)) {
                (Ok(a), Ok(b)) => a.skew_defect().max(b.skew_defect()),
                _ => f64::NAN,
            };
            (res, skew)
        });
        checks.push(Check::at_most(
            &format!("residual, 50 pairs, {mode}"),
            KVEASY_ANCHOR,
            worst(out.iter().map(|o| o.0)),
            cfg.tol("kveasy-residual"),
        ));
        checks.push(Check::at_most(
            &format!("a, b skew on skew inputs, {mode}"),
            KVEASY_ANCHOR,
            worst(out.iter().map(|o| o.1)),
            cfg.tol("kveasy-skew"),
        ));
    }
    Ok((checks, json!({ "degree": n, "radius": radius })))
}

fn kv1(cfg: &RunConfig) -> Result<(Vec<Check>, Value)> {
    let mut checks = Vec::new();
    let mut data = serde_json::Map::new();
    for mode in SplitMode::ALL {
        let (_, _, report) = kv1_check(cfg.degree, mode)?;
        checks.push(Check::at_most(
            &format!("max grade residual, {mode}"),
            KV1_ANCHOR,
            report.max_residual,
            cfg.tol("kv1-residual"),
        ));
        data.insert(mode.to_string(), json!(report.residuals));
    }
    Ok((checks, Value::Object(data)))
}

fn kvhard(cfg: &RunConfig) -> Result<(Vec<Check>, Value)> {
    let n = cfg.degree;
    let dim = 4;
    let radius = 0.02;
    let sol = solve_rs(n, cfg.split)?;
    let residuals = trials(cfg.seed, 4, 50, |rng| {
        let x = random_skew(dim, radius, rng);
        let y = random_skew(dim, radius, rng);
        or_nan(verify_factorization(&sol, &x, &y, radius))
    });
    let dd = solve_rs_dd(n, cfg.split)?;
    let dd_gap = dd.deviation_from(&sol);
    let radii = [0.04, 0.02, 0.01, 0.005];
    let sweeps = trials(cfg.seed, 5, 3, |rng| {
        let x = random_skew(dim, 1.0, rng);
        let y = random_skew(dim, 1.0, rng);
        radius_sweep(&dd, &x, &y, &radii).ok()
    });
    let slope = sweeps
        .iter()
        .map(|s| s.as_ref().map_or(f64::NAN, |s| s.slope))
        .fold(f64::INFINITY, |a, b| {
            if a.is_nan() || b.is_nan() {
                f64::NAN
            } else {
                a.min(b)
            }
        });
    let ode = ode_crosscheck(&sol, 1000)?;
    Ok((
        vec![
            Check::at_most(
                "residual, 50 skew pairs at radius 0.02",
                FACTOR_ANCHOR,
                worst(residuals.iter().copied()),
                cfg.tol("factorization"),
            ),
            Check::at_most(
                "double-double coefficients agree with f64",
                FACTOR_ANCHOR,
                dd_gap,
                1e-13,
            ),
            Check::at_least(
                "log-log slope over radii 0.04..0.005",
                FACTOR_ANCHOR,
                slope,
                cfg.tol("sweep-slope"),
            ),
            Check::at_most(
                "grade recursion vs ODE, 1000 steps",
                FACTOR_ANCHOR,
                ode.max_deviation(),
                cfg.tol("ode-agreement"),
            ),
            Check::at_most(
                "homogeneity R_{t/2} = lambda_{1/2} R_t",
                "R_{at} = lambda_a R_t",
                ode.max_homogeneity(),
                cfg.tol("homogeneity"),
            ),
        ],
        json!({ "residuals": residuals, "sweeps": sweeps, "ode": ode }),
    ))
}

fn fg_structure(cfg: &RunConfig) -> Result<(Vec<Check>, Value)> {
    let n = cfg.degree;
    let dim = 4;
    let sol = solve_rs(n, cfg.split)?;
    let num = solve_rs_numeric(n, cfg.split, 1000)?;
    let d = rs_decompose(&sol)?;
    let dn = rs_decompose(&num)?;
    let lead_gap = [
        d.lead_r_coeffs.x - dn.lead_r_coeffs.x,
        d.lead_r_coeffs.y - dn.lead_r_coeffs.y,
        d.lead_s_coeffs.x - dn.lead_s_coeffs.x,
        d.lead_s_coeffs.y - dn.lead_s_coeffs.y,
    ]
    .iter()
    .map(|v| v.abs())
    .fold(0.0, f64::max);
    let parts: [&GradedSeries; 8] = [
        &sol.r,
        &sol.s,
        &d.lead_r,
        &d.lead_s,
        &d.r_prime,
        &d.r_second,
        &d.s_prime,
        &d.s_second,
    ];
    let skew = trials(cfg.seed, 6, 20, |rng| {
        let x = random_skew(dim, 0.02, rng);
        let y = random_skew(dim, 0.02, rng);
        worst(
            parts
                .iter()
                .map(|p| evaluate(p, &x, &y).map_or(f64::NAN, |m| m.skew_defect())),
        )
    });
    Ok((
        vec![
            Check::at_most(
                "decomposition residual, grade recursion",
                HALF_ANCHOR,
                d.max_residual(),
                cfg.tol("decomposition"),
            ),
            Check::at_most(
                "decomposition residual, ODE",
                HALF_ANCHOR,
                dn.max_residual(),
                cfg.tol("decomposition"),
            ),
            Check::at_most(
                "grade-1 coefficients agree across solvers",
                HALF_ANCHOR,
                lead_gap,
                cfg.tol("ode-agreement"),
            ),
            Check::at_most(
                "R, S, R', R'', S', S'' skew on skew inputs",
                HALF_ANCHOR,
                worst(skew),
                cfg.tol("rs-skew"),
            ),
        ],
        json!({
            "lead_r": { "recursion": d.lead_r_coeffs, "ode": dn.lead_r_coeffs },
            "lead_s": { "recursion": d.lead_s_coeffs, "ode": dn.lead_s_coeffs },
        }),
    ))
}

fn mat2(a: [[Complex64; 2]; 2]) -> MatrixElt {
    MatrixElt::from_fn(2, |i, j| a[i][j])
}

fn unipotent(cfg: &RunConfig) -> Result<(Vec<Check>, Value)> {
    let out = trials(cfg.seed, 7, 100, |rng| {
        let dim = rng.index(2, 8);
        let norm = rng.uniform(0.05, 4.0);
        let x = match random_square_zero(dim, norm, rng) {
            Ok(x) => x,
            Err(_) => return (f64::NAN, f64::NAN, false),
        };
        match unipotent_factor(&x) {
            Ok(c) => {
                let v = verify_certificate(&c);
                (c.residual, v.residual, v.pass)
            }
            Err(_) => (f64::NAN, f64::NAN, false),
        }
    });
    let (g, f) = unipotent_pair(1.0);
    let (a, b) = diagonal_pair(g);
    let diag = MatrixElt::from_real_rows(&[&[g, 0.0], &[0.0, 1.0 / g]]);
    let lower = or_nan(mat2(a).group_commutator(&mat2(b)).map(|m| m.dist(&diag)));
    let upper = or_nan(
        diag.group_commutator(&MatrixElt::from_real_rows(&[&[1.0, f], &[0.0, 1.0]]))
            .map(|m| m.dist(&MatrixElt::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]))),
    );
    let failed = out.iter().filter(|o| !o.2).count();
    Ok((
        vec![
            Check::at_most(
                "certificate residual, 100 square-zero",
                N2_ANCHOR,
                worst(out.iter().map(|o| o.0)),
                cfg.tol("unipotent"),
            ),
            Check::at_most(
                "independent re-evaluation",
                N2_ANCHOR,
                worst(out.iter().map(|o| o.1)),
                cfg.tol("unipotent"),
            ),
            Check::at_most("certificates failing verification", N2_ANCHOR, failed as f64, 0.0),
            Check::at_most(
                "t = 1: diag(g, 1/g) as a commutator",
                N2_ANCHOR,
                lower.max(upper),
                cfg.tol("unipotent-display"),
            ),
        ],
        json!({ "g": g, "f": f }),
    ))
}

fn five_square_zeros(cfg: &RunConfig) -> Result<(Vec<Check>, Value)> {
    let out = trials(cfg.seed, 8, 100, |rng| -> Option<(f64, f64, f64)> {
        let dim = rng.index(2, 8);
        let x = random_square_zero(dim, rng.uniform(1.0, 2.0), rng).ok()?;
        let r = gaussian_with_norm(dim, rng.uniform(1.0, 2.0), rng);
        let wit = n2c_witness(&x).ok()?;
        let s = sumof5(&wit, &r).ok()?;
        let sq =
            s.z.iter()
                .chain(std::iter::once(&s.conjugated))
                .map(|z| (z * z).op_norm())
                .fold(0.0, f64::max);
        let bound = x.op_norm() * r.op_norm();
        let ratio = s.norms().iter().map(|v| v / bound).fold(0.0, f64::max);
        Some((s.certificate.residual, sq, ratio))
    });
    let get = |k: usize| worst(out.iter().map(|o| o.map_or(f64::NAN, |t| [t.0, t.1, t.2][k])));
    Ok((
        vec![
            Check::at_most("reconstruction, 100 pairs", SUM5_ANCHOR, get(0), cfg.tol("sumof5")),
            Check::at_most(
                "z_i and (1+z5)x(1-z5) square-zero",
                SUM5_ANCHOR,
                get(1),
                cfg.tol("square-zero"),
            ),
            Check::at_most("max ||z_i|| / (||x|| ||r||)", SUM5_ANCHOR, get(2), 1.0 + 1e-8),
        ],
        json!({ "norm_range": [1.0, 2.0] }),
    ))
}

fn comm_n2(cfg: &RunConfig) -> Result<(Vec<Check>, Value)> {
    let out = trials(cfg.seed, 9, 100, |rng| -> Option<(f64, f64, bool, usize, f64)> {
        let c = gaussian_with_norm(3, 1.0, rng);
        let d = gaussian_with_norm(3, 1.0, rng);
        let r = commutator_to_squarezeros(&c, &d).ok()?;
        let v = verify_certificate(&r.certificate);
        Some((v.residual, v.max_square_zero_defect, v.pass, r.k, r.c_realized))
    });
    let ks: Vec<usize> = out.iter().map(|o| o.map_or(0, |t| t.3)).collect();
    let constant = out.iter().all(|o| o.is_some()) && ks.iter().all(|k| *k == ks[0]);
    let c_max = worst(out.iter().map(|o| o.map_or(f64::NAN, |t| t.4)));
    Ok((
        vec![
            Check::at_most(
                "sum of y_i vs [c,d], 100 unit pairs",
                COMMN2_ANCHOR,
                worst(out.iter().map(|o| o.map_or(f64::NAN, |t| t.0))),
                cfg.tol("comm-n2"),
            ),
            Check::at_most(
                "y_i square-zero",
                COMMN2_ANCHOR,
                worst(out.iter().map(|o| o.map_or(f64::NAN, |t| t.1))),
                cfg.tol("square-zero"),
            ),
            Check::at_most(
                "certificates failing verification",
                COMMN2_ANCHOR,
                out.iter().filter(|o| !o.is_some_and(|t| t.2)).count() as f64,
                0.0,
            ),
            Check::holds("K constant across trials", COMMN2_ANCHOR, constant),
            Check::holds("realized C finite", COMMN2_ANCHOR, c_max.is_finite()),
        ],
        json!({ "K": ks[0], "C_realized_max": c_max }),
    ))
}

fn comm_p(cfg: &RunConfig) -> Result<(Vec<Check>, Value)> {
    let dim = 4;
    let p = &MatrixElt::unit(dim, 0, 0) + &MatrixElt::unit(dim, 1, 1);
    let pc = &MatrixElt::identity(dim) - &p;
    let out = trials(cfg.seed, 10, 100, |rng| -> Option<(f64, f64, bool, usize)> {
        let c = random_contraction(dim, rng);
        let r = selfcomm_to_projections(&c, &p).ok()?;
        let v = verify_certificate(&r.certificate);
        Some((v.residual, v.max_projection_defect, v.pass, r.k))
    });
    let q = trials(cfg.seed, 11, 100, |rng| {
        let g = &(&p * &random_gaussian(dim, rng)) * &pc;
        let norm = if rng.uniform(0.0, 1.0) < 0.1 {
            1.0
        } else {
            rng.uniform(0.0, 1.0)
        };
        let x = g.scale_re(norm / g.op_norm());
        match (q_projection(&p, &x), q_projection(&p, &-&x)) {
            (Ok(qp), Ok(qm)) => {
                let proj = |q: &MatrixElt| (q * q).dist(q).max(q.hermitian_defect());
                let diff = (&qp - &qm).dist(&(&x + &x.adjoint()));
                proj(&qp).max(proj(&qm)).max(diff)
            }
            _ => f64::NAN,
        }
    });
    let ks: Vec<usize> = out.iter().map(|o| o.map_or(0, |t| t.3)).collect();
    Ok((
        vec![
            Check::at_most(
                "sum eps_i p_i vs [c*,c], 100 contractions",
                COMMP_ANCHOR,
                worst(out.iter().map(|o| o.map_or(f64::NAN, |t| t.0))),
                cfg.tol("comm-p"),
            ),
            Check::at_most(
                "p_i^2 = p_i = p_i*",
                COMMP_ANCHOR,
                worst(out.iter().map(|o| o.map_or(f64::NAN, |t| t.1))),
                cfg.tol("projection"),
            ),
            Check::at_most(
                "certificates failing verification",
                COMMP_ANCHOR,
                out.iter().filter(|o| !o.is_some_and(|t| t.2)).count() as f64,
                0.0,
            ),
            Check::at_most(
                "q(x) projection and q(x) - q(-x) = x + x*",
                "q(x)^2 = q(x) = q(x)*",
                worst(q),
                cfg.tol("q-projection"),
            ),
        ],
        json!({ "K_min": ks.iter().min(), "K_max": ks.iter().max() }),
    ))
}

fn trotter_and_exp_comm(cfg: &RunConfig) -> Result<(Vec<Check>, Value)> {
    let dim = 3;
    let trotter = trials(cfg.seed, 12, 5, |rng| {
        let a = gaussian_with_norm(dim, 1.0, rng);
        let b = gaussian_with_norm(dim, 1.0, rng);
        let res: Vec<f64> = [800u64, 1600, 3200]
            .iter()
            .map(|&n| or_nan(trotter_product(&a, &b, n).map(|t| t.residual)))
            .collect();
        (res[1] / res[0], res[2] / res[1])
    });
    let exp = trials(cfg.seed, 13, 5, |rng| -> Option<(f64, f64, f64, bool)> {
        let c = gaussian_with_norm(dim, 0.5, rng);
        let d = gaussian_with_norm(dim, 0.5, rng);
        let runs: Vec<_> = [400, 800, 1600]
            .iter()
            .map(|&n| exp_commutator_factor(&c, &d, n).ok())
            .collect::<Option<_>>()?;
        let ratio = runs[2].residual / runs[1].residual;
        let det = runs
            .iter()
            .map(|r| (Complex64::new(r.det_re, r.det_im) - 1.0).norm())
            .fold(0.0, f64::max);
        let verified = runs.iter().all(|r| {
            r.certificate.atoms.iter().all(|a| matches!(a, Atom::Commutator { .. }))
                && verify_certificate(&r.certificate).pass
        });
        Some((ratio, det, runs[2].residual, verified))
    });
    let in_band = |r: f64| (0.4..=0.65).contains(&r);
    let trotter_ok = trotter.iter().all(|t| in_band(t.0) && in_band(t.1));
    let exp_ok = exp.iter().all(|e| e.is_some_and(|e| in_band(e.0)));
    Ok((
        vec![
            Check::holds(
                "Trotter residual ratio per doubling in [0.4, 0.65]",
                TROTTER_ANCHOR,
                trotter_ok,
            ),
            Check::holds(
                "exp-commutator residual ratio per doubling in [0.4, 0.65]",
                TROTTER_ANCHOR,
                exp_ok,
            ),
            Check::at_most(
                "factors failing verification as commutators",
                "(u,v) = u v u^{-1} v^{-1}",
                exp.iter().filter(|e| !e.is_some_and(|e| e.3)).count() as f64,
                0.0,
            ),
            Check::at_most(
                "|det(product) - 1|",
                "det (u,v) = 1",
                worst(exp.iter().map(|e| e.map_or(f64::NAN, |e| e.1))),
                cfg.tol("det"),
            ),
        ],
        json!({
            "trotter_ratios": trotter,
            "exp_comm_ratios": exp.iter().map(|e| e.map(|e| e.0)).collect::<Vec<_>>(),
        }),
    ))
}

fn dhs(cfg: &RunConfig) -> Result<(Vec<Check>, Value)> {
    let out = trials(cfg.seed, 14, 50, |rng| -> Option<(bool, bool)> {
        let dim = rng.index(2, 5);
        let k = rng.index(1, 4);
        let mut bs: Vec<MatrixElt> = (0..k)
            .map(|_| gaussian_with_norm(dim, rng.uniform(0.1, 1.5), rng))
            .collect();
        if rng.uniform(0.0, 1.0) < 0.5 {
            // move the trace sum onto 2 pi i Z
            let sum: Complex64 = bs.iter().map(|b| b.trace()).sum();
            let m = rng.index(0, 4) as f64 - 2.0;
            let shift = (Complex64::new(0.0, 2.0 * PI * m) - sum) / dim as f64;
            let last = bs.last_mut().expect("nonempty");
            *last = &*last + &MatrixElt::identity(dim).scale(shift);
        }
        let r = dhs_kernel_check(&bs).ok()?;
        Some((r.in_kernel, (r.det - 1.0).norm() <= cfg.tol("dhs")))
    });
    let disagree = out.iter().filter(|o| !o.is_some_and(|(a, b)| a == b)).count();
    let inside = out.iter().filter(|o| o.is_some_and(|o| o.0)).count();
    Ok((
        vec![
            Check::at_most(
                "verdict disagreements with |det - 1| <= tol",
                DHS_ANCHOR,
                disagree as f64,
                0.0,
            ),
            Check::holds("both verdicts occur", DHS_ANCHOR, inside > 0 && inside < out.len()),
        ],
        json!({ "in_kernel": inside, "total": out.len() }),
    ))
}

fn random_word(len: usize, rng: &mut InstanceRng) -> Word {
    Word::new(len, rng.index(0, (1usize << len) - 1) as u32).expect("length in range")
}

/// Random series with up to `terms` words of degree at most `max_deg` and
/// coefficients in the unit disc.
fn random_series(n: usize, max_deg: usize, terms: usize, rng: &mut InstanceRng) -> GradedSeries {
    let items: Vec<(Word, Complex64)> = (0..terms)
        .map(|_| {
            let len = rng.index(1, max_deg);
            let w = random_word(len, rng);
            (
                w,
                Complex64::from_polar(rng.uniform(0.0, 1.0), rng.uniform(0.0, 2.0 * PI)),
            )
        })
        .collect();
    GradedSeries::from_terms(n, items)
}

fn random_bracket(n: usize, deg: usize, rng: &mut InstanceRng) -> GradedSeries {
    if deg == 1 {
        return if rng.index(0, 1) == 0 {
            GradedSeries::x(n)
        } else {
            GradedSeries::y(n)
        };
    }
    let k = rng.index(1, deg - 1);
    random_bracket(n, k, rng).bracket(&random_bracket(n, deg - k, rng))
}

fn free_algebra_properties(cfg: &RunConfig) -> Result<(Vec<Check>, Value)> {
    let per = 250;
    let n = 8;
    let idem = trials(cfg.seed, 15, per, |rng| {
        let mut b = GradedSeries::zero(n);
        for _ in 0..3 {
            let deg = rng.index(1, n);
            b = b.add(&random_bracket(n, deg, rng).scaled_re(rng.uniform(-1.0, 1.0)));
        }
        let nb = dsw_project(&b);
        nb.sub(&b).l1_norm() / b.l1_norm().max(1.0)
    });
    let amp = trials(cfg.seed, 16, per, |rng| {
        let deg = rng.index(1, n);
        let p = random_series(deg, deg, 6, rng).grade(deg);
        if p.is_zero() {
            return 0.0;
        }
        right_nested(&p).l1_norm() / p.l1_norm() / 2f64.powi(deg as i32)
    });
    let jacobi = trials(cfg.seed, 17, per, |rng| {
        let p = random_series(n, n - 2, 8, rng);
        let x = GradedSeries::x(n);
        let y = GradedSeries::y(n);
        let j = x
            .bracket(&y.bracket(&p))
            .add(&y.bracket(&p.bracket(&x)))
            .add(&p.bracket(&x.bracket(&y)));
        j.l1_norm()
    });
    let scaling = trials(cfg.seed, 18, per, |rng| {
        let p = random_series(n, n, 10, rng);
        let s = Complex64::from_polar(rng.uniform(0.0, 1.0), rng.uniform(0.0, 2.0 * PI));
        let t = Complex64::from_polar(rng.uniform(0.0, 1.0), rng.uniform(0.0, 2.0 * PI));
        let lhs = p.scale(s * t);
        let rhs = p.scale(s).scale(t);
        let hom = p.mul(&p).scale(t).max_abs_diff(&p.scale(t).mul(&p.scale(t)));
        lhs.max_abs_diff(&rhs).max(hom)
    });
    let eval = trials(cfg.seed, 19, per, |rng| {
        let p = random_series(n, 4, 6, rng);
        let q = random_series(n, 4, 6, rng);
        let u = random_contraction(4, rng);
        let v = random_contraction(4, rng);
        let lhs = evaluate(&p.mul(&q), &u, &v);
        let rhs = evaluate(&p, &u, &v).and_then(|a| Ok(&a * &evaluate(&q, &u, &v)?));
        match (lhs, rhs) {
            (Ok(l), Ok(r)) => l.dist(&r),
            _ => f64::NAN,
        }
    });
    let cases = idem.len() + amp.len() + jacobi.len() + scaling.len() + eval.len();
    Ok((
        vec![
            Check::at_most("DSW idempotence on brackets", "nu(b) = b", worst(idem), cfg.tol("dsw")),
            Check::at_most("right-nested amplification / 2^n", "||nu_n|| <= 2^n", worst(amp), 1.0),
            Check::at_most(
                "Jacobi identity",
                "[X,[Y,p]] + [Y,[p,X]] + [p,[X,Y]] = 0",
                worst(jacobi),
                cfg.tol("jacobi"),
            ),
            Check::at_most(
                "scaling homogeneity and multiplicativity",
                "lambda_{st} = lambda_t lambda_s",
                worst(scaling),
                cfg.tol("scaling"),
            ),
            Check::at_most(
                "evaluation homomorphism",
                "ev(pq) = ev(p) ev(q)",
                worst(eval),
                cfg.tol("eval-hom"),
            ),
            Check::at_least("randomized cases", "", cases as f64, 1000.0),
        ],
        json!({ "cases": cases }),
    ))
}

/// Runtime limits in seconds, where one applies.
fn runtime_limit(id: usize) -> Option<f64> {
    match id {
        1 | 12 => Some(60.0),
        4 => Some(300.0),
        _ => None,
    }
}

/// Run criterion `id` (1 to 12).
pub fn run_criterion(id: usize, cfg: &RunConfig) -> Criterion {
    let start = Instant::now();
    let body = match id {
        1 => bch_correctness(cfg),
        2 => kveasy(cfg),
        3 => kv1(cfg),
        4 => kvhard(cfg),
        5 => fg_structure(cfg),
        6 => unipotent(cfg),
        7 => five_square_zeros(cfg),
        8 => comm_n2(cfg),
        9 => comm_p(cfg),
        10 => trotter_and_exp_comm(cfg),
        11 => dhs(cfg),
        12 => free_algebra_properties(cfg),
        _ => panic!("no criterion {id}"),
    };
    let wall_time = start.elapsed().as_secs_f64();
    let (mut checks, data) = match body {
        Ok(v) => v,
        Err(e) => (vec![Check::holds(&format!("setup: {e}"), "", false)], Value::Null),
    };
    if let Some(limit) = runtime_limit(id) {
        checks.push(Check::at_most("runtime (s)", "", wall_time, limit));
    }
    Criterion {
        id,
        title: CRITERIA[id - 1].into(),
        checks,
        data,
        wall_time,
    }
}

pub fn run_suite(cfg: &RunConfig) -> Vec<Criterion> {
    (1..=CRITERIA.len()).map(|id| run_criterion(id, cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_streams_ignore_thread_count() {
        let f = |rng: &mut InstanceRng| rng.normal();
        let a = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| trials(3, 1, 64, f));
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| trials(3, 1, 64, f));
        assert_eq!(a, b);
    }

    #[test]
    fn worst_propagates_nan() {
        assert!(worst([1.0, f64::NAN, 2.0]).is_nan());
        assert_eq!(worst([1.0, 3.0]), 3.0);
        assert_eq!(worst(std::iter::empty()), 0.0);
    }
}
