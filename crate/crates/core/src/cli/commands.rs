use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

use super::acceptance::{self, gaussian_with_norm, worst, CRITERIA};
use super::config::RunConfig;
use super::report::Check;
use super::{Command, FactorKind, InstanceKind, KvCommand, SolverArg};
use crate::bch::bch_series;
use crate::constructions::{
    commutator_to_squarezeros, dhs_kernel_check, exp_commutator_factor, selfcomm_to_projections, unipotent_factor,
    verify_certificate, FactorCertificate,
};
use crate::error::{Error, Result};
use crate::free_algebra::{is_lie, Word};
use crate::kv::{bch_residual, solve_rs, solve_rs_numeric, verify_factorization, KvSolution};
use crate::matrix::{random_contraction, random_skew, random_square_zero, InstanceRng, MatrixElt};

type Outcome = (Vec<Check>, Value, Vec<String>);

pub(super) fn dispatch(cmd: &Command, cfg: &RunConfig) -> Result<Outcome> {
    match cmd {
        Command::Bch => bch(cfg),
        Command::Kv {
            cmd: KvCommand::Solve { solver, steps },
        } => kv_solve(cfg, *solver, *steps),
        Command::Kv {
            cmd: KvCommand::Verify { solution },
        } => kv_verify(cfg, solution.as_deref()),
        Command::Factor { kind } => factor(cfg, kind),
        Command::Verify { cert } => verify(cert),
        Command::DhsCheck { input } => dhs_check(cfg, input.as_deref()),
        Command::Acceptance { only } => run_acceptance(cfg, only),
        Command::Instance { kind } => instance(cfg, *kind),
    }
}

fn rng_for(cfg: &RunConfig, stream: u64, trial: usize) -> InstanceRng {
    InstanceRng::stream(cfg.seed, (stream << 32) | trial as u64)
}

fn read_json(path: &Path) -> Result<Value> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Format(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

/// Instances from a file holding one instance, an array of them, or an
/// `instance` report.
fn load_instances<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let v = read_json(path)?;
    let list = match v {
        Value::Array(items) => items,
        Value::Object(ref o) if o.get("data").and_then(|d| d.get("instances")).is_some() => {
            o["data"]["instances"].as_array().cloned().unwrap_or_default()
        }
        other => vec![other],
    };
    list.into_iter()
        .map(|item| serde_json::from_value(item).map_err(|e| Error::Format(format!("{}: {e}", path.display()))))
        .collect()
}

fn bch(cfg: &RunConfig) -> Result<Outcome> {
    let n = cfg.degree;
    let v = bch_series(n);
    let xy: Word = "XY".parse()?;
    let yx: Word = "YX".parse()?;
    let c2 = v.coeff(&xy);
    let c2b = v.coeff(&yx);
    // tail of the series beyond degree n bounds the truncation error
    let longer = bch_series((n + 3).min(crate::free_algebra::MAX_DEGREE));
    let dim = cfg.dim;
    let out: Vec<(f64, f64)> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(cfg, 1, i);
            let total = cfg.radius * rng.uniform(0.5, 1.0);
            let share = rng.uniform(0.2, 0.8);
            let x = gaussian_with_norm(dim, total * share, &mut rng);
            let y = gaussian_with_norm(dim, total * (1.0 - share), &mut rng);
            let tail: f64 = (n + 1..=longer.truncation())
                .map(|k| longer.grade_norm(k) * total.powi(k as i32))
                .sum();
            (
                bch_residual(&v, &x, &y).unwrap_or(f64::NAN),
                cfg.tol("bch-residual") + 2.0 * tail,
            )
        })
        .collect();
    let margin = worst(out.iter().map(|(r, t)| r / t));
    Ok((
        vec![
            Check::at_most(
                "coefficient of XY minus 1/2",
                "V_2 = [X,Y]/2",
                (c2.re - 0.5).abs() + c2.im.abs(),
                cfg.tol("bch-coeff"),
            ),
            Check::at_most(
                "coefficient of YX plus 1/2",
                "V_2 = [X,Y]/2",
                (c2b.re + 0.5).abs() + c2b.im.abs(),
                cfg.tol("bch-coeff"),
            ),
            Check::at_most(
                "Lie membership",
                "V(X,Y) in L(X,Y)",
                is_lie(&v, 1e-10).max_deviation(),
                1e-10,
            ),
            Check::at_most(
                "matrix residual / (tol + truncation tail)",
                "V(X,Y) = log(e^X e^Y)",
                margin,
                1.0,
            ),
        ],
        json!({
            "series": v.as_series(),
            "grade_norms": (1..=n).map(|k| v.grade_norm(k)).collect::<Vec<_>>(),
            "matrix_residuals": out.iter().map(|o| o.0).collect::<Vec<_>>(),
        }),
        Vec::new(),
    ))
}

fn solution_value(sol: &KvSolution) -> Value {
    serde_json::from_str(&sol.to_json()).expect("solution JSON is valid")
}

fn kv_solve(cfg: &RunConfig, solver: SolverArg, steps: usize) -> Result<Outcome> {
    let sol = match solver {
        SolverArg::Recursion => solve_rs(cfg.degree, cfg.split)?,
        SolverArg::Ode => solve_rs_numeric(cfg.degree, cfg.split, steps)?,
    };
    Ok((
        vec![Check::at_most(
            "first KV equation, max grade residual",
            "V(Y,X) = X + Y - (1 - e^{-ad X})F - (e^{ad Y} - 1)G",
            sol.kv1.max_residual,
            cfg.tol("kv1-residual"),
        )],
        json!({ "solution": solution_value(&sol), "kv1_residuals": sol.kv1.residuals }),
        Vec::new(),
    ))
}

fn load_solution(path: &Path) -> Result<KvSolution> {
    let v = read_json(path)?;
    let inner = v.get("data").and_then(|d| d.get("solution")).cloned().unwrap_or(v);
    KvSolution::from_json(&inner.to_string())
}

fn kv_verify(cfg: &RunConfig, solution: Option<&Path>) -> Result<Outcome> {
    let sol = match solution {
        Some(p) => load_solution(p)?,
        None => solve_rs(cfg.degree, cfg.split)?,
    };
    let residuals: Vec<f64> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(cfg, 4, i);
            let x = random_skew(cfg.dim, cfg.radius, &mut rng);
            let y = random_skew(cfg.dim, cfg.radius, &mut rng);
            verify_factorization(&sol, &x, &y, cfg.radius).unwrap_or(f64::NAN)
        })
        .collect();
    Ok((
        vec![Check::at_most(
            "factorization residual",
            "e^{x+y} = (e^R e^x e^{-R})(e^S e^y e^{-S})",
            worst(residuals.iter().copied()),
            cfg.tol("factorization"),
        )],
        json!({ "degree": sol.degree, "split": sol.split_mode, "solver": sol.solver.to_string(), "residuals": residuals }),
        Vec::new(),
    ))
}

#[derive(Deserialize, serde::Serialize)]
struct SquareZeroInstance {
    x: MatrixElt,
}

#[derive(Deserialize, serde::Serialize)]
struct PairInstance {
    c: MatrixElt,
    d: MatrixElt,
}

#[derive(Deserialize, serde::Serialize)]
struct ContractionInstance {
    c: MatrixElt,
    p: MatrixElt,
}

#[derive(Deserialize, serde::Serialize)]
struct BListInstance {
    b: Vec<MatrixElt>,
}

fn square_zero_instance(cfg: &RunConfig, i: usize) -> Result<SquareZeroInstance> {
    let mut rng = rng_for(cfg, 7, i);
    let norm = rng.uniform(0.05, 4.0);
    Ok(SquareZeroInstance {
        x: random_square_zero(cfg.dim, norm, &mut rng)?,
    })
}

fn pair_instance(cfg: &RunConfig, i: usize, norm: f64) -> PairInstance {
    let mut rng = rng_for(cfg, 9, i);
    PairInstance {
        c: gaussian_with_norm(cfg.dim, norm, &mut rng),
        d: gaussian_with_norm(cfg.dim, norm, &mut rng),
    }
}

fn half_projection(dim: usize) -> MatrixElt {
    let mut p = MatrixElt::zeros(dim);
    for k in 0..dim / 2 {
        p.set(k, k, num_complex::Complex64::new(1.0, 0.0));
    }
    p
}

fn contraction_instance(cfg: &RunConfig, i: usize) -> ContractionInstance {
    let mut rng = rng_for(cfg, 10, i);
    ContractionInstance {
        c: random_contraction(cfg.dim, &mut rng),
        p: half_projection(cfg.dim),
    }
}

fn b_list_instance(cfg: &RunConfig, i: usize) -> BListInstance {
    let mut rng = rng_for(cfg, 14, i);
    let k = rng.index(1, 4);
    let mut b: Vec<MatrixElt> = (0..k)
        .map(|_| gaussian_with_norm(cfg.dim, rng.uniform(0.1, 1.5), &mut rng))
        .collect();
    if i.is_multiple_of(2) {
        // even instances are moved onto the kernel
        let sum: num_complex::Complex64 = b.iter().map(|m| m.trace()).sum();
        let m = rng.index(0, 4) as f64 - 2.0;
        let shift = (num_complex::Complex64::new(0.0, 2.0 * std::f64::consts::PI * m) - sum) / cfg.dim as f64;
        let last = b.last_mut().expect("nonempty");
        *last = &*last + &MatrixElt::identity(cfg.dim).scale(shift);
    }
    BListInstance { b }
}

fn instance(cfg: &RunConfig, kind: InstanceKind) -> Result<Outcome> {
    let n = cfg.trials;
    let list: Vec<Value> = match kind {
        InstanceKind::SkewPair => (0..n)
            .map(|i| {
                let mut rng = rng_for(cfg, 4, i);
                let x = random_skew(cfg.dim, cfg.radius, &mut rng);
                let y = random_skew(cfg.dim, cfg.radius, &mut rng);
                json!({ "x": x, "y": y })
            })
            .collect(),
        InstanceKind::SquareZero => (0..n)
            .map(|i| square_zero_instance(cfg, i).map(|v| json!(v)))
            .collect::<Result<_>>()?,
        InstanceKind::Pair => (0..n).map(|i| json!(pair_instance(cfg, i, 1.0))).collect(),
        InstanceKind::Contraction => (0..n).map(|i| json!(contraction_instance(cfg, i))).collect(),
        InstanceKind::BList => (0..n).map(|i| json!(b_list_instance(cfg, i))).collect(),
    };
    let kind_name = format!("{kind:?}");
    Ok((
        vec![Check::at_least("instances generated", "", list.len() as f64, n as f64)],
        json!({ "kind": kind_name, "instances": list }),
        Vec::new(),
    ))
}

/// Checks shared by every factorization command.
fn certificate_checks(label: &str, certs: &[FactorCertificate], lines: &mut Vec<String>) -> Vec<Check> {
    let reports: Vec<_> = certs.par_iter().map(verify_certificate).collect();
    let ratio = worst(reports.iter().map(|r| r.residual / r.tolerance));
    let failing: Vec<&str> = reports
        .iter()
        .filter(|r| !r.pass)
        .flat_map(|r| r.failures.iter().map(String::as_str))
        .collect();
    for f in failing.iter().take(5) {
        lines.push(format!("verifier: {f}"));
    }
    let anchor = match label {
        "unipotent" => "1 + x = (u, v), x^2 = 0",
        "comm-n2" => "[c,d] = y_1 + ... + y_K, y_i^2 = 0",
        "comm-p" => "[c*,c] = sum eps_i p_i",
        _ => "e^{[c,d]} ~ product of (h, e^{a/n})",
    };
    vec![
        Check::at_most("independent residual / advertised tolerance", anchor, ratio, 1.0),
        Check::at_most(
            "certificates failing verification",
            anchor,
            reports.iter().filter(|r| !r.pass).count() as f64,
            0.0,
        ),
        Check::at_most(
            "max square-zero defect",
            "z^2 = 0",
            worst(reports.iter().map(|r| r.max_square_zero_defect)),
            1e-10,
        ),
        Check::at_most(
            "max projection defect",
            "p^2 = p = p*",
            worst(reports.iter().map(|r| r.max_projection_defect)),
            1e-10,
        ),
    ]
}

fn factor(cfg: &RunConfig, kind: &FactorKind) -> Result<Outcome> {
    let n = cfg.trials;
    let (label, certs, extra): (&str, Vec<FactorCertificate>, Value) = match kind {
        FactorKind::Unipotent { input } => {
            let inst: Vec<SquareZeroInstance> = match input {
                Some(p) => load_instances(p)?,
                None => (0..n).map(|i| square_zero_instance(cfg, i)).collect::<Result<_>>()?,
            };
            let certs = inst
                .par_iter()
                .map(|s| unipotent_factor(&s.x))
                .collect::<Result<Vec<_>>>()?;
            ("unipotent", certs, Value::Null)
        }
        FactorKind::CommN2 { input } => {
            let inst: Vec<PairInstance> = match input {
                Some(p) => load_instances(p)?,
                None => (0..n).map(|i| pair_instance(cfg, i, 1.0)).collect(),
            };
            let out = inst
                .par_iter()
                .map(|s| commutator_to_squarezeros(&s.c, &s.d))
                .collect::<Result<Vec<_>>>()?;
            let ks: Vec<usize> = out.iter().map(|r| r.k).collect();
            let cs: Vec<f64> = out.iter().map(|r| r.c_realized).collect();
            (
                "comm-n2",
                out.into_iter().map(|r| r.certificate).collect(),
                json!({ "K": ks, "C_realized": cs }),
            )
        }
        FactorKind::CommP { input } => {
            let inst: Vec<ContractionInstance> = match input {
                Some(p) => load_instances(p)?,
                None => (0..n).map(|i| contraction_instance(cfg, i)).collect(),
            };
            let out = inst
                .par_iter()
                .map(|s| selfcomm_to_projections(&s.c, &s.p))
                .collect::<Result<Vec<_>>>()?;
            let ks: Vec<usize> = out.iter().map(|r| r.k).collect();
            (
                "comm-p",
                out.into_iter().map(|r| r.certificate).collect(),
                json!({ "K": ks }),
            )
        }
        FactorKind::ExpComm { input, steps } => {
            let inst: Vec<PairInstance> = match input {
                Some(p) => load_instances(p)?,
                None => (0..n).map(|i| pair_instance(cfg, i, 0.5)).collect(),
            };
            let out = inst
                .par_iter()
                .map(|s| exp_commutator_factor(&s.c, &s.d, *steps))
                .collect::<Result<Vec<_>>>()?;
            let dets: Vec<f64> = out
                .iter()
                .map(|r| (num_complex::Complex64::new(r.det_re, r.det_im) - 1.0).norm())
                .collect();
            (
                "exp-comm",
                out.into_iter().map(|r| r.certificate).collect(),
                json!({ "det_minus_one": dets }),
            )
        }
    };
    let mut lines = Vec::new();
    let mut checks = certificate_checks(label, &certs, &mut lines);
    if let Some(dets) = extra.get("det_minus_one").and_then(Value::as_array) {
        checks.push(Check::at_most(
            "|det(product) - 1|",
            "det (u,v) = 1",
            worst(dets.iter().filter_map(Value::as_f64)),
            cfg.tol("det"),
        ));
    }
    Ok((checks, json!({ "certificates": certs, "details": extra }), lines))
}

fn verify(path: &Path) -> Result<Outcome> {
    let certs: Vec<FactorCertificate> = {
        let v = read_json(path)?;
        let list = match v {
            Value::Array(items) => items,
            Value::Object(ref o) if o.get("data").and_then(|d| d.get("certificates")).is_some() => {
                o["data"]["certificates"].as_array().cloned().unwrap_or_default()
            }
            other => vec![other],
        };
        list.into_iter()
            .map(|item| serde_json::from_value(item).map_err(|e| Error::Format(format!("{}: {e}", path.display()))))
            .collect::<Result<_>>()?
    };
    if certs.is_empty() {
        return Err(Error::Format(format!("{}: no certificates", path.display())));
    }
    let reports: Vec<_> = certs.par_iter().map(verify_certificate).collect();
    let mut lines = Vec::new();
    for (i, r) in reports.iter().enumerate() {
        for f in &r.failures {
            lines.push(format!("certificate {i} ({}): {f}", r.construction));
        }
    }
    let checks = vec![
        Check::at_most(
            "independent residual / advertised tolerance",
            "certificate re-evaluation",
            worst(reports.iter().map(|r| r.residual / r.tolerance)),
            1.0,
        ),
        Check::at_most(
            "certificates failing verification",
            "certificate re-evaluation",
            reports.iter().filter(|r| !r.pass).count() as f64,
            0.0,
        ),
    ];
    Ok((checks, json!({ "reports": reports }), lines))
}

fn dhs_check(cfg: &RunConfig, input: Option<&Path>) -> Result<Outcome> {
    let inst: Vec<BListInstance> = match input {
        Some(p) => load_instances(p)?,
        None => (0..cfg.trials).map(|i| b_list_instance(cfg, i)).collect(),
    };
    let reports = inst
        .par_iter()
        .map(|b| dhs_kernel_check(&b.b))
        .collect::<Result<Vec<_>>>()?;
    let disagree = reports
        .iter()
        .filter(|r| r.in_kernel != ((r.det - 1.0).norm() <= cfg.tol("dhs")))
        .count();
    Ok((
        vec![Check::at_most(
            "verdicts disagreeing with |det - 1| <= tol",
            "e^{b_1}...e^{b_k} in (G,G) iff sum tr b_i in 2 pi i Z",
            disagree as f64,
            0.0,
        )],
        json!({ "reports": reports }),
        Vec::new(),
    ))
}

fn run_acceptance(cfg: &RunConfig, only: &[usize]) -> Result<Outcome> {
    let ids: Vec<usize> = if only.is_empty() {
        (1..=CRITERIA.len()).collect()
    } else {
        only.to_vec()
    };
    if let Some(bad) = ids.iter().find(|i| !(1..=CRITERIA.len()).contains(*i)) {
        return Err(Error::Config(format!(
            "no criterion {bad}; criteria are 1 to {}",
            CRITERIA.len()
        )));
    }
    let mut checks = Vec::new();
    let mut lines = Vec::new();
    let mut data = Vec::new();
    for id in ids {
        let c = acceptance::run_criterion(id, cfg);
        lines.push(c.line());
        for mut k in c.checks.clone() {
            k.name = format!("{id}: {}", k.name);
            checks.push(k);
        }
        data.push(c);
    }
    Ok((checks, json!({ "criteria": data }), lines))
}
