//! Command-line front end: configuration, instance generation, reports and
//! the acceptance suite.

pub mod acceptance;
mod commands;
mod config;
mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::{RunConfig, DEFAULT_TOLERANCES};
pub use report::{Check, Report};

use crate::bch::SplitMode;
use crate::error::{Error, Result};

/// Exit status of [`run`].
pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "kvcert",
    version,
    about = "Free Lie algebra series, KV flow and certified matrix factorizations"
)]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// Truncation degree N, in [2, 12].
    #[arg(long, global = true)]
    degree: Option<usize>,
    /// Split mode: first-letter or symmetric.
    #[arg(long, global = true)]
    split: Option<SplitMode>,
    /// Evaluation radius for random inputs.
    #[arg(long, global = true)]
    radius: Option<f64>,
    /// Matrix dimension, in [2, 16].
    #[arg(long, global = true)]
    dim: Option<usize>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON file with RunConfig fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// The BCH series log(e^X e^Y) up to the configured degree.
    Bch,
    /// Kashiwara-Vergne flow solutions.
    Kv {
        #[command(subcommand)]
        cmd: KvCommand,
    },
    /// Certified factorizations of random or given instances.
    Factor {
        #[command(subcommand)]
        kind: FactorKind,
    },
    /// Re-verify certificates from a file.
    Verify {
        #[arg(long)]
        cert: PathBuf,
    },
    /// Trace condition for products of exponentials.
    DhsCheck {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Run the acceptance suite.
    Acceptance {
        /// Run only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
    /// Generate random instances as JSON input for other commands.
    Instance {
        #[arg(value_enum)]
        kind: InstanceKind,
    },
}

#[derive(Subcommand, Debug)]
enum KvCommand {
    /// Solve for R, S.
    Solve {
        #[arg(long, value_enum, default_value = "recursion")]
        solver: SolverArg,
        /// Runge-Kutta steps for the ODE solver.
        #[arg(long, default_value_t = 1000)]
        steps: usize,
    },
    /// Check e^{x+y} = (e^R e^x e^{-R})(e^S e^y e^{-S}) on random skew pairs.
    Verify {
        /// A solution file or a `kv solve` report; solved afresh if absent.
        #[arg(long)]
        solution: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum FactorKind {
    /// 1 + x for square-zero x as a commutator.
    Unipotent {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// [c, d] as a sum of square-zero matrices.
    CommN2 {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// [c*, c] as a signed sum of projections.
    CommP {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// e^{[c, d]} approximated by a product of commutators.
    ExpComm {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 400)]
        steps: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SolverArg {
    Recursion,
    Ode,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum InstanceKind {
    SkewPair,
    SquareZero,
    Pair,
    Contraction,
    BList,
}

/// Pull `--tol-<name> <value>` and `--tol-<name>=<value>` out of the
/// argument list.
type Overrides = Vec<(String, f64)>;

fn extract_tolerances(args: Vec<OsString>) -> Result<(Vec<OsString>, Overrides)> {
    let mut rest = Vec::new();
    let mut tols = Vec::new();
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let Some(s) = a.to_str().and_then(|s| s.strip_prefix("--tol-")) else {
            rest.push(a);
            continue;
        };
        let (name, value) = match s.split_once('=') {
            Some((n, v)) => (n.to_string(), v.to_string()),
            None => {
                let v = it
                    .next()
                    .and_then(|v| v.into_string().ok())
                    .ok_or_else(|| Error::Config(format!("--tol-{s} needs a value")))?;
                (s.to_string(), v)
            }
        };
        if !DEFAULT_TOLERANCES.iter().any(|(k, _)| *k == name) {
            let known: Vec<&str> = DEFAULT_TOLERANCES.iter().map(|(k, _)| *k).collect();
            return Err(Error::Config(format!(
                "unknown tolerance --tol-{name}; known: {}",
                known.join(", ")
            )));
        }
        let v: f64 = value
            .parse()
            .map_err(|_| Error::Config(format!("--tol-{name}: cannot parse {value:?}")))?;
        tols.push((name, v));
    }
    Ok((rest, tols))
}

fn resolve_config(flags: &Flags, tols: Overrides) -> Result<RunConfig> {
    let mut cfg = match &flags.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = flags.degree {
        cfg.degree = v;
    }
    if let Some(v) = flags.split {
        cfg.split = v;
    }
    if let Some(v) = flags.radius {
        cfg.radius = v;
    }
    if let Some(v) = flags.dim {
        cfg.dim = v;
    }
    if let Some(v) = flags.trials {
        cfg.trials = v;
    }
    if let Some(v) = flags.seed {
        cfg.seed = v;
    }
    if let Some(v) = flags.threads {
        cfg.threads = v;
    }
    if let Some(v) = &flags.out {
        cfg.out = Some(v.clone());
    }
    cfg.tolerances.extend(tols);
    cfg.validate()?;
    Ok(cfg)
}

fn command_name(cmd: &Command) -> String {
    match cmd {
        Command::Bch => "bch".into(),
        Command::Kv {
            cmd: KvCommand::Solve { .. },
        } => "kv solve".into(),
        Command::Kv {
            cmd: KvCommand::Verify { .. },
        } => "kv verify".into(),
        Command::Factor { kind } => format!(
            "factor {}",
            match kind {
                FactorKind::Unipotent { .. } => "unipotent",
                FactorKind::CommN2 { .. } => "comm-n2",
                FactorKind::CommP { .. } => "comm-p",
                FactorKind::ExpComm { .. } => "exp-comm",
            }
        ),
        Command::Verify { .. } => "verify".into(),
        Command::DhsCheck { .. } => "dhs-check".into(),
        Command::Acceptance { .. } => "acceptance".into(),
        Command::Instance { .. } => "instance".into(),
    }
}

/// Parse `args` (including the program name), run the command, write the
/// JSON report to `stdout` or `--out` and a summary to `stderr`.
/// Returns the exit status.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let (args, tols) = match extract_tolerances(args) {
        Ok(v) => v,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let cfg = match resolve_config(&cli.flags, tols) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: thread pool: {e}");
            return EXIT_USAGE;
        }
    };
    let name = command_name(&cli.command);
    let start = Instant::now();
    let outcome = pool.install(|| commands::dispatch(&cli.command, &cfg));
    let (checks, data, lines) = match outcome {
        Ok(v) => v,
        Err(e @ (Error::Config(_) | Error::Format(_) | Error::Json(_) | Error::Io(_))) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
        Err(e) => (
            vec![Check::holds(&format!("error: {e}"), "", false)],
            serde_json::Value::Null,
            Vec::new(),
        ),
    };
    let report = Report::new(&name, &cfg, checks, data, start.elapsed().as_secs_f64());
    let json = report.to_json();
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, json + "\n").map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => writeln!(stdout, "{json}").map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_USAGE;
    }
    for l in lines {
        let _ = writeln!(stderr, "{l}");
    }
    let _ = write!(stderr, "{}", report.summary());
    if report.pass {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAILED
    }
}

/// [`run_with`] on the process streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn tolerance_flags() {
        let (rest, tols) = extract_tolerances(os(&["kvcert", "--tol-det=1e-6", "bch", "--tol-dhs", "2e-9"])).unwrap();
        assert_eq!(rest, os(&["kvcert", "bch"]));
        assert_eq!(tols, vec![("det".to_string(), 1e-6), ("dhs".to_string(), 2e-9)]);
        assert!(extract_tolerances(os(&["kvcert", "--tol-nope=1"])).is_err());
        assert!(extract_tolerances(os(&["kvcert", "--tol-det"])).is_err());
        assert!(extract_tolerances(os(&["kvcert", "--tol-det", "abc"])).is_err());
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"degree": 5, "dim": 3, "tolerances": {"det": 1e-6}}"#).unwrap();
        let flags = Flags {
            degree: Some(6),
            config: Some(path),
            ..Default::default()
        };
        let cfg = resolve_config(&flags, vec![("det".into(), 1e-7)]).unwrap();
        assert_eq!(cfg.degree, 6);
        assert_eq!(cfg.dim, 3);
        assert_eq!(cfg.tol("det"), 1e-7);
        assert_eq!(cfg.seed, RunConfig::default().seed);
    }
}
