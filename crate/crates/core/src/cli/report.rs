use serde::Serialize;
use serde_json::Value;

use super::config::RunConfig;

/// One measured quantity compared against its threshold.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    /// The identity or property being measured.
    pub anchor: String,
    pub measured: f64,
    pub threshold: f64,
    /// `measured <= threshold` unless the check is a lower bound.
    pub lower_bound: bool,
    pub pass: bool,
}

impl Check {
    /// Passes when `measured <= threshold`; NaN never passes.
    pub fn at_most(name: &str, anchor: &str, measured: f64, threshold: f64) -> Check {
        Check {
            name: name.into(),
            anchor: anchor.into(),
            measured,
            threshold,
            lower_bound: false,
            pass: measured <= threshold,
        }
    }

    /// Passes when `measured >= threshold`.
    pub fn at_least(name: &str, anchor: &str, measured: f64, threshold: f64) -> Check {
        Check {
            name: name.into(),
            anchor: anchor.into(),
            measured,
            threshold,
            lower_bound: true,
            pass: measured >= threshold,
        }
    }

    /// A yes/no property recorded as `measured = 0` (holds) or `1` (fails).
    pub fn holds(name: &str, anchor: &str, ok: bool) -> Check {
        Check::at_most(name, anchor, if ok { 0.0 } else { 1.0 }, 0.0)
    }

    pub fn summary(&self) -> String {
        let rel = if self.lower_bound { ">=" } else { "<=" };
        format!(
            "{} {}: {:.3e} {rel} {:.3e}",
            if self.pass { "ok  " } else { "FAIL" },
            self.name,
            self.measured,
            self.threshold
        )
    }
}

/// Machine-readable result of one command.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub config: RunConfig,
    pub checks: Vec<Check>,
    pub pass: bool,
    /// Seconds.
    pub wall_time: f64,
    pub version: String,
    /// Measured values may differ in the last bits across platforms.
    pub float_note: String,
    /// Command-specific payload (series, certificates, solutions).
    #[serde(skip_serializing_if = "Value::is_null")]
    pub data: Value,
}

impl Report {
    pub fn new(command: &str, config: &RunConfig, checks: Vec<Check>, data: Value, wall_time: f64) -> Report {
        Report {
            command: command.into(),
            config: config.clone(),
            pass: checks.iter().all(|c| c.pass),
            checks,
            wall_time,
            version: env!("CARGO_PKG_VERSION").into(),
            float_note:
                "measured values are deterministic per platform; last-bit variation across platforms is possible".into(),
            data,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn summary(&self) -> String {
        let mut out = format!("{}: {}\n", self.command, if self.pass { "PASS" } else { "FAIL" });
        for c in &self.checks {
            out.push_str("  ");
            out.push_str(&c.summary());
            out.push('\n');
        }
        out.push_str(&format!("  wall time {:.2} s\n", self.wall_time));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_fails() {
        assert!(!Check::at_most("x", "", f64::NAN, 1.0).pass);
        assert!(!Check::at_least("x", "", f64::NAN, 1.0).pass);
    }

    #[test]
    fn overall_pass_is_conjunction() {
        let cfg = RunConfig::default();
        let r = Report::new(
            "t",
            &cfg,
            vec![Check::holds("a", "", true), Check::holds("b", "", false)],
            Value::Null,
            0.0,
        );
        assert!(!r.pass);
        let r = Report::new("t", &cfg, vec![Check::holds("a", "", true)], Value::Null, 0.0);
        assert!(r.pass);
        assert!(r.to_json().contains("\"version\""));
    }
}
