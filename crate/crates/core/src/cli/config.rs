use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bch::SplitMode;
use crate::error::{Error, Result};

/// Named tolerances with their defaults.
pub const DEFAULT_TOLERANCES: [(&str, f64); 25] = [
    ("bch-residual", 1e-8),
    ("bch-coeff", 1e-12),
    ("kveasy-residual", 1e-9),
    ("kveasy-skew", 1e-10),
    ("kv1-residual", 1e-9),
    ("factorization", 1e-9),
    ("sweep-slope", 8.5),
    ("ode-agreement", 1e-7),
    ("homogeneity", 1e-8),
    ("decomposition", 1e-10),
    ("rs-skew", 1e-9),
    ("unipotent", 1e-9),
    ("unipotent-display", 1e-10),
    ("sumof5", 1e-10),
    ("square-zero", 1e-10),
    ("comm-n2", 1e-9),
    ("comm-p", 1e-9),
    ("projection", 1e-10),
    ("q-projection", 1e-11),
    ("det", 1e-10),
    ("dhs", 1e-9),
    ("dsw", 1e-12),
    ("jacobi", 1e-12),
    ("scaling", 1e-15),
    ("eval-hom", 1e-10),
];

fn default_tolerances() -> BTreeMap<String, f64> {
    DEFAULT_TOLERANCES.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Parameters shared by every subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub degree: usize,
    pub split: SplitMode,
    pub radius: f64,
    pub tolerances: BTreeMap<String, f64>,
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            degree: 8,
            split: SplitMode::FirstLetter,
            radius: 0.04,
            tolerances: default_tolerances(),
            dim: 4,
            trials: 50,
            seed: 7,
            threads: 0,
            out: None,
        }
    }
}

impl RunConfig {
    /// Read a JSON config; missing fields take their defaults and listed
    /// tolerances override the default ones individually.
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut tol = default_tolerances();
        tol.append(&mut cfg.tolerances);
        cfg.tolerances = tol;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=12).contains(&self.degree) {
            return Err(Error::Config(format!("degree {} outside [2, 12]", self.degree)));
        }
        if !(2..=16).contains(&self.dim) {
            return Err(Error::Config(format!("dim {} outside [2, 16]", self.dim)));
        }
        if !(self.radius >= 0.0 && self.radius.is_finite()) {
            return Err(Error::Config(format!(
                "radius {} must be finite and nonnegative",
                self.radius
            )));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be positive".into()));
        }
        for (name, v) in &self.tolerances {
            if !DEFAULT_TOLERANCES.iter().any(|(k, _)| k == name) {
                return Err(Error::Config(format!("unknown tolerance {name:?}")));
            }
            if !(*v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("tolerance {name} = {v} must be positive")));
            }
        }
        Ok(())
    }

    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances
            .get(name)
            .copied()
            .or_else(|| DEFAULT_TOLERANCES.iter().find(|(k, _)| *k == name).map(|(_, v)| *v))
            .unwrap_or_else(|| panic!("no tolerance named {name}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn ranges() {
        let bad = [
            RunConfig {
                degree: 1,
                ..Default::default()
            },
            RunConfig {
                degree: 13,
                ..Default::default()
            },
            RunConfig {
                dim: 1,
                ..Default::default()
            },
            RunConfig {
                dim: 17,
                ..Default::default()
            },
            RunConfig {
                radius: -1.0,
                ..Default::default()
            },
            RunConfig {
                trials: 0,
                ..Default::default()
            },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
        let mut c = RunConfig::default();
        c.tolerances.insert("det".into(), 0.0);
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.tolerances.insert("nonsense".into(), 1.0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn file_overrides_single_tolerance() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"degree": 5, "tolerances": {"det": 1e-6}}"#).unwrap();
        let c = RunConfig::from_file(&path).unwrap();
        assert_eq!(c.degree, 5);
        assert_eq!(c.tol("det"), 1e-6);
        assert_eq!(c.tol("dhs"), 1e-9);
        std::fs::write(&path, r#"{"bogus": 1}"#).unwrap();
        assert!(RunConfig::from_file(&path).is_err());
    }
}
