use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::MatrixElt;

/// An invertible element named inside a certificate.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Factor {
    Matrix {
        m: MatrixElt,
    },
    /// `e^b`.
    Exp {
        b: MatrixElt,
    },
    /// `(u, v) = u v u^{-1} v^{-1}`.
    Commutator {
        u: Box<Factor>,
        v: Box<Factor>,
    },
}

impl Factor {
    pub fn matrix(m: MatrixElt) -> Factor {
        Factor::Matrix { m }
    }

    pub fn exp(b: MatrixElt) -> Factor {
        Factor::Exp { b }
    }

    pub fn commutator(u: Factor, v: Factor) -> Factor {
        Factor::Commutator {
            u: Box::new(u),
            v: Box::new(v),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Factor::Matrix { m } => m.dim(),
            Factor::Exp { b } => b.dim(),
            Factor::Commutator { u, .. } => u.dim(),
        }
    }

    /// Nesting depth of commutators.
    pub fn depth(&self) -> usize {
        match self {
            Factor::Commutator { u, v } => 1 + u.depth().max(v.depth()),
            _ => 0,
        }
    }

    pub(crate) fn value(&self) -> Result<MatrixElt> {
        match self {
            Factor::Matrix { m } => Ok(m.clone()),
            Factor::Exp { b } => b.exp(),
            Factor::Commutator { u, v } => u.value()?.group_commutator(&v.value()?),
        }
    }
}

/// One summand or factor of a certificate.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "atom", rename_all = "snake_case")]
pub enum Atom {
    /// `(u, v)`.
    Commutator { u: Factor, v: Factor },
    /// `g a g^{-1}` for the value `a` of `inner`.
    Conjugate { g: MatrixElt, inner: Box<Atom> },
    /// `e^b`.
    Exp { b: MatrixElt },
    /// `1 + z` with `z^2 = 0`.
    Unipotent { z: MatrixElt },
    /// `sign * p` with `p` an orthogonal projection.
    SignedProjection { sign: i8, p: MatrixElt },
    /// `z` with `z^2 = 0`.
    SquareZero { z: MatrixElt },
}

impl Atom {
    pub fn dim(&self) -> usize {
        match self {
            Atom::Commutator { u, .. } => u.dim(),
            Atom::Conjugate { g, .. } => g.dim(),
            Atom::Exp { b } => b.dim(),
            Atom::Unipotent { z } | Atom::SquareZero { z } => z.dim(),
            Atom::SignedProjection { p, .. } => p.dim(),
        }
    }

    pub(crate) fn value(&self) -> Result<MatrixElt> {
        match self {
            Atom::Commutator { u, v } => u.value()?.group_commutator(&v.value()?),
            Atom::Conjugate { g, inner } => Ok(&(g * &inner.value()?) * &g.inverse()?),
            Atom::Exp { b } => b.exp(),
            Atom::Unipotent { z } => Ok(&MatrixElt::identity(z.dim()) + z),
            Atom::SignedProjection { sign, p } => Ok(p.scale_re(f64::from(*sign))),
            Atom::SquareZero { z } => Ok(z.clone()),
        }
    }
}

/// How the atoms combine into the target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClaimedIdentity {
    ProductEqualsTarget,
    SumEqualsTarget,
}

impl fmt::Display for ClaimedIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClaimedIdentity::ProductEqualsTarget => "product-equals-target",
            ClaimedIdentity::SumEqualsTarget => "sum-equals-target",
        })
    }
}

/// Atoms whose product or sum reproduces `target` to within `residual`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FactorCertificate {
    pub construction: String,
    pub target: MatrixElt,
    pub atoms: Vec<Atom>,
    pub claimed_identity: ClaimedIdentity,
    /// `||combine(atoms) - target||` measured when the certificate was sealed.
    pub residual: f64,
    /// Advertised bound on `residual`.
    pub tolerance: f64,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

/// Combine atom values according to `identity`.
pub(crate) fn combine(atoms: &[Atom], identity: ClaimedIdentity, dim: usize) -> Result<MatrixElt> {
    match identity {
        ClaimedIdentity::ProductEqualsTarget => {
            let mut acc = MatrixElt::identity(dim);
            for a in atoms {
                acc = &acc * &a.value()?;
            }
            Ok(acc)
        }
        ClaimedIdentity::SumEqualsTarget => {
            let mut acc = MatrixElt::zeros(dim);
            for a in atoms {
                acc += &a.value()?;
            }
            Ok(acc)
        }
    }
}

impl FactorCertificate {
    /// Evaluate the atoms, record the residual and fail if it exceeds `tolerance`.
    pub fn seal(
        construction: &str,
        target: MatrixElt,
        atoms: Vec<Atom>,
        claimed_identity: ClaimedIdentity,
        tolerance: f64,
    ) -> Result<FactorCertificate> {
        if let Some(a) = atoms.iter().find(|a| a.dim() != target.dim()) {
            return Err(Error::DimensionMismatch(a.dim(), target.dim()));
        }
        let residual = combine(&atoms, claimed_identity, target.dim())?.dist(&target);
        if !(residual <= tolerance) {
            return Err(Error::Precondition(format!(
                "{construction} certificate residual {residual:e} exceeds {tolerance:e}"
            )));
        }
        Ok(FactorCertificate {
            construction: construction.to_string(),
            target,
            atoms,
            claimed_identity,
            residual,
            tolerance,
            metadata: BTreeMap::new(),
        })
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> FactorCertificate {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<FactorCertificate> {
        Ok(serde_json::from_str(s)?)
    }
}
