//! Approximate uncertain-inference engines.
//!
//! MaxC (and FST, which shares its combinators), MinC and Ind are the
//! maximum-correlation, minimum-correlation and independence regimes for
//! combining probabilities. Mycin works on certainty factors and DST on
//! support/plausibility intervals.

mod mycin;
mod propagate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::BeliefError;
use crate::rules::RuleError;

pub use mycin::{cf_from_prob, mycin_combine, mycin_modus_ponens, prob_from_cf, CertaintyFactor, MycinAttenuation};
pub use propagate::{
    dst_propagate, propagate, MissingLeafPolicy, NodeOrigin, NodeTrace, NodeVerdict, PropagationOptions,
    PropagationTrace, RuleFiring, Verdict,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EngineKind {
    MaxC,
    Fst,
    MinC,
    Ind,
    Mycin,
    Dst,
}

impl EngineKind {
    pub const ALL: [EngineKind; 6] =
        [EngineKind::MaxC, EngineKind::Fst, EngineKind::MinC, EngineKind::Ind, EngineKind::Mycin, EngineKind::Dst];

    pub fn label(self) -> &'static str {
        match self {
            EngineKind::MaxC => "MAXC",
            EngineKind::Fst => "FST",
            EngineKind::MinC => "MINC",
            EngineKind::Ind => "IND",
            EngineKind::Mycin => "MYCIN",
            EngineKind::Dst => "DST",
        }
    }

    /// Engines defined by a (conj, disj, modus ponens) triple on probabilities.
    pub fn is_probabilistic(self) -> bool {
        matches!(self, EngineKind::MaxC | EngineKind::Fst | EngineKind::MinC | EngineKind::Ind)
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for EngineKind {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "MAXC" => Ok(EngineKind::MaxC),
            "FST" => Ok(EngineKind::Fst),
            "MINC" => Ok(EngineKind::MinC),
            "IND" => Ok(EngineKind::Ind),
            "MYCIN" | "MYC" => Ok(EngineKind::Mycin),
            "DST" => Ok(EngineKind::Dst),
            _ => Err(EngineError::UnknownEngine(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("unknown engine `{0}`")]
    UnknownEngine(String),
    #[error("{what} = {value} outside [0, 1]")]
    ProbabilityOutOfRange { what: &'static str, value: f64 },
    #[error("certainty factor {0} outside [-1, 1]")]
    CfOutOfRange(f64),
    #[error("{0} has no probability combinators")]
    NotCombinator(EngineKind),
    #[error("no prior for `{0}`")]
    MissingPrior(String),
    #[error("prior {value} for `{node}` is 0 or 1; certainty factors are undefined")]
    DegeneratePrior { node: String, value: f64 },
    #[error("cannot combine certainty factors +1 and -1{}", node_suffix(.node))]
    ContradictoryCertainty { node: Option<String> },
    #[error("definitive rules force `{node}` both true and false")]
    ConflictingEvidence { node: String },
    #[error(transparent)]
    Rules(#[from] RuleError),
    #[error(transparent)]
    Belief(#[from] BeliefError),
}

fn node_suffix(node: &Option<String>) -> String {
    node.as_ref().map(|n| format!(" at `{n}`")).unwrap_or_default()
}

pub(crate) fn check_prob(what: &'static str, value: f64) -> Result<f64, EngineError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(EngineError::ProbabilityOutOfRange { what, value })
    }
}

fn probabilistic(kind: EngineKind) -> Result<(), EngineError> {
    if kind.is_probabilistic() {
        Ok(())
    } else {
        Err(EngineError::NotCombinator(kind))
    }
}

/// `P(A & B)` under the engine's correlation assumption.
pub fn conj(kind: EngineKind, a: f64, b: f64) -> Result<f64, EngineError> {
    probabilistic(kind)?;
    let (a, b) = (check_prob("pA", a)?, check_prob("pB", b)?);
    let v = match kind {
        EngineKind::MaxC | EngineKind::Fst => a.min(b),
        EngineKind::MinC => (a + b - 1.0).max(0.0),
        _ => a * b,
    };
    Ok(v.clamp(0.0, 1.0))
}

/// `P(A or B)` under the engine's correlation assumption.
pub fn disj(kind: EngineKind, a: f64, b: f64) -> Result<f64, EngineError> {
    probabilistic(kind)?;
    let (a, b) = (check_prob("pA", a)?, check_prob("pB", b)?);
    let v = match kind {
        EngineKind::MaxC | EngineKind::Fst => a.max(b),
        EngineKind::MinC => (a + b).min(1.0),
        _ => a + b - a * b,
    };
    Ok(v.clamp(0.0, 1.0))
}

/// `P(B)` from `P(A)` and the rule strength `P(B | A)`.
///
/// Mycin needs `prior_b`, which it also uses as the prior of `A`; the others
/// ignore it. DST has no point-valued modus ponens.
pub fn modus_ponens(kind: EngineKind, p_a: f64, strength: f64, prior_b: Option<f64>) -> Result<f64, EngineError> {
    let p_a = check_prob("pA", p_a)?;
    let s = check_prob("strength", strength)?;
    let v = match kind {
        EngineKind::MaxC | EngineKind::Fst => s * p_a,
        EngineKind::MinC => s * p_a + 1.0 - p_a,
        EngineKind::Ind => s * p_a + (1.0 - p_a) / 2.0,
        EngineKind::Mycin => {
            let q = prior_b.ok_or_else(|| EngineError::MissingPrior("B".into()))?;
            return mycin_modus_ponens(p_a, q, s, q, MycinAttenuation::default());
        }
        EngineKind::Dst => return Err(EngineError::NotCombinator(kind)),
    };
    Ok(v.clamp(0.0, 1.0))
}
