//! Explicit joint distributions over the 2^m elementary events of m
//! propositions, the linear constraints rules impose on them, and the
//! maximum-entropy / minimum-cross-entropy solver.
//!
//! Event index `i` encodes a truth assignment: bit `j` of `i` is the truth
//! value of proposition `j`.

mod constraints;
mod solver;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rules::{CompiledFormula, Formula};

pub use constraints::{
    compile_constraints, event_constraint, evidence_constraints, ConstraintOrigin, LinearConstraint,
};
pub use solver::{max_entropy, min_cross_entropy, Objective, SolverOptions, SolverReport};

/// Default upper bound on the number of propositions (about a million events).
pub const DEFAULT_PROP_CAP: usize = 20;

const SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JointError {
    #[error("a joint distribution needs at least one proposition")]
    NoPropositions,
    #[error("{m} propositions exceed the cap of {cap}")]
    TooManyPropositions { m: usize, cap: usize },
    #[error("expected {expected} weights, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("weights sum to {sum}, not 1")]
    NotNormalized { sum: f64 },
    #[error("negative or non-finite weight {weight} at event {event}")]
    BadWeight { event: usize, weight: f64 },
    #[error("unknown proposition `{0}`")]
    UnknownProposition(String),
    #[error("cross-entropy undefined: event {event} has mass in p but none in q")]
    SupportViolation { event: usize },
    #[error("proposition lists differ")]
    PropositionMismatch,
    #[error("infeasible constraints ({}); max residual {residual:e}", .violated.join("; "))]
    Infeasible { violated: Vec<String>, residual: f64 },
    #[error("constraints need mass on events the prior excludes ({})", .violated.join("; "))]
    SupportConflict { violated: Vec<String> },
    #[error("no convergence after {iterations} iterations (max residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("malformed joint CSV: {0}")]
    Csv(String),
}

/// A full joint distribution over `props`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    props: Vec<String>,
    weights: Vec<f64>,
}

fn check_size(m: usize, cap: usize) -> Result<usize, JointError> {
    if m == 0 {
        return Err(JointError::NoPropositions);
    }
    if m > cap || m >= usize::BITS as usize {
        return Err(JointError::TooManyPropositions { m, cap });
    }
    Ok(1usize << m)
}

/// The uniform distribution, every weight `2^-m`.
pub fn uniform_joint(props: &[String], cap: usize) -> Result<JointDistribution, JointError> {
    let n = check_size(props.len(), cap)?;
    Ok(JointDistribution { props: props.to_vec(), weights: vec![1.0 / n as f64; n] })
}

impl JointDistribution {
    pub fn new(props: Vec<String>, weights: Vec<f64>) -> Result<Self, JointError> {
        let n = check_size(props.len(), usize::BITS as usize - 1)?;
        if weights.len() != n {
            return Err(JointError::LengthMismatch { expected: n, got: weights.len() });
        }
        if let Some((event, &weight)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
            return Err(JointError::BadWeight { event, weight });
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(JointError::NotNormalized { sum });
        }
        Ok(JointDistribution { props, weights })
    }

    pub(crate) fn from_parts_unchecked(props: Vec<String>, weights: Vec<f64>) -> Self {
        JointDistribution { props, weights }
    }

    pub fn props(&self) -> &[String] {
        &self.props
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.props.iter().position(|p| p == name)
    }

    pub fn compile(&self, f: &Formula) -> Result<CompiledFormula, JointError> {
        f.compile(&|n| self.index_of(n)).map_err(JointError::UnknownProposition)
    }

    /// Probability of the event set where `f` holds.
    pub fn marginal(&self, f: &Formula) -> Result<f64, JointError> {
        let c = self.compile(f)?;
        Ok(self.weights.iter().enumerate().filter(|(i, _)| c.eval(*i)).fold(0.0, |acc, (_, w)| acc + w))
    }

    /// `P(f | g)`, or `None` when `P(g) = 0`.
    pub fn conditional(&self, f: &Formula, g: &Formula) -> Result<Option<f64>, JointError> {
        let (cf, cg) = (self.compile(f)?, self.compile(g)?);
        let (mut both, mut given) = (0.0, 0.0);
        for (i, w) in self.weights.iter().enumerate() {
            if cg.eval(i) {
                given += w;
                if cf.eval(i) {
                    both += w;
                }
            }
        }
        Ok((given > 0.0).then(|| both / given))
    }

    /// Marginal probability of every single proposition.
    pub fn marginals(&self) -> BTreeMap<String, f64> {
        let mut acc = vec![0.0; self.props.len()];
        for (i, w) in self.weights.iter().enumerate() {
            for (j, a) in acc.iter_mut().enumerate() {
                if i >> j & 1 == 1 {
                    *a += w;
                }
            }
        }
        self.props.iter().cloned().zip(acc).collect()
    }

    /// Shannon entropy in nats, with `0 ln 0 = 0`.
    pub fn entropy(&self) -> f64 {
        entropy(&self.weights)
    }

    /// `sum p ln(p/q)` for `p = self`.
    pub fn cross_entropy(&self, q: &JointDistribution) -> Result<f64, JointError> {
        if self.props != q.props {
            return Err(JointError::PropositionMismatch);
        }
        cross_entropy(&self.weights, &q.weights)
    }

    /// CSV with one column per proposition (0/1) and a `weight` column printed
    /// with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for p in &self.props {
            out.push_str(p);
            out.push(',');
        }
        out.push_str("weight\n");
        for (i, w) in self.weights.iter().enumerate() {
            for j in 0..self.props.len() {
                out.push(if i >> j & 1 == 1 { '1' } else { '0' });
                out.push(',');
            }
            let _ = writeln!(out, "{w:.16e}");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, JointError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| JointError::Csv("empty input".into()))?;
        let mut cols: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        if cols.pop().as_deref() != Some("weight") {
            return Err(JointError::Csv("last column must be `weight`".into()));
        }
        let n = check_size(cols.len(), usize::BITS as usize - 1)?;
        let mut weights = vec![f64::NAN; n];
        for (row, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != cols.len() + 1 {
                return Err(JointError::Csv(format!("row {} has {} fields", row + 2, fields.len())));
            }
            let mut idx = 0usize;
            for (j, f) in fields[..cols.len()].iter().enumerate() {
                match *f {
                    "1" => idx |= 1 << j,
                    "0" => {}
                    other => return Err(JointError::Csv(format!("row {}: truth value `{other}`", row + 2))),
                }
            }
            weights[idx] =
                fields[cols.len()].parse().map_err(|_| JointError::Csv(format!("row {}: bad weight", row + 2)))?;
        }
        if weights.iter().any(|w| w.is_nan()) {
            return Err(JointError::Csv("missing events".into()));
        }
        JointDistribution::new(cols, weights)
    }
}

pub(crate) fn entropy(w: &[f64]) -> f64 {
    -w.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

pub(crate) fn cross_entropy(p: &[f64], q: &[f64]) -> Result<f64, JointError> {
    let mut total = 0.0;
    for (event, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi > 0.0 {
            if qi <= 0.0 {
                return Err(JointError::SupportViolation { event });
            }
            total += pi * (pi / qi).ln();
        }
    }
    Ok(total.max(0.0))
}
