//! Single-rule sensitivity sweeps.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{maxent_prior, posterior, HarnessError};
use crate::engines::{
    conj, disj, modus_ponens, mycin_modus_ponens, propagate, EngineKind, MycinAttenuation, PropagationOptions,
};
use crate::joint::{JointDistribution, SolverOptions};
use crate::rules::{parse_ruleset, Evidence, RuleSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepOp {
    /// `P(A or B)`.
    Disj,
    /// `P(A & B)`.
    Conj,
    /// `P(B)` from `P(A)` and `P(B | A)`.
    ModusPonens,
    /// `P(C)` from `P(C | A & B)`, `P(A)` and `P(B)`, including the MaxEnt
    /// reference.
    TwoAntecedent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVar {
    PA,
    PB,
    Strength,
}

impl SweepVar {
    pub fn label(self) -> &'static str {
        match self {
            SweepVar::PA => "p(A)",
            SweepVar::PB => "p(B)",
            SweepVar::Strength => "p",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { start: 0.0, stop: 1.0, step: 0.01 }
    }
}

impl Grid {
    pub fn points(&self) -> Result<Vec<f64>, HarnessError> {
        let Grid { start, stop, step } = *self;
        if !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&stop) || start > stop {
            return Err(HarnessError::Sweep(format!("grid [{start}, {stop}] must lie in [0, 1] with start <= stop")));
        }
        if step.is_nan() || step <= 0.0 {
            return Err(HarnessError::Sweep(format!("grid step {step} must be positive")));
        }
        // Index-based so the end point survives rounding.
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| (start + i as f64 * step).min(stop)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub op: SweepOp,
    pub var: SweepVar,
    pub p_a: f64,
    pub p_b: f64,
    pub strength: f64,
    pub grid: Grid,
    /// Mycin curves for modus-ponens sweeps, one per shared prior.
    pub mycin_priors: Vec<f64>,
    pub attenuation: MycinAttenuation,
    pub solver: SolverOptions,
}

impl SweepSpec {
    pub fn new(op: SweepOp, var: SweepVar) -> Self {
        SweepSpec {
            op,
            var,
            p_a: 0.5,
            p_b: 0.5,
            strength: 0.5,
            grid: Grid::default(),
            mycin_priors: vec![0.1, 0.3, 0.5],
            attenuation: MycinAttenuation::default(),
            solver: SolverOptions::default(),
        }
    }

    fn at(&self, x: f64) -> (f64, f64, f64) {
        match self.var {
            SweepVar::PA => (x, self.p_b, self.strength),
            SweepVar::PB => (self.p_a, x, self.strength),
            SweepVar::Strength => (self.p_a, self.p_b, x),
        }
    }
}

/// Preset sweeps for the seven single-rule figures.
pub fn figure(n: u8) -> Result<SweepSpec, HarnessError> {
    let mut s = match n {
        1 => SweepSpec::new(SweepOp::Disj, SweepVar::PA),
        2 => SweepSpec::new(SweepOp::Conj, SweepVar::PA),
        3 | 4 => SweepSpec::new(SweepOp::ModusPonens, if n == 3 { SweepVar::Strength } else { SweepVar::PA }),
        5..=7 => SweepSpec::new(SweepOp::TwoAntecedent, if n == 7 { SweepVar::PA } else { SweepVar::Strength }),
        _ => return Err(HarnessError::Sweep(format!("no preset for figure {n} (expected 1-7)"))),
    };
    match n {
        1 => s.p_b = 0.4,
        2 => s.p_b = 0.6,
        3 => s.p_a = 0.4,
        4 => s.strength = 0.3,
        5 => (s.p_a, s.p_b) = (0.7, 0.8),
        6 => (s.p_a, s.p_b) = (0.2, 0.3),
        _ => (s.strength, s.p_b) = (0.3, 0.6),
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub curve: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveTable {
    pub x_label: String,
    pub rows: Vec<CurvePoint>,
}

impl CurveTable {
    /// Values of one curve, in grid order.
    pub fn curve(&self, name: &str) -> Vec<(f64, f64)> {
        self.rows.iter().filter(|r| r.curve == name).map(|r| (r.x, r.value)).collect()
    }

    pub fn curves(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.curve) {
                out.push(r.curve.clone());
            }
        }
        out
    }

    /// `x,engine,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,engine,value\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.x, r.curve, r.value));
        }
        out
    }
}

pub const TWO_ANTECEDENT_RULE: &str = "prop A leaf; prop B leaf; prop C goal";

fn two_antecedent_rules(strength: f64) -> RuleSet {
    parse_ruleset(&format!("{TWO_ANTECEDENT_RULE}; P(C | A & B) = {strength}")).expect("template parses")
}

struct TwoAntecedentPrior {
    rules: RuleSet,
    prior: JointDistribution,
    marginals: BTreeMap<String, f64>,
}

fn two_antecedent_point(
    spec: &SweepSpec,
    p0: &TwoAntecedentPrior,
    p_a: f64,
    p_b: f64,
) -> Result<Vec<(String, f64)>, HarnessError> {
    let ev = Evidence::new(&p0.rules, [("A", p_a), ("B", p_b)])?;
    let (p1, _) = posterior(&p0.prior, &ev, &spec.solver)?;
    let c = crate::rules::Formula::atom("C");
    let mut out = vec![("MEP".to_string(), p1.marginal(&c)?)];
    let opts = PropagationOptions { attenuation: spec.attenuation, ..Default::default() };
    for kind in [EngineKind::Ind, EngineKind::Fst, EngineKind::Mycin] {
        let t = propagate(kind, &p0.rules, &ev, &p0.marginals, &opts)?;
        out.push((kind.label().to_string(), t.point("C").expect("point verdict")));
    }
    Ok(out)
}

/// Evaluate every curve of `spec` at each grid point. Grid points run in
/// parallel; rows stay in grid order.
pub fn sweep(spec: &SweepSpec) -> Result<CurveTable, HarnessError> {
    for (what, v) in [("p(A)", spec.p_a), ("p(B)", spec.p_b), ("strength", spec.strength)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(HarnessError::Sweep(format!("{what} = {v} outside [0, 1]")));
        }
    }
    let xs = spec.grid.points()?;

    // The MaxEnt prior depends only on the strength.
    let fixed_prior = if spec.op == SweepOp::TwoAntecedent && spec.var != SweepVar::Strength {
        Some(two_antecedent_prior(spec, spec.strength)?)
    } else {
        None
    };

    let per_point: Vec<Vec<(String, f64)>> = xs
        .par_iter()
        .map(|&x| {
            let (a, b, s) = spec.at(x);
            let mut out = Vec::new();
            match spec.op {
                SweepOp::Disj | SweepOp::Conj => {
                    for kind in [EngineKind::MaxC, EngineKind::MinC, EngineKind::Ind] {
                        let v = if spec.op == SweepOp::Disj { disj(kind, a, b)? } else { conj(kind, a, b)? };
                        out.push((kind.label().to_string(), v));
                    }
                }
                SweepOp::ModusPonens => {
                    for kind in [EngineKind::MaxC, EngineKind::MinC, EngineKind::Ind] {
                        out.push((kind.label().to_string(), modus_ponens(kind, a, s, None)?));
                    }
                    for &q in &spec.mycin_priors {
                        out.push((format!("MYCIN{q}"), mycin_modus_ponens(a, q, s, q, spec.attenuation)?));
                    }
                }
                SweepOp::TwoAntecedent => {
                    out = match &fixed_prior {
                        Some(p0) => two_antecedent_point(spec, p0, a, b)?,
                        None => two_antecedent_point(spec, &two_antecedent_prior(spec, s)?, a, b)?,
                    };
                }
            }
            Ok(out)
        })
        .collect::<Result<_, HarnessError>>()?;

    let rows = xs
        .iter()
        .zip(per_point)
        .flat_map(|(&x, vals)| vals.into_iter().map(move |(curve, value)| CurvePoint { x, curve, value }))
        .collect();
    Ok(CurveTable { x_label: spec.var.label().to_string(), rows })
}

fn two_antecedent_prior(spec: &SweepSpec, strength: f64) -> Result<TwoAntecedentPrior, HarnessError> {
    let rules = two_antecedent_rules(strength);
    let (prior, _) = maxent_prior(&rules, &spec.solver)?;
    let marginals = prior.marginals();
    Ok(TwoAntecedentPrior { rules, prior, marginals })
}
