//! Rule-graph propagation from leaves to conclusions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::mycin::{cf_from_prob, mycin_combine, prob_from_cf, CertaintyFactor, MycinAttenuation};
use super::{conj, disj, modus_ponens, EngineError, EngineKind};
use crate::belief::BeliefInterval;
use crate::rules::{check_evidence_entry, Evidence, Literal, PropKind, Rule, RuleSet};

/// A point probability or a DST `[support, plausibility]` interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Point(f64),
    Interval(BeliefInterval),
}

impl Verdict {
    pub fn point(&self) -> Option<f64> {
        match self {
            Verdict::Point(p) => Some(*p),
            Verdict::Interval(_) => None,
        }
    }

    pub fn interval(&self) -> Option<BeliefInterval> {
        match self {
            Verdict::Interval(i) => Some(*i),
            Verdict::Point(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeVerdict {
    pub node: String,
    pub verdict: Verdict,
}

/// Where a node's value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeOrigin {
    Evidence,
    /// Leaf without evidence, filled in by [`MissingLeafPolicy`].
    Default,
    Derived,
}

/// One rule's contribution to its consequent.
///
/// Values are probabilities for the probabilistic engines, certainty factors
/// for Mycin and intervals for DST.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleFiring {
    pub rule: usize,
    pub text: String,
    pub antecedent: Verdict,
    pub output: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeTrace {
    pub node: String,
    pub kind: PropKind,
    pub origin: NodeOrigin,
    pub firings: Vec<RuleFiring>,
    /// Final certainty factor (Mycin only).
    pub cf: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationTrace {
    pub engine: EngineKind,
    /// Every proposition, in topological order.
    pub nodes: Vec<NodeTrace>,
    /// Rules the engine could not use, and similar remarks.
    pub notices: Vec<String>,
}

impl PropagationTrace {
    pub fn node(&self, name: &str) -> Option<&NodeTrace> {
        self.nodes.iter().find(|n| n.node == name)
    }

    pub fn verdict(&self, name: &str) -> Option<Verdict> {
        self.node(name).map(|n| n.verdict)
    }

    pub fn point(&self, name: &str) -> Option<f64> {
        self.verdict(name).and_then(|v| v.point())
    }

    pub fn verdicts(&self) -> Vec<NodeVerdict> {
        self.nodes.iter().map(|n| NodeVerdict { node: n.node.clone(), verdict: n.verdict }).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    /// `engine,node,kind,origin,point,support,plausibility,cf,rules`, one row
    /// per node; empty cells for fields an engine does not produce.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("engine,node,kind,origin,point,support,plausibility,cf,rules\n");
        for n in &self.nodes {
            let (point, a, b) = match n.verdict {
                Verdict::Point(p) => (p.to_string(), String::new(), String::new()),
                Verdict::Interval(i) => (String::new(), i.support.to_string(), i.plausibility.to_string()),
            };
            let origin = match n.origin {
                NodeOrigin::Evidence => "evidence",
                NodeOrigin::Default => "default",
                NodeOrigin::Derived => "derived",
            };
            let rules: Vec<String> = n.firings.iter().map(|f| f.rule.to_string()).collect();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                self.engine,
                n.node,
                n.kind.keyword(),
                origin,
                point,
                a,
                b,
                n.cf.map(|c| c.to_string()).unwrap_or_default(),
                rules.join(" ")
            ));
        }
        out
    }
}

/// Value given to a leaf that has no evidence.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum MissingLeafPolicy {
    /// The leaf's prior marginal (CF 0 for Mycin).
    #[default]
    Prior,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PropagationOptions {
    pub attenuation: MycinAttenuation,
    pub missing_leaf: MissingLeafPolicy,
}

struct Plan<'a> {
    order: Vec<usize>,
    /// Propagatable rules concluding each proposition, with their indices.
    incoming: Vec<Vec<(usize, &'a Rule, Vec<Literal>)>>,
    notices: Vec<String>,
}

fn plan<'a>(rs: &'a RuleSet, ev: &Evidence) -> Result<Plan<'a>, EngineError> {
    rs.check_propagation()?;
    for (name, &p) in &ev.values {
        check_evidence_entry(rs, name, p, None)?;
    }
    let order = rs.topological_order()?;
    let mut incoming = vec![Vec::new(); rs.propositions.len()];
    let mut notices = Vec::new();
    for (i, rule) in rs.rules.iter().enumerate() {
        match (rule.single_consequent(), rule.antecedent_literals()) {
            (Some(c), Some(lits)) if rule.antecedent.is_some() => {
                let c = rs.index_of(c).expect("validated");
                incoming[c].push((i, rule, lits));
            }
            _ => notices.push(format!("rule #{i} `{rule}` is a global statement; propagation ignores it")),
        }
    }
    Ok(Plan { order, incoming, notices })
}

fn prior_of(priors: &BTreeMap<String, f64>, node: &str) -> Result<f64, EngineError> {
    priors.get(node).copied().ok_or_else(|| EngineError::MissingPrior(node.to_string()))
}

fn named(node: &str, e: EngineError) -> EngineError {
    match e {
        EngineError::DegeneratePrior { value, .. } => EngineError::DegeneratePrior { node: node.to_string(), value },
        EngineError::ContradictoryCertainty { .. } => {
            EngineError::ContradictoryCertainty { node: Some(node.to_string()) }
        }
        e => e,
    }
}

/// Propagate case evidence through the rule graph with one engine.
///
/// `priors` maps propositions to prior marginals. Probabilistic engines only
/// read it for leaves without evidence; Mycin needs a prior for every node it
/// converts. DST delegates to [`dst_propagate`].
pub fn propagate(
    kind: EngineKind,
    rs: &RuleSet,
    ev: &Evidence,
    priors: &BTreeMap<String, f64>,
    opts: &PropagationOptions,
) -> Result<PropagationTrace, EngineError> {
    match kind {
        EngineKind::Dst => dst_propagate(rs, ev),
        EngineKind::Mycin => propagate_mycin(rs, ev, priors, opts),
        _ => propagate_probabilistic(kind, rs, ev, priors, opts),
    }
}

fn leaf_value(
    rs: &RuleSet,
    i: usize,
    ev: &Evidence,
    priors: &BTreeMap<String, f64>,
    opts: &PropagationOptions,
) -> Result<(f64, NodeOrigin), EngineError> {
    let name = &rs.propositions[i].name;
    if let Some(p) = ev.get(name) {
        return Ok((p, NodeOrigin::Evidence));
    }
    let p = match opts.missing_leaf {
        MissingLeafPolicy::Prior => prior_of(priors, name)?,
        MissingLeafPolicy::Fixed(p) => super::check_prob("default leaf value", p)?,
    };
    Ok((p, NodeOrigin::Default))
}

fn propagate_probabilistic(
    kind: EngineKind,
    rs: &RuleSet,
    ev: &Evidence,
    priors: &BTreeMap<String, f64>,
    opts: &PropagationOptions,
) -> Result<PropagationTrace, EngineError> {
    let plan = plan(rs, ev)?;
    let mut value = vec![f64::NAN; rs.propositions.len()];
    let mut nodes = Vec::with_capacity(plan.order.len());
    for &i in &plan.order {
        let prop = &rs.propositions[i];
        let (p, origin, firings) = if plan.incoming[i].is_empty() {
            let (p, origin) = leaf_value(rs, i, ev, priors, opts)?;
            (p, origin, Vec::new())
        } else {
            let mut firings = Vec::new();
            let mut combined: Option<f64> = None;
            for (r, rule, lits) in &plan.incoming[i] {
                let mut ante = 1.0;
                for lit in lits {
                    let v = value[rs.index_of(&lit.prop).expect("validated")];
                    ante = conj(kind, ante, if lit.negated { 1.0 - v } else { v })?;
                }
                let out = modus_ponens(kind, ante, rule.strength, None)?;
                combined = Some(match combined {
                    None => out,
                    Some(c) => disj(kind, c, out)?,
                });
                firings.push(RuleFiring {
                    rule: *r,
                    text: rule.to_string(),
                    antecedent: Verdict::Point(ante),
                    output: Verdict::Point(out),
                });
            }
            (combined.expect("at least one rule"), NodeOrigin::Derived, firings)
        };
        value[i] = p;
        nodes.push(NodeTrace {
            node: prop.name.clone(),
            kind: prop.kind,
            origin,
            firings,
            cf: None,
            verdict: Verdict::Point(p),
        });
    }
    Ok(PropagationTrace { engine: kind, nodes, notices: plan.notices })
}

fn propagate_mycin(
    rs: &RuleSet,
    ev: &Evidence,
    priors: &BTreeMap<String, f64>,
    opts: &PropagationOptions,
) -> Result<PropagationTrace, EngineError> {
    let plan = plan(rs, ev)?;
    let mut cf = vec![CertaintyFactor::ZERO; rs.propositions.len()];
    let mut nodes = Vec::with_capacity(plan.order.len());
    for &i in &plan.order {
        let prop = &rs.propositions[i];
        let name = prop.name.as_str();
        let prior = prior_of(priors, name)?;
        let (c, origin, firings) = if plan.incoming[i].is_empty() {
            match ev.get(name) {
                Some(p) => (cf_from_prob(p, prior).map_err(|e| named(name, e))?, NodeOrigin::Evidence, Vec::new()),
                None => {
                    let c = match opts.missing_leaf {
                        MissingLeafPolicy::Prior => CertaintyFactor::ZERO,
                        MissingLeafPolicy::Fixed(p) => cf_from_prob(p, prior).map_err(|e| named(name, e))?,
                    };
                    (c, NodeOrigin::Default, Vec::new())
                }
            }
        } else {
            let mut firings = Vec::new();
            let mut combined = CertaintyFactor::ZERO;
            for (r, rule, lits) in &plan.incoming[i] {
                let ante = lits
                    .iter()
                    .map(|lit| {
                        let c = cf[rs.index_of(&lit.prop).expect("validated")];
                        if lit.negated {
                            c.negate()
                        } else {
                            c
                        }
                    })
                    .fold(CertaintyFactor::new(1.0).expect("in range"), |a, b| if b < a { b } else { a });
                let cf_rule = cf_from_prob(rule.strength, prior).map_err(|e| named(name, e))?;
                let out = opts.attenuation.apply(cf_rule, ante);
                combined = mycin_combine(combined, out).map_err(|e| named(name, e))?;
                firings.push(RuleFiring {
                    rule: *r,
                    text: rule.to_string(),
                    antecedent: Verdict::Point(ante.value()),
                    output: Verdict::Point(out.value()),
                });
            }
            (combined, NodeOrigin::Derived, firings)
        };
        cf[i] = c;
        let p = prob_from_cf(c, prior).map_err(|e| named(name, e))?;
        nodes.push(NodeTrace {
            node: prop.name.clone(),
            kind: prop.kind,
            origin,
            firings,
            cf: Some(c.value()),
            verdict: Verdict::Point(p),
        });
    }
    Ok(PropagationTrace { engine: EngineKind::Mycin, nodes, notices: plan.notices })
}

/// DST propagation under the compatibility reading of rules.
///
/// Only exact 0/1 evidence is definitive. A rule with strength 0 or 1 whose
/// antecedent is definitely true forces its consequent; every other rule
/// excludes no joint outcome and leaves the consequent at `[0, 1]`.
pub fn dst_propagate(rs: &RuleSet, ev: &Evidence) -> Result<PropagationTrace, EngineError> {
    let plan = plan(rs, ev)?;
    let mut state: Vec<Option<bool>> = vec![None; rs.propositions.len()];
    let interval = |s: Option<bool>| match s {
        Some(true) => BeliefInterval { support: 1.0, plausibility: 1.0 },
        Some(false) => BeliefInterval { support: 0.0, plausibility: 0.0 },
        None => BeliefInterval::VACUOUS,
    };
    let mut nodes = Vec::with_capacity(plan.order.len());
    for &i in &plan.order {
        let prop = &rs.propositions[i];
        let (s, origin, firings) = if plan.incoming[i].is_empty() {
            let (s, origin) = match ev.get(&prop.name) {
                Some(1.0) => (Some(true), NodeOrigin::Evidence),
                Some(0.0) => (Some(false), NodeOrigin::Evidence),
                Some(_) => (None, NodeOrigin::Evidence),
                None => (None, NodeOrigin::Default),
            };
            (s, origin, Vec::new())
        } else {
            let mut forced: Option<bool> = None;
            let mut firings = Vec::new();
            for (r, rule, lits) in &plan.incoming[i] {
                // The antecedent is definitely true iff every literal is.
                let ante: Option<bool> = lits.iter().try_fold(true, |acc, lit| {
                    let v = state[rs.index_of(&lit.prop).expect("validated")]?;
                    Some(acc && v != lit.negated)
                });
                let definitive = rule.strength == 0.0 || rule.strength == 1.0;
                let out = match ante {
                    Some(true) if definitive => Some(rule.strength == 1.0),
                    _ => None,
                };
                if let Some(v) = out {
                    if forced.is_some_and(|f| f != v) {
                        return Err(EngineError::ConflictingEvidence { node: prop.name.clone() });
                    }
                    forced = Some(v);
                }
                firings.push(RuleFiring {
                    rule: *r,
                    text: rule.to_string(),
                    antecedent: Verdict::Interval(interval(ante)),
                    output: Verdict::Interval(interval(out)),
                });
            }
            (forced, NodeOrigin::Derived, firings)
        };
        state[i] = s;
        nodes.push(NodeTrace {
            node: prop.name.clone(),
            kind: prop.kind,
            origin,
            firings,
            cf: None,
            verdict: Verdict::Interval(interval(s)),
        });
    }
    Ok(PropagationTrace { engine: EngineKind::Dst, nodes, notices: plan.notices })
}
