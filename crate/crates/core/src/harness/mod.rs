//! Experiment pipeline: a MaxEnt prior from the rules, a minimum
//! cross-entropy posterior per case, every engine's verdicts, and errors
//! against the posterior marginals.

mod reactor;
mod sweep;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::engines::{propagate, EngineError, EngineKind, PropagationOptions, PropagationTrace};
use crate::joint::{
    compile_constraints, evidence_constraints, max_entropy, min_cross_entropy, JointDistribution, JointError,
    SolverOptions, SolverReport,
};
use crate::metrics::{aggregate, ComparisonReport, ErrorSample, MetricsError, NodeClass};
use crate::rules::{Evidence, PropKind, RuleError, RuleSet};

pub use reactor::{reactor_benchmark, reactor_cases, reactor_experiment, reactor_rules, REACTOR_RULES};
pub use sweep::{figure, sweep, CurvePoint, CurveTable, Grid, SweepOp, SweepSpec, SweepVar, TWO_ANTECEDENT_RULE};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Rules(#[from] RuleError),
    #[error(transparent)]
    Joint(#[from] JointError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("invalid sweep: {0}")]
    Sweep(String),
}

/// Where engines take node priors from.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum PriorSource {
    /// Marginals of the MaxEnt prior.
    #[default]
    MaxEnt,
    /// Explicit values; nodes not listed fall back to the MaxEnt marginals.
    Fixed(BTreeMap<String, f64>),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineOptions {
    pub solver: SolverOptions,
    pub propagation: PropagationOptions,
    pub priors: PriorSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub name: String,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub rules: RuleSet,
    pub cases: Vec<Case>,
    pub engines: Vec<EngineKind>,
    pub options: PipelineOptions,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseResult {
    pub name: String,
    #[serde(skip)]
    pub posterior: JointDistribution,
    pub solver: SolverReport,
    /// Posterior marginals of every proposition.
    pub reference: BTreeMap<String, f64>,
    pub traces: Vec<PropagationTrace>,
    pub samples: Vec<ErrorSample>,
    pub report: ComparisonReport,
    /// Engines that could not run on this case, with the reason.
    pub skipped: Vec<(EngineKind, String)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineResult {
    #[serde(skip)]
    pub prior: JointDistribution,
    pub prior_solver: SolverReport,
    /// Priors handed to the engines.
    pub priors: BTreeMap<String, f64>,
    pub cases: Vec<CaseResult>,
    /// Means over every case's samples.
    pub pooled: ComparisonReport,
    pub notices: Vec<String>,
}

/// Classes present in the rule set, then their union.
pub fn report_classes(rs: &RuleSet) -> Vec<NodeClass> {
    let mut out = Vec::new();
    if rs.propositions.iter().any(|p| p.kind == PropKind::Intermediate) {
        out.push(NodeClass::Intermediate);
    }
    if rs.propositions.iter().any(|p| p.kind == PropKind::Conclusion) {
        out.push(NodeClass::Conclusion);
    }
    out.push(NodeClass::All);
    out
}

/// `p0 = MaxEnt(R)`.
pub fn maxent_prior(rs: &RuleSet, opts: &SolverOptions) -> Result<(JointDistribution, SolverReport), HarnessError> {
    let constraints = compile_constraints(rs)?;
    Ok(max_entropy(&rs.names(), &constraints, opts)?)
}

/// `p1 = MXE(p0, D)`.
pub fn posterior(
    prior: &JointDistribution,
    ev: &Evidence,
    opts: &SolverOptions,
) -> Result<(JointDistribution, SolverReport), HarnessError> {
    let mut constraints = vec![crate::joint::LinearConstraint::normalization(prior.len())];
    constraints.extend(evidence_constraints(prior.props(), ev)?);
    Ok(min_cross_entropy(prior, &constraints, opts)?)
}

/// MaxEnt over the rules and the case evidence together, for contrast with
/// the two-stage pipeline.
pub fn one_stage(
    rs: &RuleSet,
    ev: &Evidence,
    opts: &SolverOptions,
) -> Result<(JointDistribution, SolverReport), HarnessError> {
    let mut constraints = compile_constraints(rs)?;
    constraints.extend(evidence_constraints(&rs.names(), ev)?);
    Ok(max_entropy(&rs.names(), &constraints, opts)?)
}

fn engine_priors(prior: &JointDistribution, source: &PriorSource) -> BTreeMap<String, f64> {
    let mut priors = prior.marginals();
    if let PriorSource::Fixed(fixed) = source {
        for (k, v) in fixed {
            priors.insert(k.clone(), *v);
        }
    }
    priors
}

fn run_case(
    exp: &Experiment,
    case: &Case,
    prior: &JointDistribution,
    priors: &BTreeMap<String, f64>,
    classes: &[NodeClass],
) -> Result<CaseResult, HarnessError> {
    let (p1, solver) = posterior(prior, &case.evidence, &exp.options.solver)?;
    let reference = p1.marginals();
    let prior_marginals = prior.marginals();
    let mut traces = Vec::new();
    let mut samples = Vec::new();
    let mut skipped = Vec::new();
    for &engine in &exp.engines {
        let trace = match propagate(engine, &exp.rules, &case.evidence, priors, &exp.options.propagation) {
            Ok(t) => t,
            Err(e) => {
                skipped.push((engine, e.to_string()));
                continue;
            }
        };
        let mut engine_samples = Vec::new();
        let scored: Result<(), MetricsError> =
            trace.nodes.iter().filter(|n| n.kind != PropKind::Leaf).try_for_each(|n| {
                let prior =
                    if engine == EngineKind::Mycin { priors.get(&n.node) } else { prior_marginals.get(&n.node) };
                engine_samples.push(ErrorSample::new(
                    &n.node,
                    n.kind,
                    engine,
                    &n.verdict,
                    reference[&n.node],
                    prior.copied(),
                )?);
                Ok(())
            });
        match scored {
            Ok(()) => {
                samples.extend(engine_samples);
                traces.push(trace);
            }
            Err(e) => skipped.push((engine, e.to_string())),
        }
    }
    let report = aggregate(&samples, classes)?;
    Ok(CaseResult { name: case.name.clone(), posterior: p1, solver, reference, traces, samples, report, skipped })
}

/// Run the two-stage pipeline over every case. Cases run in parallel; output
/// order follows `exp.cases`.
pub fn run_pipeline(exp: &Experiment) -> Result<PipelineResult, HarnessError> {
    for case in &exp.cases {
        for (name, &p) in &case.evidence.values {
            crate::rules::check_evidence_entry(&exp.rules, name, p, None)?;
        }
    }
    let (prior, prior_solver) = maxent_prior(&exp.rules, &exp.options.solver)?;
    let priors = engine_priors(&prior, &exp.options.priors);
    let classes = report_classes(&exp.rules);
    let cases: Vec<CaseResult> =
        exp.cases.par_iter().map(|case| run_case(exp, case, &prior, &priors, &classes)).collect::<Result<_, _>>()?;
    let all: Vec<ErrorSample> = cases.iter().flat_map(|c| c.samples.iter().cloned()).collect();
    let pooled = aggregate(&all, &classes)?;
    let mut notices = Vec::new();
    if let Err(e) = exp.rules.check_propagation() {
        notices.push(format!("propagation engines cannot use this rule set: {e}"));
    }
    for c in &cases {
        for (engine, why) in &c.skipped {
            notices.push(format!("case `{}`: {engine} skipped: {why}", c.name));
        }
    }
    if let Some(t) = cases.iter().flat_map(|c| &c.traces).next() {
        notices.extend(t.notices.iter().cloned());
    }
    Ok(PipelineResult { prior, prior_solver, priors, cases, pooled, notices })
}

pub const PREGNANCY_RULES: &str = "\
prop swollen_belly leaf
prop morning_sickness leaf
prop male leaf
prop pregnant goal
P(pregnant | swollen_belly & morning_sickness) = 0.4
P(pregnant | male) = 0
";

/// Two rules and a case (swollen belly, morning sickness, male) that
/// contradicts the assumption built into the first rule.
pub fn pregnancy_experiment() -> Experiment {
    let rules = crate::rules::parse_ruleset(PREGNANCY_RULES).expect("bundled rules parse");
    let evidence = Evidence::new(&rules, [("swollen_belly", 1.0), ("morning_sickness", 1.0), ("male", 1.0)])
        .expect("bundled evidence is valid");
    Experiment {
        rules,
        cases: vec![Case { name: "male with symptoms".into(), evidence }],
        engines: vec![EngineKind::Fst, EngineKind::Mycin, EngineKind::Ind, EngineKind::Dst],
        options: PipelineOptions::default(),
    }
}
