//! Bundled reactor-diagnosis benchmark.

use super::{run_pipeline, Case, Experiment, HarnessError, PipelineOptions, PipelineResult};
use crate::engines::EngineKind;
use crate::rules::{parse_ruleset, Evidence, PropKind, RuleError, RuleSet};

/// Reconstructed rule set in the rule-file format.
pub const REACTOR_RULES: &str = include_str!("../../data/reactor.rules");

pub fn reactor_rules() -> RuleSet {
    parse_ruleset(REACTOR_RULES).expect("bundled reactor rules parse")
}

/// One case per accident type: its supporting leaves at 0.95, every other
/// leaf at 0.05.
pub fn reactor_cases(rs: &RuleSet) -> Result<Vec<Case>, RuleError> {
    let leaves = rs.props_of_kind(PropKind::Leaf);
    rs.props_of_kind(PropKind::Conclusion)
        .into_iter()
        .map(|goal| {
            let support = rs.supporting_leaves(goal);
            let evidence =
                Evidence::new(rs, leaves.iter().map(|&l| (l, if support.contains(l) { 0.95 } else { 0.05 })))?;
            Ok(Case { name: goal.to_string(), evidence })
        })
        .collect()
}

pub fn reactor_experiment(engines: Vec<EngineKind>, options: PipelineOptions) -> Experiment {
    let rules = reactor_rules();
    let cases = reactor_cases(&rules).expect("bundled cases are valid");
    Experiment { rules, cases, engines, options }
}

/// Four cases with FST, Mycin, Ind and DST.
pub fn reactor_benchmark(options: PipelineOptions) -> Result<PipelineResult, HarnessError> {
    let engines = vec![EngineKind::Fst, EngineKind::Mycin, EngineKind::Ind, EngineKind::Dst];
    run_pipeline(&reactor_experiment(engines, options))
}
