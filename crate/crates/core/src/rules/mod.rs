//! Propositions, Boolean formulas, rules, priors and case evidence.
//!
//! A [`RuleSet`] is the general knowledge base: conditional probability rules
//! `P(consequent | antecedent) = strength`, unconditional statements
//! `P(formula) = p`, and per-proposition priors. [`Evidence`] carries the
//! case-specific leaf probabilities.
//!
//! The text format is handled by [`parse_ruleset`], [`parse_evidence`] and
//! [`render_ruleset`].

mod formula;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use formula::{CompiledFormula, Formula, Literal};
pub use parse::{parse_evidence, parse_probability_map, parse_ruleset, render_evidence, render_ruleset};

/// Position of a token in rule-set or evidence source (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuleError {
    #[error("syntax error at {at}: {message}")]
    Syntax { at: Position, message: String },
    #[error("unknown proposition `{name}`{}", fmt_at(.at))]
    UnknownProposition { name: String, at: Option<Position> },
    #[error("probability {value} outside [0, 1]{}", fmt_at(.at))]
    ProbabilityOutOfRange { value: f64, at: Option<Position> },
    #[error("duplicate prior for `{name}`{}", fmt_at(.at))]
    DuplicatePrior { name: String, at: Option<Position> },
    #[error("duplicate proposition `{name}`{}", fmt_at(.at))]
    DuplicateProposition { name: String, at: Option<Position> },
    #[error("duplicate evidence for `{name}`{}", fmt_at(.at))]
    DuplicateEvidence { name: String, at: Option<Position> },
    #[error("evidence on non-leaf proposition `{name}`{}", fmt_at(.at))]
    NonLeafEvidence { name: String, at: Option<Position> },
    #[error("cyclic rule graph through {}", .props.join(" -> "))]
    Cycle { props: Vec<String> },
    #[error("invalid rule set: {}", join_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("rule set not usable by propagation engines: {}", join_diagnostics(.0))]
    NotPropagatable(Vec<Diagnostic>),
}

fn fmt_at(at: &Option<Position>) -> String {
    at.map(|p| format!(" at {p}")).unwrap_or_default()
}

fn join_diagnostics(d: &[Diagnostic]) -> String {
    d.iter().map(|d| d.message.clone()).collect::<Vec<_>>().join("; ")
}

/// Role of a proposition in the rule graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PropKind {
    /// Data node: never the consequent of a conditional rule.
    Leaf,
    /// Both a consequent and an antecedent.
    Intermediate,
    /// Consequent that never feeds another rule.
    Conclusion,
}

impl PropKind {
    pub fn keyword(self) -> &'static str {
        match self {
            PropKind::Leaf => "leaf",
            PropKind::Intermediate => "mid",
            PropKind::Conclusion => "goal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proposition {
    pub name: String,
    pub kind: PropKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub consequent: Formula,
    /// `None` encodes an unconditional statement `P(consequent) = strength`.
    pub antecedent: Option<Formula>,
    pub strength: f64,
}

impl Rule {
    pub fn conditional(consequent: Formula, antecedent: Formula, strength: f64) -> Self {
        Rule { consequent, antecedent: Some(antecedent), strength }
    }

    pub fn unconditional(consequent: Formula, strength: f64) -> Self {
        Rule { consequent, antecedent: None, strength }
    }

    /// The consequent proposition, if the consequent is a bare name.
    pub fn single_consequent(&self) -> Option<&str> {
        match &self.consequent {
            Formula::Atom(name) => Some(name),
            _ => None,
        }
    }

    /// Antecedent as a list of literals, if it is a conjunction of literals.
    pub fn antecedent_literals(&self) -> Option<Vec<Literal>> {
        self.antecedent.as_ref().and_then(Formula::conjunctive_literals)
    }

    /// Whether a propagation engine can evaluate this rule.
    pub fn is_propagatable(&self) -> bool {
        self.antecedent.is_some() && self.single_consequent().is_some() && self.antecedent_literals().is_some()
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.antecedent {
            Some(a) => write!(f, "P({} | {}) = {}", self.consequent, a, self.strength),
            None => write!(f, "P({}) = {}", self.consequent, self.strength),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DiagnosticCode {
    UnknownProposition,
    DuplicateProposition,
    ProbabilityOutOfRange,
    ExactlyKBound,
    KindMismatch,
    Cycle,
    NonAtomicConsequent,
    NonConjunctiveAntecedent,
}

/// Which engines a diagnostic disqualifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Scope {
    /// The rule set is invalid for every engine.
    All,
    /// Only the propagation engines are affected; the MaxEnt reference accepts it.
    PropagationOnly,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub scope: Scope,
    pub message: String,
}

impl Diagnostic {
    fn new(code: DiagnosticCode, scope: Scope, message: impl Into<String>) -> Self {
        Diagnostic { code, scope, message: message.into() }
    }
}

/// The knowledge base: propositions, rules and priors.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RuleSet {
    pub propositions: Vec<Proposition>,
    pub rules: Vec<Rule>,
    pub priors: BTreeMap<String, f64>,
}

impl RuleSet {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.propositions.iter().position(|p| p.name == name)
    }

    pub fn names(&self) -> Vec<String> {
        self.propositions.iter().map(|p| p.name.clone()).collect()
    }

    pub fn kind_of(&self, name: &str) -> Option<PropKind> {
        self.propositions.iter().find(|p| p.name == name).map(|p| p.kind)
    }

    pub fn props_of_kind(&self, kind: PropKind) -> Vec<&str> {
        self.propositions.iter().filter(|p| p.kind == kind).map(|p| p.name.as_str()).collect()
    }

    /// Classify every proposition from the conditional-rule topology alone.
    pub fn topology_kinds(&self) -> BTreeMap<String, PropKind> {
        let mut consequent = BTreeSet::new();
        let mut antecedent = BTreeSet::new();
        for rule in &self.rules {
            let Some(ante) = &rule.antecedent else { continue };
            consequent.extend(rule.consequent.atoms());
            antecedent.extend(ante.atoms());
        }
        self.propositions
            .iter()
            .map(|p| {
                let name = p.name.as_str();
                let kind = match (consequent.contains(name), antecedent.contains(name)) {
                    (false, _) => PropKind::Leaf,
                    (true, false) => PropKind::Conclusion,
                    (true, true) => PropKind::Intermediate,
                };
                (p.name.clone(), kind)
            })
            .collect()
    }

    /// Check every invariant. The result is sorted, so it does not depend on
    /// rule order.
    pub fn validate(&self) -> Vec<Diagnostic> {
        use DiagnosticCode as C;
        let mut out = Vec::new();
        let declared: BTreeSet<&str> = self.propositions.iter().map(|p| p.name.as_str()).collect();

        let mut seen = BTreeSet::new();
        for p in &self.propositions {
            if !seen.insert(p.name.as_str()) {
                out.push(Diagnostic::new(
                    C::DuplicateProposition,
                    Scope::All,
                    format!("proposition `{}` declared twice", p.name),
                ));
            }
        }

        for rule in &self.rules {
            let formulas = std::iter::once(&rule.consequent).chain(rule.antecedent.iter());
            for f in formulas {
                for atom in f.atoms() {
                    if !declared.contains(atom) {
                        out.push(Diagnostic::new(
                            C::UnknownProposition,
                            Scope::All,
                            format!("rule `{rule}` references undeclared proposition `{atom}`"),
                        ));
                    }
                }
                f.visit_exactly(&mut |props, k| {
                    if k > props.len() {
                        out.push(Diagnostic::new(
                            C::ExactlyKBound,
                            Scope::All,
                            format!("rule `{rule}`: exactly {k} of {} propositions", props.len()),
                        ));
                    }
                });
            }
            if !(0.0..=1.0).contains(&rule.strength) || rule.strength.is_nan() {
                out.push(Diagnostic::new(
                    C::ProbabilityOutOfRange,
                    Scope::All,
                    format!("rule `{rule}` has strength outside [0, 1]"),
                ));
            }
            if rule.antecedent.is_some() {
                if rule.single_consequent().is_none() {
                    out.push(Diagnostic::new(
                        C::NonAtomicConsequent,
                        Scope::PropagationOnly,
                        format!("rule `{rule}` has a compound consequent"),
                    ));
                }
                if rule.antecedent_literals().is_none() {
                    out.push(Diagnostic::new(
                        C::NonConjunctiveAntecedent,
                        Scope::PropagationOnly,
                        format!("rule `{rule}` has a non-conjunctive antecedent"),
                    ));
                }
            }
        }

        for (name, p) in &self.priors {
            if !declared.contains(name.as_str()) {
                out.push(Diagnostic::new(
                    C::UnknownProposition,
                    Scope::All,
                    format!("prior on undeclared proposition `{name}`"),
                ));
            }
            if !(0.0..=1.0).contains(p) || p.is_nan() {
                out.push(Diagnostic::new(
                    C::ProbabilityOutOfRange,
                    Scope::All,
                    format!("prior P({name}) = {p} outside [0, 1]"),
                ));
            }
        }

        let computed = self.topology_kinds();
        for p in &self.propositions {
            if let Some(&k) = computed.get(&p.name) {
                if k != p.kind {
                    out.push(Diagnostic::new(
                        C::KindMismatch,
                        Scope::All,
                        format!("`{}` declared {} but the rules make it {}", p.name, p.kind.keyword(), k.keyword()),
                    ));
                }
            }
        }

        for cycle in self.cycles() {
            out.push(Diagnostic::new(
                C::Cycle,
                Scope::PropagationOnly,
                format!("cycle through {} (usable by the MaxEnt engine only)", cycle.join(", ")),
            ));
        }

        out.sort();
        out.dedup();
        out
    }

    /// Strongly connected components of the single-consequent rule graph that
    /// contain a cycle, each sorted by name.
    fn cycles(&self) -> Vec<Vec<String>> {
        let names = self.names();
        let n = names.len();
        let mut adj = vec![BTreeSet::new(); n];
        for rule in &self.rules {
            let (Some(ante), Some(cons)) = (&rule.antecedent, rule.single_consequent()) else { continue };
            let Some(c) = self.index_of(cons) else { continue };
            for a in ante.atoms() {
                if let Some(a) = self.index_of(a) {
                    adj[a].insert(c);
                }
            }
        }
        // Tarjan's algorithm, iterative over a small graph.
        struct State {
            index: Vec<Option<usize>>,
            low: Vec<usize>,
            on_stack: Vec<bool>,
            stack: Vec<usize>,
            next: usize,
            comps: Vec<Vec<usize>>,
        }
        fn strong(v: usize, adj: &[BTreeSet<usize>], s: &mut State) {
            s.index[v] = Some(s.next);
            s.low[v] = s.next;
            s.next += 1;
            s.stack.push(v);
            s.on_stack[v] = true;
            for &w in &adj[v] {
                match s.index[w] {
                    None => {
                        strong(w, adj, s);
                        s.low[v] = s.low[v].min(s.low[w]);
                    }
                    Some(iw) if s.on_stack[w] => s.low[v] = s.low[v].min(iw),
                    _ => {}
                }
            }
            if Some(s.low[v]) == s.index[v] {
                let mut comp = Vec::new();
                while let Some(w) = s.stack.pop() {
                    s.on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                s.comps.push(comp);
            }
        }
        let mut s = State {
            index: vec![None; n],
            low: vec![0; n],
            on_stack: vec![false; n],
            stack: Vec::new(),
            next: 0,
            comps: Vec::new(),
        };
        for v in 0..n {
            if s.index[v].is_none() {
                strong(v, &adj, &mut s);
            }
        }
        let mut cycles: Vec<Vec<String>> = s
            .comps
            .into_iter()
            .filter(|c| c.len() > 1 || adj[c[0]].contains(&c[0]))
            .map(|c| {
                let mut v: Vec<String> = c.into_iter().map(|i| names[i].clone()).collect();
                v.sort();
                v
            })
            .collect();
        cycles.sort();
        cycles
    }

    /// Fail with the first blocking problem for the propagation engines.
    pub fn check_propagation(&self) -> Result<(), RuleError> {
        let diags = self.validate();
        let (all, prop): (Vec<_>, Vec<_>) = diags.into_iter().partition(|d| d.scope == Scope::All);
        if !all.is_empty() {
            return Err(RuleError::Invalid(all));
        }
        if let Some(cycle) = self.cycles().into_iter().next() {
            return Err(RuleError::Cycle { props: cycle });
        }
        if !prop.is_empty() {
            return Err(RuleError::NotPropagatable(prop));
        }
        Ok(())
    }

    /// Proposition indices in a topological order of the conditional-rule
    /// graph. Ties are broken by declaration order.
    pub fn topological_order(&self) -> Result<Vec<usize>, RuleError> {
        let n = self.propositions.len();
        let mut adj = vec![BTreeSet::new(); n];
        let mut indeg = vec![0usize; n];
        for rule in &self.rules {
            let (Some(ante), Some(cons)) = (&rule.antecedent, rule.single_consequent()) else { continue };
            let c = self.index_of(cons).ok_or_else(|| RuleError::UnknownProposition { name: cons.into(), at: None })?;
            for a in ante.atoms() {
                let a = self.index_of(a).ok_or_else(|| RuleError::UnknownProposition { name: a.into(), at: None })?;
                if adj[a].insert(c) {
                    indeg[c] += 1;
                }
            }
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(&v) = ready.iter().next() {
            ready.remove(&v);
            order.push(v);
            for &w in &adj[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    ready.insert(w);
                }
            }
        }
        if order.len() != n {
            let props = self.cycles().into_iter().next().unwrap_or_default();
            return Err(RuleError::Cycle { props });
        }
        Ok(order)
    }

    /// Leaves that directly or indirectly support `target` through
    /// conditional rules.
    pub fn supporting_leaves(&self, target: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut seen = BTreeSet::new();
        let mut todo = vec![target.to_string()];
        while let Some(node) = todo.pop() {
            if !seen.insert(node.clone()) {
                continue;
            }
            let mut is_consequent = false;
            for rule in &self.rules {
                let Some(ante) = &rule.antecedent else { continue };
                if rule.consequent.atoms().contains(node.as_str()) {
                    is_consequent = true;
                    todo.extend(ante.atoms().into_iter().map(str::to_string));
                }
            }
            if !is_consequent && node != target {
                out.insert(node);
            }
        }
        out
    }
}

/// Case data: probabilities asserted for leaf propositions.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Evidence {
    pub values: BTreeMap<String, f64>,
}

impl Evidence {
    /// Build evidence against a rule set, checking every key and value.
    pub fn new<I, S>(rs: &RuleSet, items: I) -> Result<Self, RuleError>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut values = BTreeMap::new();
        for (name, p) in items {
            let name = name.into();
            check_evidence_entry(rs, &name, p, None)?;
            if values.insert(name.clone(), p).is_some() {
                return Err(RuleError::DuplicateEvidence { name, at: None });
            }
        }
        Ok(Evidence { values })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub(crate) fn check_evidence_entry(rs: &RuleSet, name: &str, p: f64, at: Option<Position>) -> Result<(), RuleError> {
    match rs.kind_of(name) {
        None => return Err(RuleError::UnknownProposition { name: name.into(), at }),
        Some(PropKind::Leaf) => {}
        Some(_) => return Err(RuleError::NonLeafEvidence { name: name.into(), at }),
    }
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(RuleError::ProbabilityOutOfRange { value: p, at });
    }
    Ok(())
}
