use std::fmt;

use serde::{Deserialize, Serialize};

use super::{check_size, JointError, DEFAULT_PROP_CAP};
use crate::rules::{CompiledFormula, Evidence, Formula, RuleSet};

/// Where a constraint row came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConstraintOrigin {
    Normalization,
    Prior { prop: String },
    Rule { index: usize, text: String },
    Evidence { prop: String },
    Other(String),
}

impl fmt::Display for ConstraintOrigin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintOrigin::Normalization => f.write_str("normalization"),
            ConstraintOrigin::Prior { prop } => write!(f, "prior on {prop}"),
            ConstraintOrigin::Rule { index, text } => write!(f, "rule #{index} `{text}`"),
            ConstraintOrigin::Evidence { prop } => write!(f, "evidence on {prop}"),
            ConstraintOrigin::Other(s) => f.write_str(s),
        }
    }
}

/// `sum_i coefficients[i] * w_i = target` over event weights `w`.
///
/// Coefficients are stored sparsely as `(event, value)` pairs sorted by event,
/// zeros omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub coefficients: Vec<(usize, f64)>,
    pub target: f64,
    pub origin: ConstraintOrigin,
}

impl LinearConstraint {
    pub fn normalization(n: usize) -> Self {
        LinearConstraint {
            coefficients: (0..n).map(|i| (i, 1.0)).collect(),
            target: 1.0,
            origin: ConstraintOrigin::Normalization,
        }
    }

    pub fn is_normalization(&self) -> bool {
        self.origin == ConstraintOrigin::Normalization
    }

    pub fn evaluate(&self, weights: &[f64]) -> f64 {
        self.coefficients.iter().map(|&(i, c)| c * weights[i]).sum()
    }

    pub fn residual(&self, weights: &[f64]) -> f64 {
        self.evaluate(weights) - self.target
    }

    pub fn dense(&self, n: usize) -> Vec<f64> {
        let mut row = vec![0.0; n];
        for &(i, c) in &self.coefficients {
            row[i] = c;
        }
        row
    }
}

/// `P(f) = v` or, with an antecedent, `P(f | g) = v` written homogeneously as
/// `sum_{f&g} (1-v) w - sum_{~f&g} v w = 0`.
pub fn event_constraint(
    props: &[String],
    consequent: &Formula,
    antecedent: Option<&Formula>,
    value: f64,
    origin: ConstraintOrigin,
) -> Result<LinearConstraint, JointError> {
    let n = check_size(props.len(), DEFAULT_PROP_CAP.max(props.len()))?;
    let index_of = |name: &str| props.iter().position(|p| p == name);
    let f = consequent.compile(&index_of).map_err(JointError::UnknownProposition)?;
    let g = match antecedent {
        Some(g) => g.compile(&index_of).map_err(JointError::UnknownProposition)?,
        None => CompiledFormula::True,
    };
    let mut coefficients = Vec::new();
    let target = if antecedent.is_some() {
        for i in 0..n {
            if g.eval(i) {
                let c = if f.eval(i) { 1.0 - value } else { -value };
                if c != 0.0 {
                    coefficients.push((i, c));
                }
            }
        }
        0.0
    } else {
        coefficients.extend((0..n).filter(|&i| f.eval(i)).map(|i| (i, 1.0)));
        value
    };
    Ok(LinearConstraint { coefficients, target, origin })
}

/// Normalization, then one row per prior, then one per rule, in the rule
/// set's proposition order.
pub fn compile_constraints(rs: &RuleSet) -> Result<Vec<LinearConstraint>, JointError> {
    let props = rs.names();
    let n = check_size(props.len(), DEFAULT_PROP_CAP.max(props.len()))?;
    let mut out = vec![LinearConstraint::normalization(n)];
    for (name, &v) in &rs.priors {
        out.push(event_constraint(
            &props,
            &Formula::atom(name.clone()),
            None,
            v,
            ConstraintOrigin::Prior { prop: name.clone() },
        )?);
    }
    for (index, rule) in rs.rules.iter().enumerate() {
        out.push(event_constraint(
            &props,
            &rule.consequent,
            rule.antecedent.as_ref(),
            rule.strength,
            ConstraintOrigin::Rule { index, text: rule.to_string() },
        )?);
    }
    Ok(out)
}

/// One marginal constraint `P(leaf) = v` per evidence entry.
pub fn evidence_constraints(props: &[String], ev: &Evidence) -> Result<Vec<LinearConstraint>, JointError> {
    ev.values
        .iter()
        .map(|(name, &v)| {
            event_constraint(
                props,
                &Formula::atom(name.clone()),
                None,
                v,
                ConstraintOrigin::Evidence { prop: name.clone() },
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::parse_ruleset;

    #[test]
    fn prior_row() {
        let rs = parse_ruleset("prop A; P(A) = 0.3").unwrap();
        let c = compile_constraints(&rs).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c[0].is_normalization());
        assert_eq!(c[1].coefficients, vec![(1, 1.0)]);
        assert_eq!(c[1].target, 0.3);
    }

    #[test]
    fn conditional_row_is_homogeneous() {
        let rs = parse_ruleset("prop A; prop B; P(B | A) = 0.8").unwrap();
        let c = compile_constraints(&rs).unwrap();
        let row = &c[1];
        assert_eq!(row.target, 0.0);
        // A&~B is event 1, A&B is event 3
        assert_eq!(row.coefficients.len(), 2);
        assert_eq!(row.coefficients[0], (1, -0.8));
        assert_eq!(row.coefficients[1].0, 3);
        assert!((row.coefficients[1].1 - 0.2).abs() < 1e-15);
    }

    #[test]
    fn exactly_one_row() {
        let rs = parse_ruleset("prop A; prop B; P(exactly 1 of {A, B}) = 0.95").unwrap();
        let c = compile_constraints(&rs).unwrap();
        assert_eq!(c[1].coefficients, vec![(1, 1.0), (2, 1.0)]);
        assert_eq!(c[1].target, 0.95);
    }
}
