use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Boolean expression over named propositions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formula {
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    /// True when exactly `k` of `props` are true.
    ExactlyK {
        props: Vec<String>,
        k: usize,
    },
}

/// A possibly negated proposition inside a conjunctive antecedent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Literal {
    pub prop: String,
    pub negated: bool,
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    /// Conjunction of all given formulas; `None` when empty.
    pub fn all(items: impl IntoIterator<Item = Formula>) -> Option<Self> {
        items.into_iter().reduce(Formula::and)
    }

    pub fn atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Formula::Atom(n) => {
                out.insert(n);
            }
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Formula::ExactlyK { props, .. } => out.extend(props.iter().map(String::as_str)),
        }
    }

    pub(crate) fn visit_exactly(&self, f: &mut dyn FnMut(&[String], usize)) {
        match self {
            Formula::Atom(_) => {}
            Formula::Not(x) => x.visit_exactly(f),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.visit_exactly(f);
                b.visit_exactly(f);
            }
            Formula::ExactlyK { props, k } => f(props, *k),
        }
    }

    /// Flatten a conjunction of (possibly negated) atoms.
    pub fn conjunctive_literals(&self) -> Option<Vec<Literal>> {
        let mut out = Vec::new();
        fn walk(f: &Formula, out: &mut Vec<Literal>) -> bool {
            match f {
                Formula::Atom(n) => {
                    out.push(Literal { prop: n.clone(), negated: false });
                    true
                }
                Formula::Not(inner) => match inner.as_ref() {
                    Formula::Atom(n) => {
                        out.push(Literal { prop: n.clone(), negated: true });
                        true
                    }
                    _ => false,
                },
                Formula::And(a, b) => walk(a, out) && walk(b, out),
                _ => false,
            }
        }
        walk(self, &mut out).then_some(out)
    }

    pub fn eval(&self, truth: &dyn Fn(&str) -> bool) -> bool {
        match self {
            Formula::Atom(n) => truth(n),
            Formula::Not(f) => !f.eval(truth),
            Formula::And(a, b) => a.eval(truth) && b.eval(truth),
            Formula::Or(a, b) => a.eval(truth) || b.eval(truth),
            Formula::ExactlyK { props, k } => props.iter().filter(|p| truth(p)).count() == *k,
        }
    }

    /// Resolve names to bit positions so the formula can be evaluated on
    /// event indices. Returns the first unknown name on failure.
    pub fn compile(&self, index_of: &dyn Fn(&str) -> Option<usize>) -> Result<CompiledFormula, String> {
        Ok(match self {
            Formula::Atom(n) => CompiledFormula::Bit(index_of(n).ok_or_else(|| n.clone())?),
            Formula::Not(f) => CompiledFormula::Not(Box::new(f.compile(index_of)?)),
            Formula::And(a, b) => CompiledFormula::And(Box::new(a.compile(index_of)?), Box::new(b.compile(index_of)?)),
            Formula::Or(a, b) => CompiledFormula::Or(Box::new(a.compile(index_of)?), Box::new(b.compile(index_of)?)),
            Formula::ExactlyK { props, k } => {
                let mut mask = 0u64;
                for p in props {
                    mask |= 1 << index_of(p).ok_or_else(|| p.clone())?;
                }
                CompiledFormula::Exactly { mask, k: *k as u32 }
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Or(..) => 0,
            Formula::And(..) => 1,
            _ => 2,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.precedence() < min;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Formula::Atom(n) => f.write_str(n)?,
            Formula::Not(x) => {
                f.write_str("~")?;
                x.fmt_prec(f, 2)?;
            }
            Formula::And(a, b) => {
                a.fmt_prec(f, 1)?;
                f.write_str(" & ")?;
                b.fmt_prec(f, 2)?;
            }
            Formula::Or(a, b) => {
                a.fmt_prec(f, 0)?;
                f.write_str(" or ")?;
                b.fmt_prec(f, 1)?;
            }
            Formula::ExactlyK { props, k } => write!(f, "exactly {k} of {{{}}}", props.join(", "))?,
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// A formula evaluated directly on an event index, where bit `j` of the index
/// is the truth value of proposition `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompiledFormula {
    True,
    Bit(usize),
    Not(Box<CompiledFormula>),
    And(Box<CompiledFormula>, Box<CompiledFormula>),
    Or(Box<CompiledFormula>, Box<CompiledFormula>),
    Exactly { mask: u64, k: u32 },
}

impl CompiledFormula {
    #[inline]
    pub fn eval(&self, event: usize) -> bool {
        match self {
            CompiledFormula::True => true,
            CompiledFormula::Bit(j) => event >> j & 1 == 1,
            CompiledFormula::Not(f) => !f.eval(event),
            CompiledFormula::And(a, b) => a.eval(event) && b.eval(event),
            CompiledFormula::Or(a, b) => a.eval(event) || b.eval(event),
            CompiledFormula::Exactly { mask, k } => (event as u64 & mask).count_ones() == *k,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_parenthesizes_only_where_needed() {
        let f = Formula::and(Formula::or(Formula::atom("A"), Formula::atom("B")), Formula::not(Formula::atom("C")));
        assert_eq!(f.to_string(), "(A or B) & ~C");
        let g = Formula::or(Formula::atom("A"), Formula::and(Formula::atom("B"), Formula::atom("C")));
        assert_eq!(g.to_string(), "A or B & C");
    }

    #[test]
    fn compiled_matches_tree_evaluation() {
        let f = Formula::or(
            Formula::ExactlyK { props: vec!["A".into(), "B".into(), "C".into()], k: 1 },
            Formula::and(Formula::atom("A"), Formula::not(Formula::atom("C"))),
        );
        let names = ["A", "B", "C"];
        let c = f.compile(&|n| names.iter().position(|x| *x == n)).unwrap();
        for e in 0..8usize {
            let truth = |n: &str| e >> names.iter().position(|x| *x == n).unwrap() & 1 == 1;
            assert_eq!(c.eval(e), f.eval(&truth), "event {e}");
        }
    }

    #[test]
    fn literals_only_for_conjunctions() {
        let f = Formula::and(Formula::atom("A"), Formula::not(Formula::atom("B")));
        let lits = f.conjunctive_literals().unwrap();
        assert_eq!(lits.len(), 2);
        assert!(lits[1].negated);
        assert!(Formula::or(Formula::atom("A"), Formula::atom("B")).conjunctive_literals().is_none());
        assert!(Formula::not(Formula::and(Formula::atom("A"), Formula::atom("B"))).conjunctive_literals().is_none());
    }
}
