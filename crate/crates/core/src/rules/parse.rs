//! Text format for rule sets and evidence.
//!
//! ```text
//! # comment
//! prop swollen leaf
//! prop preg goal
//! P(preg | swollen & sick) = 0.4
//! P(exactly 1 of {A, B, C, D}) = 95%
//! ```
//!
//! Statements are separated by newlines or `;`. `&` binds tighter than `or`,
//! `~` tighter than both.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::{
    check_evidence_entry, Evidence, Formula, Position, PropKind, Proposition, Rule, RuleError, RuleSet, Scope,
};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Percent,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Bar,
    Amp,
    Tilde,
    Comma,
    Eq,
    Sep,
    Eof,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Num(n) => format!("number {n}"),
        Tok::Sep => "end of statement".into(),
        Tok::Eof => "end of input".into(),
        other => format!("{other:?}"),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Position)>, RuleError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let at = Position { line, column: col };
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '|' => Some(Tok::Bar),
            '&' => Some(Tok::Amp),
            '~' => Some(Tok::Tilde),
            ',' => Some(Tok::Comma),
            '=' => Some(Tok::Eq),
            '%' => Some(Tok::Percent),
            ';' | '\n' => Some(Tok::Sep),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, at));
            i += 1;
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
                col += 1;
            }
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), at));
        } else if c.is_ascii_digit() || c == '.' {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v =
                s.parse::<f64>().map_err(|_| RuleError::Syntax { at, message: format!("malformed number `{s}`") })?;
            out.push((Tok::Num(v), at));
        } else {
            return Err(RuleError::Syntax { at, message: format!("unexpected character `{c}`") });
        }
        col += i - start;
    }
    out.push((Tok::Eof, Position { line, column: col }));
    Ok(out)
}

const RESERVED: &[&str] = &["or", "exactly"];

struct Parser {
    toks: Vec<(Tok, Position)>,
    pos: usize,
    /// Every atom referenced by the statement being parsed.
    atoms: Vec<(String, Position)>,
}

impl Parser {
    fn new(text: &str) -> Result<Self, RuleError> {
        Ok(Parser { toks: lex(text)?, pos: 0, atoms: Vec::new() })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].0
    }

    fn at(&self) -> Position {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Position) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, RuleError> {
        Err(RuleError::Syntax { at: self.at(), message: message.into() })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Position, RuleError> {
        if *self.peek() == want {
            Ok(self.bump().1)
        } else {
            self.err(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    fn skip_separators(&mut self) {
        while *self.peek() == Tok::Sep {
            self.bump();
        }
    }

    fn end_statement(&mut self) -> Result<(), RuleError> {
        match self.peek() {
            Tok::Sep | Tok::Eof => Ok(()),
            t => self.err(format!("expected end of statement, found {}", describe(t))),
        }
    }

    fn name(&mut self) -> Result<(String, Position), RuleError> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                let at = self.bump().1;
                Ok((s, at))
            }
            t => self.err(format!("expected proposition name, found {}", describe(&t))),
        }
    }

    fn probability(&mut self) -> Result<(f64, Position), RuleError> {
        let at = self.at();
        let v = match self.bump().0 {
            Tok::Num(v) => v,
            t => {
                return Err(RuleError::Syntax { at, message: format!("expected probability, found {}", describe(&t)) })
            }
        };
        let v = if *self.peek() == Tok::Percent {
            self.bump();
            v / 100.0
        } else {
            v
        };
        if !(0.0..=1.0).contains(&v) {
            return Err(RuleError::ProbabilityOutOfRange { value: v, at: Some(at) });
        }
        Ok((v, at))
    }

    fn formula(&mut self) -> Result<Formula, RuleError> {
        let mut lhs = self.conjunction()?;
        while matches!(self.peek(), Tok::Ident(s) if s == "or") {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, RuleError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, RuleError> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(s) if s == "exactly" => {
                self.bump();
                let at = self.at();
                let k = match self.bump().0 {
                    Tok::Num(v) if v >= 0.0 && v.fract() == 0.0 => v as usize,
                    t => {
                        return Err(RuleError::Syntax {
                            at,
                            message: format!("expected a count, found {}", describe(&t)),
                        })
                    }
                };
                match self.peek() {
                    Tok::Ident(s) if s == "of" => {
                        self.bump();
                    }
                    t => return self.err(format!("expected `of`, found {}", describe(t))),
                }
                self.expect(Tok::LBrace, "`{`")?;
                let mut props = Vec::new();
                loop {
                    let (n, p) = self.name()?;
                    self.atoms.push((n.clone(), p));
                    props.push(n);
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
                self.expect(Tok::RBrace, "`}`")?;
                if k > props.len() {
                    return Err(RuleError::Syntax {
                        at,
                        message: format!("exactly {k} of a {}-element set", props.len()),
                    });
                }
                Ok(Formula::ExactlyK { props, k })
            }
            _ => {
                let (n, p) = self.name()?;
                self.atoms.push((n.clone(), p));
                Ok(Formula::Atom(n))
            }
        }
    }
}

fn parse_kind(word: &str) -> Option<PropKind> {
    match word {
        "leaf" => Some(PropKind::Leaf),
        "mid" => Some(PropKind::Intermediate),
        "goal" => Some(PropKind::Conclusion),
        _ => None,
    }
}

/// Parse and validate a rule set.
///
/// Cycles in the rule graph are accepted here (the MaxEnt reference can use
/// them); propagation engines reject them through
/// [`RuleSet::check_propagation`].
pub fn parse_ruleset(text: &str) -> Result<RuleSet, RuleError> {
    let mut p = Parser::new(text)?;
    let mut props: Vec<(String, Option<PropKind>, Position)> = Vec::new();
    let mut rules = Vec::new();
    let mut priors = BTreeMap::new();
    let mut referenced: Vec<(String, Position)> = Vec::new();

    loop {
        p.skip_separators();
        match p.peek().clone() {
            Tok::Eof => break,
            Tok::Ident(s) if s == "prop" && matches!(p.peek2(), Tok::Ident(_)) => {
                p.bump();
                let (name, at) = p.name()?;
                let kind = match p.peek().clone() {
                    Tok::Ident(w) => match parse_kind(&w) {
                        Some(k) => {
                            p.bump();
                            Some(k)
                        }
                        None => return p.err(format!("unknown proposition kind `{w}` (expected leaf, mid or goal)")),
                    },
                    _ => None,
                };
                p.end_statement()?;
                if props.iter().any(|(n, _, _)| *n == name) {
                    return Err(RuleError::DuplicateProposition { name, at: Some(at) });
                }
                props.push((name, kind, at));
            }
            Tok::Ident(s) if s == "P" && *p.peek2() == Tok::LParen => {
                p.bump();
                p.bump();
                p.atoms.clear();
                let consequent = p.formula()?;
                let antecedent = if *p.peek() == Tok::Bar {
                    p.bump();
                    Some(p.formula()?)
                } else {
                    None
                };
                p.expect(Tok::RParen, "`)`")?;
                p.expect(Tok::Eq, "`=`")?;
                let (strength, at) = p.probability()?;
                p.end_statement()?;
                referenced.append(&mut p.atoms);
                match (&consequent, antecedent) {
                    (Formula::Atom(name), None) => {
                        if priors.insert(name.clone(), strength).is_some() {
                            return Err(RuleError::DuplicatePrior { name: name.clone(), at: Some(at) });
                        }
                    }
                    (_, antecedent) => rules.push(Rule { consequent, antecedent, strength }),
                }
            }
            t => return p.err(format!("expected `prop` or `P(`, found {}", describe(&t))),
        }
    }

    let declared: BTreeSet<&str> = props.iter().map(|(n, _, _)| n.as_str()).collect();
    if let Some((name, at)) = referenced.iter().find(|(n, _)| !declared.contains(n.as_str())) {
        return Err(RuleError::UnknownProposition { name: name.clone(), at: Some(*at) });
    }

    let mut rs = RuleSet {
        propositions: props.iter().map(|(n, _, _)| Proposition { name: n.clone(), kind: PropKind::Leaf }).collect(),
        rules,
        priors,
    };
    let computed = rs.topology_kinds();
    for (prop, (_, declared, _)) in rs.propositions.iter_mut().zip(&props) {
        prop.kind = declared.unwrap_or(computed[&prop.name]);
    }
    let blocking: Vec<_> = rs.validate().into_iter().filter(|d| d.scope == Scope::All).collect();
    if !blocking.is_empty() {
        return Err(RuleError::Invalid(blocking));
    }
    Ok(rs)
}

fn parse_assignments(text: &str) -> Result<Vec<(String, f64, Position)>, RuleError> {
    let mut p = Parser::new(text)?;
    let mut out = Vec::new();
    loop {
        p.skip_separators();
        if *p.peek() == Tok::Eof {
            break;
        }
        let (name, at) = p.name()?;
        p.expect(Tok::Eq, "`=`")?;
        let (v, _) = p.probability()?;
        p.end_statement()?;
        out.push((name, v, at));
    }
    Ok(out)
}

/// Parse `leaf = p` lines against a rule set.
pub fn parse_evidence(text: &str, rs: &RuleSet) -> Result<Evidence, RuleError> {
    let mut values = BTreeMap::new();
    for (name, v, at) in parse_assignments(text)? {
        check_evidence_entry(rs, &name, v, Some(at))?;
        if values.insert(name.clone(), v).is_some() {
            return Err(RuleError::DuplicateEvidence { name, at: Some(at) });
        }
    }
    Ok(Evidence { values })
}

/// Parse `name = p` lines without checking names against a rule set.
pub fn parse_probability_map(text: &str) -> Result<BTreeMap<String, f64>, RuleError> {
    let mut values = BTreeMap::new();
    for (name, v, at) in parse_assignments(text)? {
        if values.insert(name.clone(), v).is_some() {
            return Err(RuleError::DuplicateEvidence { name, at: Some(at) });
        }
    }
    Ok(values)
}

pub fn render_ruleset(rs: &RuleSet) -> String {
    let mut out = String::new();
    for p in &rs.propositions {
        let _ = writeln!(out, "prop {} {}", p.name, p.kind.keyword());
    }
    for (name, v) in &rs.priors {
        let _ = writeln!(out, "P({name}) = {v}");
    }
    for r in &rs.rules {
        let _ = writeln!(out, "{r}");
    }
    out
}

pub fn render_evidence(ev: &Evidence) -> String {
    ev.values.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}
