//! Dempster-Shafer frames, mass functions and belief derived from a
//! compatibility relation between a source frame `S` and a target frame `T`.
//!
//! `Bel(τ)` is the source probability of every `s` whose compatible targets
//! all lie inside `τ`. Plausibility is `1 - Bel(T - τ)`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported frame (subsets are `u32` bitmasks).
pub const MAX_FRAME: usize = 16;

const MASS_TOL: f64 = 1e-12;
const PROB_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BeliefError {
    #[error("frame must have between 1 and {MAX_FRAME} basic events, got {0}")]
    FrameSize(usize),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("subset {0:#x} is outside the frame")]
    SubsetOutsideFrame(u32),
    #[error("mass {0} outside [0, 1]")]
    MassOutOfRange(f64),
    #[error("masses sum to {0}, not 1")]
    MassSum(f64),
    #[error("positive mass on the empty set")]
    EmptySetMass,
    #[error("source event `{0}` is compatible with no target event")]
    NoCompatibleTarget(String),
    #[error("source distribution invalid: {0}")]
    SourceDistribution(String),
    #[error("interval [{0}, {1}] is not within 0 <= a <= b <= 1")]
    Interval(f64, f64),
    #[error("beta {0} outside [0, 0.2]")]
    BetaOutOfRange(f64),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// Subset of a frame's basic events as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Subset(pub u32);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    labels: Vec<String>,
}

impl Frame {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self, BeliefError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() || labels.len() > MAX_FRAME {
            return Err(BeliefError::FrameSize(labels.len()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(BeliefError::DuplicateLabel(l.clone()));
            }
        }
        Ok(Frame { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn full(&self) -> Subset {
        Subset(((1u64 << self.labels.len()) - 1) as u32)
    }

    pub fn complement(&self, s: Subset) -> Subset {
        Subset(self.full().0 & !s.0)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn subset(&self, labels: &[&str]) -> Result<Subset, BeliefError> {
        let mut bits = 0u32;
        for l in labels {
            bits |= 1 << self.index_of(l).ok_or_else(|| BeliefError::UnknownLabel(l.to_string()))?;
        }
        Ok(Subset(bits))
    }

    pub fn check(&self, s: Subset) -> Result<(), BeliefError> {
        if s.is_subset_of(self.full()) {
            Ok(())
        } else {
            Err(BeliefError::SubsetOutsideFrame(s.0))
        }
    }

    /// Every subset of the frame, the empty set first.
    pub fn subsets(&self) -> impl Iterator<Item = Subset> {
        (0..=self.full().0).map(Subset)
    }

    pub fn render(&self, s: Subset) -> String {
        let names: Vec<&str> =
            self.labels.iter().enumerate().filter(|(i, _)| s.contains(*i)).map(|(_, l)| l.as_str()).collect();
        format!("{{{}}}", names.join(", "))
    }
}

/// `[support, plausibility]` with `0 <= a <= b <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeliefInterval {
    pub support: f64,
    pub plausibility: f64,
}

impl BeliefInterval {
    pub const VACUOUS: BeliefInterval = BeliefInterval { support: 0.0, plausibility: 1.0 };

    pub fn new(support: f64, plausibility: f64) -> Result<Self, BeliefError> {
        // Sums of masses can land a few ulps outside [0, 1].
        let a = if support.abs() < MASS_TOL { 0.0 } else { support };
        let b = if (plausibility - 1.0).abs() < MASS_TOL { 1.0 } else { plausibility };
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b + MASS_TOL {
            return Err(BeliefError::Interval(support, plausibility));
        }
        Ok(BeliefInterval { support: a, plausibility: b.max(a) })
    }

    pub fn point(p: f64) -> Result<Self, BeliefError> {
        Self::new(p, p)
    }

    pub fn width(&self) -> f64 {
        self.plausibility - self.support
    }
}

impl fmt::Display for BeliefInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.support, self.plausibility)
    }
}

/// Basic probability assignment over the subsets of a frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassFunction {
    frame: Frame,
    masses: BTreeMap<Subset, f64>,
}

impl MassFunction {
    pub fn new(frame: Frame, masses: impl IntoIterator<Item = (Subset, f64)>) -> Result<Self, BeliefError> {
        let mut map = BTreeMap::new();
        for (s, m) in masses {
            frame.check(s)?;
            if !(0.0..=1.0).contains(&m) {
                return Err(BeliefError::MassOutOfRange(m));
            }
            if s.is_empty() {
                if m > 0.0 {
                    return Err(BeliefError::EmptySetMass);
                }
                continue;
            }
            if m > 0.0 {
                *map.entry(s).or_insert(0.0) += m;
            }
        }
        let sum: f64 = map.values().sum();
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(BeliefError::MassSum(sum));
        }
        Ok(MassFunction { frame, masses: map })
    }

    /// All mass on the whole frame.
    pub fn vacuous(frame: Frame) -> Self {
        let full = frame.full();
        MassFunction { frame, masses: BTreeMap::from([(full, 1.0)]) }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn masses(&self) -> &BTreeMap<Subset, f64> {
        &self.masses
    }

    pub fn bel(&self, tau: Subset) -> Result<f64, BeliefError> {
        bel_from_masses(self, tau)
    }

    pub fn pl(&self, tau: Subset) -> Result<f64, BeliefError> {
        Ok(1.0 - self.bel(self.frame.complement(tau))?)
    }

    pub fn interval(&self, tau: Subset) -> Result<BeliefInterval, BeliefError> {
        BeliefInterval::new(self.bel(tau)?, self.pl(tau)?)
    }
}

/// `Bel(τ) = sum of m(σ) over σ ⊆ τ`.
pub fn bel_from_masses(m: &MassFunction, tau: Subset) -> Result<f64, BeliefError> {
    m.frame.check(tau)?;
    Ok(m.masses.iter().filter(|(s, _)| s.is_subset_of(tau)).fold(0.0, |acc, (_, v)| acc + v))
}

/// Which target events each source event can co-occur with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityRelation {
    source: Frame,
    target: Frame,
    /// `compatible[s]` is the set of targets compatible with source event `s`.
    compatible: Vec<Subset>,
}

impl CompatibilityRelation {
    pub fn new(source: Frame, target: Frame, compatible: Vec<Subset>) -> Result<Self, BeliefError> {
        if compatible.len() != source.len() {
            return Err(BeliefError::SourceDistribution(format!(
                "{} compatibility rows for {} source events",
                compatible.len(),
                source.len()
            )));
        }
        for (s, &c) in compatible.iter().enumerate() {
            target.check(c)?;
            if c.is_empty() {
                return Err(BeliefError::NoCompatibleTarget(source.labels[s].clone()));
            }
        }
        Ok(CompatibilityRelation { source, target, compatible })
    }

    /// `sCt` iff `p_st[s][t] > 0`.
    pub fn from_joint(source: Frame, target: Frame, p_st: &[Vec<f64>]) -> Result<Self, BeliefError> {
        let compatible = p_st
            .iter()
            .map(|row| {
                if row.len() != target.len() {
                    return Err(BeliefError::SourceDistribution("joint row length differs from target frame".into()));
                }
                Ok(Subset(row.iter().enumerate().filter(|(_, &p)| p > 0.0).fold(0, |acc, (t, _)| acc | 1 << t)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(source, target, compatible)
    }

    pub fn source(&self) -> &Frame {
        &self.source
    }

    pub fn target(&self) -> &Frame {
        &self.target
    }

    pub fn compatible(&self, s: usize) -> Subset {
        self.compatible[s]
    }

    /// The mass function this relation induces on the target frame.
    pub fn induced_masses(&self, p_s: &[f64]) -> Result<MassFunction, BeliefError> {
        check_source(p_s, self.source.len())?;
        MassFunction::new(self.target.clone(), self.compatible.iter().copied().zip(p_s.iter().copied()))
    }
}

fn check_source(p_s: &[f64], n: usize) -> Result<(), BeliefError> {
    if p_s.len() != n {
        return Err(BeliefError::SourceDistribution(format!("{} probabilities for {n} source events", p_s.len())));
    }
    if p_s.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(BeliefError::SourceDistribution("probability outside [0, 1]".into()));
    }
    let sum: f64 = p_s.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(BeliefError::SourceDistribution(format!("sums to {sum}")));
    }
    Ok(())
}

/// `Bel(τ) = p_S{ s | every t with sCt lies in τ }`.
pub fn bel_from_compatibility(p_s: &[f64], c: &CompatibilityRelation, tau: Subset) -> Result<f64, BeliefError> {
    check_source(p_s, c.source.len())?;
    c.target.check(tau)?;
    Ok(p_s.iter().zip(&c.compatible).filter(|(_, comp)| comp.is_subset_of(tau)).fold(0.0, |acc, (p, _)| acc + p))
}

/// `[Bel(τ), 1 - Bel(T - τ)]`.
pub fn interval(p_s: &[f64], c: &CompatibilityRelation, tau: Subset) -> Result<BeliefInterval, BeliefError> {
    let a = bel_from_compatibility(p_s, c, tau)?;
    let against = bel_from_compatibility(p_s, c, c.target.complement(tau))?;
    BeliefInterval::new(a, 1.0 - against)
}

fn source_marginal(p_st: &[Vec<f64>]) -> Vec<f64> {
    p_st.iter().map(|row| row.iter().sum()).collect()
}

/// Belief from a joint `p_ST`: source mass of every `s` whose conditional
/// `p(t|s)` is positive only on targets inside `τ`.
pub fn bel_from_joint(p_st: &[Vec<f64>], tau: Subset) -> f64 {
    p_st.iter()
        .filter(|row| row.iter().enumerate().all(|(t, &p)| p <= 0.0 || tau.contains(t)))
        .fold(0.0, |acc, row| acc + row.iter().sum::<f64>())
}

/// Max-form of the same belief: the largest `p_S(σ)` over source subsets `σ`
/// with `p(τ|s) = 1` for every `s ∈ σ`. Exhaustive over `2^|S|` subsets.
pub fn bel_max_form(p_st: &[Vec<f64>], tau: Subset) -> f64 {
    let p_s = source_marginal(p_st);
    let certain: Vec<bool> = p_st
        .iter()
        .zip(&p_s)
        .map(|(row, &ps)| {
            let inside: f64 = row.iter().enumerate().filter(|(t, _)| tau.contains(*t)).map(|(_, p)| p).sum();
            ps > 0.0 && inside / ps == 1.0 || ps == 0.0
        })
        .collect();
    let n = p_st.len();
    let mut best = 0.0f64;
    for sigma in 0u32..(1 << n) {
        let ok = (0..n).filter(|s| sigma >> s & 1 == 1).all(|s| certain[s]);
        if ok {
            let mass = (0..n).filter(|s| sigma >> s & 1 == 1).fold(0.0, |acc, s| acc + p_s[s]);
            best = best.max(mass);
        }
    }
    best
}

/// Joint over (careful, careless) × (not icy, icy) for the icy-streets
/// example, with `beta` moved onto the "careful but icy" cell. `beta = 0` is
/// the original example.
pub fn icy_joint(beta: f64) -> Result<Vec<Vec<f64>>, BeliefError> {
    if !(0.0..=0.2).contains(&beta) {
        return Err(BeliefError::BetaOutOfRange(beta));
    }
    Ok(vec![vec![0.8 - beta, beta], vec![0.1, 0.1]])
}

pub fn icy_frames() -> (Frame, Frame) {
    (Frame::new(["s1", "s2"]).expect("two labels"), Frame::new(["t1", "t2"]).expect("two labels"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathologyRow {
    pub beta: f64,
    pub bel_t1: f64,
    pub bel_t2: f64,
    pub bel_frame: f64,
}

/// Beliefs in `{t1}`, `{t2}` and `T` as the careful-but-icy mass shrinks.
pub fn pathology_sweep(betas: &[f64]) -> Result<Vec<PathologyRow>, BeliefError> {
    let (source, target) = icy_frames();
    betas
        .iter()
        .map(|&beta| {
            let joint = icy_joint(beta)?;
            let c = CompatibilityRelation::from_joint(source.clone(), target.clone(), &joint)?;
            let p_s = source_marginal(&joint);
            Ok(PathologyRow {
                beta,
                bel_t1: bel_from_compatibility(&p_s, &c, Subset(0b01))?,
                bel_t2: bel_from_compatibility(&p_s, &c, Subset(0b10))?,
                bel_frame: bel_from_compatibility(&p_s, &c, target.full())?,
            })
        })
        .collect()
}

/// Decades from 1e-1 down to 1e-9.
pub fn default_betas() -> Vec<f64> {
    (1..=9).map(|k| 10f64.powi(-k)).collect()
}

pub fn pathology_csv(rows: &[PathologyRow]) -> String {
    let mut out = String::from("beta,bel_t1,bel_t2\n");
    for r in rows {
        out.push_str(&format!("{:e},{},{}\n", r.beta, r.bel_t1, r.bel_t2));
    }
    out
}

/// Contents of a belief document (see [`parse_belief`]).
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefDoc {
    pub target: Frame,
    pub masses: Option<MassFunction>,
    pub source: Option<SourceEvidence>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceEvidence {
    pub probabilities: Vec<f64>,
    pub relation: CompatibilityRelation,
}

/// Parse a belief document:
///
/// ```text
/// frame {t1, t2}
/// mass {t1} = 0.8
/// mass {t1, t2} = 0.2
/// source s1 = 0.8
/// source s2 = 0.2
/// compat s1 ~ {t1}
/// compat s2 ~ {t1, t2}
/// ```
///
/// Without a `frame` line the target frame is the labels in order of first
/// appearance.
pub fn parse_belief(text: &str) -> Result<BeliefDoc, BeliefError> {
    let mut frame: Option<Vec<String>> = None;
    let mut seen_targets: Vec<String> = Vec::new();
    let mut masses: Vec<(Vec<String>, f64, usize)> = Vec::new();
    let mut sources: Vec<(String, f64)> = Vec::new();
    let mut compat: Vec<(String, Vec<String>, usize)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let code = raw.split('#').next().unwrap_or("");
        for stmt in code.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let syntax = |message: &str| BeliefError::Syntax { line, message: message.to_string() };
            let (keyword, rest) = stmt.split_once(char::is_whitespace).ok_or_else(|| syntax("incomplete statement"))?;
            let rest = rest.trim();
            match keyword {
                "frame" => {
                    let labels = parse_set(rest).ok_or_else(|| syntax("expected `{label, ...}`"))?;
                    frame = Some(labels);
                }
                "mass" => {
                    let (set, value) = rest.split_once('=').ok_or_else(|| syntax("expected `mass {..} = value`"))?;
                    let labels = parse_set(set.trim()).ok_or_else(|| syntax("expected `{label, ...}`"))?;
                    let v: f64 = value.trim().parse().map_err(|_| syntax("bad mass value"))?;
                    note_labels(&mut seen_targets, &labels);
                    masses.push((labels, v, line));
                }
                "source" => {
                    let (name, value) = rest.split_once('=').ok_or_else(|| syntax("expected `source s = p`"))?;
                    let v: f64 = value.trim().parse().map_err(|_| syntax("bad probability"))?;
                    sources.push((name.trim().to_string(), v));
                }
                "compat" => {
                    let (name, set) = rest.split_once('~').ok_or_else(|| syntax("expected `compat s ~ {..}`"))?;
                    let labels = parse_set(set.trim()).ok_or_else(|| syntax("expected `{label, ...}`"))?;
                    note_labels(&mut seen_targets, &labels);
                    compat.push((name.trim().to_string(), labels, line));
                }
                other => return Err(syntax(&format!("unknown statement `{other}`"))),
            }
        }
    }

    let target = Frame::new(frame.unwrap_or(seen_targets))?;
    let to_subset = |labels: &[String], line: usize| -> Result<Subset, BeliefError> {
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        target.subset(&refs).map_err(|e| BeliefError::Syntax { line, message: e.to_string() })
    };

    let masses = if masses.is_empty() {
        None
    } else {
        let items = masses
            .iter()
            .map(|(l, v, line)| Ok((to_subset(l, *line)?, *v)))
            .collect::<Result<Vec<_>, BeliefError>>()?;
        Some(MassFunction::new(target.clone(), items)?)
    };

    let source = if sources.is_empty() && compat.is_empty() {
        None
    } else {
        let source_frame = Frame::new(sources.iter().map(|(n, _)| n.clone()))?;
        let mut rows = vec![Subset::EMPTY; source_frame.len()];
        for (name, labels, line) in &compat {
            let s = source_frame.index_of(name).ok_or_else(|| BeliefError::UnknownLabel(name.clone()))?;
            rows[s] = rows[s].union(to_subset(labels, *line)?);
        }
        let probabilities: Vec<f64> = sources.iter().map(|(_, p)| *p).collect();
        check_source(&probabilities, source_frame.len())?;
        let relation = CompatibilityRelation::new(source_frame, target.clone(), rows)?;
        Some(SourceEvidence { probabilities, relation })
    };

    Ok(BeliefDoc { target, masses, source })
}

fn parse_set(text: &str) -> Option<Vec<String>> {
    let inner = text.strip_prefix('{')?.strip_suffix('}')?;
    let labels: Vec<String> = inner.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    (!labels.is_empty()).then_some(labels)
}

fn note_labels(seen: &mut Vec<String>, labels: &[String]) {
    for l in labels {
        if !seen.contains(l) {
            seen.push(l.clone());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn icy_masses() -> MassFunction {
        let (_, t) = icy_frames();
        MassFunction::new(t, [(Subset(0b01), 0.8), (Subset(0b11), 0.2)]).unwrap()
    }

    #[test]
    fn icy_beliefs() {
        let m = icy_masses();
        assert_eq!(m.bel(Subset(0b01)).unwrap(), 0.8);
        assert_eq!(m.bel(Subset(0b10)).unwrap(), 0.0);
        assert!((m.bel(Subset(0b11)).unwrap() - 1.0).abs() < 1e-15);
        let i2 = m.interval(Subset(0b10)).unwrap();
        assert_eq!(i2.support, 0.0);
        assert!((i2.plausibility - 0.2).abs() < 1e-15);
        let i1 = m.interval(Subset(0b01)).unwrap();
        assert_eq!((i1.support, i1.plausibility), (0.8, 1.0));
    }

    #[test]
    fn compatibility_matches_fig8() {
        let (s, t) = icy_frames();
        let c = CompatibilityRelation::new(s, t, vec![Subset(0b01), Subset(0b11)]).unwrap();
        let p = [0.8, 0.2];
        assert_eq!(bel_from_compatibility(&p, &c, Subset(0b01)).unwrap(), 0.8);
        assert_eq!(bel_from_compatibility(&p, &c, Subset(0b10)).unwrap(), 0.0);
        assert_eq!(bel_from_compatibility(&p, &c, Subset(0b11)).unwrap(), 1.0);
        let iv = interval(&p, &c, Subset(0b10)).unwrap();
        assert_eq!(iv.support, 0.0);
        assert!((iv.plausibility - 0.2).abs() < 1e-15);
        assert_eq!(c.induced_masses(&p).unwrap(), icy_masses());
    }

    #[test]
    fn vacuous_is_total_ignorance() {
        let f = Frame::new(["a", "b", "c"]).unwrap();
        let m = MassFunction::vacuous(f.clone());
        for tau in f.subsets().filter(|s| !s.is_empty() && *s != f.full()) {
            let iv = m.interval(tau).unwrap();
            assert_eq!((iv.support, iv.plausibility), (0.0, 1.0));
        }
    }

    #[test]
    fn pathology_rows() {
        let rows = pathology_sweep(&[1e-3, 1e-9, 0.0]).unwrap();
        assert_eq!((rows[0].bel_t1, rows[0].bel_t2), (0.0, 0.0));
        assert_eq!((rows[1].bel_t1, rows[1].bel_t2), (0.0, 0.0));
        assert_eq!((rows[2].bel_t1, rows[2].bel_t2), (0.8, 0.0));
        assert!(rows.iter().all(|r| (r.bel_frame - 1.0).abs() < 1e-15));
        assert!(matches!(pathology_sweep(&[0.5]), Err(BeliefError::BetaOutOfRange(_))));
    }

    #[test]
    fn invalid_inputs() {
        let (s, t) = icy_frames();
        assert!(matches!(
            CompatibilityRelation::new(s, t.clone(), vec![Subset(0b01), Subset::EMPTY]),
            Err(BeliefError::NoCompatibleTarget(_))
        ));
        assert!(matches!(MassFunction::new(t.clone(), [(Subset(0b01), 0.5)]), Err(BeliefError::MassSum(_))));
        assert!(matches!(
            MassFunction::new(t.clone(), [(Subset(0b100), 1.0)]),
            Err(BeliefError::SubsetOutsideFrame(_))
        ));
        assert!(matches!(
            MassFunction::new(t, [(Subset::EMPTY, 0.1), (Subset(1), 0.9)]),
            Err(BeliefError::EmptySetMass)
        ));
        assert!(matches!(BeliefInterval::new(0.6, 0.4), Err(BeliefError::Interval(..))));
        assert!(matches!(Frame::new(Vec::<String>::new()), Err(BeliefError::FrameSize(0))));
    }

    #[test]
    fn parse_document() {
        let doc = parse_belief(
            "# icy streets\nsource s1 = 0.8; source s2 = 0.2\ncompat s1 ~ {t1}\ncompat s2 ~ {t1, t2}\nmass {t1} = 0.8\nmass {t1,t2} = 0.2\n",
        )
        .unwrap();
        assert_eq!(doc.target.labels(), &["t1", "t2"]);
        assert_eq!(doc.masses.unwrap(), icy_masses());
        let src = doc.source.unwrap();
        assert_eq!(bel_from_compatibility(&src.probabilities, &src.relation, Subset(0b01)).unwrap(), 0.8);
        assert!(matches!(parse_belief("mass {t1} = 0.8\nbogus x"), Err(BeliefError::Syntax { line: 2, .. })));
    }
}
