//! Error measures against reference probabilities, random-guess baselines and
//! normalized scores.
//!
//! A score is 1 for a perfect estimate, 0 for an estimate as bad as the
//! expected random guess over the engine's output domain, and -1 for the worst
//! possible point estimate.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engines::{prob_from_cf, CertaintyFactor, EngineKind, Verdict};
use crate::rules::PropKind;

const TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("{what} = {value} outside [0, 1]")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("interval [{a}, {b}] has a > b")]
    Interval { a: f64, b: f64 },
    #[error("the Mycin baseline needs a prior in (0, 1)")]
    MissingPrior,
    #[error("baseline {mu} exceeds the worst-case error {worst}")]
    InvalidBaseline { mu: f64, worst: f64 },
    #[error("no samples for engine {engine} in class {class}")]
    EmptyClass { engine: EngineKind, class: NodeClass },
    #[error("leaf propositions are not scored")]
    LeafSample,
}

fn unit(what: &'static str, v: f64) -> Result<f64, MetricsError> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(MetricsError::OutOfRange { what, value: v })
    }
}

/// `(|p̂ - p|, (p̂ - p)^2)`.
pub fn point_errors(estimate: f64, reference: f64) -> Result<(f64, f64), MetricsError> {
    let e = unit("estimate", estimate)? - unit("reference", reference)?;
    Ok((e.abs(), e * e))
}

/// Expected absolute and squared error of a point drawn uniformly from
/// `[a, b]`.
pub fn interval_errors(a: f64, b: f64, reference: f64) -> Result<(f64, f64), MetricsError> {
    let (a, b, p) = (unit("support", a)?, unit("plausibility", b)?, unit("reference", reference)?);
    if a > b {
        return Err(MetricsError::Interval { a, b });
    }
    let mid = (a + b) / 2.0;
    let w = b - a;
    let sq = (mid - p).powi(2) + w * w / 12.0;
    let abs = if p <= a {
        mid - p
    } else if p >= b {
        p - mid
    } else {
        ((p - a).powi(2) + (b - p).powi(2)) / (2.0 * w)
    };
    Ok((abs, sq))
}

/// Errors of a verdict, treating intervals as uniform point guesses.
pub fn verdict_errors(v: &Verdict, reference: f64) -> Result<(f64, f64), MetricsError> {
    match v {
        Verdict::Point(x) => point_errors(*x, reference),
        Verdict::Interval(i) => interval_errors(i.support, i.plausibility, reference),
    }
}

/// Output domain a random-guessing engine draws from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GuessDomain {
    /// Probability uniform on `[0, 1]`.
    Unit,
    /// Certainty factor uniform on `[-1, 1]`, mapped through the prior.
    CertaintyFactor { prior: f64 },
    /// `(a, b)` uniform on `0 <= a <= b <= 1`.
    Triangle,
}

impl GuessDomain {
    pub fn for_engine(kind: EngineKind, prior: Option<f64>) -> Result<Self, MetricsError> {
        Ok(match kind {
            EngineKind::Mycin => {
                let q = prior.ok_or(MetricsError::MissingPrior)?;
                if !(q > 0.0 && q < 1.0) {
                    return Err(MetricsError::MissingPrior);
                }
                GuessDomain::CertaintyFactor { prior: q }
            }
            EngineKind::Dst => GuessDomain::Triangle,
            _ => GuessDomain::Unit,
        })
    }
}

fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x * x * x.ln()
    }
}

/// Closed-form `(μ(|ε|), μ(ε²))` of a random guess over `domain`.
pub fn baseline(domain: GuessDomain, p: f64) -> Result<(f64, f64), MetricsError> {
    let p = unit("reference", p)?;
    let pq = p * (1.0 - p);
    Ok(match domain {
        GuessDomain::Unit => (0.5 - pq, 1.0 / 3.0 - pq),
        GuessDomain::CertaintyFactor { prior: p0 } => {
            let q = if p < p0 { p0 } else { 1.0 - p0 };
            let abs = (2.0 * (p * p + p0 * p0) + q - 4.0 * p * p0) / (4.0 * q);
            let sq = (2.0 * p0 * p0 - 6.0 * p * p0 + 6.0 * p * p + 1.0 + p0 - 3.0 * p) / 6.0;
            (abs, sq)
        }
        GuessDomain::Triangle => {
            let r = 1.0 - p;
            let abs = 31.0 / 18.0 * (p.powi(3) + r.powi(3)) + 3.5 * pq - 2.0 / 3.0 * (xlnx(p) + xlnx(r)) - 11.0 / 9.0;
            (abs, 11.0 / 36.0 - pq)
        }
    })
}

/// Baseline for an engine kind; Mycin needs the node's prior.
pub fn random_guess_baseline(kind: EngineKind, p: f64, prior: Option<f64>) -> Result<(f64, f64), MetricsError> {
    baseline(GuessDomain::for_engine(kind, prior)?, p)
}

/// Monte-Carlo estimate of [`baseline`] from `samples` seeded draws.
pub fn monte_carlo_baseline(
    domain: GuessDomain,
    p: f64,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64), MetricsError> {
    let p = unit("reference", p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut abs, mut sq) = (0.0, 0.0);
    for _ in 0..samples {
        let (ea, es) = match domain {
            GuessDomain::Unit => point_errors(rng.gen::<f64>(), p)?,
            GuessDomain::CertaintyFactor { prior } => {
                let cf = CertaintyFactor::new(rng.gen_range(-1.0..=1.0)).expect("in range");
                let x = prob_from_cf(cf, prior).map_err(|_| MetricsError::MissingPrior)?;
                point_errors(x, p)?
            }
            GuessDomain::Triangle => {
                let (u, v): (f64, f64) = (rng.gen(), rng.gen());
                interval_errors(u.min(v), u.max(v), p)?
            }
        };
        abs += ea;
        sq += es;
    }
    let n = samples as f64;
    Ok((abs / n, sq / n))
}

/// Piecewise-linear score: `err = 0 -> 1`, `err = mu -> 0`, `err = worst -> -1`,
/// clamped to `[-1, 1]` beyond `worst`.
pub fn normalize(err: f64, mu: f64, worst: f64) -> Result<f64, MetricsError> {
    if mu > worst + TOL || mu < 0.0 {
        return Err(MetricsError::InvalidBaseline { mu, worst });
    }
    let s = if err <= mu {
        if mu == 0.0 {
            1.0
        } else {
            1.0 - err / mu
        }
    } else if worst <= mu {
        -1.0
    } else {
        -(err - mu) / (worst - mu)
    };
    Ok(s.clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedScore {
    pub eta: f64,
    pub zeta: f64,
}

impl NormalizedScore {
    /// Scores for errors `(abs, sq)` against reference `p` and baseline `mu`.
    pub fn new(abs: f64, sq: f64, p: f64, mu: (f64, f64)) -> Result<Self, MetricsError> {
        let worst = p.max(1.0 - p);
        Ok(NormalizedScore { eta: normalize(abs, mu.0, worst)?, zeta: normalize(sq, mu.1, worst * worst)? })
    }
}

/// Node classes reported separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeClass {
    Intermediate,
    Conclusion,
    All,
}

impl NodeClass {
    pub fn label(self) -> &'static str {
        match self {
            NodeClass::Intermediate => "I",
            NodeClass::Conclusion => "C",
            NodeClass::All => "I+C",
        }
    }

    fn includes(self, kind: PropKind) -> bool {
        match self {
            NodeClass::Intermediate => kind == PropKind::Intermediate,
            NodeClass::Conclusion => kind == PropKind::Conclusion,
            NodeClass::All => kind != PropKind::Leaf,
        }
    }
}

impl std::fmt::Display for NodeClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSample {
    pub node: String,
    pub kind: PropKind,
    pub engine: EngineKind,
    pub reference: f64,
    /// Node prior, used by the Mycin baseline.
    pub prior: Option<f64>,
    pub abs_err: f64,
    pub sq_err: f64,
    pub score: NormalizedScore,
}

impl ErrorSample {
    pub fn new(
        node: impl Into<String>,
        kind: PropKind,
        engine: EngineKind,
        verdict: &Verdict,
        reference: f64,
        prior: Option<f64>,
    ) -> Result<Self, MetricsError> {
        if kind == PropKind::Leaf {
            return Err(MetricsError::LeafSample);
        }
        let (abs_err, sq_err) = verdict_errors(verdict, reference)?;
        let mu = random_guess_baseline(engine, reference, prior)?;
        let score = NormalizedScore::new(abs_err, sq_err, reference, mu)?;
        Ok(ErrorSample { node: node.into(), kind, engine, reference, prior, abs_err, sq_err, score })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub engine: EngineKind,
    pub class: NodeClass,
    pub count: usize,
    pub abs: f64,
    pub eta: f64,
    pub sq: f64,
    pub zeta: f64,
}

/// Means per engine and node class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub engines: Vec<EngineKind>,
    pub classes: Vec<NodeClass>,
    pub rows: Vec<ReportRow>,
}

const METRICS: [&str; 4] = ["abs", "eta", "sq", "zeta"];

impl ReportRow {
    fn metric(&self, m: &str) -> f64 {
        match m {
            "abs" => self.abs,
            "eta" => self.eta,
            "sq" => self.sq,
            _ => self.zeta,
        }
    }
}

impl ComparisonReport {
    pub fn row(&self, engine: EngineKind, class: NodeClass) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.engine == engine && r.class == class)
    }

    /// Metric-by-class rows, one column per engine.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<8}{:<6}", "metric", "class");
        for e in &self.engines {
            let _ = write!(out, "{:>10}", e.label());
        }
        out.push('\n');
        for m in METRICS {
            for &c in &self.classes {
                let _ = write!(out, "{:<8}{:<6}", m, c.label());
                for &e in &self.engines {
                    match self.row(e, c) {
                        Some(r) => {
                            let _ = write!(out, "{:>10.4}", r.metric(m));
                        }
                        None => {
                            let _ = write!(out, "{:>10}", "-");
                        }
                    }
                }
                out.push('\n');
            }
        }
        out
    }

    /// `engine,class,metric,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("engine,class,metric,value\n");
        for r in &self.rows {
            for m in METRICS {
                let _ = writeln!(out, "{},{},{},{}", r.engine, r.class.label(), m, r.metric(m));
            }
        }
        out
    }
}

/// Mean errors and scores per engine (in first-seen order) for each class.
pub fn aggregate(samples: &[ErrorSample], classes: &[NodeClass]) -> Result<ComparisonReport, MetricsError> {
    let mut engines = Vec::new();
    for s in samples {
        if !engines.contains(&s.engine) {
            engines.push(s.engine);
        }
    }
    let mut rows = Vec::new();
    for &engine in &engines {
        let mut by_class: BTreeMap<NodeClass, Vec<&ErrorSample>> = BTreeMap::new();
        for s in samples.iter().filter(|s| s.engine == engine) {
            for &c in classes {
                if c.includes(s.kind) {
                    by_class.entry(c).or_default().push(s);
                }
            }
        }
        for &class in classes {
            let group =
                by_class.get(&class).filter(|g| !g.is_empty()).ok_or(MetricsError::EmptyClass { engine, class })?;
            let n = group.len() as f64;
            let mean = |f: &dyn Fn(&ErrorSample) -> f64| group.iter().map(|s| f(s)).sum::<f64>() / n;
            rows.push(ReportRow {
                engine,
                class,
                count: group.len(),
                abs: mean(&|s| s.abs_err),
                eta: mean(&|s| s.score.eta),
                sq: mean(&|s| s.sq_err),
                zeta: mean(&|s| s.score.zeta),
            });
        }
    }
    Ok(ComparisonReport { engines, classes: classes.to_vec(), rows })
}
