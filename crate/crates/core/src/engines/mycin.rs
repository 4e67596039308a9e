use std::fmt;

use serde::{Deserialize, Serialize};

use super::{check_prob, EngineError};

/// Mycin certainty factor in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct CertaintyFactor(f64);

impl CertaintyFactor {
    pub const ZERO: CertaintyFactor = CertaintyFactor(0.0);

    pub fn new(value: f64) -> Result<Self, EngineError> {
        if (-1.0..=1.0).contains(&value) {
            Ok(CertaintyFactor(value))
        } else {
            Err(EngineError::CfOutOfRange(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn negate(self) -> Self {
        CertaintyFactor(-self.0)
    }
}

impl fmt::Display for CertaintyFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn check_prior(prior: f64) -> Result<f64, EngineError> {
    check_prob("prior", prior)?;
    if prior == 0.0 || prior == 1.0 {
        return Err(EngineError::DegeneratePrior { node: String::new(), value: prior });
    }
    Ok(prior)
}

/// Piecewise-linear map with `0 -> -1`, `prior -> 0`, `1 -> +1`.
pub fn cf_from_prob(p: f64, prior: f64) -> Result<CertaintyFactor, EngineError> {
    let p = check_prob("p", p)?;
    let q = check_prior(prior)?;
    let cf = if p >= q { (p - q) / (1.0 - q) } else { (p - q) / q };
    Ok(CertaintyFactor(cf.clamp(-1.0, 1.0)))
}

/// Inverse of [`cf_from_prob`].
pub fn prob_from_cf(cf: CertaintyFactor, prior: f64) -> Result<f64, EngineError> {
    let q = check_prior(prior)?;
    let x = cf.value();
    let p = if x >= 0.0 { q + x * (1.0 - q) } else { q * (1.0 + x) };
    Ok(p.clamp(0.0, 1.0))
}

/// Mycin's parallel combination of two certainty factors for one hypothesis.
pub fn mycin_combine(x: CertaintyFactor, y: CertaintyFactor) -> Result<CertaintyFactor, EngineError> {
    let (x, y) = (x.value(), y.value());
    let v = if x >= 0.0 && y >= 0.0 {
        x + y * (1.0 - x)
    } else if x <= 0.0 && y <= 0.0 {
        x + y * (1.0 + x)
    } else {
        let denom = 1.0 - x.abs().min(y.abs());
        if denom == 0.0 {
            return Err(EngineError::ContradictoryCertainty { node: None });
        }
        (x + y) / denom
    };
    Ok(CertaintyFactor(v.clamp(-1.0, 1.0)))
}

/// How a rule's certainty factor is scaled by its antecedent's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MycinAttenuation {
    /// `cf_rule * cf_antecedent`: evidence against the antecedent pushes the
    /// consequent the other way.
    Signed,
    /// `cf_rule * max(0, cf_antecedent)`: a disbelieved antecedent leaves the
    /// consequent at its prior.
    #[default]
    Clipped,
}

impl MycinAttenuation {
    pub fn apply(self, rule: CertaintyFactor, antecedent: CertaintyFactor) -> CertaintyFactor {
        let a = match self {
            MycinAttenuation::Signed => antecedent.value(),
            MycinAttenuation::Clipped => antecedent.value().max(0.0),
        };
        CertaintyFactor(rule.value() * a)
    }
}

/// One-rule Mycin inference `A -> B` with strength `s`, run in CF space and
/// converted back with `prior_b`.
pub fn mycin_modus_ponens(
    p_a: f64,
    prior_a: f64,
    strength: f64,
    prior_b: f64,
    mode: MycinAttenuation,
) -> Result<f64, EngineError> {
    let cf_a = cf_from_prob(p_a, prior_a)?;
    let cf_rule = cf_from_prob(strength, prior_b)?;
    prob_from_cf(mode.apply(cf_rule, cf_a), prior_b)
}
