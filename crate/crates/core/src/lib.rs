//! Comparing uncertain-inference engines against a maximum-entropy reference.
//!
//! - [`rules`]: propositions, rules, priors, evidence and their text format.
//! - [`joint`]: joint distributions over propositions, the MaxEnt solver and
//!   minimum cross-entropy updates.
//! - [`engines`]: MaxC/FST, MinC, Ind, Mycin and DST propagation.
//! - [`belief`]: Dempster-Shafer frames, masses and compatibility relations.
//! - [`metrics`]: errors, random-guess baselines and normalized scores.
//! - [`harness`]: the two-stage pipeline, sweeps and the reactor benchmark.

pub mod belief;
pub mod engines;
pub mod harness;
pub mod joint;
pub mod metrics;
pub mod rules;
