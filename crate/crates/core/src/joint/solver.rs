//! Minimum cross-entropy projection onto a set of linear constraints.
//!
//! The solution has the exponential-family form
//! `p_i ∝ q_i exp(sum_j lambda_j (a_ji - b_j))`; the multipliers minimize the
//! convex dual `g(lambda) = ln sum_i q_i exp(lambda · f_i)` and are found with
//! damped Newton steps and Armijo backtracking. Maximum entropy is the special
//! case of a uniform prior.
//!
//! Constraints that force events to zero (any row whose coefficients all lie
//! on one side of its target) are applied first by shrinking the support, so
//! hard 0/1 statements never need infinite multipliers.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{cross_entropy, uniform_joint, JointDistribution, JointError, LinearConstraint, DEFAULT_PROP_CAP};

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Largest acceptable constraint residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Iterations without progress before a large residual counts as infeasible.
    pub stall_window: usize,
    pub stall_threshold: f64,
    pub prop_cap: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            max_iter: 10_000,
            stall_window: 500,
            stall_threshold: 1e-4,
            prop_cap: DEFAULT_PROP_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Objective {
    /// Entropy of the solution, nats.
    Entropy(f64),
    /// Cross-entropy from the prior, nats.
    CrossEntropy(f64),
}

impl Objective {
    pub fn value(self) -> f64 {
        match self {
            Objective::Entropy(v) | Objective::CrossEntropy(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub iterations: usize,
    /// Largest `|a·w - b|` over every input constraint.
    pub max_residual: f64,
    pub objective: Objective,
    /// Events left in the support after hard-constraint restriction.
    pub support: usize,
    /// Rows that needed multipliers.
    pub active_constraints: usize,
}

/// Maximum-entropy distribution over `props` satisfying `constraints`.
pub fn max_entropy(
    props: &[String],
    constraints: &[LinearConstraint],
    opts: &SolverOptions,
) -> Result<(JointDistribution, SolverReport), JointError> {
    let uniform = uniform_joint(props, opts.prop_cap)?;
    let (weights, iterations, support, active) = project(uniform.weights(), constraints, opts)?;
    let jd = JointDistribution::from_parts_unchecked(props.to_vec(), weights);
    let report = SolverReport {
        iterations,
        max_residual: max_residual(constraints, jd.weights()),
        objective: Objective::Entropy(jd.entropy()),
        support,
        active_constraints: active,
    };
    Ok((jd, report))
}

/// The distribution closest to `prior` in cross-entropy that satisfies
/// `constraints`. Returns `prior` itself when it already complies.
pub fn min_cross_entropy(
    prior: &JointDistribution,
    constraints: &[LinearConstraint],
    opts: &SolverOptions,
) -> Result<(JointDistribution, SolverReport), JointError> {
    if prior.props().len() > opts.prop_cap {
        return Err(JointError::TooManyPropositions { m: prior.props().len(), cap: opts.prop_cap });
    }
    let residual0 = max_residual(constraints, prior.weights());
    if residual0 <= opts.tol {
        let report = SolverReport {
            iterations: 0,
            max_residual: residual0,
            objective: Objective::CrossEntropy(0.0),
            support: prior.weights().iter().filter(|&&w| w > 0.0).count(),
            active_constraints: 0,
        };
        return Ok((prior.clone(), report));
    }
    let has_zeros = prior.weights().contains(&0.0);
    let (weights, iterations, support, active) = project(prior.weights(), constraints, opts).map_err(|e| match e {
        JointError::Infeasible { violated, .. } if has_zeros => JointError::SupportConflict { violated },
        e => e,
    })?;
    let ce = cross_entropy(&weights, prior.weights())?;
    let jd = JointDistribution::from_parts_unchecked(prior.props().to_vec(), weights);
    let report = SolverReport {
        iterations,
        max_residual: max_residual(constraints, jd.weights()),
        objective: Objective::CrossEntropy(ce),
        support,
        active_constraints: active,
    };
    Ok((jd, report))
}

const POLISH_STEPS: usize = 2;
const POLISH_TOL: f64 = 1e-14;

fn max_residual(constraints: &[LinearConstraint], w: &[f64]) -> f64 {
    constraints.iter().map(|c| c.residual(w).abs()).fold(0.0, f64::max)
}

struct Row<'a> {
    source: &'a LinearConstraint,
    dense: Vec<f64>,
}

/// Shrink the support until no row forces further zeros. Returns the rows
/// that still need multipliers.
fn restrict_support<'a>(alive: &mut [bool], rows: Vec<Row<'a>>) -> Result<Vec<Row<'a>>, JointError> {
    let mut rows = rows;
    loop {
        let mut changed = false;
        let mut keep = Vec::with_capacity(rows.len());
        for row in rows {
            let b = row.source.target;
            let (mut lo, mut hi, mut any) = (f64::INFINITY, f64::NEG_INFINITY, false);
            for (i, &c) in row.dense.iter().enumerate() {
                if alive[i] {
                    lo = lo.min(c);
                    hi = hi.max(c);
                    any = true;
                }
            }
            let infeasible =
                || JointError::Infeasible { violated: vec![row.source.origin.to_string()], residual: f64::NAN };
            if !any {
                return Err(infeasible());
            }
            if lo >= b - EPS && hi <= b + EPS {
                continue;
            }
            if hi < b - EPS || lo > b + EPS {
                return Err(infeasible());
            }
            if hi <= b + EPS {
                for (i, &c) in row.dense.iter().enumerate() {
                    if alive[i] && c < b - EPS {
                        alive[i] = false;
                        changed = true;
                    }
                }
                continue;
            }
            if lo >= b - EPS {
                for (i, &c) in row.dense.iter().enumerate() {
                    if alive[i] && c > b + EPS {
                        alive[i] = false;
                        changed = true;
                    }
                }
                continue;
            }
            keep.push(row);
        }
        rows = keep;
        if !changed {
            return Ok(rows);
        }
    }
}

/// Dual of the projection restricted to the live support.
struct Dual {
    /// Centered features `a_ji - b_j`, event-major.
    features: Vec<f64>,
    log_prior: Vec<f64>,
    k: usize,
}

impl Dual {
    /// `ln Z(lambda)`; fills `p` with the primal point.
    fn eval(&self, lambda: &[f64], p: &mut [f64]) -> f64 {
        let k = self.k;
        let mut max = f64::NEG_INFINITY;
        for (i, s) in p.iter_mut().enumerate() {
            let f = &self.features[i * k..(i + 1) * k];
            *s = self.log_prior[i] + f.iter().zip(lambda).map(|(a, l)| a * l).sum::<f64>();
            max = max.max(*s);
        }
        if !max.is_finite() {
            return f64::NAN;
        }
        let mut z = 0.0;
        for s in p.iter_mut() {
            *s = (*s - max).exp();
            z += *s;
        }
        for s in p.iter_mut() {
            *s /= z;
        }
        max + z.ln()
    }

    fn gradient(&self, p: &[f64]) -> Vec<f64> {
        let k = self.k;
        let mut g = vec![0.0; k];
        for (i, &pi) in p.iter().enumerate() {
            for (gj, f) in g.iter_mut().zip(&self.features[i * k..(i + 1) * k]) {
                *gj += pi * f;
            }
        }
        g
    }

    fn hessian(&self, p: &[f64], grad: &[f64]) -> DMatrix<f64> {
        let k = self.k;
        // Lower triangle, row-major.
        let mut acc = vec![0.0; k * k];
        for (i, &pi) in p.iter().enumerate() {
            if pi == 0.0 {
                continue;
            }
            let f = &self.features[i * k..(i + 1) * k];
            for (a, &fa) in f.iter().enumerate() {
                let pa = pi * fa;
                for (h, &fb) in acc[a * k..a * k + a + 1].iter_mut().zip(f) {
                    *h += pa * fb;
                }
            }
        }
        DMatrix::from_fn(k, k, |a, b| {
            let (a, b) = if a >= b { (a, b) } else { (b, a) };
            acc[a * k + b] - grad[a] * grad[b]
        })
    }
}

fn newton_direction(h: &DMatrix<f64>, grad: &[f64]) -> Option<Vec<f64>> {
    let k = grad.len();
    let scale = (0..k).map(|i| h[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let rhs = DVector::from_iterator(k, grad.iter().map(|g| -g));
    let mut mu = 1e-12 * scale;
    for _ in 0..12 {
        let mut m = h.clone();
        for i in 0..k {
            m[(i, i)] += mu;
        }
        if let Some(ch) = m.cholesky() {
            let d = ch.solve(&rhs);
            if d.iter().all(|x| x.is_finite()) {
                return Some(d.iter().copied().collect());
            }
        }
        mu *= 100.0;
    }
    None
}

/// Project `prior` onto the constraints. Returns the full weight vector,
/// Newton iterations, support size and active row count.
fn project(
    prior: &[f64],
    constraints: &[LinearConstraint],
    opts: &SolverOptions,
) -> Result<(Vec<f64>, usize, usize, usize), JointError> {
    let n = prior.len();
    let mut alive: Vec<bool> = prior.iter().map(|&w| w > 0.0).collect();
    let rows: Vec<Row> =
        constraints.iter().filter(|c| !c.is_normalization()).map(|c| Row { source: c, dense: c.dense(n) }).collect();
    for c in constraints.iter().filter(|c| c.is_normalization()) {
        // The normalization row is implicit in the exponential family; a
        // malformed one is still an inconsistency.
        if (c.target - 1.0).abs() > EPS || c.coefficients.len() != n || c.coefficients.iter().any(|&(_, v)| v != 1.0) {
            return Err(JointError::Infeasible { violated: vec![c.origin.to_string()], residual: f64::NAN });
        }
    }
    let rows = restrict_support(&mut alive, rows)?;
    if !alive.iter().any(|&a| a) {
        return Err(JointError::Infeasible { violated: vec!["empty support".into()], residual: f64::NAN });
    }

    let support: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
    let mass: f64 = support.iter().map(|&i| prior[i]).sum();
    let log_prior: Vec<f64> = support.iter().map(|&i| (prior[i] / mass).ln()).collect();
    let k = rows.len();
    let mut features = Vec::with_capacity(support.len() * k);
    for &i in &support {
        features.extend(rows.iter().map(|r| r.dense[i] - r.source.target));
    }
    let origins: Vec<String> = rows.iter().map(|r| r.source.origin.to_string()).collect();
    drop(rows);
    let dual = Dual { features, log_prior, k };
    let log_floor = dual.log_prior.iter().copied().fold(f64::INFINITY, f64::min);

    let mut lambda = vec![0.0; k];
    let mut p = vec![0.0; support.len()];
    let mut trial_p = vec![0.0; support.len()];
    let mut g_val = dual.eval(&lambda, &mut p);
    let mut best = f64::INFINITY;
    let mut stalled = 0usize;
    let mut iterations = 0usize;
    let mut polish = 0usize;

    let violated = |grad: &[f64], limit: f64| -> Vec<String> {
        let mut v: Vec<(f64, &String)> =
            grad.iter().zip(&origins).filter(|(r, _)| r.abs() > limit).map(|(r, o)| (r.abs(), o)).collect();
        v.sort_by(|a, b| b.0.total_cmp(&a.0));
        v.into_iter().map(|(_, s)| s.clone()).collect()
    };

    loop {
        let grad = if k == 0 { Vec::new() } else { dual.gradient(&p) };
        let residual = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        let converged = residual <= opts.tol;
        if converged {
            // A couple of extra Newton steps take the residual to rounding level.
            if polish == POLISH_STEPS || residual <= POLISH_TOL {
                break;
            }
            polish += 1;
        } else {
            if residual < best * (1.0 - 1e-3) {
                best = residual;
                stalled = 0;
            } else {
                stalled += 1;
            }
            let certificate = g_val < log_floor - 1e-9;
            if certificate || (stalled >= opts.stall_window && best > opts.stall_threshold) || !g_val.is_finite() {
                return Err(JointError::Infeasible { violated: violated(&grad, opts.stall_threshold), residual });
            }
            if iterations >= opts.max_iter || stalled >= opts.stall_window {
                return Err(JointError::NonConvergence { iterations, residual });
            }
        }
        iterations += 1;

        let h = dual.hessian(&p, &grad);
        let Some(dir) = newton_direction(&h, &grad) else {
            return Err(JointError::NonConvergence { iterations, residual });
        };
        let slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
        // Once the predicted decrease is at rounding level of the dual, the
        // dual value can no longer rank steps; the residual still can.
        let flat = -slope <= 1e-12 * g_val.abs().max(1.0);
        let mut t = 1.0;
        let mut accepted = false;
        for attempt in 0..60 {
            let trial: Vec<f64> = lambda.iter().zip(&dir).map(|(l, d)| l + t * d).collect();
            let g_trial = dual.eval(&trial, &mut trial_p);
            let ok = g_trial.is_finite()
                && if flat {
                    attempt == 0 && dual.gradient(&trial_p).iter().fold(0.0f64, |m, g| m.max(g.abs())) < residual
                } else {
                    g_trial <= g_val + 1e-4 * t * slope.min(0.0)
                };
            if ok {
                lambda = trial;
                g_val = g_trial;
                std::mem::swap(&mut p, &mut trial_p);
                accepted = true;
                break;
            }
            if flat {
                break;
            }
            t *= 0.5;
        }
        if !accepted && converged {
            break;
        }
        if !accepted {
            // No further decrease is representable; the residual decides.
            if residual > opts.stall_threshold {
                return Err(JointError::Infeasible { violated: violated(&grad, opts.stall_threshold), residual });
            }
            return Err(JointError::NonConvergence { iterations, residual });
        }
    }

    let mut weights = vec![0.0; n];
    for (&i, &pi) in support.iter().zip(&p) {
        weights[i] = pi;
    }
    Ok((weights, iterations, support.len(), k))
}
