//! Natural-gradient iteration over a parameterized state family.
//!
//! Two update rules share one metric pipeline:
//!
//! * trust region: `Δθ = −√(2ε / ∇Lᵀ G⁻¹ ∇L) · G⁻¹ ∇L`, first-order decrease
//!   `−√(2ε ∇Lᵀ G⁻¹ ∇L)`;
//! * fixed step: `Δθ = −η G⁻¹ ∇L`, first-order decrease `−η ∇Lᵀ G⁻¹ ∇L`.
//!
//! Per iteration the state is mixed with the identity (δ), the metric built from
//! the Petz function (optionally keeping only its diagonal), then regularized
//! toward the identity (ξ).

use nalgebra::{linalg::Cholesky, DVector};

use crate::error::{QngError, Result};
use crate::metrics::{diagonal_metric, quantum_fisher_metric, regularize_metric, MetricMatrix, TangentMRep};
use crate::petz::PetzFunction;
use crate::states::{mix_with_identity, DensityOperator, FrobeniusCost, StateFamily};

/// Cholesky pivots at or below `PIVOT_FLOOR · trace(G)/n` count as singular.
const PIVOT_FLOOR: f64 = 1e-14;

/// Solves `G x = b` for symmetric positive definite `G` by Cholesky factorization.
pub fn solve_spd(g: &MetricMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = g.dim();
    if b.len() != n {
        return Err(QngError::DimensionMismatch(n, b.len()));
    }
    let floor = PIVOT_FLOOR * (g.trace() / n as f64).max(0.0);
    let chol = Cholesky::new(g.inner().clone()).ok_or(QngError::SingularMetric(0.0))?;
    let l = chol.l_dirty();
    for i in 0..n {
        let pivot = l[(i, i)] * l[(i, i)];
        if !(pivot > floor) {
            return Err(QngError::SingularMetric(pivot));
        }
    }
    let x = chol.solve(&DVector::from_column_slice(b));
    Ok(x.iter().copied().collect())
}

/// How far one iteration moves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepRule {
    /// Saturate `½ Δθᵀ G Δθ = ε`.
    TrustRegion { epsilon: f64 },
    /// `Δθ = −η G⁻¹ ∇L`.
    Fixed { eta: f64 },
}

impl StepRule {
    fn validate(&self) -> Result<()> {
        match *self {
            Self::TrustRegion { epsilon } if !(epsilon > 0.0 && epsilon.is_finite()) => Err(
                QngError::InvalidParameter(format!("epsilon must be positive, got {epsilon}")),
            ),
            Self::Fixed { eta } if !(eta >= 0.0 && eta.is_finite()) => Err(
                QngError::InvalidParameter(format!("eta must be nonnegative, got {eta}")),
            ),
            _ => Ok(()),
        }
    }
}

/// A parameter update together with its first-order predicted change in cost.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub delta: Vec<f64>,
    pub predicted_decrease: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Trust-region natural-gradient step.
///
/// Returns `VanishingGradient` when `∇Lᵀ G⁻¹ ∇L` is zero, which callers treat as
/// convergence.
pub fn qng_step_trust_region(g: &MetricMatrix, grad: &[f64], epsilon: f64) -> Result<Step> {
    StepRule::TrustRegion { epsilon }.validate()?;
    let nat = solve_spd(g, grad)?;
    let q = dot(grad, &nat);
    if !(q > 0.0) {
        return Err(QngError::VanishingGradient(norm(grad)));
    }
    let scale = (2.0 * epsilon / q).sqrt();
    Ok(Step {
        delta: nat.iter().map(|x| -scale * x).collect(),
        predicted_decrease: -(2.0 * epsilon * q).sqrt(),
    })
}

/// Fixed-rate natural-gradient step.
pub fn qng_step_fixed(g: &MetricMatrix, grad: &[f64], eta: f64) -> Result<Step> {
    StepRule::Fixed { eta }.validate()?;
    let nat = solve_spd(g, grad)?;
    let q = dot(grad, &nat);
    Ok(Step {
        delta: nat.iter().map(|x| -eta * x).collect(),
        predicted_decrease: -eta * q,
    })
}

pub fn qng_step(g: &MetricMatrix, grad: &[f64], rule: StepRule) -> Result<Step> {
    match rule {
        StepRule::TrustRegion { epsilon } => qng_step_trust_region(g, grad, epsilon),
        StepRule::Fixed { eta } => qng_step_fixed(g, grad, eta),
    }
}

/// The per-iteration metric: Petz-induced, optionally diagonal, then ξ-regularized.
pub fn optimizer_metric(
    state: &DensityOperator,
    partials: &TangentMRep,
    petz: &PetzFunction,
    diagonal: bool,
    xi: f64,
) -> Result<MetricMatrix> {
    let g = quantum_fisher_metric(state.spectral(), partials, petz)?;
    let g = if diagonal { diagonal_metric(&g) } else { g };
    regularize_metric(&g, xi)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub rule: StepRule,
    pub petz: PetzFunction,
    /// Metric regularizer in `[0, 1)`.
    pub xi: f64,
    /// State regularizer in `[0, 1)`.
    pub delta: f64,
    /// Keep only the diagonal of the metric.
    pub diagonal: bool,
    pub max_iters: usize,
    pub grad_tol: f64,
    /// Evaluate the cost and its gradient on the δ-mixed states (target included).
    pub mix_cost: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            rule: StepRule::TrustRegion { epsilon: 1e-8 },
            petz: PetzFunction::Alpha(0.5),
            xi: 1e-3,
            delta: 1e-3,
            diagonal: false,
            max_iters: 10_000,
            grad_tol: 1e-12,
            mix_cost: true,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        self.rule.validate()?;
        for (name, v) in [("xi", self.xi), ("delta", self.delta)] {
            if !(0.0..1.0).contains(&v) {
                return Err(QngError::InvalidParameter(format!("{name} must lie in [0, 1), got {v}")));
            }
        }
        if self.max_iters < 1 {
            return Err(QngError::InvalidParameter("max_iters must be at least 1".into()));
        }
        if !(self.grad_tol > 0.0) {
            return Err(QngError::InvalidParameter("grad_tol must be positive".into()));
        }
        if let PetzFunction::Alpha(a) = self.petz {
            PetzFunction::alpha(a)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub theta: Vec<f64>,
    pub cost: f64,
    pub grad_norm: f64,
    /// Zero on the final record.
    pub step: Vec<f64>,
    pub predicted_decrease: f64,
}

impl IterationRecord {
    pub fn step_norm(&self) -> f64 {
        norm(&self.step)
    }
}

#[derive(Debug)]
pub enum Termination {
    /// `‖∇L‖ ≤ grad_tol`, or the natural-gradient norm vanished.
    Converged,
    MaxIterations,
    /// A numerical failure stopped the run; records up to it are kept.
    Failed(QngError),
}

/// Records of one optimization run. The last record describes the final iterate
/// and carries a zero step.
#[derive(Debug)]
pub struct Trajectory {
    pub petz: PetzFunction,
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn costs(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.cost).collect()
    }

    pub fn final_theta(&self) -> Option<&[f64]> {
        self.records.last().map(|r| r.theta.as_slice())
    }

    pub fn is_failed(&self) -> bool {
        matches!(self.termination, Termination::Failed(_))
    }
}

struct Evaluation {
    cost: f64,
    grad: Vec<f64>,
    metric: MetricMatrix,
}

fn evaluate<F: StateFamily + ?Sized>(
    family: &F,
    raw_cost: &FrobeniusCost,
    mixed_cost: &FrobeniusCost,
    cfg: &OptimizerConfig,
    theta: &[f64],
) -> Result<Evaluation> {
    let raw = family.value(theta)?;
    let raw_partials = family.partials(theta)?;
    let mixed = mix_with_identity(&raw, cfg.delta)?;
    let mixed_partials = raw_partials.scale(1.0 - cfg.delta);

    let (cost, grad) = if cfg.mix_cost {
        (mixed_cost.value_at(&mixed)?, mixed_cost.gradient_at(&mixed, &mixed_partials)?)
    } else {
        (raw_cost.value_at(&raw)?, raw_cost.gradient_at(&raw, &raw_partials)?)
    };
    let metric = optimizer_metric(&mixed, &mixed_partials, &cfg.petz, cfg.diagonal, cfg.xi)?;
    Ok(Evaluation { cost, grad, metric })
}

/// Runs natural-gradient descent on `Tr[(ρ_θ − target)²]` from `theta0`.
///
/// Configuration errors are returned as `Err`; numerical failures during the run
/// end it early with [`Termination::Failed`] and the records gathered so far.
pub fn run_optimization<F: StateFamily + ?Sized>(
    family: &F,
    target: &DensityOperator,
    cfg: &OptimizerConfig,
    theta0: &[f64],
) -> Result<Trajectory> {
    cfg.validate()?;
    family.check_theta(theta0)?;
    if target.dim() != family.dim() {
        return Err(QngError::DimensionMismatch(family.dim(), target.dim()));
    }
    let raw_cost = FrobeniusCost::new(target.clone());
    let mixed_cost = FrobeniusCost::new(mix_with_identity(target, cfg.delta)?);

    let mut records = Vec::new();
    let mut theta = theta0.to_vec();
    let zero = vec![0.0; theta.len()];

    for iter in 0..=cfg.max_iters {
        let eval = match evaluate(family, &raw_cost, &mixed_cost, cfg, &theta) {
            Ok(e) => e,
            Err(e) => return Ok(Trajectory { petz: cfg.petz, records, termination: Termination::Failed(e) }),
        };
        let grad_norm = norm(&eval.grad);
        let mut final_record = |termination| {
            records.push(IterationRecord {
                iter,
                theta: theta.clone(),
                cost: eval.cost,
                grad_norm,
                step: zero.clone(),
                predicted_decrease: 0.0,
            });
            Ok(Trajectory { petz: cfg.petz, records: std::mem::take(&mut records), termination })
        };
        if grad_norm <= cfg.grad_tol {
            return final_record(Termination::Converged);
        }
        if iter == cfg.max_iters {
            return final_record(Termination::MaxIterations);
        }
        let step = match qng_step(&eval.metric, &eval.grad, cfg.rule) {
            Ok(s) => s,
            Err(QngError::VanishingGradient(_)) => return final_record(Termination::Converged),
            Err(e) => return final_record(Termination::Failed(e)),
        };
        records.push(IterationRecord {
            iter,
            theta: theta.clone(),
            cost: eval.cost,
            grad_norm,
            step: step.delta.clone(),
            predicted_decrease: step.predicted_decrease,
        });
        for (t, d) in theta.iter_mut().zip(&step.delta) {
            *t += d;
        }
    }
    unreachable!("loop returns at iter == max_iters")
}
