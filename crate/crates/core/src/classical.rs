//! Classical natural gradient on parameterized probability distributions.
//!
//! A distribution embeds as a diagonal density operator. All Petz functions
//! satisfy `f(1) = 1`, and on a commuting family only that value enters the
//! metric, so every `f_α` yields the classical Fisher metric there.

use crate::error::{QngError, Result};
use crate::linalg::ComplexMatrix;
use crate::metrics::{classical_fisher_metric, quantum_fisher_metric, regularize_metric, MetricMatrix, TangentMRep};
use crate::optimizer::{qng_step, Step, StepRule};
use crate::petz::PetzFunction;
use crate::states::{DensityOperator, StateFamily};

pub trait DistributionFamily: Send + Sync {
    fn n_params(&self) -> usize;
    fn n_outcomes(&self) -> usize;

    /// Probabilities and their parameter derivatives `∂_i p(x)`.
    fn value_and_partials(&self, theta: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)>;

    fn value(&self, theta: &[f64]) -> Result<Vec<f64>> {
        Ok(self.value_and_partials(theta)?.0)
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params() {
            return Err(QngError::DimensionMismatch(self.n_params(), theta.len()));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(QngError::InvalidParameter("non-finite parameter".into()));
        }
        Ok(())
    }
}

/// `p(x) = exp(θ_x) / Σ_y exp(θ_y)` with one parameter per outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SoftmaxFamily {
    k: usize,
}

impl SoftmaxFamily {
    pub fn new(k: usize) -> Self {
        assert!(k >= 2, "softmax needs at least two outcomes");
        Self { k }
    }
}

impl DistributionFamily for SoftmaxFamily {
    fn n_params(&self) -> usize {
        self.k
    }

    fn n_outcomes(&self) -> usize {
        self.k
    }

    fn value_and_partials(&self, theta: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        self.check_theta(theta)?;
        let p = softmax(theta);
        // ∂_i p_x = p_x (δ_ix − p_i)
        let d = (0..self.k)
            .map(|i| {
                (0..self.k)
                    .map(|x| p[x] * (if i == x { 1.0 } else { 0.0 } - p[i]))
                    .collect()
            })
            .collect();
        Ok((p, d))
    }
}

pub fn softmax(theta: &[f64]) -> Vec<f64> {
    let m = theta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = theta.iter().map(|t| (t - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// A distribution family viewed as a family of diagonal density operators.
#[derive(Clone, Debug)]
pub struct DiagonalFamily<D>(pub D);

impl<D: DistributionFamily> StateFamily for DiagonalFamily<D> {
    fn n_params(&self) -> usize {
        self.0.n_params()
    }

    fn dim(&self) -> usize {
        self.0.n_outcomes()
    }

    fn value(&self, theta: &[f64]) -> Result<DensityOperator> {
        DensityOperator::new(ComplexMatrix::from_real_diagonal(&self.0.value(theta)?))
    }

    fn partials(&self, theta: &[f64]) -> Result<TangentMRep> {
        let (_, d) = self.0.value_and_partials(theta)?;
        TangentMRep::new(d.iter().map(|di| ComplexMatrix::from_real_diagonal(di)).collect())
    }
}

/// Classical Fisher metric of a distribution family.
pub fn classical_metric<D: DistributionFamily + ?Sized>(family: &D, theta: &[f64]) -> Result<MetricMatrix> {
    let (p, d) = family.value_and_partials(theta)?;
    classical_fisher_metric(&p, &d)
}

/// Natural-gradient step on a distribution family, with the metric induced by
/// `petz` on the diagonal embedding and then ξ-regularized.
pub fn classical_ng_step<D: DistributionFamily + Clone>(
    family: &D,
    loss_grad: &[f64],
    theta: &[f64],
    rule: StepRule,
    petz: &PetzFunction,
    xi: f64,
) -> Result<Step> {
    let emb = DiagonalFamily(family.clone());
    let rho = emb.value(theta)?;
    let g = quantum_fisher_metric(rho.spectral(), &emb.partials(theta)?, petz)?;
    qng_step(&regularize_metric(&g, xi)?, loss_grad, rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::loewner_margin;
    use crate::rng::Sampler;

    #[test]
    fn softmax_examples() {
        let f = SoftmaxFamily::new(2);
        assert_eq!(f.value(&[0.0, 0.0]).unwrap(), vec![0.5, 0.5]);
        let p = f.value(&[3f64.ln(), 0.0]).unwrap();
        assert!((p[0] - 0.75).abs() < 1e-15 && (p[1] - 0.25).abs() < 1e-15);
        let p = f.value(&[800.0, 0.0]).unwrap();
        assert!(p.iter().all(|x| x.is_finite()));
        assert!(f.value(&[0.0]).is_err());
    }

    #[test]
    fn softmax_partials_match_finite_differences() {
        let f = SoftmaxFamily::new(4);
        let mut s = Sampler::new(31);
        for _ in 0..10 {
            let theta: Vec<f64> = (0..4).map(|_| s.range(-2.0, 2.0)).collect();
            let (_, d) = f.value_and_partials(&theta).unwrap();
            let h = 1e-6;
            for i in 0..4 {
                let mut tp = theta.clone();
                let mut tm = theta.clone();
                tp[i] += h;
                tm[i] -= h;
                let (pp, pm) = (f.value(&tp).unwrap(), f.value(&tm).unwrap());
                for x in 0..4 {
                    assert!(((pp[x] - pm[x]) / (2.0 * h) - d[i][x]).abs() <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn fisher_at_symmetric_point() {
        let g = classical_metric(&SoftmaxFamily::new(2), &[0.0, 0.0]).unwrap();
        // p = (½, ½), ∂_0 p = (¼, −¼)
        assert!((g.get(0, 0) - 0.25).abs() < 1e-15);
        assert!((g.get(0, 1) + 0.25).abs() < 1e-15);
    }

    #[test]
    fn trust_region_with_identity_metric() {
        let s = qng_step(&MetricMatrix::identity(2), &[1.0, 0.0], StepRule::TrustRegion { epsilon: 0.5 }).unwrap();
        assert!((s.delta[0] + 1.0).abs() < 1e-15 && s.delta[1].abs() < 1e-15);
    }

    #[test]
    fn embedding_metric_equals_classical_fisher() {
        let f = SoftmaxFamily::new(3);
        let emb = DiagonalFamily(f);
        let theta = [0.4, -1.0, 0.2];
        let c = classical_metric(&f, &theta).unwrap();
        let rho = emb.value(&theta).unwrap();
        for petz in [PetzFunction::Sld, PetzFunction::Rrld, PetzFunction::KuboMori, PetzFunction::Alpha(-0.3), PetzFunction::Alpha(0.1)] {
            let q = quantum_fisher_metric(rho.spectral(), &emb.partials(&theta).unwrap(), &petz).unwrap();
            assert!((q.inner() - c.inner()).amax() <= 1e-12);
            assert!(loewner_margin(&q, &c).unwrap().abs() <= 1e-12);
        }
    }

    #[test]
    fn steps_are_alpha_independent() {
        let f = SoftmaxFamily::new(3);
        let mut s = Sampler::new(32);
        for _ in 0..10 {
            let theta: Vec<f64> = (0..3).map(|_| s.range(-1.0, 1.0)).collect();
            let grad: Vec<f64> = (0..3).map(|_| s.symmetric()).collect();
            for rule in [StepRule::TrustRegion { epsilon: 1e-3 }, StepRule::Fixed { eta: 0.1 }] {
                let base = classical_ng_step(&f, &grad, &theta, rule, &PetzFunction::Sld, 1e-3).unwrap();
                for a in [-1.0, -0.3, 0.1, 0.3, 0.5, 2.0] {
                    let st = classical_ng_step(&f, &grad, &theta, rule, &PetzFunction::Alpha(a), 1e-3).unwrap();
                    for (x, y) in st.delta.iter().zip(&base.delta) {
                        assert!((x - y).abs() <= 1e-10, "α={a}");
                    }
                }
            }
        }
    }
}
