//! Rescaled Rényi divergences, their Kullback–Leibler limits, and the
//! finite-difference bridge from a divergence to the metric it induces.
//!
//! The rescaled divergences carry the prefactor `1/(α(α − 1))`:
//!
//! ```text
//! classical:  D_α(p̄‖p) = ln Σ_x p̄(x)^α p(x)^(1−α)            / (α(α−1))
//! sandwiched: D_α(ρ̄‖ρ) = ln Tr[(ρ^s ρ̄ ρ^s)^α],  s = (1−α)/(2α)  / (α(α−1))
//! ```
//!
//! The Hessian of `D_α(ρ_θ̄‖ρ_θ)` in the first argument at `θ̄ = θ` is the metric
//! induced by the Petz function `f_α`.

use crate::classical::DistributionFamily;
use crate::error::{QngError, Result};
use nalgebra::{Cholesky, DMatrix};

use crate::linalg::C64;
use crate::metrics::{check_distribution, EIGENVALUE_FLOOR};
use crate::states::{DensityOperator, StateFamily};

/// Default finite-difference step for [`fd_metric_from_divergence`].
pub const DEFAULT_FD_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DivergenceSpec {
    ClassicalRenyi { alpha: f64 },
    QuantumSandwichedRenyi { alpha: f64 },
    ClassicalKl,
    QuantumKl,
}

impl DivergenceSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::ClassicalRenyi { alpha } | Self::QuantumSandwichedRenyi { alpha } => check_renyi_alpha(alpha),
            _ => Ok(()),
        }
    }

    pub fn is_quantum(&self) -> bool {
        matches!(self, Self::QuantumSandwichedRenyi { .. } | Self::QuantumKl)
    }

    /// Quantum divergence between two states.
    pub fn quantum(&self, rho_bar: &DensityOperator, rho: &DensityOperator) -> Result<f64> {
        match *self {
            Self::QuantumSandwichedRenyi { alpha } => quantum_sandwiched_renyi(rho_bar, rho, alpha),
            Self::QuantumKl => quantum_kl(rho_bar, rho),
            _ => Err(QngError::InvalidParameter(format!("{self:?} is not a quantum divergence"))),
        }
    }

    /// Classical divergence between two distributions.
    pub fn classical(&self, p_bar: &[f64], p: &[f64]) -> Result<f64> {
        match *self {
            Self::ClassicalRenyi { alpha } => classical_renyi(p_bar, p, alpha),
            Self::ClassicalKl => classical_kl(p_bar, p),
            _ => Err(QngError::InvalidParameter(format!("{self:?} is not a classical divergence"))),
        }
    }
}

fn check_renyi_alpha(alpha: f64) -> Result<()> {
    if alpha == 0.0 || alpha == 1.0 || !alpha.is_finite() {
        return Err(QngError::InvalidParameter(format!(
            "Rényi order must be finite and outside {{0, 1}}, got {alpha}"
        )));
    }
    Ok(())
}

fn check_pair(p: &[f64], q: &[f64]) -> Result<()> {
    check_distribution(p)?;
    check_distribution(q)?;
    if p.len() != q.len() {
        return Err(QngError::DimensionMismatch(p.len(), q.len()));
    }
    Ok(())
}

/// `ln Σ p̄^α p^(1−α) / (α(α − 1))`.
pub fn classical_renyi(p_bar: &[f64], p: &[f64], alpha: f64) -> Result<f64> {
    check_renyi_alpha(alpha)?;
    check_pair(p_bar, p)?;
    let s: f64 = p_bar
        .iter()
        .zip(p)
        .map(|(&a, &b)| (alpha * a.ln() + (1.0 - alpha) * b.ln()).exp())
        .sum();
    Ok(s.ln() / (alpha * (alpha - 1.0)))
}

/// `Σ p̄ ln(p̄/p)`.
pub fn classical_kl(p_bar: &[f64], p: &[f64]) -> Result<f64> {
    check_pair(p_bar, p)?;
    Ok(p_bar.iter().zip(p).map(|(&a, &b)| a * (a / b).ln()).sum())
}

fn check_full_rank(rho: &DensityOperator) -> Result<()> {
    let p = rho.spectral().min_eigenvalue();
    if !(p >= EIGENVALUE_FLOOR) {
        return Err(QngError::SingularState(p));
    }
    Ok(())
}

/// Rescaled sandwiched Rényi divergence `D_α(ρ̄‖ρ)`.
pub fn quantum_sandwiched_renyi(rho_bar: &DensityOperator, rho: &DensityOperator, alpha: f64) -> Result<f64> {
    check_renyi_alpha(alpha)?;
    if rho_bar.dim() != rho.dim() {
        return Err(QngError::DimensionMismatch(rho_bar.dim(), rho.dim()));
    }
    check_full_rank(rho_bar)?;
    check_full_rank(rho)?;
    let s = (1.0 - alpha) / (2.0 * alpha);
    // In the eigenbasis of ρ, with ρ̄ = L L†, the eigenvalues of ρ^s ρ̄ ρ^s are
    // the squared singular values of Z = L† diag(p^s). Z is a column-scaled
    // well-conditioned matrix, so one-sided Jacobi resolves its tiny singular
    // values to full relative precision even when |s| is large.
    let spec = rho.spectral();
    let b = spec.to_eigenbasis(rho_bar.matrix()).hermitian_part();
    let chol = Cholesky::new(b.inner().clone()).ok_or(QngError::SingularState(rho_bar.spectral().min_eigenvalue()))?;
    let ps: Vec<f64> = spec.eigenvalues().iter().map(|p| p.powf(s)).collect();
    let mut z = chol.l().adjoint();
    for (j, mut col) in z.column_iter_mut().enumerate() {
        col *= C64::from(ps[j]);
    }
    let mut tr = 0.0;
    for sq in squared_singular_values(z) {
        let v = sq.max(0.0).powf(alpha);
        if !v.is_finite() {
            return Err(QngError::DomainError(sq));
        }
        tr += v;
    }
    Ok(tr.ln() / (alpha * (alpha - 1.0)))
}

/// Squared column norms after one-sided (Hestenes) Jacobi orthogonalization.
fn squared_singular_values(mut z: DMatrix<C64>) -> Vec<f64> {
    let n = z.ncols();
    for _sweep in 0..60 {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let a = z.column(i).norm_squared();
                let b = z.column(j).norm_squared();
                let c = z.column(i).dotc(&z.column(j));
                let cn = c.norm();
                if cn <= f64::EPSILON * (a * b).sqrt() || cn == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = c / cn;
                let zeta = (b - a) / (2.0 * cn);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for r in 0..z.nrows() {
                    let zi = z[(r, i)];
                    let zj = z[(r, j)] * phase.conj();
                    z[(r, i)] = zi * cs - zj * sn;
                    z[(r, j)] = zi * sn + zj * cs;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    z.column_iter().map(|c| c.norm_squared()).collect()
}

/// Umegaki relative entropy `Tr[ρ̄ (ln ρ̄ − ln ρ)]`.
pub fn quantum_kl(rho_bar: &DensityOperator, rho: &DensityOperator) -> Result<f64> {
    if rho_bar.dim() != rho.dim() {
        return Err(QngError::DimensionMismatch(rho_bar.dim(), rho.dim()));
    }
    check_full_rank(rho_bar)?;
    check_full_rank(rho)?;
    let entropy_term: f64 = rho_bar.eigenvalues().iter().map(|&p| p * p.ln()).sum();
    let log_rho = rho.spectral().apply(f64::ln)?;
    let cross = crate::linalg::trace_of_product(rho_bar.matrix(), &log_rho).re;
    Ok(entropy_term - cross)
}

/// Central second differences of `d(Δ)` at `Δ = 0`:
/// `[d(+i+j) − d(+i−j) − d(−i+j) + d(−i−j)] / (4h²)`.
fn fd_hessian(n: usize, h: f64, d: impl Fn(&[f64]) -> Result<f64>) -> Result<DMatrix<f64>> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(QngError::InvalidParameter(format!("step must be positive, got {h}")));
    }
    let mut g = DMatrix::zeros(n, n);
    let shifted = |i: usize, si: f64, j: usize, sj: f64| -> Result<f64> {
        let mut delta = vec![0.0; n];
        delta[i] += si * h;
        delta[j] += sj * h;
        d(&delta)
    };
    for i in 0..n {
        for j in i..n {
            let v = (shifted(i, 1.0, j, 1.0)? - shifted(i, 1.0, j, -1.0)? - shifted(i, -1.0, j, 1.0)?
                + shifted(i, -1.0, j, -1.0)?)
                / (4.0 * h * h);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

fn offset(theta: &[f64], delta: &[f64]) -> Vec<f64> {
    theta.iter().zip(delta).map(|(a, b)| a + b).collect()
}

/// Metric of a quantum divergence by finite differences in its first argument.
///
/// The estimate is symmetric but not forced to be positive semidefinite.
///
/// The second argument stays at `ρ_θ`. Wrap the family in
/// [`Mixed`](crate::states::Mixed) to regularize stencil states.
pub fn fd_metric_from_divergence<F: StateFamily + ?Sized>(
    spec: DivergenceSpec,
    family: &F,
    theta: &[f64],
    h: f64,
) -> Result<DMatrix<f64>> {
    spec.validate()?;
    if !spec.is_quantum() {
        return Err(QngError::InvalidParameter(
            "state families need a quantum divergence; use fd_classical_metric".into(),
        ));
    }
    family.check_theta(theta)?;
    let rho = family.value(theta)?;
    fd_hessian(family.n_params(), h, |delta| {
        spec.quantum(&family.value(&offset(theta, delta))?, &rho)
    })
}

/// Metric of a classical divergence by finite differences in its first argument.
pub fn fd_classical_metric<D: DistributionFamily + ?Sized>(
    spec: DivergenceSpec,
    family: &D,
    theta: &[f64],
    h: f64,
) -> Result<DMatrix<f64>> {
    spec.validate()?;
    if spec.is_quantum() {
        return Err(QngError::InvalidParameter(
            "distribution families need a classical divergence".into(),
        ));
    }
    let p = family.value(theta)?;
    fd_hessian(family.n_params(), h, |delta| {
        spec.classical(&family.value(&offset(theta, delta))?, &p)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::SoftmaxFamily;
    use crate::linalg::ComplexMatrix;
    use crate::metrics::{classical_fisher_metric, quantum_fisher_metric};
    use crate::petz::PetzFunction;
    use crate::rng::Sampler;
    use crate::states::{Mixed, RotationFamily};

    fn diag(p: &[f64]) -> DensityOperator {
        DensityOperator::new(ComplexMatrix::from_real_diagonal(p)).unwrap()
    }

    fn random_distribution(s: &mut Sampler, n: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..n).map(|_| 0.1 + s.uniform()).collect();
        let tot: f64 = raw.iter().sum();
        raw.iter().map(|x| x / tot).collect()
    }

    #[test]
    fn classical_renyi_examples() {
        assert_eq!(classical_renyi(&[0.5, 0.5], &[0.5, 0.5], 2.0).unwrap(), 0.0);
        let v = classical_renyi(&[0.6, 0.4], &[0.5, 0.5], 2.0).unwrap();
        // Σ p̄² / p = 0.72 + 0.32 = 1.04
        assert!((v - 0.5 * 1.04f64.ln()).abs() < 1e-15);
        assert!((v - 0.019_610_356_576_640_7).abs() < 1e-12);
        let kl = classical_kl(&[0.6, 0.4], &[0.5, 0.5]).unwrap();
        assert!((kl - (0.6 * 1.2f64.ln() + 0.4 * 0.8f64.ln())).abs() < 1e-16);
        assert!((kl - 0.020_135_513_550_688_9).abs() < 1e-12);
        for a in [1.0 - 1e-6, 1.0 + 1e-6] {
            assert!((classical_renyi(&[0.6, 0.4], &[0.5, 0.5], a).unwrap() - kl).abs() <= 1e-4);
        }
        assert!(classical_renyi(&[0.6, 0.4], &[0.5, 0.5], 1.0).is_err());
        assert!(classical_renyi(&[0.6, 0.4], &[0.5, 0.5], 0.0).is_err());
        assert!(classical_renyi(&[0.6, 0.5], &[0.5, 0.5], 2.0).is_err());
        assert!(classical_renyi(&[1.0, 0.0], &[0.5, 0.5], 2.0).is_err());
    }

    #[test]
    fn quantum_examples() {
        let mm = DensityOperator::maximally_mixed(2);
        for a in [-1.0, 0.1, 0.5, 2.0] {
            assert!(quantum_sandwiched_renyi(&mm, &mm, a).unwrap().abs() < 1e-15);
        }
        let v = quantum_sandwiched_renyi(&diag(&[0.6, 0.4]), &mm, 2.0).unwrap();
        let c = classical_renyi(&[0.6, 0.4], &[0.5, 0.5], 2.0).unwrap();
        assert!((v - c).abs() < 1e-14);

        assert!(quantum_kl(&mm, &mm).unwrap().abs() < 1e-16);
        let kl = quantum_kl(&diag(&[0.6, 0.4]), &mm).unwrap();
        assert!((kl - 0.020_135_513_550_688_9).abs() < 1e-12);
        let kl = quantum_kl(&mm, &diag(&[0.75, 0.25])).unwrap();
        let expect = 0.5 * (0.5f64 / 0.75).ln() + 0.5 * (0.5f64 / 0.25).ln();
        assert!((kl - expect).abs() < 1e-15);
        assert!((kl - 0.143_841_036_225_890_2).abs() < 1e-12);

        let pure = diag(&[1.0, 0.0]);
        assert!(matches!(quantum_kl(&pure, &mm), Err(QngError::SingularState(_))));
        assert!(quantum_sandwiched_renyi(&mm, &mm, 1.0).is_err());
    }

    #[test]
    fn renyi_tends_to_kl_on_random_qubits() {
        let mut s = Sampler::new(21);
        for _ in 0..20 {
            let a = DensityOperator::new(s.qubit_state(0.9)).unwrap();
            let b = DensityOperator::new(s.qubit_state(0.9)).unwrap();
            let kl = quantum_kl(&a, &b).unwrap();
            for alpha in [1.0 - 1e-6, 1.0 + 1e-6] {
                assert!((quantum_sandwiched_renyi(&a, &b, alpha).unwrap() - kl).abs() <= 1e-4);
            }
        }
    }

    #[test]
    fn commuting_pairs_match_classical() {
        let mut s = Sampler::new(22);
        for _ in 0..20 {
            let p = random_distribution(&mut s, 3);
            let q = random_distribution(&mut s, 3);
            for alpha in [-1.0, -0.3, 0.1, 0.5, 2.0] {
                let qv = quantum_sandwiched_renyi(&diag(&p), &diag(&q), alpha).unwrap();
                let cv = classical_renyi(&p, &q, alpha).unwrap();
                assert!((qv - cv).abs() <= 1e-10);
            }
            let qv = quantum_kl(&diag(&p), &diag(&q)).unwrap();
            assert!((qv - classical_kl(&p, &q).unwrap()).abs() <= 1e-10);
        }
    }

    #[test]
    fn nonnegative_on_random_pairs() {
        let mut s = Sampler::new(23);
        for _ in 0..50 {
            let (wa, wb) = (s.range(0.1, 0.9), s.range(0.1, 0.9));
            let a = DensityOperator::new(s.mixed_pure_state(3, wa)).unwrap();
            let b = DensityOperator::new(s.mixed_pure_state(3, wb)).unwrap();
            assert!(quantum_kl(&a, &b).unwrap() >= 0.0);
            for alpha in [-1.0, -0.3, 0.1, 0.3, 0.5, 0.8, 2.0, 5.0] {
                assert!(quantum_sandwiched_renyi(&a, &b, alpha).unwrap() >= 0.0);
            }
            let pa = random_distribution(&mut s, 3);
            let pb = random_distribution(&mut s, 3);
            for alpha in [-2.0, -0.5, 0.1, 0.5, 2.0] {
                assert!(classical_renyi(&pa, &pb, alpha).unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn fd_bridge_on_rotation_family() {
        let fam = RotationFamily::new([0.5, 0.0, 0.0]).unwrap();
        let theta = [0.7, 1.1, -0.4];
        let rho = fam.value(&theta).unwrap();
        let parts = fam.partials(&theta).unwrap();
        for (alpha, f) in [(0.5, PetzFunction::Sld), (2.0, PetzFunction::Alpha(2.0))] {
            let fd = fd_metric_from_divergence(
                DivergenceSpec::QuantumSandwichedRenyi { alpha },
                &fam,
                &theta,
                DEFAULT_FD_STEP,
            )
            .unwrap();
            let exact = quantum_fisher_metric(rho.spectral(), &parts, &f).unwrap();
            let scale = exact.inner().amax();
            assert!((&fd - exact.inner()).amax() <= 1e-4 * scale, "α={alpha}");
        }
    }

    #[test]
    fn fd_bridge_kl_gives_kubo_mori() {
        let fam = Mixed::new(RotationFamily::new([0.3, -0.2, 0.4]).unwrap(), 1e-3).unwrap();
        let theta = [0.2, 0.9, 1.3];
        let fd = fd_metric_from_divergence(DivergenceSpec::QuantumKl, &fam, &theta, 1e-3).unwrap();
        let rho = fam.value(&theta).unwrap();
        let exact = quantum_fisher_metric(rho.spectral(), &fam.partials(&theta).unwrap(), &PetzFunction::KuboMori).unwrap();
        assert!((&fd - exact.inner()).amax() <= 1e-4 * exact.inner().amax());
    }

    #[test]
    fn fd_classical_is_alpha_independent() {
        let fam = SoftmaxFamily::new(3);
        let theta = [0.3, -0.2, 0.5];
        let (p, d) = fam.value_and_partials(&theta).unwrap();
        let exact = classical_fisher_metric(&p, &d).unwrap();
        for alpha in [-0.5, 0.3, 0.5, 2.0] {
            let fd = fd_classical_metric(DivergenceSpec::ClassicalRenyi { alpha }, &fam, &theta, 1e-3).unwrap();
            assert!((&fd - exact.inner()).amax() <= 1e-4 * exact.inner().amax(), "α={alpha}");
        }
    }

    #[test]
    fn fd_rejects_mismatched_specs() {
        let fam = RotationFamily::new([0.5, 0.0, 0.0]).unwrap();
        assert!(fd_metric_from_divergence(DivergenceSpec::ClassicalKl, &fam, &[0.0; 3], 1e-3).is_err());
        assert!(fd_metric_from_divergence(DivergenceSpec::QuantumKl, &fam, &[0.0; 3], 0.0).is_err());
        let soft = SoftmaxFamily::new(2);
        assert!(fd_classical_metric(DivergenceSpec::QuantumKl, &soft, &[0.0; 2], 1e-3).is_err());
    }
}
