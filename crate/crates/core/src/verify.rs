//! Randomized property checks across all modules, reported line by line.
//!
//! Every property draws its instances from its own [`Sampler`] seeded with
//! `seed + index`, so reports are reproducible and properties independent.

use std::f64::consts::PI;
use std::fmt;

use crate::classical::{classical_ng_step, SoftmaxFamily};
use crate::divergences::{
    classical_kl, classical_renyi, fd_classical_metric, fd_metric_from_divergence, quantum_kl,
    quantum_sandwiched_renyi, DivergenceSpec, DEFAULT_FD_STEP,
};
use crate::error::{QngError, Result};
use crate::linalg::{hermitian_eig, spectral_apply, ComplexMatrix, SpectralDecomposition};
use crate::metrics::{
    classical_fisher_metric, diagonal_metric, loewner_geq, quantum_fisher_metric, quantum_fisher_metric_eigensum,
    MetricMatrix, TangentMRep,
};
use crate::optimizer::{qng_step, run_optimization, OptimizerConfig, StepRule};
use crate::petz::{default_order_grid, log_grid, max_pointwise_excess, PetzFunction};
use crate::rng::Sampler;
use crate::states::{mix_with_identity, DensityOperator, FrobeniusCost, RotationFamily, StateFamily};

#[derive(Clone, Debug)]
pub struct PropertyOutcome {
    pub module: &'static str,
    pub name: &'static str,
    /// Largest violation observed; infinite when an instance raised an error.
    pub max_violation: f64,
    pub tolerance: f64,
    pub error: Option<String>,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.max_violation <= self.tolerance
    }
}

impl fmt::Display for PropertyOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "[{tag}] {:<12} {:<40} max_violation={:.3e} tol={:.1e}",
            self.module, self.name, self.max_violation, self.tolerance
        )?;
        if let Some(e) = &self.error {
            write!(f, " error: {e}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub seed: u64,
    pub trials: usize,
    pub outcomes: Vec<PropertyOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(PropertyOutcome::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyOutcome> {
        self.outcomes.iter().filter(|o| !o.passed())
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed={} trials={}", self.seed, self.trials)?;
        for o in &self.outcomes {
            writeln!(f, "{o}")?;
        }
        let failed = self.failures().count();
        write!(
            f,
            "{}: {} of {} properties passed",
            if failed == 0 { "PASS" } else { "FAIL" },
            self.outcomes.len() - failed,
            self.outcomes.len()
        )
    }
}

type Check = fn(&mut Sampler, usize) -> Result<f64>;

struct Property {
    module: &'static str,
    name: &'static str,
    tolerance: f64,
    check: Check,
}

const fn prop(module: &'static str, name: &'static str, tolerance: f64, check: Check) -> Property {
    Property { module, name, tolerance, check }
}

const PROPERTIES: &[Property] = &[
    prop("linalg", "identity function reproduces M", 1e-10, linalg_identity),
    prop("linalg", "power composition on PSD", 1e-9, linalg_powers),
    prop("linalg", "eigenvalue sum equals trace", 1e-10, linalg_trace),
    prop("petz", "normalization f(1) = 1", 0.0, petz_normalization),
    prop("petz", "symmetry f(t) = t f(1/t)", 1e-10, petz_symmetry),
    prop("petz", "monotone in beta", 1e-12, petz_beta_monotone),
    prop("petz", "rRLD <= f_alpha <= SLD in window", 1e-12, petz_extremality),
    prop("petz", "continuity at removable points", 1e-6, petz_continuity),
    prop("petz", "curve ordering for t > 1", 0.0, petz_curve_ordering),
    prop("metrics", "Petz order gives Loewner order", 1e-9, metrics_order_full),
    prop("metrics", "same for diagonal metrics", 1e-9, metrics_order_diagonal),
    prop("metrics", "order reverses under inversion", 0.0, metrics_inverse_order),
    prop("metrics", "symmetry", 1e-10, metrics_symmetry),
    prop("metrics", "commuting family is classical", 1e-10, metrics_classical_reduction),
    prop("metrics", "trace form equals eigensum", 1e-10, metrics_two_routes),
    prop("divergences", "nonnegative, zero on equal args", 1e-12, div_nonnegative),
    prop("divergences", "commuting pairs match classical", 1e-10, div_commuting),
    prop("divergences", "Hessian equals metric", 1e-3, div_bridge),
    prop("states", "rotation spectrum is invariant", 1e-10, states_spectrum),
    prop("states", "partials are traceless", 1e-12, states_traceless),
    prop("states", "cost is minimal at target", 0.0, states_cost_minimum),
    prop("states", "mixing keeps Hermiticity and trace", 1e-14, states_mixing),
    prop("classical", "FD metric independent of alpha", 1e-4, classical_fd_independence),
    prop("classical", "NG step independent of alpha", 1e-10, classical_step_independence),
    prop("optimizer", "first-order descent prediction", 0.1, optimizer_descent_prediction),
    prop("optimizer", "larger metric moves slower", 1e-12, optimizer_speed_ordering),
    prop("optimizer", "trust region is saturated", 1e-10, optimizer_saturation),
    prop("optimizer", "runs are deterministic", 0.0, optimizer_determinism),
];

/// Runs every property on `trials` random instances.
///
/// With `negative_control`, also checks the false claim `SLD ⪯ rRLD`, which
/// must show up as a failure.
pub fn run_verify(seed: u64, trials: usize, negative_control: bool) -> Result<VerifyReport> {
    if trials < 1 {
        return Err(QngError::InvalidParameter("trials must be at least 1".into()));
    }
    let mut list: Vec<&Property> = PROPERTIES.iter().collect();
    const CONTROL: Property = prop("control", "SLD <= rRLD (must fail)", 1e-12, negative_control_check);
    if negative_control {
        list.push(&CONTROL);
    }
    let outcomes = list
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let mut s = Sampler::new(seed.wrapping_add(k as u64));
            let (max_violation, error) = match (p.check)(&mut s, trials) {
                Ok(v) if v.is_nan() => (f64::INFINITY, Some("NaN violation".to_string())),
                Ok(v) => (v, None),
                Err(e) => (f64::INFINITY, Some(e.to_string())),
            };
            PropertyOutcome { module: p.module, name: p.name, max_violation, tolerance: p.tolerance, error }
        })
        .collect();
    Ok(VerifyReport { seed, trials, outcomes })
}

fn random_hermitian(s: &mut Sampler, n: usize) -> ComplexMatrix {
    let shift = s.symmetric();
    &s.traceless_hermitian(n) + &ComplexMatrix::identity(n).scale(shift)
}

fn random_size(s: &mut Sampler) -> usize {
    2 + (s.next_u64() % 3) as usize
}

fn linalg_identity(s: &mut Sampler, trials: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let n = random_size(s);
        let m = random_hermitian(s, n);
        worst = worst.max((&spectral_apply(&m, |x| x)? - &m).frobenius_norm());
    }
    Ok(worst)
}

fn linalg_powers(s: &mut Sampler, trials: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let n = random_size(s);
        let w = s.range(0.1, 1.0);
        let m = s.mixed_pure_state(n, w);
        let (a, b) = (s.range(-1.0, 2.0), s.range(-1.0, 2.0));
        let ma = spectral_apply(&m, |x| x.powf(a))?;
        let nested = spectral_apply(&ma, |x| x.powf(b))?;
        let product = &ma * &spectral_apply(&m, |x| x.powf(b))?;
        let direct_mul = spectral_apply(&m, |x| x.powf(a * b))?;
        let direct_add = spectral_apply(&m, |x| x.powf(a + b))?;
        let scale = direct_mul.frobenius_norm().max(direct_add.frobenius_norm()).max(1.0);
        worst = worst
            .max((&nested - &direct_mul).frobenius_norm() / scale)
            .max((&product - &direct_add).frobenius_norm() / scale);
    }
    Ok(worst)
}

fn linalg_trace(s: &mut Sampler, trials: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let n = random_size(s);
        let m = random_hermitian(s, n);
        let sum: f64 = hermitian_eig(&m)?.eigenvalues().iter().sum();
        worst = worst.max((sum - m.trace().re).abs());
    }
    Ok(worst)
}

fn random_alpha(s: &mut Sampler) -> f64 {
    // Mix of small, window and large orders, never zero.
    match s.next_u64() % 3 {
        0 => s.range(0.01, 0.5),
        1 => -1.0 / s.range(0.01, 1.0),
        _ => 0.5 / s.range(0.01, 1.0),
    }
}

fn all_kinds(s: &mut Sampler) -> Vec<PetzFunction> {
    vec![
        PetzFunction::Sld,
        PetzFunction::Rrld,
        PetzFunction::KuboMori,
        PetzFunction::AlphaInfinity,
        PetzFunction::Alpha(random_alpha(s)),
        PetzFunction::Alpha(-s.range(0.01, 1.0)),
    ]
}

fn petz_normalization(s: &mut Sampler, trials: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        for f in all_kinds(s) {
            worst = worst.max((f.eval(1.0)? - 1.0).abs());
        }
    }
    Ok(worst)
}

fn petz_symmetry(s: &mut Sampler, trials: usize) -> Result<f64> {
    let grid = log_grid(1e-6, 1e6, 200);
    let mut worst: f64 = 0.0;
    for _ in 0..trials.min(20) {
        for f in all_kinds(s) {
            for &t in &grid {
                let ft = f.eval(t)?;
                worst = worst.max((ft - t * f.eval(1.0 / t)?).abs() / ft.max(1.0));
            }
        }
    }
    Ok(worst)
}

fn petz_beta_monotone(s: &mut Sampler, trials: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let t = (s.range(-2.0, 2.0) * std::f64::consts::LN_10).exp();
        let (b1, b2) = (s.range(-10.0, 10.0), s.range(-10.0, 10.0));
        let (lo, hi) = if b1 < b2 { (b1, b2) } else { (b2, b1) };
        if lo == 0.0 || hi == 0.0 {
            continue;
        }
        let f_lo = PetzFunction::Alpha(1.0 / lo).eval(t)?;
        let f_hi = PetzFunction::Alpha(1.0 / hi).eval(t)?;
        worst = worst.max(f_lo - f_hi);
    }
    for t in [0.1, 0.5, 2.0, 10.0] {
        let vals: Vec<f64> =
            [0.1, 0.2, 0.3, 0.4, 0.5].iter().map(|&a| PetzFunction::Alpha(a).eval(t)).collect::<Result<_>>()?;
        for w in vals.windows(2) {
            worst = worst.max(w[1] - w[0]);
        }
    }
    Ok(worst)
}

fn petz_extremality(s: &mut Sampler, trials: usize) -> Result<f64> {
    let grid = default_order_grid();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials.min(50) {
        let alpha = if s.uniform() < 0.5 { -1.0 / s.range(0.001, 1.0) } else { 0.5 / s.range(0.001, 1.0) };
        let f = PetzFunction::Alpha(alpha);
        worst = worst
            .max(max_pointwise_excess(&PetzFunction::Rrld, &f, &grid)?)
            .max(max_pointwise_excess(&f, &PetzFunction::Sld, &grid)?);
    }
    Ok(worst.max(0.0))
}

fn petz_continuity(s: &mut Sampler, trials: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let f = PetzFunction::Alpha(random_alpha(s));
        for t in [1.0 - 1e-8, 1.0 + 1e-8] {
            worst = worst.max((f.eval(t)? - 1.0).abs());
        }
        let t = s.range(0.01, 10.0);
        let km = PetzFunction::KuboMori.eval(t)?;
        for a in [1.0 - 1e-9, 1.0 + 1e-9] {
            worst = worst.max((PetzFunction::Alpha(a).eval(t)? - km).abs());
        }
    }
    Ok(worst)
}

/// Count of grid points where `α = 0.1` is not topmost or `α = −0.1` not lowest.
fn petz_curve_ordering(_: &mut Sampler, _: usize) -> Result<f64> {
    let alphas = [0.1, 0.3, 0.5, 100.0, -100.0, -1.0, -0.3, -0.1];
    let mut bad = 0usize;
    for k in 1..=400 {
        let t = 1.0 + 4.0 * k as f64 / 400.0;
        let v: Vec<f64> = alphas.iter().map(|&a| PetzFunction::Alpha(a).eval(t)).collect::<Result<_>>()?;
        if v.iter().any(|&x| x > v[0]) || v.iter().any(|&x| x < v[7]) {
            bad += 1;
        }
    }
    Ok(bad as f64)
}

fn random_instance(s: &mut Sampler, qutrit: bool) -> Result<(SpectralDecomposition, TangentMRep)> {
    let (rho, n) = if qutrit { (s.mixed_pure_state(3, 0.2), 3) } else { (s.qubit_state(0.9), 2) };
    let tangents = (0..3).map(|_| s.traceless_hermitian(n)).collect();
    Ok((hermitian_eig(&rho)?, TangentMRep::new(tangents)?))
}

fn ratio_grid(rho: &SpectralDecomposition) -> Vec<f64> {
    let r = rho.max_eigenvalue() / rho.min_eigenvalue();
    log_grid(1.0 / r, r, 256)
}

const ORDER_PAIRS: [(PetzFunction, PetzFunction); 3] = [
    (PetzFunction::Rrld, PetzFunction::Sld),
    (PetzFunction::Alpha(0.1), PetzFunction::Sld),
    (PetzFunction::Alpha(0.3), PetzFunction::Alpha(0.5)),
];

/// For each pair, orients it by the grid order (`f ⪯ g`) and measures how far
/// `G_f ⪰ G_g` is from holding. Pairs with no grid order are skipped.
fn order_violation(s: &mut Sampler, trials: usize, diagonal: bool) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for trial in 0..trials {
        let (rho, t) = random_instance(s, trial % 2 == 1)?;
        let grid = ratio_grid(&rho);
        for (a, b) in ORDER_PAIRS {
            let (f, g) = if max_pointwise_excess(&a, &b, &grid)? <= crate::petz::ORDER_TOL {
                (a, b)
            } else if max_pointwise_excess(&b, &a, &grid)? <= crate::petz::ORDER_TOL {
                (b, a)
            } else {
                continue;
            };
            let mut gf = quantum_fisher_metric(&rho, &t, &f)?;
            let mut gg = quantum_fisher_metric(&rho, &t, &g)?;
            if diagonal {
                gf = diagonal_metric(&gf);
                gg = diagonal_metric(&gg);
            }
            worst = worst.max(-crate::metrics::loewner_margin(&gf, &gg)?);
        }
    }
    Ok(worst)
}

fn metrics_order_full(s: &mut Sampler, trials: usize) -> Result<f64> {
    order_violation(s, trials, false)
}

fn metrics_order_diagonal(s: &mut Sampler, trials: usize) -> Result<f64> {
    order_violation(s, trials, true)
}

fn metrics_inverse_order(s: &mut Sampler, trials: usize) -> Result<f64> {
    let mut mismatches = 0usize;
    for trial in 0..trials {
        let (rho, t) = random_instance(s, trial % 2 == 1)?;
        for (a, b) in ORDER_PAIRS {
            let ga = quantum_fisher_metric(&rho, &t, &a)?;
            let gb = quantum_fisher_metric(&rho, &t, &b)?;
            let (ia, ib) = (ga.inverse()?, gb.inverse()?);
            if loewner_geq(&ga, &gb)? != loewner_geq(&ib, &ia)? || loewner_geq(&gb, &ga)? != loewner_geq(&ia, &ib)? {
                mismatches += 1;
            }
        }
    }
    Ok(mismatches as f64)
}

fn metrics_symmetry(s: &mut Sampler, trials: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for trial in 0..trials {
        let (rho, t) = random_instance(s, trial % 2 == 1)?;
        for f in all_kinds(s) {
            worst = worst
                .max(quantum_fisher_metric(&rho, &t, &f)?.asymmetry())
                .max(quantum_fisher_metric_eigensum(&rho, &t, &f)?.asymmetry());
        }
    }
    Ok(worst)
}

fn random_distribution(s: &mut Sampler, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| 0.05 + s.uniform()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

fn random_direction(s: &mut Sampler, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| s.symmetric()).collect();
    let mean = raw.iter().sum::<f64>() / n as f64;
    raw.iter().map(|x| x - mean).collect()
}

fn metrics_classical_reduction(s: &mut Sampler, trials: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let n = random_size(s);
        let p = random_distribution(s, n);
        let d: Vec<Vec<f64>> = (0..3).map(|_| random_direction(s, n)).collect();
        let rho = hermitian_eig(&ComplexMatrix::from_real_diagonal(&p))?;
        let t = TangentMRep::new(d.iter().map(|v| ComplexMatrix::from_real_diagonal(v)).collect())?;
        let c = classical_fisher_metric(&p, &d)?;
        for f in all_kinds(s) {
            let g = quantum_fisher_metric(&rho, &t, &f)?;
            worst = worst.max((g.inner() - c.inner()).amax());
        }
    }
    Ok(worst)
}

fn metrics_two_routes(s: &mut Sampler, trials: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for trial in 0..trials {
        let (rho, t) = random_instance(s, trial % 2 == 1)?;
        for f in all_kinds(s) {
            let a = quantum_fisher_metric(&rho, &t, &f)?;
            let b = quantum_fisher_metric_eigensum(&rho, &t, &f)?;
            worst = worst.max((a.inner() - b.inner()).amax() / a.inner().amax().max(1.0));
        }
    }
    Ok(worst)
}

const RENYI_ORDERS: [f64; 6] = [-1.0, -0.3, 0.1, 0.3, 0.5, 2.0];

/// Largest of `−D(a‖b)` and `|D(a‖a)|`.
fn div_nonnegative(s: &mut Sampler, trials: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let n = random_size(s);
        let (wa, wb) = (s.range(0.1, 0.9), s.range(0.1, 0.9));
        let a = DensityOperator::new(s.mixed_pure_state(n, wa))?;
        let b = DensityOperator::new(s.mixed_pure_state(n, wb))?;
        let (p, q) = (random_distribution(s, n), random_distribution(s, n));
        worst = worst.max(-quantum_kl(&a, &b)?).max(quantum_kl(&a, &a)?.abs());
        worst = worst.max(-classical_kl(&p, &q)?).max(classical_kl(&p, &p)?.abs());
        for alpha in RENYI_ORDERS {
            worst = worst
                .max(-classical_renyi(&p, &q, alpha)?)
                .max(classical_renyi(&p, &p, alpha)?.abs())
                .max(quantum_sandwiched_renyi(&a, &a, alpha)?.abs());
        }
        for alpha in [-1.0, -0.3, 0.1, 0.3, 0.5, 0.8, 2.0, 5.0] {
            worst = worst.max(-quantum_sandwiched_renyi(&a, &b, alpha)?);
        }
    }
    Ok(worst)
}

fn div_commuting(s: &mut Sampler, trials: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let n = random_size(s);
        let (p, q) = (random_distribution(s, n), random_distribution(s, n));
        let a = DensityOperator::new(ComplexMatrix::from_real_diagonal(&p))?;
        let b = DensityOperator::new(ComplexMatrix::from_real_diagonal(&q))?;
        worst = worst.max((quantum_kl(&a, &b)? - classical_kl(&p, &q)?).abs());
        for alpha in RENYI_ORDERS {
            worst = worst.max((quantum_sandwiched_renyi(&a, &b, alpha)? - classical_renyi(&p, &q, alpha)?).abs());
        }
    }
    Ok(worst)
}

fn random_theta(s: &mut Sampler) -> Vec<f64> {
    (0..3).map(|_| s.range(-PI, PI)).collect()
}

/// Relative Frobenius error between the divergence Hessian and `G_α`.
pub fn bridge_error(family: &RotationFamily, theta: &[f64], alpha: f64) -> Result<f64> {
    let fd = fd_metric_from_divergence(
        DivergenceSpec::QuantumSandwichedRenyi { alpha },
        family,
        theta,
        DEFAULT_FD_STEP,
    )?;
    let rho = family.value(theta)?;
    let exact = quantum_fisher_metric(rho.spectral(), &family.partials(theta)?, &PetzFunction::Alpha(alpha))?;
    Ok((&fd - exact.inner()).norm() / exact.inner().norm())
}

fn div_bridge(s: &mut Sampler, trials: usize) -> Result<f64> {
    let family = RotationFamily::new([0.5, 0.0, 0.0])?;
    let mut worst: f64 = 0.0;
    for _ in 0..trials.min(20) {
        let theta = random_theta(s);
        for alpha in RENYI_ORDERS {
            worst = worst.max(bridge_error(&family, &theta, alpha)?);
        }
    }
    Ok(worst)
}

fn random_family(s: &mut Sampler) -> Result<RotationFamily> {
    RotationFamily::new(s.point_in_ball(0.95))
}

fn states_spectrum(s: &mut Sampler, trials: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let fam = random_family(s)?;
        let r = fam.bloch().iter().map(|x| x * x).sum::<f64>().sqrt();
        let ev = fam.value(&random_theta(s))?.eigenvalues().to_vec();
        worst = worst.max((ev[0] - 0.5 * (1.0 - r)).abs()).max((ev[1] - 0.5 * (1.0 + r)).abs());
    }
    Ok(worst)
}

fn states_traceless(s: &mut Sampler, trials: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let fam = random_family(s)?;
        for d in fam.partials(&random_theta(s))?.as_slice() {
            worst = worst.max(d.trace().norm());
        }
    }
    Ok(worst)
}

fn states_cost_minimum(s: &mut Sampler, trials: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let fam = random_family(s)?;
        let star = random_theta(s);
        let cost = FrobeniusCost::new(fam.value(&star)?);
        let base = cost.value(&fam, &star)?;
        for _ in 0..5 {
            worst = worst.max(base - cost.value(&fam, &random_theta(s))?);
        }
    }
    Ok(worst)
}

fn states_mixing(s: &mut Sampler, trials: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let n = random_size(s);
        let w = s.range(0.0, 1.0);
        let rho = DensityOperator::new(s.mixed_pure_state(n, w))?;
        let mixed = mix_with_identity(&rho, s.range(0.0, 0.999))?;
        worst = worst.max(mixed.matrix().hermiticity_defect()).max((mixed.matrix().trace().re - 1.0).abs());
    }
    Ok(worst)
}

fn classical_fd_independence(s: &mut Sampler, trials: usize) -> Result<f64> {
    let fam = SoftmaxFamily::new(3);
    let mut worst: f64 = 0.0;
    for _ in 0..trials.min(20) {
        let theta: Vec<f64> = (0..3).map(|_| s.range(-1.0, 1.0)).collect();
        let base = fd_classical_metric(DivergenceSpec::ClassicalKl, &fam, &theta, DEFAULT_FD_STEP)?;
        for alpha in [-0.5, 0.3, 0.5, 2.0] {
            let g = fd_classical_metric(DivergenceSpec::ClassicalRenyi { alpha }, &fam, &theta, DEFAULT_FD_STEP)?;
            worst = worst.max((&g - &base).amax());
        }
    }
    Ok(worst)
}

fn classical_step_independence(s: &mut Sampler, trials: usize) -> Result<f64> {
    let fam = SoftmaxFamily::new(3);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let theta: Vec<f64> = (0..3).map(|_| s.range(-1.0, 1.0)).collect();
        let grad: Vec<f64> = (0..3).map(|_| s.symmetric()).collect();
        for rule in [StepRule::TrustRegion { epsilon: 1e-4 }, StepRule::Fixed { eta: 0.1 }] {
            let base = classical_ng_step(&fam, &grad, &theta, rule, &PetzFunction::Sld, 1e-3)?;
            for f in all_kinds(s) {
                let st = classical_ng_step(&fam, &grad, &theta, rule, &f, 1e-3)?;
                for (x, y) in st.delta.iter().zip(&base.delta) {
                    worst = worst.max((x - y).abs());
                }
            }
        }
    }
    Ok(worst)
}

fn reference_setup() -> Result<(RotationFamily, DensityOperator, Vec<f64>)> {
    let fam = RotationFamily::new([0.5, 0.0, 0.0])?;
    let target = fam.value(&[0.0; 3])?;
    Ok((fam, target, vec![PI / 2.0, PI / 2.0, PI / 4.0]))
}

/// Relative gap between realized and predicted one-step change over the first
/// 100 trust-region iterations.
pub fn descent_prediction_error(petz: PetzFunction) -> Result<f64> {
    let (fam, target, theta0) = reference_setup()?;
    let cfg = OptimizerConfig { petz, max_iters: 100, ..Default::default() };
    let run = run_optimization(&fam, &target, &cfg, &theta0)?;
    if let crate::optimizer::Termination::Failed(e) = run.termination {
        return Err(e);
    }
    let mut worst: f64 = 0.0;
    for w in run.records.windows(2) {
        let realized = w[1].cost - w[0].cost;
        let pred = w[0].predicted_decrease;
        worst = worst.max((realized - pred).abs() / pred.abs());
    }
    Ok(worst)
}

fn optimizer_descent_prediction(_: &mut Sampler, _: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for a in [0.1, 0.3, 0.5] {
        worst = worst.max(descent_prediction_error(PetzFunction::Alpha(a))?);
    }
    Ok(worst)
}

/// When `G' ⪰ G`, the step under `G` must predict at least as much decrease.
fn optimizer_speed_ordering(s: &mut Sampler, trials: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for trial in 0..trials {
        let (rho, t) = random_instance(s, trial % 2 == 1)?;
        let grad: Vec<f64> = (0..3).map(|_| s.symmetric()).collect();
        for diagonal in [false, true] {
            let metrics: Vec<MetricMatrix> = [0.1, 0.3, 0.5, 2.0, -1.0]
                .iter()
                .map(|&a| {
                    let g = quantum_fisher_metric(&rho, &t, &PetzFunction::Alpha(a))?;
                    Ok(if diagonal { diagonal_metric(&g) } else { g })
                })
                .collect::<Result<_>>()?;
            for big in &metrics {
                for small in &metrics {
                    if !loewner_geq(big, small)? {
                        continue;
                    }
                    for rule in [StepRule::TrustRegion { epsilon: 1e-6 }, StepRule::Fixed { eta: 1e-3 }] {
                        let fast = qng_step(small, &grad, rule)?.predicted_decrease;
                        let slow = qng_step(big, &grad, rule)?.predicted_decrease;
                        worst = worst.max((fast - slow) / slow.abs().max(1e-300));
                    }
                }
            }
        }
    }
    Ok(worst)
}

fn optimizer_saturation(s: &mut Sampler, trials: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for trial in 0..trials {
        let (rho, t) = random_instance(s, trial % 2 == 1)?;
        let g = quantum_fisher_metric(&rho, &t, &PetzFunction::Alpha(random_alpha(s)))?;
        let grad: Vec<f64> = (0..3).map(|_| s.symmetric()).collect();
        let eps = (s.range(-10.0, -2.0) * std::f64::consts::LN_10).exp();
        let step = qng_step(&g, &grad, StepRule::TrustRegion { epsilon: eps })?;
        worst = worst.max((0.5 * g.quadratic_form(&step.delta) - eps).abs() / eps);
    }
    Ok(worst)
}

/// Number of differing records between two identical runs.
fn optimizer_determinism(s: &mut Sampler, _: usize) -> Result<f64> {
    let (fam, target, _) = reference_setup()?;
    let theta0 = random_theta(s);
    let mut diffs = 0usize;
    for (rule, diagonal) in [(StepRule::TrustRegion { epsilon: 1e-4 }, false), (StepRule::Fixed { eta: 0.05 }, true)] {
        let cfg = OptimizerConfig { rule, diagonal, max_iters: 50, petz: PetzFunction::Alpha(0.3), ..Default::default() };
        let a = run_optimization(&fam, &target, &cfg, &theta0)?;
        let b = run_optimization(&Borrowed(&fam), &target, &cfg, &theta0)?;
        diffs += a.records.iter().zip(&b.records).filter(|(x, y)| x != y).count();
        diffs += a.records.len().abs_diff(b.records.len());
    }
    Ok(diffs as f64)
}

/// Forwards to a borrowed family, so the second run goes through a different
/// instantiation of the optimizer.
struct Borrowed<'a>(&'a RotationFamily);

impl StateFamily for Borrowed<'_> {
    fn n_params(&self) -> usize {
        self.0.n_params()
    }
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn value(&self, theta: &[f64]) -> Result<DensityOperator> {
        self.0.value(theta)
    }
    fn partials(&self, theta: &[f64]) -> Result<TangentMRep> {
        self.0.partials(theta)
    }
}

fn negative_control_check(_: &mut Sampler, _: usize) -> Result<f64> {
    max_pointwise_excess(&PetzFunction::Sld, &PetzFunction::Rrld, &default_order_grid())
}
