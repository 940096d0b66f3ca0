//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use qnglab::classical::classical_ng_step;
use qnglab::classical::SoftmaxFamily;
use qnglab::config::{ExperimentConfig, Mode};
use qnglab::experiments::{curve_grid, default_curve_alphas, optimize, run_sweep, write_petz_curve};
use qnglab::linalg::{hermitian_eig, ComplexMatrix, SpectralDecomposition};
use qnglab::metrics::{
    classical_fisher_metric, diagonal_metric, loewner_geq, loewner_margin, quantum_fisher_metric, regularize_metric,
    MetricMatrix, TangentMRep,
};
use qnglab::optimizer::{solve_spd, StepRule, Trajectory};
use qnglab::petz::{default_order_grid, log_grid, max_pointwise_excess, PetzFunction, ORDER_TOL};
use qnglab::rng::Sampler;
use qnglab::states::{FrobeniusCost, RotationFamily, StateFamily};
use qnglab::verify::{bridge_error, descent_prediction_error};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    o.detail = format!("{} ({:.2}s)", o.detail, took.as_secs_f64());
    if let Some(l) = limit {
        if took > l {
            o.passed = false;
            o.detail = format!("{} exceeds {:.0}s", o.detail, l.as_secs_f64());
        }
    }
    o
}

fn all_kinds() -> Vec<PetzFunction> {
    let mut v = vec![PetzFunction::Sld, PetzFunction::Rrld, PetzFunction::KuboMori, PetzFunction::AlphaInfinity];
    for a in [-1e7, -100.0, -2.0, -1.0, -0.3, -0.1, 0.01, 0.1, 0.2, 0.3, 0.4, 0.5, 0.7, 1.0, 2.0, 100.0, 1e7] {
        v.push(PetzFunction::Alpha(a));
    }
    v
}

fn ac1() -> Outcome {
    let grid = log_grid(1e-6, 1e6, 200);
    let mut worst: f64 = 0.0;
    let mut bad_one = Vec::new();
    for f in all_kinds() {
        if f.eval(1.0).unwrap() != 1.0 {
            bad_one.push(f.label());
        }
        for &t in &grid {
            let ft = f.eval(t).unwrap();
            worst = worst.max((ft - t * f.eval(1.0 / t).unwrap()).abs() / ft.max(1.0));
        }
    }
    outcome(
        bad_one.is_empty() && worst <= 1e-10,
        format!("f(1) != 1 for {bad_one:?}; max symmetry defect {worst:.2e} (tol 1e-10)"),
    )
}

fn ac2() -> Outcome {
    let grid = default_order_grid();
    let mut lower: f64 = f64::NEG_INFINITY;
    let mut upper: f64 = f64::NEG_INFINITY;
    for a in [-100.0, -2.0, -1.0, 0.5, 0.7, 2.0, 100.0] {
        let f = PetzFunction::Alpha(a);
        lower = lower.max(max_pointwise_excess(&PetzFunction::Rrld, &f, &grid).unwrap());
        upper = upper.max(max_pointwise_excess(&f, &PetzFunction::Sld, &grid).unwrap());
    }
    let window_ok = lower <= ORDER_TOL && upper <= ORDER_TOL;
    let outside: Vec<f64> = [0.1, 0.3]
        .iter()
        .map(|&a| max_pointwise_excess(&PetzFunction::Alpha(a), &PetzFunction::Sld, &grid).unwrap())
        .collect();
    let outside_fails = outside.iter().all(|&e| e > ORDER_TOL);
    outcome(
        window_ok && outside_fails,
        format!(
            "window: max excess over SLD {upper:.1e}, under rRLD {lower:.1e}; alpha 0.1, 0.3 exceed SLD by {:.3}, {:.3}",
            outside[0], outside[1]
        ),
    )
}

fn ac3() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for t in [0.1, 0.5, 2.0, 10.0] {
        let v: Vec<f64> = [0.1, 0.2, 0.3, 0.4, 0.5].iter().map(|&a| PetzFunction::Alpha(a).eval(t).unwrap()).collect();
        for w in v.windows(2) {
            worst = worst.max(w[1] - w[0]);
        }
    }
    outcome(worst <= 1e-12, format!("max increase along the alpha chain {worst:.2e} (tol 1e-12)"))
}

fn ac4() -> Outcome {
    let fam = RotationFamily::new([0.5, 0.0, 0.0]).unwrap();
    let mut s = Sampler::new(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let theta: Vec<f64> = (0..3).map(|_| s.range(-PI, PI)).collect();
        for a in [-1.0, -0.3, 0.1, 0.3, 0.5, 2.0] {
            worst = worst.max(bridge_error(&fam, &theta, a).unwrap());
        }
    }
    outcome(worst <= 1e-3, format!("max relative Frobenius error {worst:.2e} (tol 1e-3)"))
}

fn random_instance(s: &mut Sampler, qutrit: bool) -> (SpectralDecomposition, TangentMRep) {
    let (rho, n) = if qutrit { (s.mixed_pure_state(3, 0.2), 3) } else { (s.qubit_state(0.9), 2) };
    let tangents = (0..3).map(|_| s.traceless_hermitian(n)).collect();
    (hermitian_eig(&rho).unwrap(), TangentMRep::new(tangents).unwrap())
}

fn ac5() -> Outcome {
    let pairs = [
        (PetzFunction::Rrld, PetzFunction::Sld),
        (PetzFunction::Alpha(0.1), PetzFunction::Sld),
        (PetzFunction::Alpha(0.3), PetzFunction::Alpha(0.5)),
        (PetzFunction::Rrld, PetzFunction::KuboMori),
        (PetzFunction::Alpha(-1.0), PetzFunction::Alpha(2.0)),
    ];
    let mut s = Sampler::new(5);
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    let mut unordered = 0usize;
    let mut inverse_mismatch = 0usize;
    for qutrit in [false, true] {
        for _ in 0..100 {
            let (rho, t) = random_instance(&mut s, qutrit);
            let r = rho.max_eigenvalue() / rho.min_eigenvalue();
            let grid = log_grid(1.0 / r, r, 256);
            for (a, b) in pairs {
                let (f, g) = if max_pointwise_excess(&a, &b, &grid).unwrap() <= ORDER_TOL {
                    (a, b)
                } else if max_pointwise_excess(&b, &a, &grid).unwrap() <= ORDER_TOL {
                    (b, a)
                } else {
                    unordered += 1;
                    continue;
                };
                let gf = quantum_fisher_metric(&rho, &t, &f).unwrap();
                let gg = quantum_fisher_metric(&rho, &t, &g).unwrap();
                worst = worst
                    .max(-loewner_margin(&gf, &gg).unwrap())
                    .max(-loewner_margin(&diagonal_metric(&gf), &diagonal_metric(&gg)).unwrap());
                checked += 1;
                let (inv_f, inv_g) = (gf.inverse().unwrap(), gg.inverse().unwrap());
                if loewner_geq(&gf, &gg).unwrap() != loewner_geq(&inv_g, &inv_f).unwrap()
                    || loewner_geq(&gg, &gf).unwrap() != loewner_geq(&inv_f, &inv_g).unwrap()
                {
                    inverse_mismatch += 1;
                }
            }
        }
    }
    outcome(
        worst <= 1e-9 && inverse_mismatch == 0 && unordered == 0,
        format!(
            "{checked} ordered pairs, worst Loewner deficit {worst:.2e} (tol 1e-9), {inverse_mismatch} inverse mismatches, {unordered} unordered"
        ),
    )
}

fn random_distribution(s: &mut Sampler, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| 0.05 + s.uniform()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

fn ac6() -> Outcome {
    let mut s = Sampler::new(6);
    let mut metric_gap: f64 = 0.0;
    for _ in 0..100 {
        let n = 2 + (s.next_u64() % 3) as usize;
        let p = random_distribution(&mut s, n);
        let d: Vec<Vec<f64>> = (0..3)
            .map(|_| {
                let v: Vec<f64> = (0..n).map(|_| s.symmetric()).collect();
                let m = v.iter().sum::<f64>() / n as f64;
                v.iter().map(|x| x - m).collect()
            })
            .collect();
        let rho = hermitian_eig(&ComplexMatrix::from_real_diagonal(&p)).unwrap();
        let t = TangentMRep::new(d.iter().map(|v| ComplexMatrix::from_real_diagonal(v)).collect()).unwrap();
        let c = classical_fisher_metric(&p, &d).unwrap();
        for f in all_kinds() {
            let g = quantum_fisher_metric(&rho, &t, &f).unwrap();
            metric_gap = metric_gap.max((g.inner() - c.inner()).amax());
        }
    }
    let fam = SoftmaxFamily::new(3);
    let mut step_gap: f64 = 0.0;
    for _ in 0..50 {
        let theta: Vec<f64> = (0..3).map(|_| s.range(-1.0, 1.0)).collect();
        let grad: Vec<f64> = (0..3).map(|_| s.symmetric()).collect();
        for rule in [StepRule::TrustRegion { epsilon: 1e-4 }, StepRule::Fixed { eta: 0.1 }] {
            let base = classical_ng_step(&fam, &grad, &theta, rule, &PetzFunction::Sld, 1e-3).unwrap();
            for f in all_kinds() {
                let st = classical_ng_step(&fam, &grad, &theta, rule, &f, 1e-3).unwrap();
                for (x, y) in st.delta.iter().zip(&base.delta) {
                    step_gap = step_gap.max((x - y).abs());
                }
            }
        }
    }
    outcome(
        metric_gap <= 1e-10 && step_gap <= 1e-10,
        format!("max metric deviation from classical Fisher {metric_gap:.2e}, max step spread {step_gap:.2e} (tol 1e-10)"),
    )
}

fn sweep_config(mode: Mode) -> ExperimentConfig {
    ExperimentConfig { mode, eta: 5e-4, epsilon: 1e-8, max_iters: 1000, ..Default::default() }
}

/// Checks monotone decrease and the 0.1 ≤ 0.3 ≤ 0.5 ordering on τ ∈ [10, 1000];
/// returns the cost gap at τ = 1000.
fn check_figure(runs: &[Trajectory]) -> (bool, String, f64) {
    let costs: Vec<Vec<f64>> = runs.iter().map(Trajectory::costs).collect();
    let complete = runs.iter().all(|r| !r.is_failed()) && costs.iter().all(|c| c.len() == 1001);
    if !complete {
        return (false, "a run ended early".into(), f64::NAN);
    }
    let monotone = costs.iter().all(|c| c.windows(2).all(|w| w[1] <= w[0]));
    let order_breaks = (10..=1000).filter(|&t| !(costs[0][t] <= costs[1][t] && costs[1][t] <= costs[2][t])).count();
    let gap = costs[2][1000] - costs[0][1000];
    let finals = format!("final costs {:.6}, {:.6}, {:.6}", costs[0][1000], costs[1][1000], costs[2][1000]);
    (
        monotone && order_breaks == 0,
        format!("monotone={monotone}, ordering breaks at {order_breaks} iterations, {finals}"),
        gap,
    )
}

fn ac7() -> (Outcome, f64) {
    let mut gap = f64::NAN;
    let o = timed(Some(Duration::from_secs(30)), || {
        let runs = run_sweep(&sweep_config(Mode::Trust)).unwrap();
        let (ok, detail, g) = check_figure(&runs);
        gap = g;
        outcome(ok, format!("{detail}, gap {g:.4e}"))
    });
    (o, gap)
}

fn ac8(trust_gap: f64) -> Outcome {
    let runs = run_sweep(&sweep_config(Mode::Fixed)).unwrap();
    let (ok, detail, gap) = check_figure(&runs);
    outcome(
        ok && gap > trust_gap,
        format!("{detail}, gap {gap:.4e} vs trust-region gap {trust_gap:.4e}"),
    )
}

fn ac9() -> Outcome {
    let mut worst: f64 = 0.0;
    for a in [0.1, 0.3, 0.5] {
        worst = worst.max(descent_prediction_error(PetzFunction::Alpha(a)).unwrap());
    }
    outcome(worst <= 0.1, format!("max relative deviation from predicted decrease {worst:.2e} (tol 0.1)"))
}

fn fd_partial_error(fam: &RotationFamily, theta: &[f64]) -> f64 {
    let h = 1e-6;
    let exact = fam.partials(theta).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        let (mut tp, mut tm) = (theta.to_vec(), theta.to_vec());
        tp[i] += h;
        tm[i] -= h;
        let fd = (fam.value(&tp).unwrap().matrix() - fam.value(&tm).unwrap().matrix()).scale(0.5 / h);
        worst = worst.max((&fd - &exact.as_slice()[i]).max_abs_entry());
    }
    worst
}

fn fd_gradient_error(fam: &RotationFamily, cost: &FrobeniusCost, theta: &[f64]) -> f64 {
    let h = 1e-6;
    let exact = cost.gradient(fam, theta).unwrap();
    (0..3)
        .map(|i| {
            let (mut tp, mut tm) = (theta.to_vec(), theta.to_vec());
            tp[i] += h;
            tm[i] -= h;
            let fd = (cost.value(fam, &tp).unwrap() - cost.value(fam, &tm).unwrap()) / (2.0 * h);
            (fd - exact[i]).abs()
        })
        .fold(0.0, f64::max)
}

fn csv_bytes(f: impl Fn(&mut Vec<u8>)) -> Vec<u8> {
    let mut b = Vec::new();
    f(&mut b);
    b
}

fn ac10() -> Outcome {
    let mut s = Sampler::new(10);
    let (mut partial_err, mut grad_err, mut residual): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..100 {
        let fam = RotationFamily::new(s.point_in_ball(0.95)).unwrap();
        let theta: Vec<f64> = (0..3).map(|_| s.range(-PI, PI)).collect();
        let star: Vec<f64> = (0..3).map(|_| s.range(-PI, PI)).collect();
        let cost = FrobeniusCost::new(fam.value(&star).unwrap());
        partial_err = partial_err.max(fd_partial_error(&fam, &theta));
        grad_err = grad_err.max(fd_gradient_error(&fam, &cost, &theta));

        let qutrit = s.uniform() < 0.5;
        let (rho, t) = random_instance(&mut s, qutrit);
        let g = regularize_metric(&quantum_fisher_metric(&rho, &t, &PetzFunction::Alpha(0.3)).unwrap(), 1e-3).unwrap();
        let b: Vec<f64> = (0..3).map(|_| s.symmetric()).collect();
        residual = residual.max(spd_residual(&g, &b));
    }

    let cfg = ExperimentConfig { max_iters: 200, ..Default::default() };
    let fixed = ExperimentConfig { mode: Mode::Fixed, diagonal: true, ..cfg.clone() };
    let ts = curve_grid(0.01, 5.0, 500).unwrap();
    let runs = [
        csv_bytes(|b| optimize(b, &cfg).unwrap()),
        csv_bytes(|b| optimize(b, &fixed).unwrap()),
        csv_bytes(|b| write_petz_curve(b, &default_curve_alphas(), &ts).unwrap()),
    ];
    let again = [
        csv_bytes(|b| optimize(b, &cfg).unwrap()),
        csv_bytes(|b| optimize(b, &fixed).unwrap()),
        csv_bytes(|b| write_petz_curve(b, &default_curve_alphas(), &ts).unwrap()),
    ];
    let stable = runs == again;
    outcome(
        partial_err <= 1e-7 && grad_err <= 1e-7 && residual <= 1e-10 && stable,
        format!(
            "partials {partial_err:.2e}, gradients {grad_err:.2e} (tol 1e-7), SPD residual {residual:.2e} (tol 1e-10), CSV byte-stable={stable}"
        ),
    )
}

fn spd_residual(g: &MetricMatrix, b: &[f64]) -> f64 {
    let x = solve_spd(g, b).unwrap();
    let gx = g.mul_vec(&x);
    let r: f64 = gx.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    r / nb
}

fn main() -> ExitCode {
    let mut results = vec![
        ("AC1 Petz normalization and symmetry", timed(Some(Duration::from_secs(1)), ac1)),
        ("AC2 extremality inside the monotone window", timed(None, ac2)),
        ("AC3 ordering along alpha in (0, 1/2]", timed(None, ac3)),
        ("AC4 divergence Hessian equals metric", timed(Some(Duration::from_secs(10)), ac4)),
        ("AC5 Petz order implies Loewner order", timed(None, ac5)),
        ("AC6 classical limit", timed(None, ac6)),
    ];
    let (o7, trust_gap) = ac7();
    results.push(("AC7 trust-region cost curves", o7));
    results.push(("AC8 fixed-step cost curves", timed(None, || ac8(trust_gap))));
    results.push(("AC9 first-order descent prediction", timed(None, ac9)));
    results.push(("AC10 finite-difference oracles and stable CSV", timed(None, ac10)));

    let mut failed = 0;
    for (name, o) in &results {
        println!("[{}] {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.passed);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
