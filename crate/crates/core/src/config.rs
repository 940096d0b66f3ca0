//! Experiment configuration read from flat `key = value` files.
//!
//! ```text
//! # trust-region sweep
//! bloch = [0.5, 0, 0]
//! theta0 = [pi/2, pi/2, pi/4]
//! mode = trust
//! epsilon = 1e-8
//! alpha = 0.1, 0.3, sld
//! ```
//!
//! Lists accept optional brackets. Scalars accept `pi` multiples such as
//! `-3pi/4` or `pi/2`.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use crate::classical::{softmax, DiagonalFamily, SoftmaxFamily};
use crate::error::{QngError, Result};
use crate::linalg::ComplexMatrix;
use crate::optimizer::{OptimizerConfig, StepRule};
use crate::petz::PetzFunction;
use crate::states::{DensityOperator, RotationFamily, StateFamily};

#[derive(Clone, Debug, PartialEq)]
pub enum FamilySpec {
    /// Single-qubit rotations of the state with this Bloch vector.
    Rotation { bloch: [f64; 3] },
    /// Softmax distribution embedded as diagonal states; size from `theta0`.
    Softmax,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Trust,
    Fixed,
}

impl std::str::FromStr for Mode {
    type Err = QngError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "trust" => Ok(Self::Trust),
            "fixed" => Ok(Self::Fixed),
            other => Err(QngError::InvalidParameter(format!("mode must be trust or fixed, got `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub family: FamilySpec,
    pub theta0: Vec<f64>,
    /// Target parameters. Empty means the origin.
    pub theta_star: Vec<f64>,
    pub mode: Mode,
    pub epsilon: f64,
    pub eta: f64,
    /// `None` leaves the choice to the command.
    pub alphas: Option<Vec<PetzFunction>>,
    pub xi: f64,
    pub delta: f64,
    pub diagonal: bool,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub mix_cost: bool,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub trials: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let opt = OptimizerConfig::default();
        Self {
            family: FamilySpec::Rotation { bloch: [0.5, 0.0, 0.0] },
            theta0: vec![PI / 2.0, PI / 2.0, PI / 4.0],
            theta_star: Vec::new(),
            mode: Mode::Trust,
            epsilon: 1e-8,
            eta: 5e-4,
            alphas: None,
            xi: opt.xi,
            delta: opt.delta,
            diagonal: opt.diagonal,
            max_iters: opt.max_iters,
            grad_tol: opt.grad_tol,
            mix_cost: opt.mix_cost,
            out: None,
            seed: 42,
            trials: 100,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut family = None;
        let mut bloch = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| QngError::Config { line, msg: format!("expected `key = value`, got `{content}`") })?;
            let (key, value) = (key.trim(), value.trim());
            let wrap = |e: QngError| QngError::Config { line, msg: format!("{key}: {e}") };
            match key {
                "family" => family = Some(value.to_string()),
                "bloch" => {
                    let v = parse_list(value).map_err(wrap)?;
                    let b: [f64; 3] = v.try_into().map_err(|v: Vec<f64>| QngError::Config {
                        line,
                        msg: format!("bloch needs 3 components, got {}", v.len()),
                    })?;
                    bloch = Some(b);
                }
                "theta0" => cfg.theta0 = parse_list(value).map_err(wrap)?,
                "theta_star" => cfg.theta_star = parse_list(value).map_err(wrap)?,
                "mode" => cfg.mode = value.parse().map_err(wrap)?,
                "epsilon" => cfg.epsilon = parse_scalar(value).map_err(wrap)?,
                "eta" => cfg.eta = parse_scalar(value).map_err(wrap)?,
                "alpha" => cfg.alphas = Some(parse_alphas(value).map_err(wrap)?),
                "xi" => cfg.xi = parse_scalar(value).map_err(wrap)?,
                "delta" => cfg.delta = parse_scalar(value).map_err(wrap)?,
                "diagonal" => cfg.diagonal = parse_bool(value).map_err(wrap)?,
                "max_iters" => cfg.max_iters = parse_int(value).map_err(wrap)?,
                "grad_tol" => cfg.grad_tol = parse_scalar(value).map_err(wrap)?,
                "mix_cost" => cfg.mix_cost = parse_bool(value).map_err(wrap)?,
                "out" => cfg.out = Some(PathBuf::from(value)),
                "seed" => cfg.seed = parse_int(value).map_err(wrap)? as u64,
                "trials" => cfg.trials = parse_int(value).map_err(wrap)?,
                _ => return Err(QngError::Config { line, msg: format!("unknown key `{key}`") }),
            }
        }
        cfg.family = match family.as_deref() {
            None | Some("rotation") => FamilySpec::Rotation { bloch: bloch.unwrap_or([0.5, 0.0, 0.0]) },
            Some("softmax") => FamilySpec::Softmax,
            Some(other) => {
                return Err(QngError::Config { line: 0, msg: format!("unknown family `{other}`") });
            }
        };
        Ok(cfg)
    }

    /// The optimizer sweep list, `0.1, 0.3, 0.5` unless configured.
    pub fn sweep_alphas(&self) -> Vec<PetzFunction> {
        self.alphas.clone().unwrap_or_else(|| {
            vec![PetzFunction::Alpha(0.1), PetzFunction::Alpha(0.3), PetzFunction::Alpha(0.5)]
        })
    }

    pub fn step_rule(&self) -> StepRule {
        match self.mode {
            Mode::Trust => StepRule::TrustRegion { epsilon: self.epsilon },
            Mode::Fixed => StepRule::Fixed { eta: self.eta },
        }
    }

    pub fn optimizer_config(&self, petz: PetzFunction) -> OptimizerConfig {
        OptimizerConfig {
            rule: self.step_rule(),
            petz,
            xi: self.xi,
            delta: self.delta,
            diagonal: self.diagonal,
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            mix_cost: self.mix_cost,
        }
    }

    pub fn target_theta(&self) -> Vec<f64> {
        if self.theta_star.is_empty() {
            vec![0.0; self.theta0.len()]
        } else {
            self.theta_star.clone()
        }
    }

    /// The state family and the target state `ρ_θ*`.
    pub fn build(&self) -> Result<(Box<dyn StateFamily>, DensityOperator)> {
        let star = self.target_theta();
        if star.len() != self.theta0.len() {
            return Err(QngError::DimensionMismatch(self.theta0.len(), star.len()));
        }
        match self.family {
            FamilySpec::Rotation { bloch } => {
                let fam = RotationFamily::new(bloch)?;
                let target = fam.value(&star)?;
                Ok((Box::new(fam), target))
            }
            FamilySpec::Softmax => {
                if self.theta0.len() < 2 {
                    return Err(QngError::InvalidParameter("softmax needs at least two parameters".into()));
                }
                let fam = DiagonalFamily(SoftmaxFamily::new(self.theta0.len()));
                let target = DensityOperator::new(ComplexMatrix::from_real_diagonal(&softmax(&star)))?;
                Ok((Box::new(fam), target))
            }
        }
    }
}

pub fn parse_scalar(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || QngError::InvalidParameter(format!("cannot parse number `{s}`"));
    if let Ok(v) = s.parse::<f64>() {
        return Ok(v);
    }
    // [-][k][*]pi[/d]
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().map_err(|_| bad())?),
        None => (s, 1.0),
    };
    let coeff = num.strip_suffix("pi").ok_or_else(bad)?.trim().trim_end_matches('*').trim();
    let k = match coeff {
        "" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(k * PI / den)
}

fn strip_brackets(s: &str) -> &str {
    let s = s.trim();
    s.strip_prefix('[').and_then(|x| x.strip_suffix(']')).unwrap_or(s)
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    let inner = strip_brackets(s);
    if inner.trim().is_empty() {
        return Ok(Vec::new());
    }
    inner.split(',').map(parse_scalar).collect()
}

/// Comma list of Petz functions: numbers or `sld`, `rrld`, `km`, `inf`.
pub fn parse_alphas(s: &str) -> Result<Vec<PetzFunction>> {
    let v: Vec<PetzFunction> = strip_brackets(s).split(',').map(str::parse).collect::<Result<_>>()?;
    if v.is_empty() {
        return Err(QngError::InvalidParameter("alpha list is empty".into()));
    }
    Ok(v)
}

fn parse_bool(s: &str) -> Result<bool> {
    match s {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(QngError::InvalidParameter(format!("expected true or false, got `{s}`"))),
    }
}

fn parse_int(s: &str) -> Result<usize> {
    s.parse().map_err(|_| QngError::InvalidParameter(format!("expected a nonnegative integer, got `{s}`")))
}
