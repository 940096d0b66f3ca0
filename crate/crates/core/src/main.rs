use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qnglab::config::{parse_alphas, parse_list, ExperimentConfig, FamilySpec, Mode};
use qnglab::experiments::{curve_grid, default_curve_alphas, optimize, write_petz_curve};
use qnglab::verify::run_verify;
use qnglab::{QngError, Result};

#[derive(Parser)]
#[command(name = "qnglab", version, about = "Natural-gradient experiments with Petz-function metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate Petz functions as `t,alpha,f` CSV.
    PetzCurve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.01)]
        t_min: f64,
        #[arg(long, default_value_t = 5.0)]
        t_max: f64,
        #[arg(long, default_value_t = 500)]
        samples: usize,
    },
    /// Run the optimizer for each alpha and write per-iteration CSV.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Check numerical properties on random instances.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Add a deliberately false order check that must fail.
        #[arg(long)]
        negative_control: bool,
    },
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma list of alphas or presets (sld, rrld, km, inf).
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunFlags {
    /// rotation or softmax.
    #[arg(long)]
    family: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    theta0: Option<String>,
    #[arg(long, value_parser = ["trust", "fixed"])]
    mode: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    diagonal: bool,
    #[arg(long)]
    max_iters: Option<usize>,
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(a) = &common.alpha {
        cfg.alphas = Some(parse_alphas(a)?);
    }
    if let Some(o) = &common.out {
        cfg.out = Some(o.clone());
    }
    Ok(cfg)
}

fn apply_run_flags(cfg: &mut ExperimentConfig, f: RunFlags) -> Result<()> {
    match f.family.as_deref() {
        None => {}
        Some("rotation") => {
            if !matches!(cfg.family, FamilySpec::Rotation { .. }) {
                cfg.family = FamilySpec::Rotation { bloch: [0.5, 0.0, 0.0] };
            }
        }
        Some("softmax") => cfg.family = FamilySpec::Softmax,
        Some(other) => return Err(QngError::InvalidParameter(format!("unknown family `{other}`"))),
    }
    if let Some(t) = f.theta0 {
        cfg.theta0 = parse_list(&t)?;
    }
    if let Some(m) = f.mode {
        cfg.mode = m.parse::<Mode>()?;
    }
    if let Some(v) = f.epsilon {
        cfg.epsilon = v;
    }
    if let Some(v) = f.eta {
        cfg.eta = v;
    }
    if let Some(v) = f.xi {
        cfg.xi = v;
    }
    if let Some(v) = f.delta {
        cfg.delta = v;
    }
    if f.diagonal {
        cfg.diagonal = true;
    }
    if let Some(v) = f.max_iters {
        cfg.max_iters = v;
    }
    Ok(())
}

fn with_output(out: &Option<PathBuf>, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            let r = body(&mut w);
            w.flush()?;
            r
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            body(&mut w)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::PetzCurve { common, t_min, t_max, samples } => {
            let cfg = load(&common)?;
            let alphas = cfg.alphas.clone().unwrap_or_else(default_curve_alphas);
            let ts = curve_grid(t_min, t_max, samples)?;
            with_output(&cfg.out, |w| write_petz_curve(w, &alphas, &ts))?;
        }
        Command::Optimize { common, run } => {
            let mut cfg = load(&common)?;
            apply_run_flags(&mut cfg, run)?;
            with_output(&cfg.out, |w| optimize(w, &cfg))?;
        }
        Command::Verify { common, seed, trials, negative_control } => {
            let cfg = load(&common)?;
            let report = run_verify(seed.unwrap_or(cfg.seed), trials.unwrap_or(cfg.trials), negative_control)?;
            with_output(&cfg.out, |w| Ok(writeln!(w, "{report}")?))?;
            if !report.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
