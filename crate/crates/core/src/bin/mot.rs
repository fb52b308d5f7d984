use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::Parser;
use mot_core::experiments::{Overrides, Plan, Preset};
use mot_core::{MotError, SimConfig};

/// Run a preset study of the attractive-cloud model.
#[derive(Debug, Parser)]
#[command(name = "mot", version)]
struct Cli {
    /// contour, norms, n-rate, eps-rate, coupling or heat-check
    preset: String,
    /// Base configuration (`key = value` lines). Preset defaults if omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of consecutive seeds.
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Diffusion coefficient(s), comma separated.
    #[arg(long = "D", value_name = "D[,D..]", allow_hyphen_values = true)]
    d: Option<String>,
    #[arg(long, value_name = "EPS[,EPS..]", allow_hyphen_values = true)]
    eps: Option<String>,
    /// Particle count(s), comma separated.
    #[arg(long = "N", value_name = "N[,N..]")]
    n: Option<String>,
    /// Cells per side.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long = "t-end", allow_hyphen_values = true)]
    t_end: Option<f64>,
}

fn list<T: FromStr>(name: &'static str, s: &Option<String>) -> Result<Option<Vec<T>>, MotError> {
    s.as_deref()
        .map(|s| {
            s.split(',')
                .map(|v| {
                    v.trim().parse::<T>().map_err(|_| MotError::InvalidParameter {
                        name,
                        reason: format!("cannot parse `{v}`"),
                    })
                })
                .collect()
        })
        .transpose()
}

fn run(cli: Cli) -> Result<bool, MotError> {
    let preset: Preset = cli.preset.parse()?;
    let mut plan = match &cli.config {
        Some(p) => Plan::with_config(preset, SimConfig::from_file(p)?),
        None => Plan::new(preset),
    };
    plan.apply(&Overrides {
        d: list("D", &cli.d)?,
        eps: list("eps", &cli.eps)?,
        n: list("N", &cli.n)?,
        grid: cli.grid,
        t_end: cli.t_end,
        seed: cli.seed,
        seeds: cli.seeds,
    })?;
    log::info!("{preset}: writing into {}", cli.out.display());
    let outcome = plan.execute(&cli.out)?;
    for line in &outcome.summary {
        println!("{line}");
    }
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
