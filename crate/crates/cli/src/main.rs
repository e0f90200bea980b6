//! `kerrtorus` command-line driver.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::Resolved;
use crate::error::{CliError, EXIT_PARTIAL};
use crate::output::Output;

#[derive(Parser)]
#[command(name = "kerrtorus", version, about = "Limit tori in coupled driven-dissipative Kerr cavities")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "KERRTORUS_THREADS")]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Scaling parameter(s), comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    aleph: Option<Vec<f64>>,
    /// Trajectories per ensemble.
    #[arg(long, global = true)]
    ntraj: Option<usize>,
    /// Ensemble end time.
    #[arg(long, global = true)]
    t_end: Option<f64>,
    /// Ensemble time step.
    #[arg(long, global = true)]
    dt: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Mean-field trajectory.
    Gpe,
    /// Lyapunov spectrum of the mean field.
    Lyapunov,
    /// Classified frequency sweep.
    Sweep {
        /// Frequency grid `start:stop:step`.
        #[arg(long, default_value = "0.6:1.2:0.01")]
        omega: String,
    },
    /// Truncated-Wigner ensemble averages.
    Twa,
    /// Two-time correlation, spectrogram and peak tracks.
    Spectrogram,
    /// Dephasing rates and their power law in the scaling parameter.
    Gaps,
    /// Phase melting (circular variance) series.
    Melt,
    /// Scaling collapse of the melting curves.
    Collapse,
    /// Phase-space densities and attractor confinement.
    Wigner,
    /// Liouvillian spectrum, steady state and evolution in a truncated Fock space.
    Liouville,
    /// Data behind one figure.
    Reproduce {
        figure: Figure,
        #[arg(long, default_value = "0.6:1.2:0.01")]
        omega: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

const FIGURE_ALEPHS: [f64; 3] = [30000.0, 4000.0, 200.0];

fn resolve(c: &Common) -> Result<Resolved, CliError> {
    let mut r = Resolved::load(c.config.as_deref())?;
    r.set("seed", c.seed, |cfg, v| cfg.seed = v);
    r.set("threads", c.threads, |cfg, v| cfg.threads = v);
    r.set("out", c.out.clone(), |cfg, v| cfg.out = v);
    if let Some(list) = &c.aleph {
        if list.is_empty() {
            return Err(CliError::Config("--aleph needs at least one value".into()));
        }
        let first = list[0];
        r.set("scaling.aleph", Some(first), |cfg, v| cfg.scaling.aleph = v);
        r.set("scaling.alephs", Some(list.clone()), |cfg, v| cfg.scaling.alephs = v);
    }
    r.set("ensemble.n_traj", c.ntraj, |cfg, v| cfg.ensemble.n_traj = v);
    r.set("ensemble.t_end", c.t_end, |cfg, v| cfg.ensemble.t_end = v);
    r.set("ensemble.dt", c.dt, |cfg, v| cfg.ensemble.dt = v);
    r.validate()?;
    Ok(r)
}

fn figure_alephs(r: &Resolved) -> Vec<f64> {
    if r.provenance.get("scaling.alephs").is_some_and(|s| *s != config::Source::Default) {
        r.config.scaling.alephs.clone()
    } else {
        FIGURE_ALEPHS.to_vec()
    }
}

fn dispatch(cmd: &Command, r: &Resolved, out: &mut Output) -> Result<(), CliError> {
    let aleph = r.config.scaling.aleph;
    let alephs = r.config.scaling.alephs.clone();
    match cmd {
        Command::Gpe => commands::gpe(r, out),
        Command::Lyapunov => commands::lyapunov(r, out),
        Command::Sweep { omega } => commands::sweep(r, out, &commands::parse_range(omega)?, ""),
        Command::Twa => commands::twa(r, out, aleph, ""),
        Command::Spectrogram => commands::spectrogram_cmd(r, out),
        Command::Gaps => commands::gaps(r, out, &alephs, false),
        Command::Melt => commands::melt(r, out, &alephs),
        Command::Collapse => commands::collapse_cmd(r, out, &alephs),
        Command::Wigner => commands::wigner(r, out, &[aleph]),
        Command::Liouville => commands::liouville(r, out),
        Command::Reproduce { figure, omega } => match figure {
            Figure::Fig1 => commands::fig1(r, out, &commands::parse_range(omega)?),
            Figure::Fig2 => commands::fig2(r, out, &figure_alephs(r)),
            Figure::Fig3 => commands::gaps(r, out, &alephs, true),
            Figure::Fig4 => commands::wigner(r, out, &figure_alephs(r)),
            Figure::Fig5 => {
                commands::collapse_cmd(r, out, &alephs)?;
                commands::gaps(r, out, &alephs, false)
            }
        },
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let r = resolve(&cli.common)?;
    if r.config.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(r.config.threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    }
    let mut out = Output::new(&r.config.out)?;
    let start = Instant::now();
    let result = dispatch(&cli.command, &r, &mut out);
    if let Err(e) = &result {
        out.failures.push(e.to_string());
    }
    out.finish(std::env::args().collect(), start.elapsed().as_secs_f64(), &r.config, &r.provenance)?;
    result?;
    Ok(out.failures.is_empty())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("run finished with failures; see manifest.json");
            ExitCode::from(EXIT_PARTIAL as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
