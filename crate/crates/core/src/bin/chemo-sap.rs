use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use chemo_sap::config::{parse_config, SimConfig};
use chemo_sap::sim::{run_to_dir, snapshot_steps, RunOutput};
use chemo_sap::{Error, Result};

#[derive(Parser)]
#[command(name = "chemo-sap", version, about = "Kinetic chemotaxis with random inputs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write CSV output.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the same configuration for several values of eps.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and check a configuration without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &Path) -> Result<SimConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_config(&text)
}

fn report(dir: &Path, out: &RunOutput) {
    let first = out.scalars[0];
    let last = out.final_row();
    println!(
        "{}: {} steps of dt = {:e}, t = {:.6}, mass {:.12} -> {:.12}, max E[rho] {:.6}, min E[rho] {:.3e}",
        dir.display(),
        out.steps,
        out.dt,
        last.t,
        first.total_mass,
        last.total_mass,
        last.linf_mean_rho,
        out.min_mean_rho,
    );
    if out.variance_clamp > 0.0 {
        println!("  collocation variance clamp: {:.3e} (relative)", out.variance_clamp);
    }
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { config, out } => {
            let cfg = load(&config)?;
            let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            let res = run_to_dir(&cfg, &dir)?;
            report(&dir, &res);
        }
        Command::Sweep { config, eps, out } => {
            let base = load(&config)?;
            let root = out.unwrap_or_else(|| base.output_dir.clone());
            let jobs: Vec<(PathBuf, SimConfig)> = eps
                .iter()
                .map(|&e| {
                    let mut c = base.clone();
                    c.eps = e;
                    c.validate()?;
                    Ok((root.join(format!("eps_{e:?}")), c))
                })
                .collect::<Result<_>>()?;
            let results: Vec<Result<RunOutput>> =
                jobs.par_iter().map(|(dir, c)| run_to_dir(c, dir)).collect();
            for ((dir, _), r) in jobs.iter().zip(results) {
                report(dir, &r?);
            }
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            println!(
                "ok: model = {}, {} cells, dt = {:e}, {} steps, {} snapshot(s)",
                cfg.model.name(),
                cfg.n_cells,
                cfg.dt(),
                cfg.n_steps(),
                snapshot_steps(&cfg).len()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
