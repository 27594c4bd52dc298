use anyhow::{Context, Result};
use anyonlab::config::{self, ExperimentConfig};
use anyonlab::report::{persist, summarize, Check, ResultRecord};
use anyonlab::{commands, run_experiment};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "anyonlab", version, about = "Extended-anyon experiments")]
struct Cli {
    /// JSON configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed in the configuration
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory [default: the config's outDir, else ./out]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Two-body scattering energy, closed form against finite elements
    Twobody,
    /// Variational Monte Carlo energy breakdown
    Vmc,
    /// Minimize the CSS functional from a random start
    Css,
    /// Build an NLL state and check the self-duality identity
    Nll,
    /// Multistart estimates of the critical coupling
    Gammastar,
    /// Run an experiment configuration (convergence, scans, suites)
    Convergence,
    /// Rebuild CSV and summary from a records.json file
    Report,
}

fn print_checks(checks: &[Check]) -> bool {
    for c in checks {
        let mark = if c.pass { "ok  " } else { "FAIL" };
        if c.detail.is_empty() {
            println!("{mark} {}", c.name);
        } else {
            println!("{mark} {} ({})", c.name, c.detail);
        }
    }
    checks.iter().all(|c| c.pass)
}

fn run(cli: &Cli) -> Result<bool> {
    let path = cli.config.as_deref().context("--config is required")?;
    let default_out = PathBuf::from("out");
    let out = cli.out.as_deref().unwrap_or(&default_out);
    let checks = match cli.cmd {
        Cmd::Twobody => commands::twobody(&config::load(path)?, out)?.1,
        Cmd::Vmc => commands::vmc(&config::load(path)?, cli.seed, out)?.1,
        Cmd::Css => commands::css(&config::load(path)?, cli.seed, out)?.1,
        Cmd::Nll => commands::nll(&config::load(path)?, out)?.1,
        Cmd::Gammastar => commands::gammastar(&config::load(path)?, cli.seed, out)?.1,
        Cmd::Convergence => {
            let cfg: ExperimentConfig = config::load(path)?;
            let dir = cli.out.clone().or_else(|| cfg.out_dir.clone()).unwrap_or(default_out.clone());
            let run = run_experiment(&cfg, cli.seed)?;
            persist(&dir, &run.records, &run.summary)?;
            if let Some(m) = &run.summary.monotonicity {
                for g in m {
                    println!("monotone {}: {}", g.group, g.non_increasing);
                }
            }
            run.summary.checks
        }
        Cmd::Report => {
            let records: Vec<ResultRecord> = config::load(path)?;
            let kind = records.first().map(|r| r.experiment.clone()).unwrap_or_default();
            let summary = summarize(&kind, &records, Vec::new())?;
            persist(out, &records, &summary)?;
            summary.checks
        }
    };
    Ok(print_checks(&checks))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
