use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use jpaim::harness::{
    complexity_estimate, load_config, run_campaign, summarize, Algorithm, CampaignConfig, CampaignSummary,
    ComplexityInput,
};
use jpaim::{Error, Result};

#[derive(Parser)]
#[command(name = "jpaim", version, about = "Full-duplex multi-cell beamforming simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo campaign.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        realizations: Option<usize>,
        /// jpaim, nsp-jpaim or half-duplex; repeat for several.
        #[arg(long = "algorithm")]
        algorithms: Vec<String>,
        #[arg(long)]
        asic_db: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        /// Write the per-iteration trace CSV.
        #[arg(long)]
        trace: bool,
        /// Record wall-clock times (outputs are then no longer reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Multiplication counts of one iteration.
    Complexity {
        #[arg(long)]
        cells: u64,
        #[arg(long)]
        users: u64,
        #[arg(long)]
        bs_antennas: u64,
        #[arg(long)]
        ue_antennas: u64,
        #[arg(long)]
        streams: u64,
    },
    /// Summarize the per-realization CSV files of earlier campaigns.
    Summarize {
        #[arg(long = "in", required = true)]
        inputs: Vec<PathBuf>,
    },
}

fn print_summary(s: &CampaignSummary) {
    println!(
        "{:<12} {:>5} {:>6} {:>12} {:>12} {:>12} {:>10} {:>8}",
        "algorithm", "ok", "failed", "rate", "rate_ci95", "rsi_w", "asic_db", "conv"
    );
    for a in &s.algorithms {
        println!(
            "{:<12} {:>5} {:>6} {:>12.4} {:>12.4} {:>12.3e} {:>10.2} {:>8.3}",
            a.algorithm,
            a.completed,
            a.failed,
            a.sum_rate.mean,
            a.sum_rate.ci95_high - a.sum_rate.mean,
            a.rsi_w.mean,
            a.asic_depth_db.mean,
            a.converged_fraction
        );
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            seed,
            realizations,
            algorithms,
            asic_db,
            out,
            workers,
            trace,
            timing,
        } => {
            let mut cfg = match config {
                Some(p) => load_config(&p)?,
                None => CampaignConfig::default(),
            };
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            if let Some(n) = realizations {
                cfg.realizations = n;
            }
            if !algorithms.is_empty() {
                cfg.algorithms = algorithms
                    .iter()
                    .map(|a| a.parse::<Algorithm>())
                    .collect::<Result<_>>()?;
            }
            if let Some(l) = asic_db {
                cfg.scenario.asic_db = l;
            }
            if let Some(o) = out {
                cfg.out_dir = o;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            cfg.trace |= trace;
            cfg.record_timing |= timing;
            cfg.validate()?;
            let outcome = run_campaign(&cfg)?;
            print_summary(&outcome.summary);
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
        }
        Command::Complexity {
            cells,
            users,
            bs_antennas,
            ue_antennas,
            streams,
        } => {
            for (k, v) in [
                ("cells", cells),
                ("users", users),
                ("bs-antennas", bs_antennas),
                ("ue-antennas", ue_antennas),
                ("streams", streams),
            ] {
                if v == 0 {
                    return Err(Error::InvalidConfig {
                        key: k.into(),
                        reason: "must be positive".into(),
                    });
                }
            }
            let e = complexity_estimate(ComplexityInput {
                cells,
                users,
                bs_antennas,
                ue_antennas,
                streams,
            });
            println!("M_v     = {}", e.m_v);
            println!("M_alpha = {}", e.m_alpha);
            println!("total   = {} (+ one {}x{} eigen-decomposition and inverse)", e.total, e.extra_cubic_dim, e.extra_cubic_dim);
            println!("order   = {}", e.order);
        }
        Command::Summarize { inputs } => print_summary(&summarize(&inputs)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
