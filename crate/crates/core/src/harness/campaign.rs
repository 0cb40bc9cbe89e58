//! Monte Carlo campaigns over matched realizations.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{half_duplex_reference, nsp_apply};
use crate::error::{Error, Result};
use crate::harness::config::{Algorithm, CampaignConfig};
use crate::harness::summary::{summarize_rows, CampaignSummary};
use crate::jpaim::{run, IterationRecord, RunTrace, SolverConfig};
use crate::model::{build_realization, splitmix64, Realization};
use crate::objective::{evaluate, user_rates, BeamformingState};

pub const REALIZATIONS_FILE: &str = "realizations.csv";
pub const TRACE_FILE: &str = "trace.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const REALIZATIONS_HEADER: &str = "# jpaim-realizations v1";
pub const TRACE_HEADER: &str = "# jpaim-trace v1";

const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed of realization `index`; earlier seeds do not depend on the campaign size.
pub fn realization_seed(base: u64, index: usize) -> u64 {
    splitmix64(base.wrapping_add((index as u64).wrapping_mul(SEED_STRIDE)))
}

/// One row of the per-realization CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub index: usize,
    pub seed: u64,
    pub checksum: String,
    pub algorithm: String,
    pub status: String,
    pub sum_rate: Option<f64>,
    pub dl_rate: Option<f64>,
    pub ul_rate: Option<f64>,
    pub final_loss: Option<f64>,
    pub rsi_w_mean: Option<f64>,
    pub asic_depth_db_mean: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub elapsed_ms: Option<f64>,
    /// Sum rate minus that of the first listed algorithm on the same seed.
    pub rate_diff: Option<f64>,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub sum_rate: f64,
    pub dl_rate: f64,
    pub ul_rate: f64,
    pub final_loss: f64,
    pub rsi_w_mean: f64,
    pub asic_depth_db_mean: f64,
    pub iterations: usize,
    pub converged: bool,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone)]
pub struct RealizationResult {
    pub index: usize,
    pub seed: u64,
    pub checksum: String,
    pub outcomes: Vec<(Algorithm, std::result::Result<Metrics, String>)>,
    /// Per-iteration JPAIM trace, shared by `jpaim` and `nsp-jpaim`.
    pub trace: Option<Vec<IterationRecord>>,
}

fn state_metrics(real: &Realization, state: &BeamformingState, cfg: &SolverConfig, trace: &RunTrace) -> Result<Metrics> {
    let rep = evaluate(real, state, &cfg.nu)?;
    let cells = real.cells() as f64;
    Ok(Metrics {
        sum_rate: rep.sum_rate,
        dl_rate: rep.dl_rate,
        ul_rate: rep.ul_rate,
        final_loss: rep.loss,
        rsi_w_mean: rep.rsi_power.iter().sum::<f64>() / cells,
        asic_depth_db_mean: rep.asic_depth_db.iter().sum::<f64>() / cells,
        iterations: trace.iterations,
        converged: trace.converged,
        elapsed_ms: trace.elapsed_ms,
    })
}

/// Runs every configured algorithm on one realization.
pub fn run_realization(cfg: &CampaignConfig, index: usize) -> RealizationResult {
    let seed = realization_seed(cfg.base_seed, index);
    let real = match build_realization(&cfg.scenario, seed) {
        Ok(r) => r,
        Err(e) => {
            let msg = e.to_string();
            return RealizationResult {
                index,
                seed,
                checksum: String::new(),
                outcomes: cfg.algorithms.iter().map(|&a| (a, Err(msg.clone()))).collect(),
                trace: None,
            };
        }
    };
    let checksum = real.checksum().unwrap_or_default();
    let solver = cfg.solver.for_realization(&real);
    let needs_jpaim = cfg
        .algorithms
        .iter()
        .any(|a| matches!(a, Algorithm::Jpaim | Algorithm::NspJpaim));
    let jp = if needs_jpaim { Some(run(&real, &solver)) } else { None };

    let outcomes = cfg
        .algorithms
        .iter()
        .map(|&alg| {
            let m = match alg {
                Algorithm::Jpaim => match jp.as_ref().unwrap() {
                    Ok(t) => state_metrics(&real, &t.state, &solver, t),
                    Err(e) => Err(Error::Numeric(e.to_string())),
                },
                Algorithm::NspJpaim => match jp.as_ref().unwrap() {
                    Ok(t) => nsp_apply(&real, &t.state, &cfg.nsp)
                        .and_then(|s| state_metrics(&real, &s, &solver, t)),
                    Err(e) => Err(Error::Numeric(e.to_string())),
                },
                Algorithm::HalfDuplex => half_duplex(&real, &solver),
            };
            (alg, m.map_err(|e| e.to_string()))
        })
        .collect();
    let trace = match jp {
        Some(Ok(t)) => Some(t.records),
        _ => None,
    };
    RealizationResult {
        index,
        seed,
        checksum,
        outcomes,
        trace,
    }
}

fn half_duplex(real: &Realization, solver: &SolverConfig) -> Result<Metrics> {
    let hd = half_duplex_reference(real, solver)?;
    let dl_loss = hd.dl.final_loss();
    let ul_loss = hd.ul.final_loss();
    // phase rates at the final states, each weighted by its time share
    let dl = user_rates(&real.restricted(true, false), &hd.dl.state)?;
    let ul = user_rates(&real.restricted(false, true), &hd.ul.state)?;
    Ok(Metrics {
        sum_rate: hd.sum_rate,
        dl_rate: 0.5 * dl.dl_sum(),
        ul_rate: 0.5 * ul.ul_sum(),
        final_loss: dl_loss + ul_loss,
        rsi_w_mean: 0.0,
        asic_depth_db_mean: crate::objective::ASIC_DEPTH_CAP_DB,
        iterations: hd.dl.iterations.max(hd.ul.iterations),
        converged: hd.dl.converged && hd.ul.converged,
        elapsed_ms: hd.dl.elapsed_ms + hd.ul.elapsed_ms,
    })
}

/// Runs all realizations on `workers` threads; results come back in index order.
pub fn run_all(cfg: &CampaignConfig) -> Result<Vec<RealizationResult>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    Ok(pool.install(|| {
        (0..cfg.realizations)
            .into_par_iter()
            .map(|i| run_realization(cfg, i))
            .collect()
    }))
}

/// Flattens results into CSV rows, zeroing wall-clock fields unless timing is on.
pub fn result_rows(results: &[RealizationResult], record_timing: bool) -> Vec<ResultRow> {
    results
        .iter()
        .flat_map(|r| {
            let reference = r.outcomes.first().and_then(|(_, m)| m.as_ref().ok()).map(|m| m.sum_rate);
            r.outcomes
                .iter()
                .map(|(alg, m)| match m {
                    Ok(m) => ResultRow {
                        index: r.index,
                        seed: r.seed,
                        checksum: r.checksum.clone(),
                        algorithm: alg.name().to_string(),
                        status: "ok".to_string(),
                        sum_rate: Some(m.sum_rate),
                        dl_rate: Some(m.dl_rate),
                        ul_rate: Some(m.ul_rate),
                        final_loss: Some(m.final_loss),
                        rsi_w_mean: Some(m.rsi_w_mean),
                        asic_depth_db_mean: Some(m.asic_depth_db_mean),
                        iterations: Some(m.iterations),
                        converged: Some(m.converged),
                        elapsed_ms: Some(if record_timing { m.elapsed_ms } else { 0.0 }),
                        rate_diff: reference.map(|base| m.sum_rate - base),
                        error: String::new(),
                    },
                    Err(e) => ResultRow {
                        index: r.index,
                        seed: r.seed,
                        checksum: r.checksum.clone(),
                        algorithm: alg.name().to_string(),
                        status: "failed".to_string(),
                        sum_rate: None,
                        dl_rate: None,
                        ul_rate: None,
                        final_loss: None,
                        rsi_w_mean: None,
                        asic_depth_db_mean: None,
                        iterations: None,
                        converged: None,
                        elapsed_ms: None,
                        rate_diff: None,
                        error: e.clone(),
                    },
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

pub fn write_realizations_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    writeln!(file, "{REALIZATIONS_HEADER}")?;
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace_csv(path: &Path, cells: usize, results: &[RealizationResult], record_timing: bool) -> Result<()> {
    let mut file = BufWriter::new(File::create(path)?);
    writeln!(file, "{TRACE_HEADER}")?;
    let mut w = csv::Writer::from_writer(file);
    let mut header = vec!["seed".to_string(), "iter".into(), "loss".into(), "sum_mse".into()];
    header.extend((0..cells).map(|g| format!("rsi_w_{g}")));
    header.extend(["sum_rate".to_string(), "elapsed_ms".into()]);
    w.write_record(&header)?;
    for r in results {
        let Some(trace) = &r.trace else { continue };
        for rec in trace {
            let mut row = vec![
                r.seed.to_string(),
                rec.iter.to_string(),
                fmt_f64(rec.loss),
                fmt_f64(rec.sum_mse),
            ];
            row.extend(rec.rsi_w.iter().map(|&v| fmt_f64(v)));
            row.push(fmt_f64(rec.sum_rate));
            row.push(fmt_f64(if record_timing { rec.elapsed_ms } else { 0.0 }));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct CampaignOutcome {
    pub summary: CampaignSummary,
    pub results: Vec<RealizationResult>,
    pub files: Vec<PathBuf>,
}

/// Runs a campaign and writes its CSV files and summary into `cfg.out_dir`.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignOutcome> {
    let results = run_all(cfg)?;
    fs::create_dir_all(&cfg.out_dir)?;
    let rows: Vec<ResultRow> = result_rows(&results, cfg.record_timing);
    let mut files = Vec::new();

    let path = cfg.out_dir.join(REALIZATIONS_FILE);
    write_realizations_csv(&path, &rows)?;
    files.push(path);

    if cfg.trace && results.iter().any(|r| r.trace.is_some()) {
        let path = cfg.out_dir.join(TRACE_FILE);
        write_trace_csv(&path, cfg.scenario.cells, &results, cfg.record_timing)?;
        files.push(path);
    }

    let summary = summarize_rows(&rows)?;
    let path = cfg.out_dir.join(SUMMARY_FILE);
    fs::write(&path, serde_json::to_string_pretty(&summary)?)?;
    files.push(path);

    Ok(CampaignOutcome { summary, results, files })
}
