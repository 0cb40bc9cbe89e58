//! Campaign statistics.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::campaign::{ResultRow, REALIZATIONS_FILE, REALIZATIONS_HEADER};
use crate::harness::config::Algorithm;

/// Sample mean, standard deviation and 95% normal-approximation interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
}

impl Stat {
    pub const EMPTY: Stat = Stat {
        n: 0,
        mean: f64::NAN,
        std: f64::NAN,
        ci95_low: f64::NAN,
        ci95_high: f64::NAN,
    };

    pub fn from_samples(xs: &[f64]) -> Option<Stat> {
        let n = xs.len();
        if n == 0 {
            return None;
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let half = 1.96 * std / (n as f64).sqrt();
        Some(Stat {
            n,
            mean,
            std,
            ci95_low: mean - half,
            ci95_high: mean + half,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: String,
    pub completed: usize,
    pub failed: usize,
    pub sum_rate: Stat,
    pub final_loss: Stat,
    pub rsi_w: Stat,
    pub asic_depth_db: Stat,
    pub iterations: Stat,
    pub elapsed_ms: Stat,
    pub converged_fraction: f64,
    /// Paired difference to the first listed algorithm.
    pub rate_diff: Option<Stat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub algorithms: Vec<AlgorithmSummary>,
}

impl CampaignSummary {
    pub fn get(&self, algorithm: &str) -> Option<&AlgorithmSummary> {
        self.algorithms.iter().find(|a| a.algorithm == algorithm)
    }
}

/// Aggregates rows; the result does not depend on row order.
pub fn summarize_rows(rows: &[ResultRow]) -> Result<CampaignSummary> {
    if rows.is_empty() {
        return Err(Error::NoData("no realization rows".into()));
    }
    let mut groups: BTreeMap<&str, Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        groups.entry(&r.algorithm).or_default().push(r);
    }
    let rank = |name: &str| Algorithm::ALL.iter().position(|a| a.name() == name).unwrap_or(usize::MAX);
    let mut order: Vec<String> = groups.keys().map(|k| k.to_string()).collect();
    order.sort_by(|a, b| rank(a).cmp(&rank(b)).then(a.cmp(b)));

    let mut algorithms = Vec::new();
    for name in order {
        let mut group = groups.remove(name.as_str()).unwrap_or_default();
        group.sort_by_key(|r| r.index);
        let ok: Vec<&ResultRow> = group.iter().copied().filter(|r| r.status == "ok").collect();
        let failed = group.len() - ok.len();
        let stat = |f: &dyn Fn(&ResultRow) -> Option<f64>| {
            let xs: Vec<f64> = ok.iter().filter_map(|r| f(r)).collect();
            Stat::from_samples(&xs)
        };
        let converged = ok.iter().filter(|r| r.converged == Some(true)).count();
        algorithms.push(AlgorithmSummary {
            completed: ok.len(),
            failed,
            sum_rate: stat(&|r| r.sum_rate).unwrap_or(Stat::EMPTY),
            final_loss: stat(&|r| r.final_loss).unwrap_or(Stat::EMPTY),
            rsi_w: stat(&|r| r.rsi_w_mean).unwrap_or(Stat::EMPTY),
            asic_depth_db: stat(&|r| r.asic_depth_db_mean).unwrap_or(Stat::EMPTY),
            iterations: stat(&|r| r.iterations.map(|i| i as f64)).unwrap_or(Stat::EMPTY),
            elapsed_ms: stat(&|r| r.elapsed_ms).unwrap_or(Stat::EMPTY),
            converged_fraction: if ok.is_empty() { 0.0 } else { converged as f64 / ok.len() as f64 },
            rate_diff: stat(&|r| r.rate_diff),
            algorithm: name,
        });
    }
    Ok(CampaignSummary { algorithms })
}

/// Reads per-realization CSV files (or directories containing one).
pub fn read_rows(paths: &[PathBuf]) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for p in paths {
        let path = if p.is_dir() { p.join(REALIZATIONS_FILE) } else { p.clone() };
        rows.extend(read_file(&path)?);
    }
    Ok(rows)
}

fn read_file(path: &Path) -> Result<Vec<ResultRow>> {
    let schema = |reason: String| Error::Schema {
        path: path.to_path_buf(),
        reason,
    };
    let mut reader = BufReader::new(File::open(path)?);
    let mut first = String::new();
    reader.read_line(&mut first)?;
    if first.trim_end() != REALIZATIONS_HEADER {
        return Err(schema(format!("expected `{REALIZATIONS_HEADER}` on the first line")));
    }
    let mut csv = csv::Reader::from_reader(reader);
    let expected = [
        "index",
        "seed",
        "checksum",
        "algorithm",
        "status",
        "sum_rate",
        "dl_rate",
        "ul_rate",
        "final_loss",
        "rsi_w_mean",
        "asic_depth_db_mean",
        "iterations",
        "converged",
        "elapsed_ms",
        "rate_diff",
        "error",
    ];
    let header = csv.headers()?.clone();
    if header.iter().ne(expected.iter().copied()) {
        return Err(schema(format!("unexpected columns {:?}", header.iter().collect::<Vec<_>>())));
    }
    csv.deserialize()
        .map(|r| r.map_err(|e| schema(e.to_string())))
        .collect()
}

/// Summary of previously written campaign output.
pub fn summarize(paths: &[PathBuf]) -> Result<CampaignSummary> {
    summarize_rows(&read_rows(paths)?)
}
