//! Campaign configuration files.
//!
//! The format is TOML restricted to flat dotted keys, for example
//!
//! ```toml
//! realizations = 50
//! algorithms = ["jpaim", "half-duplex"]
//! asic_db = 30.0
//! antenna.bs_tx = 8
//! solver.threshold = 1e-4
//! ```
//!
//! Missing keys take their defaults, unknown keys are rejected.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::baselines::NspConfig;
use crate::error::{Error, Result};
use crate::jpaim::SolverConfig;
use crate::model::{Realization, ScenarioConfig};
use crate::objective::nu_from_asic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    Jpaim,
    NspJpaim,
    HalfDuplex,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Jpaim, Algorithm::NspJpaim, Algorithm::HalfDuplex];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Jpaim => "jpaim",
            Algorithm::NspJpaim => "nsp-jpaim",
            Algorithm::HalfDuplex => "half-duplex",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::invalid("algorithms", format!("unknown algorithm `{s}`")))
    }
}

/// Solver settings shared by every realization of a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub threshold: f64,
    pub max_iterations: usize,
    pub bisection_tol: f64,
    pub bisection_max_steps: usize,
    /// Explicit RSI weight; derived from `asic_db` when absent.
    pub nu: Option<f64>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            threshold: 1e-4,
            max_iterations: 100,
            bisection_tol: 1e-8,
            bisection_max_steps: 200,
            nu: None,
        }
    }
}

impl SolverSettings {
    /// Solver configuration for one realization.
    pub fn for_realization(&self, real: &Realization) -> SolverConfig {
        let mut cfg = SolverConfig::for_realization(real);
        cfg.threshold = self.threshold;
        cfg.max_iterations = self.max_iterations;
        cfg.bisection_tol = self.bisection_tol;
        cfg.bisection_max_steps = self.bisection_max_steps;
        if let Some(nu) = self.nu {
            cfg = cfg.with_nu(nu);
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub realizations: usize,
    pub base_seed: u64,
    pub scenario: ScenarioConfig,
    pub algorithms: Vec<Algorithm>,
    pub solver: SolverSettings,
    pub nsp: NspConfig,
    pub out_dir: PathBuf,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    /// Write the per-iteration trace CSV.
    pub trace: bool,
    /// Write measured wall-clock times instead of zeros.
    pub record_timing: bool,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            realizations: 200,
            base_seed: 1,
            scenario: ScenarioConfig::default(),
            algorithms: vec![Algorithm::Jpaim],
            solver: SolverSettings::default(),
            nsp: NspConfig::default(),
            out_dir: PathBuf::from("out"),
            workers: 0,
            trace: true,
            record_timing: false,
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::invalid("realizations", "must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::invalid("algorithms", "must list at least one algorithm"));
        }
        self.scenario.validate()?;
        self.nsp.validate(self.scenario.antennas.bs_tx)?;
        let s = &self.solver;
        if !(s.threshold > 0.0) {
            return Err(Error::invalid("solver.threshold", "must be positive"));
        }
        if !(s.bisection_tol > 0.0 && s.bisection_tol <= 1e-3) {
            return Err(Error::invalid("solver.bisection_tol", "must lie in (0, 1e-3]"));
        }
        if s.bisection_max_steps == 0 {
            return Err(Error::invalid("solver.bisection_max_steps", "must be positive"));
        }
        if let Some(nu) = s.nu {
            if !(nu >= 0.0 && nu.is_finite()) {
                return Err(Error::invalid("solver.nu", "must be finite and non-negative"));
            }
        }
        Ok(())
    }

    /// RSI weight implied by the configured isolation.
    pub fn nu(&self) -> f64 {
        self.solver.nu.unwrap_or_else(|| nu_from_asic(self.scenario.asic_db))
    }

    /// Flat `key = value` form accepted by [`parse_config`].
    pub fn to_toml(&self) -> String {
        let sc = &self.scenario;
        let a = &sc.antennas;
        let s = &self.solver;
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        line("realizations", self.realizations.to_string());
        line("seed", self.base_seed.to_string());
        let algs: Vec<String> = self.algorithms.iter().map(|a| format!("\"{a}\"")).collect();
        line("algorithms", format!("[{}]", algs.join(", ")));
        line("out", toml_string(&self.out_dir.to_string_lossy()));
        line("workers", self.workers.to_string());
        line("trace", self.trace.to_string());
        line("record_timing", self.record_timing.to_string());
        line("cells", sc.cells.to_string());
        line("dl_users", sc.dl_users.to_string());
        line("ul_users", sc.ul_users.to_string());
        line("isd_m", float(sc.isd_m));
        line("min_distance_m", float(sc.min_distance_m));
        line("carrier_ghz", float(sc.carrier_ghz));
        line("bandwidth_hz", float(sc.bandwidth_hz));
        line("noise_density_dbm_hz", float(sc.noise_density_dbm_hz));
        line("noise_figure_bs_db", float(sc.noise_figure_bs_db));
        line("noise_figure_ue_db", float(sc.noise_figure_ue_db));
        line("power_bs_dbm", float(sc.power_bs_dbm));
        line("power_ue_dbm", float(sc.power_ue_dbm));
        line("adc_bits", float(sc.adc_bits));
        line("uncertainty_db", float(sc.uncertainty_db));
        line("rician_k_db", float(sc.rician_k_db));
        line("swap_los_branches", sc.swap_los_branches.to_string());
        line("asic_db", float(sc.asic_db));
        line("antenna.bs_tx", a.bs_tx.to_string());
        line("antenna.bs_rx", a.bs_rx.to_string());
        line("antenna.ue_tx", a.ue_tx.to_string());
        line("antenna.ue_rx", a.ue_rx.to_string());
        line("antenna.dl_streams", a.dl_streams.to_string());
        line("antenna.ul_streams", a.ul_streams.to_string());
        line("solver.threshold", float(s.threshold));
        line("solver.max_iterations", s.max_iterations.to_string());
        line("solver.bisection_tol", float(s.bisection_tol));
        line("solver.bisection_max_steps", s.bisection_max_steps.to_string());
        if let Some(nu) = s.nu {
            line("solver.nu", float(nu));
        }
        line("nsp.dim", self.nsp.dim.to_string());
        out
    }
}

fn float(v: f64) -> String {
    // Debug keeps a decimal point or exponent and round-trips exactly
    format!("{v:?}")
}

fn toml_string(s: &str) -> String {
    Value::String(s.to_string()).to_string()
}

fn flatten(table: Table) -> Result<Vec<(String, Value)>> {
    let mut out = Vec::new();
    for (k, v) in table {
        match v {
            Value::Table(inner) => {
                for (ik, iv) in inner {
                    if iv.is_table() {
                        return Err(Error::invalid(format!("{k}.{ik}"), "nesting deeper than one level"));
                    }
                    out.push((format!("{k}.{ik}"), iv));
                }
            }
            v => out.push((k, v)),
        }
    }
    Ok(out)
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(Error::invalid(key, "expected a number")),
    }
}

fn as_int(key: &str, v: &Value) -> Result<i64> {
    v.as_integer().ok_or_else(|| Error::invalid(key, "expected an integer"))
}

fn as_usize(key: &str, v: &Value) -> Result<usize> {
    usize::try_from(as_int(key, v)?).map_err(|_| Error::invalid(key, "must be non-negative"))
}

fn as_bool(key: &str, v: &Value) -> Result<bool> {
    v.as_bool().ok_or_else(|| Error::invalid(key, "expected true or false"))
}

/// Parses and validates a configuration from text.
pub fn parse_config(text: &str) -> Result<CampaignConfig> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| Error::ConfigParse(e.to_string()))?;
    let mut cfg = CampaignConfig::default();
    for (key, v) in flatten(table)? {
        let k = key.as_str();
        let sc = &mut cfg.scenario;
        let a = &mut sc.antennas;
        match k {
            "realizations" => cfg.realizations = as_usize(k, &v)?,
            "seed" => cfg.base_seed = as_int(k, &v)? as u64,
            "algorithms" => {
                let arr = v.as_array().ok_or_else(|| Error::invalid(k, "expected an array of names"))?;
                cfg.algorithms = arr
                    .iter()
                    .map(|x| x.as_str().ok_or_else(|| Error::invalid(k, "expected strings"))?.parse())
                    .collect::<Result<_>>()?;
            }
            "out" => {
                cfg.out_dir = PathBuf::from(v.as_str().ok_or_else(|| Error::invalid(k, "expected a string"))?)
            }
            "workers" => cfg.workers = as_usize(k, &v)?,
            "trace" => cfg.trace = as_bool(k, &v)?,
            "record_timing" => cfg.record_timing = as_bool(k, &v)?,
            "cells" => sc.cells = as_usize(k, &v)?,
            "dl_users" => sc.dl_users = as_usize(k, &v)?,
            "ul_users" => sc.ul_users = as_usize(k, &v)?,
            "isd_m" => sc.isd_m = as_f64(k, &v)?,
            "min_distance_m" => sc.min_distance_m = as_f64(k, &v)?,
            "carrier_ghz" => sc.carrier_ghz = as_f64(k, &v)?,
            "bandwidth_hz" => sc.bandwidth_hz = as_f64(k, &v)?,
            "noise_density_dbm_hz" => sc.noise_density_dbm_hz = as_f64(k, &v)?,
            "noise_figure_bs_db" => sc.noise_figure_bs_db = as_f64(k, &v)?,
            "noise_figure_ue_db" => sc.noise_figure_ue_db = as_f64(k, &v)?,
            "power_bs_dbm" => sc.power_bs_dbm = as_f64(k, &v)?,
            "power_ue_dbm" => sc.power_ue_dbm = as_f64(k, &v)?,
            "adc_bits" => sc.adc_bits = as_f64(k, &v)?,
            "uncertainty_db" => sc.uncertainty_db = as_f64(k, &v)?,
            "rician_k_db" => sc.rician_k_db = as_f64(k, &v)?,
            "swap_los_branches" => sc.swap_los_branches = as_bool(k, &v)?,
            "asic_db" => sc.asic_db = as_f64(k, &v)?,
            "antenna.bs_tx" => a.bs_tx = as_usize(k, &v)?,
            "antenna.bs_rx" => a.bs_rx = as_usize(k, &v)?,
            "antenna.ue_tx" => a.ue_tx = as_usize(k, &v)?,
            "antenna.ue_rx" => a.ue_rx = as_usize(k, &v)?,
            "antenna.dl_streams" => a.dl_streams = as_usize(k, &v)?,
            "antenna.ul_streams" => a.ul_streams = as_usize(k, &v)?,
            "solver.threshold" => cfg.solver.threshold = as_f64(k, &v)?,
            "solver.max_iterations" => cfg.solver.max_iterations = as_usize(k, &v)?,
            "solver.bisection_tol" => cfg.solver.bisection_tol = as_f64(k, &v)?,
            "solver.bisection_max_steps" => cfg.solver.bisection_max_steps = as_usize(k, &v)?,
            "solver.nu" => cfg.solver.nu = Some(as_f64(k, &v)?),
            "nsp.dim" => cfg.nsp.dim = as_usize(k, &v)?,
            _ => return Err(Error::invalid(k, "unknown key")),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<CampaignConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}
