//! Comparison schemes: null-space projection of the downlink precoders and a
//! time-split half-duplex reference.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jpaim::{initial_state, run_from, update_combiners, RunTrace, SolverConfig};
use crate::linalg::{check_dims, diag_part, hermitian_eigen, CMat};
use crate::model::Realization;
use crate::objective::{sum_rate, BeamformingState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NspConfig {
    /// Dimension of the retained low-gain subspace.
    pub dim: usize,
}

impl Default for NspConfig {
    fn default() -> Self {
        NspConfig { dim: 8 }
    }
}

impl NspConfig {
    pub fn validate(&self, bs_tx: usize) -> Result<()> {
        if self.dim == 0 || self.dim > bs_tx {
            return Err(Error::invalid(
                "nsp.dim",
                format!("must lie in [1, {bs_tx}], got {}", self.dim),
            ));
        }
        Ok(())
    }
}

/// `H^H H + kappa D(H^H H)` of an SI channel.
pub fn nsp_gram(h_si: &CMat, kappa_bs: f64) -> CMat {
    let g = h_si.adjoint() * h_si;
    let d = diag_part(&g).scale(kappa_bs);
    g + d
}

/// Orthonormal basis of the `dim` weakest SI directions, with their eigenvalues.
pub fn nsp_basis(h_si: &CMat, kappa_bs: f64, dim: usize) -> Result<(CMat, Vec<f64>)> {
    NspConfig { dim }.validate(h_si.ncols())?;
    let (vals, vecs) = hermitian_eigen(&nsp_gram(h_si, kappa_bs));
    Ok((vecs.columns(0, dim).into_owned(), vals))
}

/// `Gamma Gamma^H V` with `Gamma` spanning the `dim` weakest SI directions.
pub fn nsp_project(v: &CMat, h_si: &CMat, kappa_bs: f64, dim: usize) -> Result<CMat> {
    check_dims("nsp_project", v, h_si.ncols(), v.ncols())?;
    let (gamma, _) = nsp_basis(h_si, kappa_bs, dim)?;
    Ok(&gamma * (gamma.adjoint() * v))
}

/// Projects every downlink precoder of `state`, keeps the power coefficients and
/// refreshes the combiners.
pub fn nsp_apply(real: &Realization, state: &BeamformingState, nsp: &NspConfig) -> Result<BeamformingState> {
    nsp.validate(real.antennas.bs_tx)?;
    let mut next = state.clone();
    for g in 0..real.cells() {
        let (gamma, _) = nsp_basis(real.si_channel(g), real.hardware.kappa_bs, nsp.dim)?;
        let proj = &gamma * gamma.adjoint();
        for u in real.dl_users_of(g) {
            next.dl[u].precoder = &proj * &state.dl[u].precoder;
        }
    }
    update_combiners(real, &next)
}

#[derive(Debug, Clone)]
pub struct NspOutcome {
    pub trace: RunTrace,
    pub state: BeamformingState,
}

/// JPAIM followed by null-space projection of the downlink precoders.
pub fn nsp_jpaim(real: &Realization, config: &SolverConfig, nsp: &NspConfig) -> Result<NspOutcome> {
    let trace = run_from(real, config, initial_state(real, config))?;
    let state = nsp_apply(real, &trace.state, nsp)?;
    Ok(NspOutcome { trace, state })
}

#[derive(Debug, Clone)]
pub struct HalfDuplexOutcome {
    pub dl: RunTrace,
    pub ul: RunTrace,
    pub dl_rate: f64,
    pub ul_rate: f64,
    pub sum_rate: f64,
}

/// Equal time split between a downlink-only and an uplink-only phase.
///
/// Each phase keeps its own co-channel interference and drops self-interference
/// and cross-duplex terms. Both phases start from the full-duplex initial state.
pub fn half_duplex_reference(real: &Realization, config: &SolverConfig) -> Result<HalfDuplexOutcome> {
    let init = initial_state(real, config);

    let dl_real = real.restricted(true, false);
    let dl_cfg = config.clone().with_nu(0.0);
    let dl_init = BeamformingState {
        dl: init.dl.clone(),
        ul: Vec::new(),
    };
    let dl = run_from(&dl_real, &dl_cfg, dl_init)?;
    let dl_rate = sum_rate(&dl_real, &dl.state)?;

    let ul_real = real.restricted(false, true);
    let ul_init = BeamformingState {
        dl: Vec::new(),
        ul: init.ul,
    };
    let ul = run_from(&ul_real, config, ul_init)?;
    let ul_rate = sum_rate(&ul_real, &ul.state)?;

    Ok(HalfDuplexOutcome {
        dl,
        ul,
        dl_rate,
        ul_rate,
        sum_rate: 0.5 * (dl_rate + ul_rate),
    })
}
