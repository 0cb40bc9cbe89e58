//! MSE expressions, residual self-interference, ASIC depth, the penalized loss
//! and the sum-rate metric.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::covariance::{rx_covariance_with, TxCovariances};
use crate::error::{Error, Result};
use crate::linalg::{check_dims, diag_part, identity, ln_det_hpd, trace_re, CMat};
use crate::model::{Realization, Rx, Tx};

/// ASIC depth reported when the residual SI vanishes.
pub const ASIC_DEPTH_CAP_DB: f64 = 200.0;

/// Precoder, combiner and power coefficient of one user.
#[derive(Debug, Clone, PartialEq)]
pub struct UserBeams {
    pub precoder: CMat,
    pub combiner: CMat,
    pub coeff: f64,
}

impl UserBeams {
    /// `coeff * precoder`, the matrix that actually multiplies the symbols.
    pub fn effective(&self) -> CMat {
        self.precoder.scale(self.coeff)
    }

    pub fn power(&self) -> f64 {
        self.coeff * self.coeff * self.precoder.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }
}

/// Beamformers of every user; `dl[u]` / `ul[u]` follow the realization's flat
/// user order.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingState {
    pub dl: Vec<UserBeams>,
    pub ul: Vec<UserBeams>,
}

impl BeamformingState {
    pub fn check(&self, real: &Realization) -> Result<()> {
        let a = &real.antennas;
        if self.dl.len() != real.n_dl() || self.ul.len() != real.n_ul() {
            return Err(Error::DimensionMismatch {
                context: "beamforming state user count",
                expected: (real.n_dl(), real.n_ul()),
                got: (self.dl.len(), self.ul.len()),
            });
        }
        for b in &self.dl {
            check_dims("downlink precoder", &b.precoder, a.bs_tx, a.dl_streams)?;
            check_dims("downlink combiner", &b.combiner, a.ue_rx, a.dl_streams)?;
        }
        for b in &self.ul {
            check_dims("uplink precoder", &b.precoder, a.ue_tx, a.ul_streams)?;
            check_dims("uplink combiner", &b.combiner, a.bs_rx, a.ul_streams)?;
        }
        Ok(())
    }

    /// Downlink power `sum_k alpha^2 tr(V V^H)` of cell `g`.
    pub fn cell_power(&self, real: &Realization, g: usize) -> f64 {
        real.dl_users_of(g).map(|u| self.dl[u].power()).sum()
    }

    /// Whether every base-station and uplink power budget holds within `rel_tol`.
    pub fn is_feasible(&self, real: &Realization, rel_tol: f64) -> bool {
        let hw = &real.hardware;
        (0..real.cells()).all(|g| self.cell_power(real, g) <= hw.power_bs * (1.0 + rel_tol))
            && self.ul.iter().all(|b| b.power() <= hw.power_ue * (1.0 + rel_tol))
    }

    pub fn zero_combiners(&mut self) {
        for b in self.dl.iter_mut().chain(self.ul.iter_mut()) {
            b.combiner.fill(num_complex::Complex64::new(0.0, 0.0));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveReport {
    pub sum_mse_dl: f64,
    pub sum_mse_ul: f64,
    pub rsi_power: Vec<f64>,
    pub asic_depth_db: Vec<f64>,
    pub loss: f64,
    pub sum_rate: f64,
    pub dl_rate: f64,
    pub ul_rate: f64,
    /// A rate covariance needed diagonal loading.
    pub rate_regularized: bool,
}

impl ObjectiveReport {
    pub fn sum_mse(&self) -> f64 {
        self.sum_mse_dl + self.sum_mse_ul
    }
}

/// `tr(U^H C U) - 2 c Re tr(U^H H V) + b`.
fn mse_from_parts(c: &CMat, h: &CMat, beams: &UserBeams) -> f64 {
    let u = &beams.combiner;
    let quad = trace_re(&(u.adjoint() * c * u));
    let cross = trace_re(&(u.adjoint() * h * &beams.precoder));
    quad - 2.0 * beams.coeff * cross + u.ncols() as f64
}

pub(crate) fn mse_dl_with(real: &Realization, state: &BeamformingState, c: &CMat, u: usize) -> f64 {
    let h = real.design_channel(Rx::Dl(u), Tx::Bs(real.dl_cell(u)));
    mse_from_parts(c, h, &state.dl[u])
}

pub(crate) fn mse_ul_with(real: &Realization, state: &BeamformingState, c: &CMat, u: usize) -> f64 {
    let g = real.ul_cell(u);
    let h = real.design_channel(Rx::Bs(g), Tx::Ul(u));
    mse_from_parts(c, h, &state.ul[u])
}

/// MSE of downlink user `u`, evaluated analytically.
pub fn mse_downlink(real: &Realization, state: &BeamformingState, u: usize) -> Result<f64> {
    state.check(real)?;
    let tc = TxCovariances::new(real, state);
    let c = rx_covariance_with(real, &tc, Rx::Dl(u));
    Ok(mse_dl_with(real, state, &c, u))
}

/// MSE of uplink user `u` at its serving base station.
pub fn mse_uplink(real: &Realization, state: &BeamformingState, u: usize) -> Result<f64> {
    state.check(real)?;
    let tc = TxCovariances::new(real, state);
    let c = rx_covariance_with(real, &tc, Rx::Bs(real.ul_cell(u)));
    Ok(mse_ul_with(real, state, &c, u))
}

/// Per-user MSEs `(downlink, uplink)` sharing one pass over the covariances.
pub fn all_mses(real: &Realization, state: &BeamformingState) -> (Vec<f64>, Vec<f64>) {
    let tc = TxCovariances::new(real, state);
    let dl = (0..real.n_dl())
        .map(|u| mse_dl_with(real, state, &rx_covariance_with(real, &tc, Rx::Dl(u)), u))
        .collect();
    let bs_cov: Vec<CMat> = (0..real.cells())
        .map(|g| rx_covariance_with(real, &tc, Rx::Bs(g)))
        .collect();
    let ul = (0..real.n_ul())
        .map(|u| mse_ul_with(real, state, &bs_cov[real.ul_cell(u)], u))
        .collect();
    (dl, ul)
}

/// `H_gg^H H_gg + kappa_bs D(H_gg^H H_gg)` with the true SI channel.
pub fn si_gram(real: &Realization, g: usize) -> CMat {
    let h = real.si_channel(g);
    let gram = h.adjoint() * h;
    let d = diag_part(&gram).scale(real.hardware.kappa_bs);
    gram + d
}

/// Received residual SI power at base station `g`.
pub fn rsi_power(real: &Realization, state: &BeamformingState, g: usize) -> f64 {
    let r = si_gram(real, g);
    real.dl_users_of(g)
        .map(|u| {
            let b = &state.dl[u];
            b.coeff * b.coeff * trace_re(&(b.precoder.adjoint() * &r * &b.precoder))
        })
        .sum()
}

/// `10 log10(l_g tr(T_g) / rsi_g)`, capped at [`ASIC_DEPTH_CAP_DB`].
///
/// A silent base station (`tr(T_g) = 0`) emits no SI and also reports the cap.
pub fn asic_depth(real: &Realization, state: &BeamformingState, g: usize) -> f64 {
    let tc = TxCovariances::new(real, state);
    let num = real.hardware.si_gain[g] * trace_re(&tc.bs[g]);
    let rsi = rsi_power(real, state, g);
    asic_depth_from(num, rsi)
}

pub(crate) fn asic_depth_from(num: f64, rsi: f64) -> f64 {
    if num <= 0.0 || rsi < 1e-30 * num {
        return ASIC_DEPTH_CAP_DB;
    }
    (10.0 * (num / rsi).log10()).min(ASIC_DEPTH_CAP_DB)
}

/// Penalized loss `sum MSE_dl + sum MSE_ul + sum_g nu_g rsi_g`.
pub fn loss(real: &Realization, state: &BeamformingState, nu: &[f64]) -> f64 {
    let (dl, ul) = all_mses(real, state);
    let rsi: f64 = (0..real.cells()).map(|g| nu[g] * rsi_power(real, state, g)).sum();
    dl.iter().sum::<f64>() + ul.iter().sum::<f64>() + rsi
}

pub fn nu_from_asic(l_db: f64) -> f64 {
    10f64.powf(-l_db / 5.0)
}

/// Per-user achievable rates with interference, distortion and CSI error
/// treated as Gaussian noise.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub dl: Vec<f64>,
    pub ul: Vec<f64>,
    pub regularized: bool,
}

impl RateReport {
    pub fn dl_sum(&self) -> f64 {
        self.dl.iter().sum()
    }

    pub fn ul_sum(&self) -> f64 {
        self.ul.iter().sum()
    }

    pub fn total(&self) -> f64 {
        self.dl_sum() + self.ul_sum()
    }
}

/// `log2 det(I + S Q^-1)` as `log2 det(C) - log2 det(Q)` with `Q = C - S`.
fn link_rate(c: &CMat, desired: &CMat, regularized: &mut bool) -> Result<f64> {
    let q = c - desired;
    let ln_q = match ln_det_hpd(&q, "interference covariance") {
        Ok(v) => v,
        Err(_) => {
            *regularized = true;
            let load = 1e-15 * trace_re(&q).abs().max(f64::MIN_POSITIVE);
            let q = q + identity(c.nrows()).scale(load);
            ln_det_hpd(&q, "interference covariance")?
        }
    };
    let ln_c = ln_det_hpd(c, "receive covariance")?;
    Ok(((ln_c - ln_q) / LN_2).max(0.0))
}

pub fn user_rates(real: &Realization, state: &BeamformingState) -> Result<RateReport> {
    let tc = TxCovariances::new(real, state);
    let mut regularized = false;
    let mut dl = Vec::with_capacity(real.n_dl());
    for u in 0..real.n_dl() {
        let c = rx_covariance_with(real, &tc, Rx::Dl(u));
        let hv = real.design_channel(Rx::Dl(u), Tx::Bs(real.dl_cell(u))) * state.dl[u].effective();
        dl.push(link_rate(&c, &(&hv * hv.adjoint()), &mut regularized)?);
    }
    let bs_cov: Vec<CMat> = (0..real.cells())
        .map(|g| rx_covariance_with(real, &tc, Rx::Bs(g)))
        .collect();
    let mut ul = Vec::with_capacity(real.n_ul());
    for u in 0..real.n_ul() {
        let g = real.ul_cell(u);
        let hv = real.design_channel(Rx::Bs(g), Tx::Ul(u)) * state.ul[u].effective();
        ul.push(link_rate(&bs_cov[g], &(&hv * hv.adjoint()), &mut regularized)?);
    }
    Ok(RateReport { dl, ul, regularized })
}

/// Sum of all downlink and uplink rates in bits/s/Hz.
pub fn sum_rate(real: &Realization, state: &BeamformingState) -> Result<f64> {
    Ok(user_rates(real, state)?.total())
}

/// Everything the harness records about a state.
pub fn evaluate(real: &Realization, state: &BeamformingState, nu: &[f64]) -> Result<ObjectiveReport> {
    state.check(real)?;
    let (dl, ul) = all_mses(real, state);
    let tc = TxCovariances::new(real, state);
    let rsi: Vec<f64> = (0..real.cells()).map(|g| rsi_power(real, state, g)).collect();
    let depth = (0..real.cells())
        .map(|g| asic_depth_from(real.hardware.si_gain[g] * trace_re(&tc.bs[g]), rsi[g]))
        .collect();
    let rates = user_rates(real, state)?;
    let sum_mse_dl: f64 = dl.iter().sum();
    let sum_mse_ul: f64 = ul.iter().sum();
    let penalty: f64 = rsi.iter().zip(nu).map(|(r, n)| r * n).sum();
    Ok(ObjectiveReport {
        sum_mse_dl,
        sum_mse_ul,
        loss: sum_mse_dl + sum_mse_ul + penalty,
        rsi_power: rsi,
        asic_depth_db: depth,
        sum_rate: rates.total(),
        dl_rate: rates.dl_sum(),
        ul_rate: rates.ul_sum(),
        rate_regularized: rates.regularized,
    })
}
