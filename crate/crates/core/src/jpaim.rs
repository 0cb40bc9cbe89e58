//! The alternating JPAIM solver.
//!
//! Each pass updates, in order, the MMSE combiners, the precoders (one
//! eigen-decomposition per transmitter, then a scalar bisection on the power
//! multiplier) and the power coefficients (closed form on the uplink, bisection
//! on the downlink). Every block update is the exact minimizer of the penalized
//! loss with the other blocks fixed, so the recorded loss is non-increasing.
//!
//! The precoder step works with the effective transmit matrix `W = alpha V`; the
//! stored precoder is `W / alpha`, or `W` itself for a silenced user.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::covariance::{f1_from_gram, f2, rx_covariance_with, scaled_identity, TxCovariances};
use crate::error::{Error, Result};
use crate::linalg::{complex_gaussian, frob2, hermitian_eigen, real, solve_hpd, trace_re, CMat};
use crate::model::{splitmix64, Realization, Rx, Tx};
use crate::objective::{evaluate, nu_from_asic, si_gram, BeamformingState, UserBeams};

/// Eigenvalues below this fraction of the largest one are treated as exact zeros.
const EIG_REL_FLOOR: f64 = 1e-13;

/// Effective precoders carrying less than this fraction of the budget are zeroed.
const SILENT_REL: f64 = 1e-30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// RSI penalty weight per cell.
    pub nu: Vec<f64>,
    /// Stop once the loss decreases by less than this between passes.
    pub threshold: f64,
    pub max_iterations: usize,
    /// Relative slack accepted between the bisected power and the budget.
    pub bisection_tol: f64,
    pub bisection_max_steps: usize,
    pub init_seed: u64,
}

impl SolverConfig {
    /// Defaults with `nu_g` derived from each cell's SI isolation.
    pub fn for_realization(real: &Realization) -> Self {
        let nu = real
            .hardware
            .si_gain
            .iter()
            .map(|&l| nu_from_asic(-10.0 * l.log10()))
            .collect();
        SolverConfig {
            nu,
            threshold: 1e-4,
            max_iterations: 100,
            bisection_tol: 1e-8,
            bisection_max_steps: 200,
            init_seed: splitmix64(real.seed ^ 0x5EED),
        }
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu.iter_mut().for_each(|n| *n = nu);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0) {
            return Err(Error::invalid("solver.threshold", "must be positive"));
        }
        if !(self.bisection_tol > 0.0 && self.bisection_tol <= 1e-3) {
            return Err(Error::invalid("solver.bisection_tol", "must lie in (0, 1e-3]"));
        }
        if self.bisection_max_steps == 0 {
            return Err(Error::invalid("solver.bisection_max_steps", "must be positive"));
        }
        if self.nu.iter().any(|n| !(*n >= 0.0) || !n.is_finite()) {
            return Err(Error::invalid("solver.nu", "must be finite and non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub loss: f64,
    pub sum_mse: f64,
    pub rsi_w: Vec<f64>,
    pub sum_rate: f64,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    pub state: BeamformingState,
    pub converged: bool,
    pub iterations: usize,
    pub elapsed_ms: f64,
}

impl RunTrace {
    pub fn final_loss(&self) -> f64 {
        self.records.last().map(|r| r.loss).unwrap_or(f64::NAN)
    }
}

/// A downlink or uplink user index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum User {
    Dl(usize),
    Ul(usize),
}

/// Interference-plus-distortion matrices of every transmitter.
#[derive(Debug, Clone)]
pub struct Omegas {
    pub bs: Vec<CMat>,
    pub ul: Vec<CMat>,
}

impl Omegas {
    pub fn get(&self, tx: Tx) -> &CMat {
        match tx {
            Tx::Bs(g) => &self.bs[g],
            Tx::Ul(i) => &self.ul[i],
        }
    }
}

/// `sum U U^H` over the combiners applied at a receiver.
fn combiner_gram(real: &Realization, state: &BeamformingState, rx: Rx) -> CMat {
    match rx {
        Rx::Dl(u) => {
            let c = &state.dl[u].combiner;
            c * c.adjoint()
        }
        Rx::Bs(g) => {
            let m = real.antennas.bs_rx;
            real.ul_users_of(g).fold(CMat::zeros(m, m), |acc, u| {
                let c = &state.ul[u].combiner;
                acc + c * c.adjoint()
            })
        }
    }
}

/// `Omega_tx = sum_r F1(H_{r,tx}^H, U_r) + sum_r s2(r, tx) tr(U_r^H U_r) (1 + kappa) I`.
///
/// The second sum is the gradient of the CSI-error noise floor with respect to
/// the transmit covariance; it vanishes with perfect CSI.
pub fn compute_omegas(real: &Realization, state: &BeamformingState) -> Result<Omegas> {
    state.check(real)?;
    let grams: Vec<(Rx, CMat)> = real
        .receivers()
        .map(|rx| (rx, combiner_gram(real, state, rx)))
        .collect();
    let omega = |tx: Tx| {
        let n = real.tx_antennas(tx);
        let kappa = real.tx_kappa(tx);
        let mut acc = CMat::zeros(n, n);
        let mut csi = 0.0;
        for (rx, p) in &grams {
            let h = real.design_channel(*rx, tx);
            acc += f1_from_gram(&h.adjoint(), p, kappa, real.rx_beta(*rx));
            let s2 = real.link(*rx, tx).err_var;
            if s2 > 0.0 {
                csi += s2 * trace_re(p);
            }
        }
        acc + scaled_identity(n, csi * (1.0 + kappa))
    };
    Ok(Omegas {
        bs: (0..real.cells()).map(|g| omega(Tx::Bs(g))).collect(),
        ul: (0..real.n_ul()).map(|u| omega(Tx::Ul(u))).collect(),
    })
}

/// MMSE combiners `U = c C^{-1} H V` for every user.
pub fn update_combiners(real: &Realization, state: &BeamformingState) -> Result<BeamformingState> {
    state.check(real)?;
    let tc = TxCovariances::new(real, state);
    let mut next = state.clone();
    for u in 0..real.n_dl() {
        let rx = Rx::Dl(u);
        let c = rx_covariance_with(real, &tc, rx);
        let hv = real.design_channel(rx, Tx::Bs(real.dl_cell(u))) * state.dl[u].effective();
        next.dl[u].combiner = solve_hpd(&c, &hv, &format!("downlink user {u}"))?;
    }
    for g in 0..real.cells() {
        let rx = Rx::Bs(g);
        let users: Vec<usize> = real.ul_users_of(g).collect();
        if users.is_empty() {
            continue;
        }
        let c = rx_covariance_with(real, &tc, rx);
        let chol = crate::linalg::cholesky(&c, &format!("base station {g}"))?;
        for u in users {
            let hv = real.design_channel(rx, Tx::Ul(u)) * state.ul[u].effective();
            next.ul[u].combiner = chol.solve(&hv);
        }
    }
    Ok(next)
}

/// Eigen-diagonalized precoder problem for one power constraint.
///
/// With `A = Q D Q^H` and `b_k = H_k^H U_k`, the effective precoder of user `k`
/// is `Q (D + w I)^{-1} Q^H b_k` and its power is `sum_n [G_k]_nn / (d_n + w)^2`.
struct ScalarPowerForm {
    q: CMat,
    d: Vec<f64>,
    /// `Q^H b_k` per user.
    proj: Vec<CMat>,
    /// `[G_k]_nn` summed over the users sharing the constraint.
    g_diag: Vec<f64>,
    active: Vec<bool>,
}

impl ScalarPowerForm {
    fn new(a: &CMat, rhs: Vec<CMat>) -> Self {
        let (d, q) = hermitian_eigen(a);
        let d_max = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let active: Vec<bool> = d.iter().map(|&v| v > EIG_REL_FLOOR * d_max).collect();
        let proj: Vec<CMat> = rhs.iter().map(|b| q.adjoint() * b).collect();
        let mut g_diag = vec![0.0; d.len()];
        for p in &proj {
            for (n, g) in g_diag.iter_mut().enumerate() {
                *g += p.row(n).iter().map(|z| z.norm_sqr()).sum::<f64>();
            }
        }
        ScalarPowerForm {
            q,
            d,
            proj,
            g_diag,
            active,
        }
    }

    fn power(&self, w: f64) -> f64 {
        self.d
            .iter()
            .zip(&self.g_diag)
            .zip(&self.active)
            .filter(|(_, &on)| on)
            .map(|((&d, &g), _)| g / (d + w).powi(2))
            .sum()
    }

    fn precoder(&self, k: usize, w: f64) -> CMat {
        let scale = DMatrix::from_fn(self.d.len(), 1, |n, _| {
            if self.active[n] {
                1.0 / (self.d[n] + w)
            } else {
                0.0
            }
        });
        let mut p = self.proj[k].clone();
        for (n, mut row) in p.row_iter_mut().enumerate() {
            row *= real(scale[(n, 0)]);
        }
        &self.q * p
    }
}

/// Bisection for the smallest multiplier with `power(w) <= budget`.
///
/// `start_hi` seeds the doubling search for a bracketing upper end.
fn bisect_multiplier(
    power: impl Fn(f64) -> f64,
    budget: f64,
    start_hi: f64,
    config: &SolverConfig,
    what: &str,
) -> Result<f64> {
    let p0 = power(0.0);
    if p0 <= budget {
        return Ok(0.0);
    }
    let mut hi = if start_hi.is_finite() && start_hi > 0.0 { start_hi } else { 1.0 };
    let mut doublings = 0;
    while !(power(hi) <= budget) {
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::BisectionBracket(what.to_string()));
        }
    }
    if !(power(hi) < p0) {
        return Err(Error::Numeric(format!("power is not decreasing in the multiplier for {what}")));
    }
    let mut lo = 0.0;
    for _ in 0..config.bisection_max_steps {
        if (budget - power(hi)) <= config.bisection_tol * budget {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if power(mid) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone)]
pub struct PrecoderUpdate {
    pub state: BeamformingState,
    /// Power multiplier of each base-station constraint.
    pub cell_multipliers: Vec<f64>,
    pub ul_multipliers: Vec<f64>,
    /// Scalar-form power at the chosen multiplier, per cell.
    pub cell_scalar_power: Vec<f64>,
    pub ul_scalar_power: Vec<f64>,
}

fn store_effective(beams: &mut UserBeams, mut w: CMat, budget: f64) {
    if frob2(&w) <= SILENT_REL * budget {
        w.fill(real(0.0));
    }
    if beams.coeff > 0.0 {
        beams.precoder = w.unscale(beams.coeff);
    } else {
        beams.precoder = w;
    }
}

/// Precoders minimizing the penalized loss under the power budgets.
pub fn update_precoders(
    real: &Realization,
    state: &BeamformingState,
    config: &SolverConfig,
) -> Result<PrecoderUpdate> {
    let omegas = compute_omegas(real, state)?;
    let hw = &real.hardware;
    let mut next = state.clone();
    let mut cell_multipliers = vec![0.0; real.cells()];
    let mut cell_scalar_power = vec![0.0; real.cells()];
    for g in 0..real.cells() {
        let users: Vec<usize> = real.dl_users_of(g).collect();
        if users.is_empty() {
            continue;
        }
        let a = &omegas.bs[g] + si_gram(real, g).scale(config.nu[g]);
        let rhs = users
            .iter()
            .map(|&u| real.design_channel(Rx::Dl(u), Tx::Bs(g)).adjoint() * &state.dl[u].combiner)
            .collect();
        let form = ScalarPowerForm::new(&a, rhs);
        let w = bisect_multiplier(|w| form.power(w), hw.power_bs, 1.0, config, &format!("cell {g}"))?;
        for (k, &u) in users.iter().enumerate() {
            store_effective(&mut next.dl[u], form.precoder(k, w), hw.power_bs);
        }
        cell_multipliers[g] = w;
        cell_scalar_power[g] = form.power(w);
    }
    let mut ul_multipliers = vec![0.0; real.n_ul()];
    let mut ul_scalar_power = vec![0.0; real.n_ul()];
    for u in 0..real.n_ul() {
        let g = real.ul_cell(u);
        let rhs = vec![real.design_channel(Rx::Bs(g), Tx::Ul(u)).adjoint() * &state.ul[u].combiner];
        let form = ScalarPowerForm::new(&omegas.ul[u], rhs);
        let w = bisect_multiplier(|w| form.power(w), hw.power_ue, 1.0, config, &format!("uplink user {u}"))?;
        store_effective(&mut next.ul[u], form.precoder(0, w), hw.power_ue);
        ul_multipliers[u] = w;
        ul_scalar_power[u] = form.power(w);
    }
    Ok(PrecoderUpdate {
        state: next,
        cell_multipliers,
        ul_multipliers,
        cell_scalar_power,
        ul_scalar_power,
    })
}

/// Quadratic coefficient of the loss in one power coefficient.
///
/// Sums `F2(U_r, H_{r,tx}, V)` over every combiner in the network, adds the
/// CSI-error floor contribution and, for downlink users, the RSI penalty.
pub fn chi(real: &Realization, state: &BeamformingState, user: User, nu: &[f64]) -> f64 {
    let (tx, v) = match user {
        User::Dl(u) => (Tx::Bs(real.dl_cell(u)), &state.dl[u].precoder),
        User::Ul(u) => (Tx::Ul(u), &state.ul[u].precoder),
    };
    let kappa = real.tx_kappa(tx);
    let mut total = 0.0;
    let mut csi = 0.0;
    let mut add = |rx: Rx, comb: &CMat| {
        let h = real.design_channel(rx, tx);
        total += f2(comb, h, v, kappa, real.rx_beta(rx)).unwrap_or(0.0);
        let s2 = real.link(rx, tx).err_var;
        if s2 > 0.0 {
            csi += s2 * frob2(comb);
        }
    };
    for u in 0..real.n_dl() {
        add(Rx::Dl(u), &state.dl[u].combiner);
    }
    for u in 0..real.n_ul() {
        add(Rx::Bs(real.ul_cell(u)), &state.ul[u].combiner);
    }
    total += csi * (1.0 + kappa) * frob2(v);
    if let Tx::Bs(g) = tx {
        total += nu[g] * trace_re(&(v.adjoint() * si_gram(real, g) * v));
    }
    total
}

#[derive(Debug, Clone)]
pub struct PowerUpdate {
    pub state: BeamformingState,
    pub cell_multipliers: Vec<f64>,
    pub ul_multipliers: Vec<f64>,
}

/// `Re tr(U^H H V)` and `tr(V V^H)` of one user.
fn cross_and_norm(real: &Realization, state: &BeamformingState, user: User) -> (f64, f64) {
    let (rx, tx, b) = match user {
        User::Dl(u) => (Rx::Dl(u), Tx::Bs(real.dl_cell(u)), &state.dl[u]),
        User::Ul(u) => (Rx::Bs(real.ul_cell(u)), Tx::Ul(u), &state.ul[u]),
    };
    let h = real.design_channel(rx, tx);
    let cross = trace_re(&(b.combiner.adjoint() * h * &b.precoder));
    (cross, frob2(&b.precoder))
}

fn coefficient(cross: f64, chi: f64, lambda: f64, norm: f64) -> f64 {
    if cross <= 0.0 || norm == 0.0 {
        return 0.0;
    }
    let den = chi + lambda * norm;
    if den <= 0.0 {
        f64::INFINITY
    } else {
        cross / den
    }
}

/// Upper end of the downlink multiplier search from the relaxed quadratic bound.
pub fn lambda_upper_bound(norms: &[f64], chis: &[f64], crosses: &[f64], budget: f64) -> Option<f64> {
    let a: f64 = norms.iter().sum();
    let b: f64 = chis.iter().sum();
    let c: f64 = chis
        .iter()
        .zip(norms)
        .filter(|(_, &n)| n > 0.0)
        .map(|(x, n)| x * x / n)
        .sum::<f64>()
        - crosses.iter().map(|x| x * x).sum::<f64>() / budget;
    let disc = b * b / (a * a) - c / a;
    if a <= 0.0 || disc < 0.0 {
        return None;
    }
    Some(-b / a + disc.sqrt())
}

/// Power coefficients minimizing the penalized loss under the budgets.
pub fn update_power_coefficients(
    real: &Realization,
    state: &BeamformingState,
    config: &SolverConfig,
) -> Result<PowerUpdate> {
    state.check(real)?;
    let hw = &real.hardware;
    let mut next = state.clone();
    let mut cell_multipliers = vec![0.0; real.cells()];
    for g in 0..real.cells() {
        let users: Vec<usize> = real.dl_users_of(g).collect();
        if users.is_empty() {
            continue;
        }
        let mut crosses = Vec::new();
        let mut norms = Vec::new();
        let mut chis = Vec::new();
        for &u in &users {
            let (x, n) = cross_and_norm(real, state, User::Dl(u));
            crosses.push(x.max(0.0));
            norms.push(n);
            chis.push(chi(real, state, User::Dl(u), &config.nu));
        }
        let power = |lambda: f64| -> f64 {
            (0..users.len())
                .map(|k| {
                    let c = coefficient(crosses[k], chis[k], lambda, norms[k]);
                    if c == 0.0 {
                        0.0
                    } else {
                        c * c * norms[k]
                    }
                })
                .sum()
        };
        let start = match lambda_upper_bound(&norms, &chis, &crosses, hw.power_bs) {
            Some(v) if v > 0.0 => v,
            _ => {
                let b: f64 = chis.iter().sum::<f64>() / norms.iter().sum::<f64>();
                if b.is_finite() && -b > 0.0 {
                    -b
                } else {
                    1.0
                }
            }
        };
        let lambda = bisect_multiplier(power, hw.power_bs, start, config, &format!("cell {g} power"))?;
        for (k, &u) in users.iter().enumerate() {
            next.dl[u].coeff = coefficient(crosses[k], chis[k], lambda, norms[k]);
        }
        cell_multipliers[g] = lambda;
    }
    let mut ul_multipliers = vec![0.0; real.n_ul()];
    for u in 0..real.n_ul() {
        let (cross, norm) = cross_and_norm(real, state, User::Ul(u));
        if cross <= 0.0 || norm == 0.0 {
            next.ul[u].coeff = 0.0;
            continue;
        }
        let x = chi(real, state, User::Ul(u), &config.nu);
        let lambda = (-x / norm + cross / (norm * hw.power_ue).sqrt()).max(0.0);
        let mut gamma = coefficient(cross, x, lambda, norm);
        // closed form can land one ulp above the budget
        let p = gamma * gamma * norm;
        if p > hw.power_ue {
            gamma *= (hw.power_ue / p).sqrt();
        }
        next.ul[u].coeff = gamma;
        ul_multipliers[u] = lambda;
    }
    Ok(PowerUpdate {
        state: next,
        cell_multipliers,
        ul_multipliers,
    })
}

fn random_unit_precoder<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    let v = complex_gaussian(rows, cols, 1.0, rng);
    let n = frob2(&v).sqrt();
    v.unscale(n)
}

/// Budget-splitting power coefficients, random unit-norm precoders, zero combiners.
pub fn initialize<R: Rng + ?Sized>(
    real: &Realization,
    _config: &SolverConfig,
    rng: &mut R,
) -> BeamformingState {
    let a = &real.antennas;
    let hw = &real.hardware;
    let dl = (0..real.n_dl())
        .map(|u| {
            let k = real.dl_users_of(real.dl_cell(u)).count();
            UserBeams {
                precoder: random_unit_precoder(a.bs_tx, a.dl_streams, rng),
                combiner: CMat::zeros(a.ue_rx, a.dl_streams),
                coeff: (hw.power_bs / (a.dl_streams * k) as f64).sqrt(),
            }
        })
        .collect();
    let ul = (0..real.n_ul())
        .map(|_| UserBeams {
            precoder: random_unit_precoder(a.ue_tx, a.ul_streams, rng),
            combiner: CMat::zeros(a.bs_rx, a.ul_streams),
            coeff: (hw.power_ue / a.ul_streams as f64).sqrt(),
        })
        .collect();
    BeamformingState { dl, ul }
}

pub fn initial_state(real: &Realization, config: &SolverConfig) -> BeamformingState {
    let mut rng = ChaCha8Rng::seed_from_u64(config.init_seed);
    initialize(real, config, &mut rng)
}

fn record(
    real: &Realization,
    state: &BeamformingState,
    config: &SolverConfig,
    iter: usize,
    start: Instant,
) -> Result<IterationRecord> {
    let rep = evaluate(real, state, &config.nu)?;
    Ok(IterationRecord {
        iter,
        loss: rep.loss,
        sum_mse: rep.sum_mse(),
        rsi_w: rep.rsi_power,
        sum_rate: rep.sum_rate,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// One full pass after the combiners are current: precoders, power, combiners.
pub fn step(real: &Realization, state: &BeamformingState, config: &SolverConfig) -> Result<BeamformingState> {
    let pre = update_precoders(real, state, config)?;
    let pow = update_power_coefficients(real, &pre.state, config)?;
    update_combiners(real, &pow.state)
}

/// Runs the solver from the seeded initial state.
pub fn run(real: &Realization, config: &SolverConfig) -> Result<RunTrace> {
    run_from(real, config, initial_state(real, config))
}

/// Runs the solver from a given state (combiners are recomputed first).
pub fn run_from(real: &Realization, config: &SolverConfig, init: BeamformingState) -> Result<RunTrace> {
    config.validate()?;
    if config.nu.len() != real.cells() {
        return Err(Error::invalid("solver.nu", "needs one weight per cell"));
    }
    let start = Instant::now();
    let mut state = update_combiners(real, &init)?;
    let mut records = vec![record(real, &state, config, 0, start)?];
    let mut converged = false;
    for t in 1..=config.max_iterations {
        state = step(real, &state, config)?;
        let rec = record(real, &state, config, t, start)?;
        let decrease = records[records.len() - 1].loss - rec.loss;
        records.push(rec);
        if decrease < config.threshold {
            converged = true;
            break;
        }
    }
    let iterations = records.len() - 1;
    Ok(RunTrace {
        records,
        state,
        converged,
        iterations,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_scalar_root() {
        let cfg = SolverConfig {
            nu: vec![],
            threshold: 1e-4,
            max_iterations: 10,
            bisection_tol: 1e-10,
            bisection_max_steps: 200,
            init_seed: 0,
        };
        // 4 / (1 + w)^2 = 1  =>  w = 1
        let w = bisect_multiplier(|w| 4.0 / (1.0 + w).powi(2), 1.0, 1e-3, &cfg, "t").unwrap();
        assert!((w - 1.0).abs() < 1e-9);
        assert_eq!(bisect_multiplier(|w| 0.5 / (1.0 + w), 1.0, 1.0, &cfg, "t").unwrap(), 0.0);
        assert!(bisect_multiplier(|_| 2.0, 1.0, 1.0, &cfg, "t").is_err());
    }

    #[test]
    fn upper_bound_is_root_of_quadratic() {
        let (n, x, r, p) = ([2.0], [0.5], [3.0], 1.0);
        let lam = lambda_upper_bound(&n, &x, &r, p).unwrap();
        let (a, b, c) = (2.0, 0.5, 0.25 / 2.0 - 9.0);
        assert!((a * lam * lam + 2.0 * b * lam + c).abs() < 1e-12);
    }

    #[test]
    fn coefficient_clamps() {
        assert_eq!(coefficient(-1.0, 1.0, 0.0, 1.0), 0.0);
        assert_eq!(coefficient(1.0, 1.0, 0.0, 0.0), 0.0);
        assert_eq!(coefficient(1.0, 0.0, 0.0, 1.0), f64::INFINITY);
        assert_eq!(coefficient(2.0, 1.0, 1.0, 1.0), 1.0);
    }
}
