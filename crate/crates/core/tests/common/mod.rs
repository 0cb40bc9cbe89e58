#![allow(dead_code)]

use jpaim::linalg::{complex_gaussian, diag_part, CMat};
use jpaim::model::{build_realization, AntennaConfig, Realization, Rx, ScenarioConfig, Tx};
use jpaim::objective::{BeamformingState, UserBeams};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Two cells, one user per direction and cell, 4-antenna base stations.
pub fn small_config() -> ScenarioConfig {
    ScenarioConfig {
        cells: 2,
        dl_users: 1,
        ul_users: 1,
        asic_db: 30.0,
        uncertainty_db: -20.0,
        antennas: AntennaConfig {
            bs_tx: 4,
            bs_rx: 4,
            ue_tx: 2,
            ue_rx: 2,
            dl_streams: 2,
            ul_streams: 2,
        },
        ..ScenarioConfig::default()
    }
}

pub fn small_realization(seed: u64) -> Realization {
    build_realization(&small_config(), seed).unwrap()
}

/// Precoders, combiners and coefficients drawn at random on the natural scales
/// of the realization.
pub fn random_state<R: Rng>(real: &Realization, rng: &mut R) -> BeamformingState {
    let a = &real.antennas;
    let hw = &real.hardware;
    let comb_scale = |rx: Rx, tx: Tx| {
        let h = real.design_channel(rx, tx);
        let g = h.iter().map(|z| z.norm_sqr()).sum::<f64>() / (h.nrows() * h.ncols()) as f64;
        1.0 / g.sqrt()
    };
    let dl = (0..real.n_dl())
        .map(|u| {
            let s = comb_scale(Rx::Dl(u), Tx::Bs(real.dl_cell(u)));
            UserBeams {
                precoder: complex_gaussian(a.bs_tx, a.dl_streams, 0.5, rng),
                combiner: complex_gaussian(a.ue_rx, a.dl_streams, 1e-2 * s * s, rng),
                coeff: hw.power_bs.sqrt() * rng.random_range(0.1..0.5),
            }
        })
        .collect();
    let ul = (0..real.n_ul())
        .map(|u| {
            let s = comb_scale(Rx::Bs(real.ul_cell(u)), Tx::Ul(u));
            UserBeams {
                precoder: complex_gaussian(a.ue_tx, a.ul_streams, 0.5, rng),
                combiner: complex_gaussian(a.bs_rx, a.ul_streams, 1e-2 * s * s, rng),
                coeff: hw.power_ue.sqrt() * rng.random_range(0.1..0.5),
            }
        })
        .collect();
    BeamformingState { dl, ul }
}

/// Central-difference gradient `df/dRe + i df/dIm` of a real function of a
/// complex matrix.
pub fn fd_gradient(f: impl Fn(&CMat) -> f64, x: &CMat, step: f64) -> CMat {
    let mut g = CMat::zeros(x.nrows(), x.ncols());
    let mut probe = x.clone();
    for i in 0..x.len() {
        let orig = probe[i];
        probe[i] = orig + Complex64::new(step, 0.0);
        let fp = f(&probe);
        probe[i] = orig - Complex64::new(step, 0.0);
        let fm = f(&probe);
        let re = (fp - fm) / (2.0 * step);
        probe[i] = orig + Complex64::new(0.0, step);
        let fp = f(&probe);
        probe[i] = orig - Complex64::new(0.0, step);
        let fm = f(&probe);
        let im = (fp - fm) / (2.0 * step);
        probe[i] = orig;
        g[i] = Complex64::new(re, im);
    }
    g
}

pub fn fd_derivative(f: impl Fn(f64) -> f64, x: f64, step: f64) -> f64 {
    (f(x + step) - f(x - step)) / (2.0 * step)
}

pub fn norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn gaussian_vec<R: Rng>(n: usize, var: &[f64], rng: &mut R) -> CMat {
    let mut v = complex_gaussian(n, 1, 1.0, rng);
    for (i, s) in var.iter().enumerate() {
        v[i] *= s.sqrt();
    }
    v
}

/// Simulates the impaired signal chain symbol by symbol.
///
/// Every draw generates fresh data symbols, transmitter distortion with per-antenna
/// variance `kappa` times the per-antenna transmit power, channel errors around the
/// estimates, receiver distortion with per-antenna variance `beta` times the
/// per-antenna power of an independent replica of the estimated-channel signal,
/// and thermal noise.
pub struct SignalSimulator<'a> {
    pub real: &'a Realization,
    pub state: &'a BeamformingState,
}

pub struct ReceivedDraw {
    pub y: CMat,
    /// Symbols of the downlink users (when the receiver is a user) or of the uplink
    /// users (when it is a base station), in flat user order.
    pub dl_symbols: Vec<CMat>,
    pub ul_symbols: Vec<CMat>,
}

impl<'a> SignalSimulator<'a> {
    fn transmit<R: Rng>(&self, rng: &mut R) -> (Vec<CMat>, Vec<CMat>, Vec<CMat>, Vec<CMat>) {
        let real = self.real;
        let a = &real.antennas;
        let hw = &real.hardware;
        let dl_symbols: Vec<CMat> = (0..real.n_dl())
            .map(|_| complex_gaussian(a.dl_streams, 1, 1.0, rng))
            .collect();
        let ul_symbols: Vec<CMat> = (0..real.n_ul())
            .map(|_| complex_gaussian(a.ul_streams, 1, 1.0, rng))
            .collect();
        let bs_x: Vec<CMat> = (0..real.cells())
            .map(|g| {
                let mut data = CMat::zeros(a.bs_tx, 1);
                let mut per_antenna = vec![0.0; a.bs_tx];
                for u in real.dl_users_of(g) {
                    let b = &self.state.dl[u];
                    let w = b.precoder.scale(b.coeff);
                    data += &w * &dl_symbols[u];
                    for i in 0..a.bs_tx {
                        per_antenna[i] += w.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>();
                    }
                }
                let var: Vec<f64> = per_antenna.iter().map(|p| hw.kappa_bs * p).collect();
                data + gaussian_vec(a.bs_tx, &var, rng)
            })
            .collect();
        let ul_x: Vec<CMat> = (0..real.n_ul())
            .map(|u| {
                let b = &self.state.ul[u];
                let w = b.precoder.scale(b.coeff);
                let var: Vec<f64> = (0..a.ue_tx)
                    .map(|i| hw.kappa_ue * w.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>())
                    .collect();
                &w * &ul_symbols[u] + gaussian_vec(a.ue_tx, &var, rng)
            })
            .collect();
        (dl_symbols, ul_symbols, bs_x, ul_x)
    }

    fn transmitters(&self) -> Vec<Tx> {
        let mut v: Vec<Tx> = (0..self.real.cells()).map(Tx::Bs).collect();
        v.extend((0..self.real.n_ul()).map(Tx::Ul));
        v
    }

    pub fn draw<R: Rng>(&self, rx: Rx, rng: &mut R) -> ReceivedDraw {
        let real = self.real;
        let (dl_symbols, ul_symbols, bs_x, ul_x) = self.transmit(rng);
        // independent replica for the receiver distortion level
        let (_, _, bs_r, ul_r) = self.transmit(rng);
        let m = real.rx_antennas(rx);
        let mut y = CMat::zeros(m, 1);
        let mut replica = CMat::zeros(m, 1);
        for tx in self.transmitters() {
            let link = real.link(rx, tx);
            let is_si = matches!((rx, tx), (Rx::Bs(g), Tx::Bs(j)) if g == j);
            let h_design = if is_si { &link.h } else { &link.h_est };
            let h_draw = if link.err_var > 0.0 {
                h_design + complex_gaussian(h_design.nrows(), h_design.ncols(), link.err_var, rng)
            } else {
                h_design.clone()
            };
            let (x, xr) = match tx {
                Tx::Bs(g) => (&bs_x[g], &bs_r[g]),
                Tx::Ul(i) => (&ul_x[i], &ul_r[i]),
            };
            y += &h_draw * x;
            replica += h_design * xr;
        }
        let beta = real.rx_beta(rx);
        let noise = real.rx_noise(rx);
        for i in 0..m {
            let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            y[i] += replica[i] * Complex64::from_polar(beta.sqrt(), phase);
        }
        y += complex_gaussian(m, 1, noise, rng);
        ReceivedDraw {
            y,
            dl_symbols,
            ul_symbols,
        }
    }

    /// Sample covariance of the received vector and the empirical MSE of every
    /// user decoded at `rx`, from shared draws.
    pub fn receive_stats<R: Rng>(&self, rx: Rx, draws: usize, rng: &mut R) -> (CMat, Vec<(usize, f64)>) {
        let m = self.real.rx_antennas(rx);
        let users: Vec<usize> = match rx {
            Rx::Dl(u) => vec![u],
            Rx::Bs(g) => self.real.ul_users_of(g).collect(),
        };
        let mut cov = CMat::zeros(m, m);
        let mut acc = vec![0.0; users.len()];
        for _ in 0..draws {
            let d = self.draw(rx, rng);
            cov += &d.y * d.y.adjoint();
            for (k, &u) in users.iter().enumerate() {
                let (comb, s) = match rx {
                    Rx::Dl(_) => (&self.state.dl[u].combiner, &d.dl_symbols[u]),
                    Rx::Bs(_) => (&self.state.ul[u].combiner, &d.ul_symbols[u]),
                };
                acc[k] += norm(&(comb.adjoint() * &d.y - s)).powi(2);
            }
        }
        let n = draws as f64;
        (cov.unscale(n), users.into_iter().zip(acc.into_iter().map(|a| a / n)).collect())
    }
}

pub fn hermitian_psd<R: Rng>(n: usize, rng: &mut R) -> CMat {
    let a = complex_gaussian(n, n, 1.0, rng);
    &a * a.adjoint()
}

pub fn diag(m: &CMat) -> CMat {
    diag_part(m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Block {
    Combiners,
    Precoders,
    Coefficients,
}

/// Power-penalized Lagrangian of the loss.
pub fn lagrangian(real: &Realization, state: &BeamformingState, nu: &[f64], cell: &[f64], ul: &[f64]) -> f64 {
    let hw = &real.hardware;
    let mut l = jpaim::objective::loss(real, state, nu);
    for g in 0..real.cells() {
        l += cell[g] * (state.cell_power(real, g) - hw.power_bs);
    }
    for u in 0..real.n_ul() {
        l += ul[u] * (state.ul[u].power() - hw.power_ue);
    }
    l
}

fn fd_step(m: &CMat) -> f64 {
    let rms = norm(m) / (m.len() as f64).sqrt();
    if rms > 0.0 {
        1e-3 * rms
    } else {
        1e-6
    }
}

/// Scale-free size of the Lagrangian gradient with respect to one block:
/// `sqrt(sum_k (|grad_k| |x_k|)^2) / |loss|` over the block's matrices or
/// coefficients, from central finite differences. Coefficients sitting at zero
/// only count a negative derivative.
pub fn stationarity(
    real: &Realization,
    state: &BeamformingState,
    nu: &[f64],
    block: Block,
    cell: &[f64],
    ul: &[f64],
) -> f64 {
    let base = jpaim::objective::loss(real, state, nu).abs();
    let lag = |s: &BeamformingState| lagrangian(real, s, nu, cell, ul);
    let mut acc = 0.0;
    let slots: Vec<(bool, usize)> = (0..real.n_dl())
        .map(|u| (true, u))
        .chain((0..real.n_ul()).map(|u| (false, u)))
        .collect();
    for (is_dl, u) in slots {
        let beams = |s: &BeamformingState| if is_dl { s.dl[u].clone() } else { s.ul[u].clone() };
        let with = |b: UserBeams| {
            let mut s = state.clone();
            if is_dl {
                s.dl[u] = b;
            } else {
                s.ul[u] = b;
            }
            s
        };
        let b0 = beams(state);
        match block {
            Block::Combiners | Block::Precoders => {
                let x = if block == Block::Combiners { &b0.combiner } else { &b0.precoder };
                let g = fd_gradient(
                    |m| {
                        let mut b = b0.clone();
                        if block == Block::Combiners {
                            b.combiner = m.clone();
                        } else {
                            b.precoder = m.clone();
                        }
                        lag(&with(b))
                    },
                    x,
                    fd_step(x),
                );
                acc += (norm(&g) * norm(x)).powi(2);
            }
            Block::Coefficients => {
                let h = if b0.coeff > 0.0 { 1e-3 * b0.coeff } else { 1e-6 };
                let d = fd_derivative(
                    |c| {
                        let mut b = b0.clone();
                        b.coeff = c;
                        lag(&with(b))
                    },
                    b0.coeff,
                    h,
                );
                let x = if b0.coeff > 0.0 { b0.coeff } else { h };
                let viol = if b0.coeff > 0.0 { d } else { d.min(0.0) };
                acc += (viol * x).powi(2);
            }
        }
    }
    acc.sqrt() / base
}

/// Single-cell, downlink-only realization with exact channels and ideal hardware,
/// the downlink channel replaced by `h`.
pub fn ideal_downlink(h: CMat, streams: usize, noise: f64, power: f64) -> Realization {
    let cfg = ScenarioConfig {
        cells: 1,
        dl_users: 1,
        ul_users: 1,
        antennas: AntennaConfig {
            bs_tx: h.ncols(),
            bs_rx: h.ncols(),
            ue_tx: h.nrows(),
            ue_rx: h.nrows(),
            dl_streams: streams,
            ul_streams: streams,
        },
        ..ScenarioConfig::default()
    };
    let mut real = build_realization(&cfg, 0).unwrap().restricted(true, false);
    real.channels.dl_from_bs[0][0] = jpaim::model::Link::exact(h);
    let hw = &mut real.hardware;
    hw.kappa_bs = 0.0;
    hw.kappa_ue = 0.0;
    hw.beta_bs = 0.0;
    hw.beta_ue = 0.0;
    hw.noise_ue = noise;
    hw.power_bs = power;
    real
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Scalar downlink link with a real channel `h`, SI channel `h_si`, and the given
/// distortion factors.
pub fn scalar_link(h: f64, h_si: f64, kappa: f64, beta: f64, noise: f64, power: f64) -> Realization {
    let mut real = ideal_downlink(CMat::from_element(1, 1, c(h, 0.0)), 1, noise, power);
    real.channels.bs_from_bs[0][0] = jpaim::model::Link::exact(CMat::from_element(1, 1, c(h_si, 0.0)));
    real.hardware.kappa_bs = kappa;
    real.hardware.beta_ue = beta;
    real
}

pub fn scalar_state(v: f64, u: f64, alpha: f64) -> BeamformingState {
    BeamformingState {
        dl: vec![UserBeams {
            precoder: CMat::from_element(1, 1, c(v, 0.0)),
            combiner: CMat::from_element(1, 1, c(u, 0.0)),
            coeff: alpha,
        }],
        ul: Vec::new(),
    }
}
