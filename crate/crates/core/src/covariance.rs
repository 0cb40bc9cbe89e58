//! Second-order statistics of transmitted and received signals.
//!
//! Transmit covariances include the transmitter distortion `kappa D(VV^H)`;
//! receive covariances add the receiver distortion `beta D(.)`, thermal noise and
//! the aggregate CSI-error variance seen by the receiver.

use crate::error::Result;
use crate::linalg::{check_dims, diag_part, identity, real, trace_re, CMat};
use crate::model::{Realization, Rx, Tx};
use crate::objective::BeamformingState;

/// `alpha^2 (V V^H + kappa D(V V^H))`.
pub fn tx_covariance_dl(alpha: f64, v: &CMat, kappa: f64) -> CMat {
    let vv = v * v.adjoint();
    let d = diag_part(&vv);
    (vv + d.scale(kappa)).scale(alpha * alpha)
}

/// Uplink counterpart of [`tx_covariance_dl`] with coefficient `gamma`.
pub fn tx_covariance_ul(gamma: f64, v: &CMat, kappa: f64) -> CMat {
    tx_covariance_dl(gamma, v, kappa)
}

/// Transmit covariance of every transmitter for a given state.
#[derive(Debug, Clone)]
pub struct TxCovariances {
    pub bs: Vec<CMat>,
    pub ul: Vec<CMat>,
}

impl TxCovariances {
    pub fn new(real: &Realization, state: &BeamformingState) -> Self {
        let n = real.antennas.bs_tx;
        let bs = (0..real.cells())
            .map(|g| {
                real.dl_users_of(g).fold(CMat::zeros(n, n), |acc, u| {
                    let b = &state.dl[u];
                    acc + tx_covariance_dl(b.coeff, &b.precoder, real.hardware.kappa_bs)
                })
            })
            .collect();
        let ul = state
            .ul
            .iter()
            .map(|b| tx_covariance_ul(b.coeff, &b.precoder, real.hardware.kappa_ue))
            .collect();
        TxCovariances { bs, ul }
    }

    pub fn get(&self, tx: Tx) -> &CMat {
        match tx {
            Tx::Bs(g) => &self.bs[g],
            Tx::Ul(i) => &self.ul[i],
        }
    }
}

/// `sum_tx H T H^H` over every transmitter, using the design channels.
pub fn received_signal_covariance(real: &Realization, tx_cov: &TxCovariances, rx: Rx) -> CMat {
    let m = real.rx_antennas(rx);
    real.transmitters().fold(CMat::zeros(m, m), |acc, tx| {
        let h = real.design_channel(rx, tx);
        acc + h * tx_cov.get(tx) * h.adjoint()
    })
}

/// Aggregate CSI-error variance `sum_tx s2(rx, tx) tr(T_tx)` at a receiver.
///
/// SI links carry zero error variance so they drop out of the sum.
pub fn csi_error_variance_with(real: &Realization, tx_cov: &TxCovariances, rx: Rx) -> f64 {
    real.transmitters()
        .map(|tx| {
            let s2 = real.link(rx, tx).err_var;
            if s2 == 0.0 {
                0.0
            } else {
                s2 * trace_re(tx_cov.get(tx))
            }
        })
        .sum()
}

pub fn csi_error_variance(real: &Realization, state: &BeamformingState, rx: Rx) -> f64 {
    csi_error_variance_with(real, &TxCovariances::new(real, state), rx)
}

/// `S + beta D(S) + (noise + csi) I`.
pub fn rx_covariance_with(real: &Realization, tx_cov: &TxCovariances, rx: Rx) -> CMat {
    let s = received_signal_covariance(real, tx_cov, rx);
    let floor = real.rx_noise(rx) + csi_error_variance_with(real, tx_cov, rx);
    let m = s.nrows();
    let d = diag_part(&s).scale(real.rx_beta(rx));
    s + d + identity(m).scale(floor)
}

/// Receive covariance at downlink user `u`.
pub fn rx_covariance_dl(real: &Realization, state: &BeamformingState, u: usize) -> Result<CMat> {
    state.check(real)?;
    Ok(rx_covariance_with(real, &TxCovariances::new(real, state), Rx::Dl(u)))
}

/// Receive covariance at base station `g`.
pub fn rx_covariance_ul(real: &Realization, state: &BeamformingState, g: usize) -> Result<CMat> {
    state.check(real)?;
    Ok(rx_covariance_with(real, &TxCovariances::new(real, state), Rx::Bs(g)))
}

/// `B + st D(B)` with `B = Y (X X^H + sr D(X X^H)) Y^H`.
///
/// Expanded, this is `Y X X^H Y^H + st D(Y X X^H Y^H) + sr Y D(X X^H) Y^H
/// + st sr D(Y D(X X^H) Y^H)`. `st` and `sr` are the transmitter and receiver
/// distortion factors.
pub fn f1(y: &CMat, x: &CMat, st: f64, sr: f64) -> Result<CMat> {
    check_dims("f1", x, y.ncols(), x.ncols())?;
    Ok(f1_from_gram(y, &(x * x.adjoint()), st, sr))
}

/// [`f1`] with the Gram matrix `X X^H` supplied directly.
pub fn f1_from_gram(y: &CMat, gram: &CMat, st: f64, sr: f64) -> CMat {
    let inner = gram + diag_part(gram).scale(sr);
    let b = y * inner * y.adjoint();
    let d = diag_part(&b).scale(st);
    b + d
}

/// `tr(Z^H Y M Y^H Z + sr Z^H D(Y M Y^H) Z)` with `M = X X^H + st D(X X^H)`.
pub fn f2(z: &CMat, y: &CMat, x: &CMat, st: f64, sr: f64) -> Result<f64> {
    check_dims("f2 (x)", x, y.ncols(), x.ncols())?;
    check_dims("f2 (z)", z, y.nrows(), z.ncols())?;
    let xx = x * x.adjoint();
    let m = &xx + diag_part(&xx).scale(st);
    let ymy = y * m * y.adjoint();
    let inner = &ymy + diag_part(&ymy).scale(sr);
    Ok(trace_re(&(z.adjoint() * inner * z)))
}

pub(crate) fn scaled_identity(n: usize, s: f64) -> CMat {
    CMat::from_diagonal_element(n, n, real(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complex_gaussian, frob2, hermitian_eigen, rel_diff};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn tx_covariance_cases() {
        let t = tx_covariance_dl(1.0, &identity(3), 0.0);
        assert_eq!(t, identity(3));

        let v = CMat::from_element(1, 1, c(2.0));
        let t = tx_covariance_dl(0.5, &v, 0.01);
        assert!((t[(0, 0)].re - 1.01).abs() < 1e-15);

        let v = CMat::from_element(2, 1, c(1.0));
        let t = tx_covariance_ul(1.0, &v, 0.0);
        assert_eq!(t, CMat::from_element(2, 2, c(1.0)));

        assert!(frob2(&tx_covariance_ul(0.0, &v, 0.3)) == 0.0);
    }

    #[test]
    fn tx_covariance_trace_hermitian_and_quadratic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = complex_gaussian(4, 2, 1.0, &mut rng);
        let (a, k) = (0.7, 0.03);
        let t = tx_covariance_dl(a, &v, k);
        assert!((trace_re(&t) - a * a * (1.0 + k) * frob2(&v)).abs() < 1e-12);
        assert!(frob2(&(&t - t.adjoint())).sqrt() <= 1e-14 * trace_re(&t));
        let t2 = tx_covariance_dl(2.0 * a, &v, k);
        assert!(rel_diff(&t2, &t.scale(4.0)) < 1e-15);
    }

    #[test]
    fn f1_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let y = complex_gaussian(3, 4, 1.0, &mut rng);
        let x = complex_gaussian(4, 2, 1.0, &mut rng);
        let plain = &y * &x * x.adjoint() * y.adjoint();
        assert!(rel_diff(&f1(&y, &x, 0.0, 0.0).unwrap(), &plain) < 1e-14);

        let (st, sr) = (0.1, 0.2);
        let xx = &x * x.adjoint();
        let want = &xx + diag_part(&xx).scale(st + sr + st * sr);
        assert!(rel_diff(&f1(&identity(4), &x, st, sr).unwrap(), &want) < 1e-14);

        let out = f1(&y, &x, st, sr).unwrap();
        let (vals, _) = hermitian_eigen(&out);
        assert!(vals[0] >= -1e-12 * trace_re(&out));
        assert!(f1(&y, &complex_gaussian(3, 2, 1.0, &mut rng), 0.0, 0.0).is_err());
    }

    #[test]
    fn f2_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let z = complex_gaussian(3, 2, 1.0, &mut rng);
        let y = complex_gaussian(3, 4, 1.0, &mut rng);
        let x = complex_gaussian(4, 2, 1.0, &mut rng);
        let gram = x.adjoint() * y.adjoint() * &z;
        assert!((f2(&z, &y, &x, 0.0, 0.0).unwrap() - frob2(&gram)).abs() < 1e-12 * frob2(&gram));

        let (zs, ys, xs, st, sr) = (0.7, -1.3, 2.1, 0.05, 0.02);
        let one = |s: f64| CMat::from_element(1, 1, c(s));
        let got = f2(&one(zs), &one(ys), &one(xs), st, sr).unwrap();
        let want = (zs * ys * xs).powi(2) * (1.0 + st) * (1.0 + sr);
        assert!((got - want).abs() < 1e-12);

        for _ in 0..1000 {
            let z = complex_gaussian(3, 2, 1.0, &mut rng);
            let y = complex_gaussian(3, 4, 1.0, &mut rng);
            let x = complex_gaussian(4, 2, 1.0, &mut rng);
            assert!(f2(&z, &y, &x, 0.01, 0.03).unwrap() >= 0.0);
        }
    }

    #[test]
    fn f2_matches_f1_trace_form() {
        // f2(Z, Y, X) = tr(X^H F1(Y^H, Z) X) for matched distortion factors
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let z = complex_gaussian(3, 2, 1.0, &mut rng);
            let y = complex_gaussian(3, 5, 1.0, &mut rng);
            let x = complex_gaussian(5, 2, 1.0, &mut rng);
            let (st, sr) = (0.04, 0.07);
            let a = f2(&z, &y, &x, st, sr).unwrap();
            let om = f1(&y.adjoint(), &z, st, sr).unwrap();
            let b = trace_re(&(x.adjoint() * om * &x));
            assert!((a - b).abs() <= 1e-10 * a.abs());
        }
    }
}
