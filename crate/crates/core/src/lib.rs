//! Joint power allocation and interference management (JPAIM) for in-band
//! full-duplex multi-cell multi-user MIMO networks.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: topology, channels, channel uncertainty and hardware parameters.
//! - [`covariance`]: transmit/receive covariances, CSI-error variance and the
//!   `F1`/`F2` helper functions shared by the MSE expressions and the solver.
//! - [`objective`]: per-user MSEs, residual self-interference, ASIC depth,
//!   penalized loss and the Gaussian-treated sum rate.
//! - [`jpaim`]: the alternating solver (combiners, precoders, power coefficients).
//! - [`baselines`]: null-space projection and a half-duplex reference.
//! - [`harness`]: campaign configuration, Monte Carlo runner, CSV output,
//!   summaries and the multiplication-count estimator.

pub mod baselines;
pub mod covariance;
pub mod error;
pub mod harness;
pub mod jpaim;
pub mod linalg;
pub mod model;
pub mod objective;

pub use error::{Error, Result};
pub use linalg::CMat;
