//! Simulation and analysis toolkit for photon pairs generated by spontaneous
//! four-wave mixing in a Doppler-broadened ladder-type atomic vapour.
//!
//! The crate is organised bottom-up:
//!
//! - [`atomic`]: ladder-system parameters, Maxwell-Boltzmann velocity
//!   quadrature and the velocity-dependent two-photon coefficient.
//! - [`waveform`]: uniformly sampled time-domain functions.
//! - [`biphoton`]: the two-photon amplitude and the velocity-averaged
//!   signal-idler correlation, plus width and bandwidth extraction.
//! - [`filter`]: reabsorption/etalon filter, its impulse response, the
//!   detector-plane correlation and beat-frequency estimation.
//! - [`scaling`]: counting-rate model versus optical depth, Beer's-law OD and
//!   the power-law / through-origin polynomial fits.
//! - [`counting`]: seeded Monte Carlo of pair emission and imperfect
//!   single-photon detectors.
//! - [`analysis`]: coincidence histograms and the g², heralding, pair-rate and
//!   Cauchy-Schwarz estimators.
//! - [`io`]: the text formats shared with the command-line tool.

// `!(x > 0.0)` is used on purpose so that NaN fails the check too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod atomic;
pub mod biphoton;
pub mod counting;
mod error;
pub mod filter;
mod fourier;
pub mod io;
pub mod scaling;
pub mod waveform;

pub use error::{Error, Result};

/// Angular frequency (rad/s) from an ordinary frequency (Hz).
pub fn hz_to_angular(f: f64) -> f64 {
    2.0 * std::f64::consts::PI * f
}

/// Ordinary frequency (Hz) from an angular frequency (rad/s).
pub fn angular_to_hz(w: f64) -> f64 {
    w / (2.0 * std::f64::consts::PI)
}
