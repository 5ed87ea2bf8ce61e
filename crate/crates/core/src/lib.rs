//! Distortion-based encryption for the states of linear dynamical systems.
//!
//! A transmitter and a legitimate receiver share a handful of key bits. The
//! codecs in this crate let the receiver decode every state exactly while an
//! eavesdropper who knows the system, the priors and the scheme (but not the
//! key) is left with a large mean-square estimation error.
//!
//! * [`dynamics`] linear systems, stacked trajectory matrices, LQR inputs.
//! * [`distributions`] priors over trajectories as seen by the eavesdropper.
//! * [`mirroring`] the one-bit affine mirroring codec and its average distortion.
//! * [`worstcase`] the shift+mirror codec family and worst-case distortion.
//! * [`harness`] scheme evaluation, reports and the end-to-end scenarios.
//!
//! Data-parallel loops (Monte Carlo draws, grid scans, corpus generation) run
//! on rayon when the `parallel` feature is enabled and sequentially otherwise.
//! Results do not depend on the number of worker threads.
// `!(x > 0.0)` style checks are deliberate: NaN has to fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod distributions;
pub mod dynamics;
mod error;
pub mod harness;
pub mod matrix;
pub mod mirroring;
pub mod optim;
pub mod parallel;
pub mod stats;
pub mod worstcase;

pub use error::{Error, Result};

pub use nalgebra::{DMatrix, DVector};
