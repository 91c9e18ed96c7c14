//! Link-level OTFS simulation.
//!
//! The crate models an OTFS link with ideal transceiver pulses: symbols live
//! on an `N x M` delay-Doppler grid, are spread to the time-frequency grid by
//! the ISFFT, windowed, passed through a doubly-dispersive channel with
//! fractional Doppler, windowed again at the receiver and brought back by the
//! SFFT. On top of that chain it provides
//!
//! - effective-channel analysis for arbitrary TX/RX windows,
//! - Dolph-Chebyshev and MMSE-optimal (mercury/water-filling) window design,
//! - embedded-pilot channel estimation with its analytic interference floor,
//! - MMSE and sum-product detection,
//! - a deterministic Monte Carlo harness and CLI.
//!
//! Every fast path has a dense matrix oracle for small frames.

pub mod channel;
pub mod detection;
pub mod error;
pub mod estimation;
pub mod grid;
pub mod harness;
pub mod transforms;
pub mod windows;

pub use error::{Error, Result};
pub use grid::{Constellation, DdFrame, FrameGrid, Modulation, TfFrame};
pub use transforms::TransformPlan;
