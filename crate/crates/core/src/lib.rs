//! Multi-target visual tracking with per-target SIR particle filters.
//!
//! Each target is followed by its own particle filter whose particles are
//! weighted by a grayscale intensity term plus a squared kernel-weighted
//! color-histogram term. Every few frames the targets are re-detected by
//! background subtraction, matched to tracks by global nearest neighbor
//! assignment, and a track's appearance model is replaced when the
//! Bhattacharyya distance between the fresh and stored histograms exceeds a
//! threshold. Disabling that pass yields a plain SIR filter with a static
//! appearance model, which is the comparison baseline.
//!
//! The [`synth`] module renders scenes with exact ground truth and
//! [`metrics`] scores trajectories against it.

pub mod association;
pub mod cli;
pub mod config;
pub mod detection;
pub mod error;
pub mod filter;
pub mod histogram;
pub mod imaging;
pub mod likelihood;
pub mod metrics;
pub mod output;
pub mod synth;
pub mod tracker;

pub use error::{Error, Result};
