//! Synthetic FMCW range-Doppler data with calibrated noise-floor
//! randomization for sim-to-real occupancy classification.
//!
//! The crate covers the full loop of a desk-scale sim-to-real study:
//!
//! 1. [`params`] — waveform configuration and derived radar constants.
//! 2. [`scene`] — point-scatterer scenes: static clutter and walking people
//!    with micro-Doppler-bearing limb motion.
//! 3. [`sim`] — dechirped beat-signal data cubes for a clean simulation
//!    domain and a statistically shifted pseudo-real domain.
//! 4. [`rd`] — range-Doppler maps, dB clipping, normalization and viridis
//!    images, mirroring the processing applied to real captures.
//! 5. [`dr`] — the noise-floor clamp with both the uncalibrated random
//!    sampler and the calibrated variant estimated from unlabeled
//!    empty-room frames.
//! 6. [`classifier`] — a small from-scratch convolutional classifier
//!    trained purely on synthetic images.
//! 7. [`eval`] / [`diagnostics`] — confusion matrices, balanced accuracy,
//!    magnitude-histogram and static-energy alignment checks.
//! 8. [`datagen`] / [`dataset`] / [`cli`] — dataset generation, persistence
//!    with manifests, and the batch command-line workflow.
//!
//! Every randomized step takes an explicit seed and is bit-reproducible;
//! see the `examples/` directory for one runnable walkthrough per
//! capability.

pub mod classifier;
pub mod cli;
pub mod datagen;
pub mod dataset;
pub mod diagnostics;
pub mod dr;
pub mod error;
pub mod eval;
pub mod params;
pub mod plot;
pub mod rd;
pub mod scene;
pub mod sim;
pub mod util;

pub use error::{Error, Result};
pub use params::{derive_params, DerivedParams, RadarConfig, SPEED_OF_LIGHT_M_S};
pub use scene::{Domain, Occupancy, Scene};
