//! Analysis of STFT coefficient phase distributions.
//!
//! Tones with uniformly distributed phase are mapped nonlinearly onto the
//! phase of distant STFT coefficients, so per-bin (and per-magnitude) phase
//! histograms of tonal audio are far from uniform. This crate provides the
//! STFT plumbing, the closed-form tone-to-coefficient mapping and its phase
//! density, histogram and nonuniformity measures, and phase quantizers that
//! exploit the nonuniformity.

pub mod analytic;
pub mod angle;
pub mod error;
pub mod experiments;
pub mod export;
pub mod quant;
pub mod rng;
pub mod signal;
pub mod stats;
pub mod stft;
pub mod wav;
pub mod window;

pub use analytic::{AnalyticContext, RectDecomposition, TonePhaseMap, ToneSide};
pub use angle::{principal_angle_2pi, principal_angle_pi};
pub use error::{Error, Result};
pub use quant::{QuantExperimentReport, ScalarQuantizer};
pub use signal::{CorpusKind, CorpusSpec, ToneParams};
pub use stats::{
    Banding, GrayImage, PerFrequencyHistogramSet, PerMagnitudeHistogramSet, PhaseHistogram,
};
pub use stft::{StftConfig, StftFrameGrid};
pub use wav::AudioBuffer;
pub use window::{WindowMode, WindowSpec};
