//! Raised-cosine window family `w_i = (1 - α) - α cos(2πi / N_w)`.
//!
//! `α = 0` is rectangular, `α = 0.46` Hamming and `α = 0.5` Hann. The
//! symmetric variant uses `N_w = N - 1`, the periodic variant `N_w = N`.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

pub const HAMMING_ALPHA: f64 = 0.46;
pub const HANN_ALPHA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WindowMode {
    /// `N_w = N - 1`
    Symmetric,
    /// `N_w = N`; shifted copies sum to a constant at 50% overlap.
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec {
    pub alpha: f64,
    pub mode: WindowMode,
    pub length: usize,
}

impl WindowSpec {
    pub fn new(alpha: f64, mode: WindowMode, length: usize) -> Result<Self> {
        let spec = WindowSpec {
            alpha,
            mode,
            length,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn rectangular(length: usize) -> Result<Self> {
        Self::new(0.0, WindowMode::Periodic, length)
    }

    pub fn hamming(length: usize) -> Result<Self> {
        Self::new(HAMMING_ALPHA, WindowMode::Periodic, length)
    }

    pub fn hann(length: usize) -> Result<Self> {
        Self::new(HANN_ALPHA, WindowMode::Periodic, length)
    }

    pub fn validate(&self) -> Result<()> {
        if self.length < 4 || !self.length.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "window length must be even and at least 4, got {}",
                self.length
            )));
        }
        if !(0.0..=0.5).contains(&self.alpha) {
            return Err(Error::Config(format!(
                "window shape parameter must lie in [0, 0.5], got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// The cosine period `N_w`.
    pub fn period(&self) -> usize {
        match self.mode {
            WindowMode::Symmetric => self.length - 1,
            WindowMode::Periodic => self.length,
        }
    }

    /// `2π / N_w`
    pub fn beta(&self) -> f64 {
        TAU / self.period() as f64
    }

    pub fn value(&self, i: usize) -> f64 {
        (1.0 - self.alpha) - self.alpha * (self.beta() * i as f64).cos()
    }
}

pub fn make_window(spec: &WindowSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    if spec.alpha == 0.0 {
        return Ok(vec![1.0; spec.length]);
    }
    Ok((0..spec.length).map(|i| spec.value(i)).collect())
}

/// Sum of copies of `window` shifted by multiples of `stride`, over one
/// stride period. Returns `None` when `stride` does not divide the length.
pub fn overlap_add_profile(window: &[f64], stride: usize) -> Option<Vec<f64>> {
    if stride == 0 || !window.len().is_multiple_of(stride) {
        return None;
    }
    let mut profile = vec![0.0; stride];
    for (i, w) in window.iter().enumerate() {
        profile[i % stride] += w;
    }
    Some(profile)
}
