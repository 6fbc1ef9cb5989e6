//! Forward STFT, overlap-add inverse and single-bin phase perturbation.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::angle;
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::window::{make_window, overlap_add_profile, WindowSpec};

/// Coefficients with both parts below `NEAR_ZERO_SCALE * N` have no
/// meaningful phase.
pub const NEAR_ZERO_SCALE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StftConfig {
    pub window: WindowSpec,
    pub stride: usize,
}

impl StftConfig {
    /// Half-overlap framing.
    pub fn new(window: WindowSpec) -> Self {
        StftConfig {
            stride: window.length / 2,
            window,
        }
    }

    pub fn with_stride(window: WindowSpec, stride: usize) -> Result<Self> {
        let cfg = StftConfig { window, stride };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn len(&self) -> usize {
        self.window.length
    }

    pub fn is_empty(&self) -> bool {
        self.window.length == 0
    }

    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        if self.stride == 0 || self.stride > self.window.length {
            return Err(Error::Config(format!(
                "stride must lie in 1..={}, got {}",
                self.window.length, self.stride
            )));
        }
        Ok(())
    }

    /// Number of complete frames in a signal of `len` samples.
    pub fn frame_count(&self, len: usize) -> usize {
        if len < self.window.length {
            0
        } else {
            (len - self.window.length) / self.stride + 1
        }
    }
}

/// Phase of `z` for an `n`-point transform, or `None` when `z` is too close
/// to zero for its phase to carry information.
pub fn coefficient_phase(z: Complex64, n: usize) -> Option<f64> {
    let eps = NEAR_ZERO_SCALE * n as f64;
    if z.re.abs() < eps && z.im.abs() < eps {
        None
    } else {
        Some(angle::phase(z.re, z.im))
    }
}

/// STFT coefficients stored frame-major, `N` bins per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct StftFrameGrid {
    coefficients: Vec<Complex64>,
    frames: usize,
    config: StftConfig,
}

impl StftFrameGrid {
    pub fn from_coefficients(coefficients: Vec<Complex64>, config: StftConfig) -> Result<Self> {
        config.validate()?;
        let n = config.len();
        if !coefficients.len().is_multiple_of(n) {
            return Err(Error::Config(format!(
                "{} coefficients do not form whole frames of {n}",
                coefficients.len()
            )));
        }
        Ok(StftFrameGrid {
            frames: coefficients.len() / n,
            coefficients,
            config,
        })
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    /// Transform length `N`.
    pub fn len(&self) -> usize {
        self.config.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames == 0
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn frame(&self, t: usize) -> &[Complex64] {
        let n = self.len();
        &self.coefficients[t * n..(t + 1) * n]
    }

    pub fn iter_frames(&self) -> impl Iterator<Item = &[Complex64]> {
        self.coefficients.chunks_exact(self.len())
    }

    pub fn get(&self, t: usize, k: usize) -> Complex64 {
        self.coefficients[t * self.len() + k]
    }

    pub fn magnitude(&self, t: usize, k: usize) -> f64 {
        self.get(t, k).norm()
    }

    /// Phase in `[-π, π)`; near-zero coefficients report `0`.
    pub fn phase(&self, t: usize, k: usize) -> f64 {
        coefficient_phase(self.get(t, k), self.len()).unwrap_or(0.0)
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Bins `1..N/2` carry the unique phases of a real signal.
    pub fn unique_bins(&self) -> std::ops::Range<usize> {
        1..self.len() / 2
    }

    /// Concatenates the frames of `other` after those of `self`.
    pub fn concat(&self, other: &StftFrameGrid) -> Result<StftFrameGrid> {
        if self.config != other.config {
            return Err(Error::Config(
                "grids use different STFT configurations".into(),
            ));
        }
        let mut coefficients = self.coefficients.clone();
        coefficients.extend_from_slice(&other.coefficients);
        Ok(StftFrameGrid {
            frames: self.frames + other.frames,
            coefficients,
            config: self.config,
        })
    }
}

/// Windowed DFT of single frames; shareable across threads.
#[derive(Clone)]
pub struct FrameTransform {
    window: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FrameTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FrameTransform")
            .field("len", &self.window.len())
            .finish()
    }
}

impl FrameTransform {
    pub fn new(window: &WindowSpec) -> Result<Self> {
        let window = make_window(window)?;
        let fft = FftPlanner::new().plan_fft_forward(window.len());
        Ok(FrameTransform { window, fft })
    }

    pub fn len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }

    /// Transforms the first `N` samples of `samples` into `out`.
    pub fn transform_into(&self, samples: &[f64], out: &mut [Complex64]) {
        for ((o, w), x) in out.iter_mut().zip(&self.window).zip(samples) {
            *o = Complex64::new(w * x, 0.0);
        }
        self.fft.process(out);
    }

    pub fn transform(&self, samples: &[f64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); self.len()];
        self.transform_into(samples, &mut out);
        out
    }
}

struct Plan(FrameTransform);

impl Plan {
    fn new(config: &StftConfig) -> Result<Self> {
        config.validate()?;
        Ok(Plan(FrameTransform::new(&config.window)?))
    }

    fn frame(&self, signal: &[f64], start: usize, out: &mut [Complex64]) {
        self.0.transform_into(&signal[start..], out);
    }
}

fn check_length(signal: &[f64], config: &StftConfig) -> Result<usize> {
    let frames = config.frame_count(signal.len());
    if frames == 0 {
        return Err(Error::EmptyGrid {
            len: signal.len(),
            frame: config.len(),
        });
    }
    Ok(frames)
}

/// Frame-parallel STFT; identical output to [`stft_sequential`].
/// A trailing partial frame is dropped.
pub fn stft(signal: &[f64], config: &StftConfig) -> Result<StftFrameGrid> {
    let plan = Plan::new(config)?;
    let frames = check_length(signal, config)?;
    let n = config.len();
    let mut coefficients = vec![Complex64::default(); frames * n];
    coefficients
        .par_chunks_exact_mut(n)
        .enumerate()
        .for_each(|(t, out)| plan.frame(signal, t * config.stride, out));
    Ok(StftFrameGrid {
        coefficients,
        frames,
        config: *config,
    })
}

pub fn stft_sequential(signal: &[f64], config: &StftConfig) -> Result<StftFrameGrid> {
    let plan = Plan::new(config)?;
    let frames = check_length(signal, config)?;
    let n = config.len();
    let mut coefficients = vec![Complex64::default(); frames * n];
    for (t, out) in coefficients.chunks_exact_mut(n).enumerate() {
        plan.frame(signal, t * config.stride, out);
    }
    Ok(StftFrameGrid {
        coefficients,
        frames,
        config: *config,
    })
}

/// STFT of independent frames, each exactly one window long.
pub fn stft_frames(frames: &[Vec<f64>], window: WindowSpec) -> Result<StftFrameGrid> {
    let n = window.length;
    let mut signal = Vec::with_capacity(frames.len() * n);
    for f in frames {
        if f.len() != n {
            return Err(Error::Config(format!(
                "frame of {} samples, expected {n}",
                f.len()
            )));
        }
        signal.extend_from_slice(f);
    }
    stft(&signal, &StftConfig::with_stride(window, n)?)
}

/// The constant that shifted analysis windows sum to, if they do.
pub fn ola_constant(config: &StftConfig) -> Result<f64> {
    let window = make_window(&config.window)?;
    let profile = overlap_add_profile(&window, config.stride).ok_or_else(|| {
        Error::ReconstructionUnsupported(format!(
            "stride {} does not divide the window length {}",
            config.stride,
            config.len()
        ))
    })?;
    let lo = profile.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = profile.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi <= 0.0 || hi - lo > 1e-12 * hi.max(1.0) {
        return Err(Error::ReconstructionUnsupported(format!(
            "shifted windows do not sum to a constant (range {lo}..{hi})"
        )));
    }
    Ok(0.5 * (lo + hi))
}

/// Overlap-add inverse of [`stft`]. Samples within one window of either end
/// lack full overlap and are not exact.
pub fn istft_ola(grid: &StftFrameGrid) -> Result<Vec<f64>> {
    let config = grid.config();
    if grid.frames() < 2 {
        return Err(Error::ReconstructionUnsupported(
            "at least two overlapping frames are required".into(),
        ));
    }
    let gain = ola_constant(config)?;
    let n = config.len();
    let ifft = FftPlanner::new().plan_fft_inverse(n);
    let frames: Vec<Vec<f64>> = grid
        .iter_frames()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|frame| {
            let mut buf = frame.to_vec();
            ifft.process(&mut buf);
            buf.iter().map(|z| z.re / n as f64).collect()
        })
        .collect();
    let mut out = vec![0.0; (grid.frames() - 1) * config.stride + n];
    for (t, frame) in frames.iter().enumerate() {
        for (o, v) in out[t * config.stride..].iter_mut().zip(frame) {
            *o += v;
        }
    }
    out.iter_mut().for_each(|v| *v /= gain);
    Ok(out)
}

/// Adds independent uniform phase noise in `[-halfwidth, halfwidth]` to bin
/// `bin` of every frame, mirroring the change into bin `N - bin`.
pub fn perturb_phase(
    grid: &StftFrameGrid,
    bin: usize,
    halfwidth: f64,
    seed: u64,
) -> Result<StftFrameGrid> {
    let n = grid.len();
    if !grid.unique_bins().contains(&bin) {
        return Err(Error::BinOutOfRange {
            bin,
            max: n / 2 - 1,
        });
    }
    let mut out = grid.clone();
    let mut rng = Stream::new(seed, 0);
    for t in 0..grid.frames() {
        let u = rng.uniform_closed(-halfwidth, halfwidth);
        let z = grid.get(t, bin) * Complex64::from_polar(1.0, u);
        out.coefficients[t * n + bin] = z;
        out.coefficients[t * n + n - bin] = z.conj();
    }
    Ok(out)
}

/// Frequency of bin `k` in Hz.
pub fn bin_frequency_hz(k: usize, n: usize, sample_rate: f64) -> f64 {
    k as f64 * sample_rate / n as f64
}

/// Bin frequency `ω_k = 2πk/N` in radians per sample.
pub fn bin_omega(k: usize, n: usize) -> f64 {
    2.0 * PI * k as f64 / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;
    use crate::window::WindowMode;
    use std::f64::consts::TAU;

    fn direct_dft(x: &[f64], w: &[f64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|i| {
                        let a = -TAU * ((k * i) % n) as f64 / n as f64;
                        Complex64::from_polar(w[i] * x[i], a)
                    })
                    .sum()
            })
            .collect()
    }

    fn random_signal(len: usize, seed: u64) -> Vec<f64> {
        let mut s = Stream::new(seed, 0);
        (0..len).map(|_| s.uniform(-1.0, 1.0)).collect()
    }

    fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
            / scale
    }

    #[test]
    fn on_bin_cosine_rectangular() {
        let n = 16;
        let x: Vec<f64> = (0..n)
            .map(|i| (TAU * 3.0 * i as f64 / n as f64).cos())
            .collect();
        let grid = stft(&x, &StftConfig::new(WindowSpec::rectangular(n).unwrap())).unwrap();
        assert_eq!(grid.frames(), 1);
        for k in 0..=8 {
            let z = grid.get(0, k);
            if k == 3 {
                assert!((z - Complex64::new(8.0, 0.0)).norm() < 1e-12);
            } else {
                assert!(z.norm() < 1e-12, "bin {k}: {z}");
            }
        }
    }

    #[test]
    fn zero_signal_gives_zero_grid() {
        let grid = stft(&[0.0; 64], &StftConfig::new(WindowSpec::hann(16).unwrap())).unwrap();
        assert_eq!(grid.frames(), 7);
        assert!(grid.coefficients().iter().all(|z| z.norm() == 0.0));
        assert_eq!(grid.phase(0, 3), 0.0);
    }

    #[test]
    fn short_signal_is_an_error() {
        let err = stft(&[0.0; 15], &StftConfig::new(WindowSpec::hann(16).unwrap())).unwrap_err();
        assert!(matches!(err, Error::EmptyGrid { len: 15, frame: 16 }));
    }

    #[test]
    fn trailing_partial_frame_dropped() {
        let cfg = StftConfig::new(WindowSpec::hann(16).unwrap());
        assert_eq!(stft(&[0.0; 16 + 8 + 7], &cfg).unwrap().frames(), 2);
    }

    #[test]
    fn matches_direct_summation() {
        for (n, alpha, mode) in [
            (8, 0.0, WindowMode::Periodic),
            (16, 0.5, WindowMode::Periodic),
            (64, 0.46, WindowMode::Symmetric),
            (512, 0.46, WindowMode::Periodic),
        ] {
            let spec = WindowSpec::new(alpha, mode, n).unwrap();
            let w = make_window(&spec).unwrap();
            let x = random_signal(n * 3, n as u64);
            let grid = stft(&x, &StftConfig::new(spec)).unwrap();
            for t in 0..grid.frames() {
                let start = t * n / 2;
                let oracle = direct_dft(&x[start..start + n], &w);
                assert!(rel_err(grid.frame(t), &oracle) <= 1e-9, "N={n} t={t}");
            }
        }
    }

    #[test]
    fn conjugate_symmetry() {
        let n = 64;
        let x = random_signal(n * 4, 11);
        let grid = stft(&x, &StftConfig::new(WindowSpec::hamming(n).unwrap())).unwrap();
        for frame in grid.iter_frames() {
            let scale = frame.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(frame[0].im.abs() <= 1e-9 * scale);
            assert!(frame[n / 2].im.abs() <= 1e-9 * scale);
            for k in 1..n / 2 {
                assert!((frame[n - k] - frame[k].conj()).norm() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn convolution_theorem() {
        // DFT(x·w) = (1/N) · (DFT(x) ⊛ DFT(w))
        let n = 64;
        let spec = WindowSpec::new(0.46, WindowMode::Symmetric, n).unwrap();
        let w = make_window(&spec).unwrap();
        let x = random_signal(n, 5);
        let windowed = stft(&x, &StftConfig::new(spec)).unwrap();
        let xs = stft(&x, &StftConfig::new(WindowSpec::rectangular(n).unwrap())).unwrap();
        let ws = direct_dft(&w, &vec![1.0; n]);
        let conv: Vec<Complex64> = (0..n)
            .map(|k| {
                (0..n)
                    .map(|m| xs.get(0, m) * ws[(k + n - m) % n])
                    .sum::<Complex64>()
                    / n as f64
            })
            .collect();
        assert!(rel_err(windowed.frame(0), &conv) <= 1e-8);
    }

    #[test]
    fn parallel_equals_sequential() {
        let x = random_signal(512 * 40, 3);
        let cfg = StftConfig::new(WindowSpec::hamming(512).unwrap());
        assert_eq!(stft(&x, &cfg).unwrap(), stft_sequential(&x, &cfg).unwrap());
    }

    fn interior_error(x: &[f64], y: &[f64], n: usize) -> f64 {
        let end = y.len().min(x.len()) - n / 2;
        let scale = x[n / 2..end].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        x[n / 2..end]
            .iter()
            .zip(&y[n / 2..end])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / scale
    }

    #[test]
    fn ola_round_trip() {
        let n = 512;
        let x = random_signal(n * 20, 9);
        for spec in [
            WindowSpec::hann(n).unwrap(),
            WindowSpec::hamming(n).unwrap(),
        ] {
            let cfg = StftConfig::new(spec);
            assert!((ola_constant(&cfg).unwrap() - 2.0 * (1.0 - spec.alpha)).abs() < 1e-12);
            let y = istft_ola(&stft(&x, &cfg).unwrap()).unwrap();
            assert!(interior_error(&x, &y, n) <= 1e-6);
        }
    }

    #[test]
    fn ola_rejects_degenerate_input() {
        let n = 16;
        let one = stft(&[1.0; 16], &StftConfig::new(WindowSpec::hann(n).unwrap())).unwrap();
        assert!(matches!(
            istft_ola(&one),
            Err(Error::ReconstructionUnsupported(_))
        ));
        let sym = WindowSpec::new(0.5, WindowMode::Symmetric, n).unwrap();
        let grid = stft(&[1.0; 64], &StftConfig::new(sym)).unwrap();
        assert!(matches!(
            istft_ola(&grid),
            Err(Error::ReconstructionUnsupported(_))
        ));
        let odd = StftConfig::with_stride(WindowSpec::hann(n).unwrap(), 5).unwrap();
        let grid = stft(&[1.0; 64], &odd).unwrap();
        assert!(matches!(
            istft_ola(&grid),
            Err(Error::ReconstructionUnsupported(_))
        ));
    }

    #[test]
    fn perturb_zero_width_is_identity() {
        let x = random_signal(64 * 8, 1);
        let grid = stft(&x, &StftConfig::new(WindowSpec::hamming(64).unwrap())).unwrap();
        let same = perturb_phase(&grid, 5, 0.0, 42).unwrap();
        for (a, b) in same.coefficients().iter().zip(grid.coefficients()) {
            assert!((a - b).norm() <= 1e-12);
        }
    }

    #[test]
    fn perturb_preserves_magnitude_and_symmetry() {
        let n = 64;
        let x = random_signal(n * 8, 1);
        let grid = stft(&x, &StftConfig::new(WindowSpec::hamming(n).unwrap())).unwrap();
        let out = perturb_phase(&grid, 7, PI / 4.0, 42).unwrap();
        for t in 0..grid.frames() {
            let (a, b) = (grid.magnitude(t, 7), out.magnitude(t, 7));
            assert!((a - b).abs() <= 1e-12 * a);
            assert_eq!(out.get(t, n - 7), out.get(t, 7).conj());
            for k in (0..n).filter(|&k| k != 7 && k != n - 7) {
                assert_eq!(out.get(t, k), grid.get(t, k));
            }
        }
        assert_eq!(out, perturb_phase(&grid, 7, PI / 4.0, 42).unwrap());
        assert_ne!(out, perturb_phase(&grid, 7, PI / 4.0, 43).unwrap());
    }

    #[test]
    fn perturb_rejects_non_unique_bins() {
        let grid = stft(&[1.0; 64], &StftConfig::new(WindowSpec::hann(16).unwrap())).unwrap();
        for k in [0, 8, 9, 15] {
            assert!(matches!(
                perturb_phase(&grid, k, 0.1, 0),
                Err(Error::BinOutOfRange { .. })
            ));
        }
    }
}
