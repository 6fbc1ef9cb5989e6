//! Phase histograms, the normalized-EMD nonuniformity measure `ū`, and the
//! window sidelobe measure used to explain how window shape changes `ū`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::stft::{coefficient_phase, StftFrameGrid};
use crate::window::{make_window, WindowSpec};

pub const DEFAULT_PHASE_CELLS: usize = 64;
pub const DEFAULT_MAGNITUDE_BANDS: usize = 16;

/// Counts over `M` equal cells partitioning `[-π, π)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseHistogram {
    counts: Vec<u64>,
    total: u64,
}

impl PhaseHistogram {
    pub fn new(cells: usize) -> Result<Self> {
        if cells < 2 {
            return Err(Error::Config(format!(
                "need at least 2 phase cells, got {cells}"
            )));
        }
        Ok(PhaseHistogram {
            counts: vec![0; cells],
            total: 0,
        })
    }

    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::Config(format!(
                "need at least 2 phase cells, got {}",
                counts.len()
            )));
        }
        let total = counts.iter().sum();
        Ok(PhaseHistogram { counts, total })
    }

    pub fn from_phases(cells: usize, phases: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut h = Self::new(cells)?;
        phases.into_iter().for_each(|p| h.add(p));
        Ok(h)
    }

    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn cell_width(&self) -> f64 {
        TAU / self.bin_count() as f64
    }

    /// Cell containing `phase`; angles outside `[-π, π)` are wrapped.
    pub fn cell_of(&self, phase: f64) -> usize {
        cell_index(phase, self.bin_count())
    }

    pub fn cell_center(&self, cell: usize) -> f64 {
        -PI + (cell as f64 + 0.5) * self.cell_width()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.bin_count()).map(|m| self.cell_center(m)).collect()
    }

    pub fn add(&mut self, phase: f64) {
        let m = self.cell_of(phase);
        self.counts[m] += 1;
        self.total += 1;
    }

    pub fn merge(&mut self, other: &PhaseHistogram) -> Result<()> {
        if other.bin_count() != self.bin_count() {
            return Err(Error::Config(
                "cannot merge histograms of different resolution".into(),
            ));
        }
        self.counts
            .iter_mut()
            .zip(&other.counts)
            .for_each(|(a, b)| *a += b);
        self.total += other.total;
        Ok(())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let t = self.total as f64;
        self.counts.iter().map(|&c| c as f64 / t).collect()
    }

    /// Index of the fullest cell; the lowest index wins ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (m, &c) in self.counts.iter().enumerate() {
            if c > self.counts[best] {
                best = m;
            }
        }
        best
    }

    pub fn populated_cells(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }
}

pub(crate) fn cell_index(phase: f64, cells: usize) -> usize {
    let p = crate::angle::principal_angle_pi(phase);
    (((p + PI) / TAU * cells as f64) as usize).min(cells - 1)
}

/// Circular distance between two cells of an `cells`-cell histogram.
pub fn cell_distance(a: usize, b: usize, cells: usize) -> usize {
    let d = a.abs_diff(b) % cells;
    d.min(cells - d)
}

/// Normalized earth mover's distance between the histogram and the uniform
/// distribution: 0 for uniform counts, 1 when every count sits in the
/// central cell `⌊M/2⌋`. Evaluated in integer arithmetic.
pub fn nonuniformity_ubar(hist: &PhaseHistogram) -> Result<f64> {
    if hist.is_empty() {
        return Err(Error::EmptyHistogram);
    }
    let m = hist.bin_count() as i128;
    let total = hist.total as i128;
    let centre = m / 2;
    let mut cum = 0i128;
    let mut numer = 0i128;
    let mut norm = 0i128;
    for (k, &c) in hist.counts.iter().enumerate() {
        let k = k as i128;
        cum += c as i128;
        // M·Σ(p - 1/M) scaled by the total count
        numer += (m * cum - total * (k + 1)).abs();
        norm += (m * i128::from(k >= centre) - (k + 1)).abs();
    }
    Ok(numer as f64 / (total as f64 * norm as f64))
}

/// One histogram per unique bin `k = 1..N/2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerFrequencyHistogramSet {
    n: usize,
    histograms: Vec<PhaseHistogram>,
    excluded: u64,
}

impl PerFrequencyHistogramSet {
    pub fn new(n: usize, cells: usize) -> Result<Self> {
        let proto = PhaseHistogram::new(cells)?;
        Ok(PerFrequencyHistogramSet {
            n,
            histograms: vec![proto; (n / 2).saturating_sub(1)],
            excluded: 0,
        })
    }

    /// Transform length the set was built for.
    pub fn transform_len(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> usize {
        self.histograms.first().map_or(0, PhaseHistogram::bin_count)
    }

    /// Histogram of bin `k` (`1 <= k < N/2`).
    pub fn bin(&self, k: usize) -> &PhaseHistogram {
        &self.histograms[k - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &PhaseHistogram)> {
        self.histograms.iter().enumerate().map(|(i, h)| (i + 1, h))
    }

    /// Coefficients skipped because their phase is undefined.
    pub fn excluded(&self) -> u64 {
        self.excluded
    }

    pub fn add_frame(&mut self, frame: &[Complex64]) {
        for (h, &z) in self.histograms.iter_mut().zip(&frame[1..]) {
            match coefficient_phase(z, self.n) {
                Some(p) => h.add(p),
                None => self.excluded += 1,
            }
        }
    }

    pub fn merge(&mut self, other: &PerFrequencyHistogramSet) -> Result<()> {
        if self.n != other.n || self.cells() != other.cells() {
            return Err(Error::Config("histogram sets differ in shape".into()));
        }
        for (a, b) in self.histograms.iter_mut().zip(&other.histograms) {
            a.merge(b)?;
        }
        self.excluded += other.excluded;
        Ok(())
    }

    /// `ū` per bin; empty histograms give `None`.
    pub fn ubar(&self) -> Vec<(usize, Option<f64>)> {
        self.iter()
            .map(|(k, h)| (k, nonuniformity_ubar(h).ok()))
            .collect()
    }

    /// Grayscale image: one column per bin (low `k` left), one row per phase
    /// cell (`+π` at the top). Each column is scaled so its fullest cell is
    /// white.
    pub fn render(&self) -> GrayImage {
        let (w, h) = (self.histograms.len(), self.cells());
        let mut img = GrayImage::new(w, h);
        for (x, hist) in self.histograms.iter().enumerate() {
            let peak = hist.counts.iter().copied().max().unwrap_or(0);
            for (m, &c) in hist.counts.iter().enumerate() {
                img.set(x, h - 1 - m, scale_to_byte(c, peak));
            }
        }
        img
    }
}

pub fn accumulate_per_frequency(
    grid: &StftFrameGrid,
    cells: usize,
) -> Result<PerFrequencyHistogramSet> {
    let mut set = PerFrequencyHistogramSet::new(grid.len(), cells)?;
    grid.iter_frames().for_each(|f| set.add_frame(f));
    Ok(set)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Banding {
    LogSpaced,
    Quantile,
}

/// Phase histograms pooled over all unique bins, split by magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct PerMagnitudeHistogramSet {
    /// Strictly increasing upper limits of every band but the last; a
    /// magnitude equal to a threshold belongs to the lower band.
    thresholds: Vec<f64>,
    histograms: Vec<PhaseHistogram>,
    excluded: u64,
}

impl PerMagnitudeHistogramSet {
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn bands(&self) -> &[PhaseHistogram] {
        &self.histograms
    }

    pub fn excluded(&self) -> u64 {
        self.excluded
    }

    pub fn band_of(&self, magnitude: f64) -> usize {
        self.thresholds.partition_point(|&t| t < magnitude)
    }

    /// Polar image of side `size`: radius selects the band (smallest
    /// magnitudes at the centre), angle the phase cell (counter-clockwise from
    /// the positive x axis). Each annulus is scaled to its own peak.
    pub fn render(&self, size: usize) -> GrayImage {
        let mut img = GrayImage::new(size, size);
        let bands = self.histograms.len();
        let radius = 0.5 * size as f64;
        let peaks: Vec<u64> = self
            .histograms
            .iter()
            .map(|h| h.counts.iter().copied().max().unwrap_or(0))
            .collect();
        for y in 0..size {
            for x in 0..size {
                let dx = x as f64 + 0.5 - radius;
                let dy = radius - (y as f64 + 0.5);
                let r = dx.hypot(dy);
                if r >= radius {
                    continue;
                }
                let b = ((r / radius * bands as f64) as usize).min(bands - 1);
                let hist = &self.histograms[b];
                let c = hist.counts[hist.cell_of(dy.atan2(dx))];
                img.set(x, y, scale_to_byte(c, peaks[b]));
            }
        }
        img
    }
}

pub fn accumulate_per_magnitude(
    grid: &StftFrameGrid,
    cells: usize,
    bands: usize,
    banding: Banding,
) -> Result<PerMagnitudeHistogramSet> {
    if bands < 2 {
        return Err(Error::Config(format!(
            "need at least 2 magnitude bands, got {bands}"
        )));
    }
    let proto = PhaseHistogram::new(cells)?;
    let n = grid.len();
    let mut excluded = 0u64;
    let mut samples = Vec::with_capacity(grid.frames() * grid.unique_bins().len());
    for frame in grid.iter_frames() {
        for &z in &frame[grid.unique_bins()] {
            match coefficient_phase(z, n) {
                Some(p) => samples.push((z.norm(), p)),
                None => excluded += 1,
            }
        }
    }
    if samples.is_empty() {
        return Err(Error::Banding("no coefficient has a defined phase".into()));
    }
    let mut mags: Vec<f64> = samples.iter().map(|s| s.0).collect();
    mags.sort_by(f64::total_cmp);
    let (lo, hi) = (mags[0], mags[mags.len() - 1]);
    let mut thresholds: Vec<f64> = match banding {
        Banding::Quantile => (1..bands).map(|j| mags[j * mags.len() / bands]).collect(),
        Banding::LogSpaced => {
            let ratio = hi / lo;
            (1..bands)
                .map(|j| lo * ratio.powf(j as f64 / bands as f64))
                .collect()
        }
    };
    thresholds.dedup_by(|a, b| *a <= *b);
    let mut set = PerMagnitudeHistogramSet {
        histograms: vec![proto; thresholds.len() + 1],
        thresholds,
        excluded,
    };
    for (mag, phase) in samples {
        let b = set.band_of(mag);
        set.histograms[b].add(phase);
    }
    Ok(set)
}

/// Mean window-spectrum magnitude over a one-bin band centred on `offset`,
/// relative to the DC response, in dB. The band is sampled at 16 points per
/// bin, endpoints included.
pub fn sidelobe_suppression_db(window: &WindowSpec, offset: f64) -> Result<f64> {
    const OVERSAMPLE: usize = 16;
    let w = make_window(window)?;
    let n = w.len() as f64;
    let dtft = |omega: f64| -> f64 {
        w.iter()
            .enumerate()
            .map(|(i, &v)| Complex64::from_polar(v, -omega * i as f64))
            .sum::<Complex64>()
            .norm()
    };
    let bin = TAU / n;
    let mean = (0..=OVERSAMPLE)
        .map(|j| dtft(offset - 0.5 * bin + bin * j as f64 / OVERSAMPLE as f64))
        .sum::<f64>()
        / (OVERSAMPLE + 1) as f64;
    Ok(20.0 * (mean / dtft(0.0)).log10())
}

fn scale_to_byte(count: u64, peak: u64) -> u8 {
    if peak == 0 {
        0
    } else {
        ((count as f64 / peak as f64) * 255.0).round() as u8
    }
}

/// 8-bit grayscale raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize) -> Self {
        GrayImage {
            width,
            height,
            pixels: vec![0; width * height],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.pixels[y * self.width + x] = v;
    }

    /// Binary PGM (`P5`, maxval 255).
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}
