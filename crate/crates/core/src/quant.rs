//! Scalar phase quantizers: the uniform rounding quantizer (URQ) and
//! Lloyd–Max designs fitted to a phase histogram.
//!
//! The training histogram is read as a piecewise-constant density over its
//! cells, so centroids and distortions are exact integrals and the design
//! never looks at raw samples.

use std::f64::consts::{PI, TAU};
use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::angle::principal_angle_pi;
use crate::error::{Error, Result};
use crate::stats::PhaseHistogram;
use crate::stft::{bin_frequency_hz, coefficient_phase, StftFrameGrid};

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_MAX_ITERS: usize = 500;
pub const DEFAULT_TRAINING_CELLS: usize = 256;

/// Cells `[boundaries[i], boundaries[i+1])` with reproduction `levels[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarQuantizer {
    boundaries: Vec<f64>,
    levels: Vec<f64>,
}

impl ScalarQuantizer {
    pub fn new(boundaries: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if levels.len() < 2 || boundaries.len() != levels.len() + 1 {
            return Err(Error::Config(
                "a quantizer needs C >= 2 levels and C + 1 boundaries".into(),
            ));
        }
        let ordered = boundaries
            .windows(2)
            .zip(&levels)
            .all(|(b, &l)| b[0] < l && l < b[1]);
        if !ordered {
            return Err(Error::Config(
                "levels must lie strictly inside ascending cells".into(),
            ));
        }
        Ok(ScalarQuantizer { boundaries, levels })
    }

    pub fn cells(&self) -> usize {
        self.levels.len()
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Cell index of `phase`; a phase on a boundary goes to the upper cell.
    pub fn index_of(&self, phase: f64) -> usize {
        let interior = &self.boundaries[1..self.boundaries.len() - 1];
        interior.partition_point(|&b| b <= phase)
    }

    pub fn reconstruct(&self, phase: f64) -> f64 {
        self.levels[self.index_of(phase)]
    }
}

pub fn design_urq(cells: usize) -> Result<ScalarQuantizer> {
    if cells < 2 {
        return Err(Error::Config(format!(
            "a quantizer needs at least 2 cells, got {cells}"
        )));
    }
    let step = TAU / cells as f64;
    let boundaries = (0..=cells)
        .map(|i| {
            if i == cells {
                PI
            } else {
                -PI + step * i as f64
            }
        })
        .collect();
    let levels = (0..cells).map(|i| -PI + step * (i as f64 + 0.5)).collect();
    ScalarQuantizer::new(boundaries, levels)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quantized {
    pub indices: Vec<usize>,
    pub reconstructed: Vec<f64>,
    /// RMS of the wrapped error `P_π(φ - φ̂)`.
    pub rms_error: f64,
}

pub fn quantize(q: &ScalarQuantizer, phases: &[f64]) -> Quantized {
    let indices: Vec<usize> = phases.iter().map(|&p| q.index_of(p)).collect();
    let reconstructed: Vec<f64> = indices.iter().map(|&i| q.levels[i]).collect();
    let rms_error = rms(&squared_error(q, phases), phases.len());
    Quantized {
        indices,
        reconstructed,
        rms_error,
    }
}

/// Sum of squared wrapped errors.
pub fn squared_error(q: &ScalarQuantizer, phases: &[f64]) -> f64 {
    phases
        .iter()
        .map(|&p| principal_angle_pi(p - q.reconstruct(p)).powi(2))
        .sum()
}

fn rms(sse: &f64, count: usize) -> f64 {
    if count == 0 {
        0.0
    } else {
        (sse / count as f64).sqrt()
    }
}

/// Histogram as a piecewise-constant density on `[-π, π)`.
struct Density {
    width: f64,
    probs: Vec<f64>,
}

/// Mass, first and second moment of the density over an interval.
#[derive(Default, Clone, Copy)]
struct Moments(f64, f64, f64);

impl Density {
    fn new(hist: &PhaseHistogram) -> Self {
        Density {
            width: hist.cell_width(),
            probs: hist.probabilities(),
        }
    }

    fn moments(&self, a: f64, b: f64) -> Moments {
        let m = self.probs.len();
        let first = (((a + PI) / self.width) as usize).min(m - 1);
        let mut out = Moments::default();
        for (j, &p) in self.probs.iter().enumerate().skip(first) {
            let lo = -PI + j as f64 * self.width;
            if lo >= b {
                break;
            }
            let (x0, x1) = (lo.max(a), (lo + self.width).min(b));
            if x1 <= x0 || p == 0.0 {
                continue;
            }
            let d = p / self.width;
            out.0 += d * (x1 - x0);
            out.1 += d * (x1 * x1 - x0 * x0) / 2.0;
            out.2 += d * (x1.powi(3) - x0.powi(3)) / 3.0;
        }
        out
    }

    fn distortion(&self, q: &ScalarQuantizer) -> f64 {
        q.boundaries
            .windows(2)
            .zip(&q.levels)
            .map(|(b, &y)| {
                let Moments(m0, m1, m2) = self.moments(b[0], b[1]);
                (m2 - 2.0 * y * m1 + y * y * m0).max(0.0)
            })
            .sum()
    }
}

/// RMS error of `q` on the density described by `hist`.
pub fn histogram_rms(q: &ScalarQuantizer, hist: &PhaseHistogram) -> f64 {
    Density::new(hist).distortion(q).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LloydDesign {
    pub quantizer: ScalarQuantizer,
    /// Training RMS of the URQ start followed by one entry per iteration.
    pub rms_history: Vec<f64>,
    pub converged: bool,
}

/// Lloyd–Max design starting from the URQ: levels move to cell centroids,
/// then interior boundaries to level midpoints, until the training RMS
/// changes by less than `tol`.
pub fn lloyd_max(
    hist: &PhaseHistogram,
    cells: usize,
    tol: f64,
    max_iters: usize,
) -> Result<LloydDesign> {
    if hist.is_empty() {
        return Err(Error::EmptyHistogram);
    }
    let populated = hist.populated_cells();
    if populated < cells {
        return Err(Error::DegenerateDesign { populated, cells });
    }
    let density = Density::new(hist);
    let mut q = design_urq(cells)?;
    let mut history = vec![density.distortion(&q).sqrt()];
    let mut converged = false;
    for _ in 0..max_iters {
        let mut levels = Vec::with_capacity(cells);
        for b in q.boundaries.windows(2) {
            let Moments(m0, m1, _) = density.moments(b[0], b[1]);
            let centroid = if m0 > 0.0 {
                m1 / m0
            } else {
                0.5 * (b[0] + b[1])
            };
            levels.push(centroid.clamp(b[0], b[1]));
        }
        let mut boundaries = q.boundaries.clone();
        for i in 1..cells {
            boundaries[i] = 0.5 * (levels[i - 1] + levels[i]);
        }
        let candidate = match ScalarQuantizer::new(boundaries, levels) {
            Ok(c) => c,
            // centroid pinned to a cell edge: no strictly interior level exists
            Err(_) => break,
        };
        let rms = density.distortion(&candidate).sqrt();
        let previous = *history.last().unwrap();
        if rms > previous {
            break;
        }
        q = candidate;
        history.push(rms);
        if previous - rms < tol {
            converged = true;
            break;
        }
    }
    Ok(LloydDesign {
        quantizer: q,
        rms_history: history,
        converged,
    })
}

pub fn design_pdf_optimized(
    hist: &PhaseHistogram,
    cells: usize,
    tol: f64,
    max_iters: usize,
) -> Result<ScalarQuantizer> {
    Ok(lloyd_max(hist, cells, tol, max_iters)?.quantizer)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantExperimentOptions {
    pub cells: RangeInclusive<usize>,
    pub training_cells: usize,
    pub tol: f64,
    pub max_iters: usize,
    /// Train on even frames and evaluate on odd frames.
    pub holdout: bool,
}

impl Default for QuantExperimentOptions {
    fn default() -> Self {
        QuantExperimentOptions {
            cells: 2..=8,
            training_cells: DEFAULT_TRAINING_CELLS,
            tol: DEFAULT_TOLERANCE,
            max_iters: DEFAULT_MAX_ITERS,
            holdout: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantRecord {
    pub cells: usize,
    pub rms_urq: f64,
    pub rms_pdf_opt: f64,
    pub reduction_percent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyBand {
    pub first_bin: usize,
    /// Exclusive.
    pub end_bin: usize,
    pub low_hz: f64,
    pub high_hz: f64,
    pub training_samples: usize,
    pub evaluation_samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantExperimentReport {
    pub records: Vec<QuantRecord>,
    pub bands: Vec<FrequencyBand>,
    pub training_cells: usize,
    pub holdout: bool,
}

impl QuantExperimentReport {
    pub fn average_reduction_percent(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.reduction_percent)
            .sum::<f64>()
            / self.records.len() as f64
    }

    /// `cells,rms_urq,rms_pdf_opt,reduction_percent` rows with a header.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["cells", "rms_urq", "rms_pdf_opt", "reduction_percent"])?;
        for r in &self.records {
            w.write_record([
                r.cells.to_string(),
                format!("{:.6}", r.rms_urq),
                format!("{:.6}", r.rms_pdf_opt),
                format!("{:.3}", r.reduction_percent),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("bands (Hz):");
        for b in &self.bands {
            s.push_str(&format!(
                " [{:.0}, {:.0}) n={}",
                b.low_hz, b.high_hz, b.evaluation_samples
            ));
        }
        s.push('\n');
        s.push_str(&format!(
            "training histogram: {} cells; error: wrapped; evaluation: {}\n",
            self.training_cells,
            if self.holdout {
                "held-out odd frames"
            } else {
                "training data"
            }
        ));
        s.push_str(" cells    rms URQ   rms 4xPDF   reduction\n");
        for r in &self.records {
            s.push_str(&format!(
                "{:>6} {:>10.5} {:>11.5} {:>10.2}%\n",
                r.cells, r.rms_urq, r.rms_pdf_opt, r.reduction_percent
            ));
        }
        s.push_str(&format!(
            "average reduction: {:.2}%\n",
            self.average_reduction_percent()
        ));
        s
    }
}

/// Compares one URQ over the upper half of the band with four Lloyd–Max
/// quantizers, each trained on one quarter of that range.
pub fn run_band_quantization_experiment(
    grid: &StftFrameGrid,
    sample_rate: f64,
    options: &QuantExperimentOptions,
) -> Result<QuantExperimentReport> {
    let n = grid.len();
    let max_cells = *options.cells.end();
    if *options.cells.start() < 2 || options.cells.is_empty() {
        return Err(Error::Config("cell counts must start at 2 or more".into()));
    }
    let edges: Vec<usize> = (0..=4)
        .map(|q| ((n * (4 + q)).div_ceil(16)).min(n / 2))
        .collect();
    let mut bands = Vec::with_capacity(4);
    let mut train = Vec::with_capacity(4);
    let mut eval = Vec::with_capacity(4);
    for q in 0..4 {
        let (first, end) = (edges[q], edges[q + 1]);
        let mut tr = Vec::new();
        let mut ev = Vec::new();
        for t in 0..grid.frames() {
            let frame = grid.frame(t);
            for &z in &frame[first..end] {
                let Some(p) = coefficient_phase(z, n) else {
                    continue;
                };
                if !options.holdout || t % 2 == 0 {
                    tr.push(p);
                }
                if !options.holdout || t % 2 == 1 {
                    ev.push(p);
                }
            }
        }
        if tr.len() < 100 * max_cells || ev.is_empty() {
            return Err(Error::InsufficientData(format!(
                "band {q} has {} training phases; {} cells need at least {}",
                tr.len(),
                max_cells,
                100 * max_cells
            )));
        }
        bands.push(FrequencyBand {
            first_bin: first,
            end_bin: end,
            low_hz: bin_frequency_hz(first, n, sample_rate),
            high_hz: bin_frequency_hz(end, n, sample_rate),
            training_samples: tr.len(),
            evaluation_samples: ev.len(),
        });
        train.push(PhaseHistogram::from_phases(options.training_cells, tr)?);
        eval.push(ev);
    }
    let total: usize = eval.iter().map(Vec::len).sum();
    let records = options
        .cells
        .clone()
        .into_par_iter()
        .map(|c| -> Result<QuantRecord> {
            let urq = design_urq(c)?;
            let mut sse_urq = 0.0;
            let mut sse_pdf = 0.0;
            for (hist, phases) in train.iter().zip(&eval) {
                let q = design_pdf_optimized(hist, c, options.tol, options.max_iters)?;
                sse_urq += squared_error(&urq, phases);
                sse_pdf += squared_error(&q, phases);
            }
            let (rms_urq, rms_pdf_opt) = (rms(&sse_urq, total), rms(&sse_pdf, total));
            Ok(QuantRecord {
                cells: c,
                rms_urq,
                rms_pdf_opt,
                reduction_percent: 100.0 * (1.0 - rms_pdf_opt / rms_urq),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QuantExperimentReport {
        records,
        bands,
        training_cells: options.training_cells,
        holdout: options.holdout,
    })
}
