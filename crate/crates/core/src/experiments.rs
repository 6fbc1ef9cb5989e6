//! Reproducible experiment drivers shared by the CLI and the test suites.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::analytic::{
    pdf_peak_locations, rect_decompose, tone_to_stft_phase, AnalyticContext, ToneSide,
};
use crate::angle::principal_angle_pi;
use crate::error::Result;
use crate::signal::{corpus_tone, make_item, CorpusKind, CorpusSpec};
use crate::stats::{
    accumulate_per_frequency, cell_distance, nonuniformity_ubar, sidelobe_suppression_db,
    PerFrequencyHistogramSet,
};
use crate::stft::{bin_omega, istft_ola, perturb_phase, stft, FrameTransform, StftConfig};
use crate::window::{WindowMode, WindowSpec};

/// Allowed deviation of `c_re/c_im` from the reference values.
pub const TABLE1_RATIO_TOL: f64 = 0.01;
/// Allowed deviation of `P_2π(ζ_re - ζ_im)`, in units of π.
pub const TABLE1_ANGLE_TOL_PI: f64 = 0.01;

/// One reference example. Frequencies are in units of π rad/sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Example {
    pub label: u8,
    pub omega_k_pi: f64,
    pub omega_t_pi: f64,
    pub n: usize,
    pub ratio: f64,
    pub angle_pi: f64,
}

/// The tone of example 3 sits 0.25π below the bin, as its listed
/// difference states; `0.65π` is that tone.
pub const TABLE1: [Table1Example; 5] = [
    Table1Example {
        label: 1,
        omega_k_pi: 0.90,
        omega_t_pi: 0.88,
        n: 512,
        ratio: 1.18,
        angle_pi: 0.52,
    },
    Table1Example {
        label: 2,
        omega_k_pi: 0.90,
        omega_t_pi: 0.80,
        n: 512,
        ratio: 1.93,
        angle_pi: 0.57,
    },
    Table1Example {
        label: 3,
        omega_k_pi: 0.90,
        omega_t_pi: 0.65,
        n: 512,
        ratio: 3.25,
        angle_pi: 0.66,
    },
    Table1Example {
        label: 4,
        omega_k_pi: 0.90,
        omega_t_pi: 0.45,
        n: 512,
        ratio: 4.73,
        angle_pi: 0.79,
    },
    Table1Example {
        label: 5,
        omega_k_pi: 0.90,
        omega_t_pi: 0.45,
        n: 2048,
        ratio: 4.82,
        angle_pi: 0.77,
    },
];

impl Table1Example {
    /// Nearest bin to the nominal analysis frequency.
    pub fn bin(&self) -> usize {
        (0.5 * self.omega_k_pi * self.n as f64).round() as usize
    }

    pub fn omega_t(&self) -> f64 {
        self.omega_t_pi * PI
    }

    pub fn context(&self) -> AnalyticContext {
        AnalyticContext::rectangular(self.omega_t(), self.bin(), self.n)
            .expect("reference examples are valid contexts")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Row {
    pub example: Table1Example,
    pub bin: usize,
    pub ratio: f64,
    pub angle_pi: f64,
}

impl Table1Row {
    pub fn ratio_ok(&self) -> bool {
        (self.ratio - self.example.ratio).abs() <= TABLE1_RATIO_TOL + 1e-9
    }

    pub fn angle_ok(&self) -> bool {
        (self.angle_pi - self.example.angle_pi).abs() <= TABLE1_ANGLE_TOL_PI + 1e-9
    }

    pub fn ok(&self) -> bool {
        self.ratio_ok() && self.angle_ok()
    }
}

pub fn table1() -> Vec<Table1Row> {
    TABLE1
        .iter()
        .map(|ex| {
            let ctx = ex.context();
            let dec = rect_decompose(ctx.omega_t(), ctx.omega_k(), ex.n);
            Table1Row {
                example: *ex,
                bin: ctx.bin(),
                ratio: dec.ratio(),
                angle_pi: dec.zeta_difference() / PI,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig2Point {
    pub bin: usize,
    pub omega_t: f64,
    pub ratio: f64,
    pub angle: f64,
}

/// `c_re/c_im` and `P_2π(ζ_re - ζ_im)` for every unique bin as the tone
/// sweeps `points` midpoints of `(0, π)`.
pub fn fig2_curves(n: usize, points: usize) -> Vec<Fig2Point> {
    (1..n / 2)
        .flat_map(|k| {
            (0..points).map(move |j| {
                let omega_t = PI * (j as f64 + 0.5) / points as f64;
                let dec = rect_decompose(omega_t, bin_omega(k, n), n);
                Fig2Point {
                    bin: k,
                    omega_t,
                    ratio: dec.ratio(),
                    angle: dec.zeta_difference(),
                }
            })
        })
        .collect()
}

/// Both quantities with the tone exactly on bin `k`.
pub fn fig2_anchor(k: usize, n: usize) -> (f64, f64) {
    let dec = rect_decompose(bin_omega(k, n), bin_omega(k, n), n);
    (dec.ratio(), dec.zeta_difference())
}

/// `(θ, φ_k)` curves of the five reference examples.
pub fn fig3_curves(points: usize) -> Vec<(Table1Example, Vec<(f64, f64)>)> {
    TABLE1
        .iter()
        .map(|ex| {
            let ctx = ex.context();
            let curve = (0..points)
                .map(|j| {
                    let theta = -PI + TAU * j as f64 / points as f64;
                    (theta, tone_to_stft_phase(&ctx, theta))
                })
                .collect();
            (*ex, curve)
        })
        .collect()
}

/// Largest distance of an unwrapped `(θ, φ)` curve from its least-squares
/// line.
pub fn linear_fit_deviation(curve: &[(f64, f64)]) -> f64 {
    let mut unwrapped = Vec::with_capacity(curve.len());
    let mut acc = curve[0].1;
    unwrapped.push(acc);
    for w in curve.windows(2) {
        acc += principal_angle_pi(w[1].1 - w[0].1);
        unwrapped.push(acc);
    }
    let n = curve.len() as f64;
    let mx = curve.iter().map(|p| p.0).sum::<f64>() / n;
    let my = unwrapped.iter().sum::<f64>() / n;
    let sxy: f64 = curve
        .iter()
        .zip(&unwrapped)
        .map(|(p, y)| (p.0 - mx) * (y - my))
        .sum();
    let sxx: f64 = curve.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    curve
        .iter()
        .zip(&unwrapped)
        .map(|(p, y)| (y - (my + slope * (p.0 - mx))).abs())
        .fold(0.0, f64::max)
}

/// Per-frequency histograms of every frame of a synthetic corpus, each frame
/// one window long. Frames are transformed in parallel and merged.
pub fn corpus_per_frequency(
    spec: &CorpusSpec,
    window: &WindowSpec,
    cells: usize,
) -> Result<PerFrequencyHistogramSet> {
    let transform = FrameTransform::new(window)?;
    let empty = PerFrequencyHistogramSet::new(window.length, cells)?;
    let item_spec = CorpusSpec {
        n: window.length,
        ..*spec
    };
    (0..spec.count)
        .into_par_iter()
        .fold(
            || empty.clone(),
            |mut set, i| {
                set.add_frame(&transform.transform(&make_item(&item_spec, i)));
                set
            },
        )
        .map(Ok)
        .try_reduce(
            || empty.clone(),
            |mut a, b| {
                a.merge(&b)?;
                Ok(a)
            },
        )
}

/// Histogram peak of one bin compared with the intrinsic peak phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinPeak {
    pub bin: usize,
    /// Fraction of tones below the bin frequency.
    pub fraction_below: f64,
    pub argmax_cell: usize,
    pub argmax_phase: f64,
    /// Side holding the majority of the tones.
    pub side: ToneSide,
    pub predicted: [f64; 2],
    /// Highest cell within an eighth of a cycle of each prediction. The two
    /// peaks can be nearly equal in height, so these are compared between
    /// windows rather than the single argmax.
    pub peak_cells: [usize; 2],
    /// Circular distance in cells from the argmax to the nearer prediction.
    pub distance_cells: usize,
}

impl BinPeak {
    /// At least `share` of the tones lie on one side of the bin.
    pub fn dominated(&self, share: f64) -> bool {
        self.fraction_below >= share || 1.0 - self.fraction_below >= share
    }
}

#[derive(Debug, Clone)]
pub struct ToneExperiment {
    pub histograms: PerFrequencyHistogramSet,
    pub peaks: Vec<BinPeak>,
}

/// Histograms a random-tone corpus bin by bin and locates each bin's peak.
pub fn tone_experiment(
    count: usize,
    window: &WindowSpec,
    seed: u64,
    cells: usize,
) -> Result<ToneExperiment> {
    let n = window.length;
    let spec = CorpusSpec::new(CorpusKind::RandomTones, count, n, seed)?;
    let histograms = corpus_per_frequency(&spec, window, cells)?;
    let mut omegas: Vec<f64> = (0..count).map(|i| corpus_tone(&spec, i).omega_t).collect();
    omegas.sort_by(f64::total_cmp);
    let peaks = histograms
        .iter()
        .map(|(k, h)| {
            let omega_k = bin_omega(k, n);
            let below = omegas.partition_point(|&w| w < omega_k) as f64 / count as f64;
            let side = if below >= 0.5 {
                ToneSide::Below
            } else {
                ToneSide::Above
            };
            let predicted = pdf_peak_locations(omega_k, n, side)?;
            let argmax_cell = h.argmax();
            let distance_cells = predicted
                .iter()
                .map(|&p| cell_distance(argmax_cell, h.cell_of(p), cells))
                .min()
                .unwrap();
            let peak_cells = predicted.map(|p| local_peak(h.counts(), h.cell_of(p), cells / 8));
            Ok(BinPeak {
                bin: k,
                peak_cells,
                fraction_below: below,
                argmax_cell,
                argmax_phase: h.cell_center(argmax_cell),
                side,
                predicted,
                distance_cells,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ToneExperiment { histograms, peaks })
}

fn local_peak(counts: &[u64], centre: usize, reach: usize) -> usize {
    let m = counts.len();
    (0..=2 * reach)
        .map(|d| (centre + m - reach + d) % m)
        .max_by_key(|&c| (counts[c], std::cmp::Reverse(cell_distance(c, centre, m))))
        .unwrap()
}

/// Shape parameters swept by default: steps of 0.05 plus Hamming.
pub fn default_alpha_grid() -> Vec<f64> {
    let mut a: Vec<f64> = (0..=10).map(|i| i as f64 * 0.05).collect();
    a.push(crate::window::HAMMING_ALPHA);
    a.sort_by(f64::total_cmp);
    a
}

#[derive(Debug, Clone, Copy)]
pub enum SweepSource<'a> {
    /// Independent frames of a synthetic corpus.
    Corpus(CorpusSpec),
    /// A continuous signal, framed with 50% overlap.
    Signal(&'a [f64]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSweepRow {
    pub alpha: f64,
    /// Sidelobe level at a π/2 offset, dB (more negative suppresses more).
    pub sidelobe_db: f64,
    /// `(bin, ū)` for each tracked bin.
    pub ubar: Vec<(usize, f64)>,
}

pub fn alpha_sweep(
    source: SweepSource<'_>,
    n: usize,
    bins: &[usize],
    alphas: &[f64],
    cells: usize,
) -> Result<Vec<AlphaSweepRow>> {
    alphas
        .iter()
        .map(|&alpha| {
            let window = WindowSpec::new(alpha, WindowMode::Periodic, n)?;
            let set = match source {
                SweepSource::Corpus(spec) => corpus_per_frequency(&spec, &window, cells)?,
                SweepSource::Signal(x) => {
                    accumulate_per_frequency(&stft(x, &StftConfig::new(window))?, cells)?
                }
            };
            let ubar = bins
                .iter()
                .map(|&k| Ok((k, nonuniformity_ubar(set.bin(k))?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(AlphaSweepRow {
                alpha,
                sidelobe_db: sidelobe_suppression_db(&window, 0.5 * PI)?,
                ubar,
            })
        })
        .collect()
}

/// STFT, phase noise on one bin, overlap-add resynthesis.
pub fn perturb_signal(
    signal: &[f64],
    config: &StftConfig,
    bin: usize,
    halfwidth: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    let grid = stft(signal, config)?;
    istft_ola(&perturb_phase(&grid, bin, halfwidth, seed)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows_two_and_five() {
        let rows = table1();
        let r2 = rows[1];
        assert!(
            (r2.ratio - 1.93).abs() <= 0.01 && (r2.angle_pi - 0.57).abs() <= 0.01,
            "{r2:?}"
        );
        let r5 = rows[4];
        assert!(
            (r5.ratio - 4.82).abs() <= 0.01 && (r5.angle_pi - 0.77).abs() <= 0.01,
            "{r5:?}"
        );
        assert_eq!((r5.bin, rows[0].bin), (922, 230));
    }

    #[test]
    fn table_row_four_ratio() {
        assert!((table1()[3].ratio - 4.73).abs() <= 0.01);
    }

    #[test]
    fn fig2_anchors_on_bin() {
        for k in [1, 4, 7] {
            let (ratio, angle) = fig2_anchor(k, 16);
            assert!(
                (ratio - 1.0).abs() <= 1e-6 && (angle - PI / 2.0).abs() <= 1e-6,
                "k={k}"
            );
        }
        let off = rect_decompose(0.3, bin_omega(4, 16), 16);
        assert!(
            (off.ratio() - 1.0).abs() > 1e-3 || (off.zeta_difference() - PI / 2.0).abs() > 1e-3
        );
        assert_eq!(fig2_curves(16, 50).len(), 7 * 50);
    }

    #[test]
    fn local_peak_wraps() {
        let mut counts = vec![1u64; 16];
        counts[15] = 9;
        counts[3] = 20;
        assert_eq!(local_peak(&counts, 0, 1), 15);
        assert_eq!(local_peak(&counts, 1, 2), 3);
        assert_eq!(local_peak(&counts, 14, 1), 15);
        assert_eq!(local_peak(&[5, 5, 5, 5], 1, 1), 1);
    }

    #[test]
    fn fig3_shapes() {
        let curves = fig3_curves(720);
        let dev: Vec<f64> = curves
            .iter()
            .map(|(_, c)| linear_fit_deviation(c))
            .collect();
        assert!(dev[0] < dev[3], "{dev:?}");
        // every curve is 2π-periodic: F(θ) at θ = -π and π agree
        for (ex, _) in &curves {
            let ctx = ex.context();
            assert!(
                principal_angle_pi(tone_to_stft_phase(&ctx, -PI) - tone_to_stft_phase(&ctx, PI))
                    .abs()
                    < 1e-9
            );
        }
        let (a, b) = (&curves[3].1, &curves[4].1);
        let diff = a
            .iter()
            .zip(b)
            .map(|(p, q)| principal_angle_pi(p.1 - q.1).abs())
            .fold(0.0, f64::max);
        assert!(diff > 1e-3);
    }
}
