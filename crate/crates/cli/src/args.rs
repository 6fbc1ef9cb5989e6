use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use stft_phase::stats::{Banding, DEFAULT_MAGNITUDE_BANDS, DEFAULT_PHASE_CELLS};
use stft_phase::stft::StftConfig;
use stft_phase::window::{WindowMode, WindowSpec, HAMMING_ALPHA};

#[derive(Debug, Parser)]
#[command(
    name = "stft-phase",
    version,
    about = "STFT phase distribution experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-frequency and per-magnitude phase histograms of WAV files.
    Analyze(AnalyzeArgs),
    /// Magnitude ratio and angle difference for the five reference examples.
    /// Exits nonzero if any value is off.
    Table1(OutArgs),
    /// Ratio and angle difference against tone frequency, for every bin.
    Fig2(Fig2Args),
    /// Tone phase to coefficient phase curves for the reference examples.
    Fig3(Fig3Args),
    /// Random-tone Monte Carlo: histogram peaks against predictions.
    ToneExperiment(ToneArgs),
    /// Nonuniformity and sidelobe level across window shapes.
    AlphaSweep(SweepArgs),
    /// Uniform against histogram-optimized phase quantizers.
    QuantExperiment(QuantArgs),
    /// Adds phase noise to one bin and resynthesizes.
    Perturb(PerturbArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Symmetric,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BandingArg {
    Quantile,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorpusArg {
    Tones,
    Noise,
    Tonal,
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Directory for CSV and PGM outputs.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct WindowArgs {
    /// Transform length.
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    /// Frame hop; defaults to n/2.
    #[arg(long)]
    pub stride: Option<usize>,
    /// Window shape: 0 rectangular, 0.46 Hamming, 0.5 Hann.
    #[arg(long, default_value_t = HAMMING_ALPHA)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Periodic)]
    pub window_mode: ModeArg,
}

impl WindowArgs {
    pub fn window(&self) -> stft_phase::Result<WindowSpec> {
        let mode = match self.window_mode {
            ModeArg::Symmetric => WindowMode::Symmetric,
            ModeArg::Periodic => WindowMode::Periodic,
        };
        WindowSpec::new(self.alpha, mode, self.n)
    }

    pub fn config(&self) -> stft_phase::Result<StftConfig> {
        let window = self.window()?;
        StftConfig::with_stride(window, self.stride.unwrap_or(self.n / 2))
    }
}

#[derive(Debug, Clone, Args)]
pub struct HistArgs {
    /// Phase cells per histogram.
    #[arg(long, default_value_t = DEFAULT_PHASE_CELLS)]
    pub phase_bins: usize,
    /// Magnitude bands.
    #[arg(long, default_value_t = DEFAULT_MAGNITUDE_BANDS)]
    pub mag_bands: usize,
    #[arg(long, value_enum, default_value_t = BandingArg::Quantile)]
    pub banding: BandingArg,
}

impl HistArgs {
    pub fn banding(&self) -> Banding {
        match self.banding {
            BandingArg::Quantile => Banding::Quantile,
            BandingArg::Log => Banding::LogSpaced,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[arg(required = true)]
    pub wavs: Vec<PathBuf>,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub hist: HistArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct Fig2Args {
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    /// Tone frequencies per bin.
    #[arg(long, default_value_t = 500)]
    pub points: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct Fig3Args {
    /// Tone phases per curve.
    #[arg(long, default_value_t = 720)]
    pub points: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ToneArgs {
    #[arg(long, default_value_t = 10_000)]
    pub count: usize,
    #[arg(long, value_enum, default_value_t = CorpusArg::Tones)]
    pub corpus: CorpusArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub window: WindowArgs,
    #[arg(long, default_value_t = DEFAULT_PHASE_CELLS)]
    pub phase_bins: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// WAV inputs; a synthetic corpus is used when none are given.
    pub wavs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = CorpusArg::Tonal)]
    pub corpus: CorpusArg,
    #[arg(long, default_value_t = 4000)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    /// Bins to track.
    #[arg(long, value_delimiter = ',', default_value = "150,200,240")]
    pub bins: Vec<usize>,
    /// Shape parameters; defaults to 0, 0.05, ..., 0.5 plus 0.46.
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_PHASE_CELLS)]
    pub phase_bins: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct QuantArgs {
    /// WAV inputs; a synthetic corpus is used when none are given.
    pub wavs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = CorpusArg::Tones)]
    pub corpus: CorpusArg,
    #[arg(long, default_value_t = 10_000)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sample rate assumed for synthetic corpora.
    #[arg(long, default_value_t = 48_000.0)]
    pub sample_rate: f64,
    /// Cell counts, as `lo-hi`.
    #[arg(long, default_value = "2-8", value_parser = parse_cells)]
    pub cells: (usize, usize),
    /// Train on even frames, evaluate on odd ones.
    #[arg(long)]
    pub holdout: bool,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PerturbArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    #[arg(long)]
    pub bin: usize,
    /// Half-width of the uniform phase noise, radians.
    #[arg(long, default_value_t = std::f64::consts::PI)]
    pub halfwidth: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub window: WindowArgs,
}

fn parse_cells(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = match s.split_once('-') {
        Some((a, b)) => (a.trim().parse(), b.trim().parse()),
        None => (s.trim().parse(), s.trim().parse()),
    };
    match (lo, hi) {
        (Ok(lo), Ok(hi)) if 2 <= lo && lo <= hi => Ok((lo, hi)),
        _ => Err(format!("expected a range like 2-8, got {s:?}")),
    }
}
