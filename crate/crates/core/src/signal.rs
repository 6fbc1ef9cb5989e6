//! Synthetic corpora. Item `i` of a corpus is drawn from its own ChaCha8
//! stream (see [`crate::rng`]), so corpora are reproducible across platforms
//! and can be generated in parallel.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::Stream;

/// `x_i = cos(ω_t i + θ)` for `i = 0..length`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneParams {
    pub omega_t: f64,
    pub theta: f64,
    pub length: usize,
}

pub fn make_tone(p: &ToneParams) -> Vec<f64> {
    (0..p.length)
        .map(|i| (p.omega_t * i as f64 + p.theta).cos())
        .collect()
}

/// Tones in a [`CorpusKind::TonalMixture`] frame.
pub const MIXTURE_TONES: usize = 4;
/// Upper frequency limit of the mixture tones, radians per sample.
pub const MIXTURE_MAX_OMEGA: f64 = 0.25 * PI;
/// Peak amplitude of the uniform noise floor under the mixture tones.
pub const MIXTURE_NOISE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorpusKind {
    /// One unit tone per frame, `ω_t ~ U[0, π]`, `θ ~ U[-π, π)`.
    RandomTones,
    /// I.i.d. samples uniform on `[-1, 1]`.
    Noise,
    /// Strong low-frequency tones over a weak noise floor: a stand-in for
    /// audio whose high bins are dominated by distant tonal leakage.
    TonalMixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusSpec {
    pub kind: CorpusKind,
    pub count: usize,
    /// Samples per frame.
    pub n: usize,
    pub seed: u64,
}

impl CorpusSpec {
    pub fn new(kind: CorpusKind, count: usize, n: usize, seed: u64) -> Result<Self> {
        if count == 0 || n == 0 {
            return Err(Error::Config(
                "corpus needs at least one non-empty item".into(),
            ));
        }
        Ok(CorpusSpec {
            kind,
            count,
            n,
            seed,
        })
    }
}

/// Parameters of tone `index` of a random-tone corpus.
pub fn corpus_tone(spec: &CorpusSpec, index: usize) -> ToneParams {
    let mut rng = Stream::new(spec.seed, index as u64);
    draw_tone(&mut rng, spec.n)
}

fn draw_tone(rng: &mut Stream, length: usize) -> ToneParams {
    let omega_t = rng.uniform_closed(0.0, PI);
    let theta = rng.uniform(-PI, PI);
    ToneParams {
        omega_t,
        theta,
        length,
    }
}

pub fn make_item(spec: &CorpusSpec, index: usize) -> Vec<f64> {
    let mut rng = Stream::new(spec.seed, index as u64);
    match spec.kind {
        CorpusKind::RandomTones => make_tone(&draw_tone(&mut rng, spec.n)),
        CorpusKind::Noise => (0..spec.n).map(|_| rng.uniform_closed(-1.0, 1.0)).collect(),
        CorpusKind::TonalMixture => {
            let mut x = vec![0.0; spec.n];
            for _ in 0..MIXTURE_TONES {
                let omega = rng.uniform_closed(0.0, MIXTURE_MAX_OMEGA);
                let theta = rng.uniform(-PI, PI);
                for (i, v) in x.iter_mut().enumerate() {
                    *v += (omega * i as f64 + theta).cos();
                }
            }
            for v in x.iter_mut() {
                *v += MIXTURE_NOISE * rng.uniform_closed(-1.0, 1.0);
            }
            x
        }
    }
}

pub fn make_corpus(spec: &CorpusSpec) -> Vec<Vec<f64>> {
    (0..spec.count)
        .into_par_iter()
        .map(|i| make_item(spec, i))
        .collect()
}
