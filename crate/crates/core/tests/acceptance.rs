//! Acceptance checks. Run with
//! `cargo test -p stft-phase --test acceptance`; prints one line per check
//! and exits nonzero if any fails.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use stft_phase::analytic::{coefficient, pdf_cell_masses, tone_to_stft_phase, AnalyticContext};
use stft_phase::angle::principal_angle_pi;
use stft_phase::experiments::{
    alpha_sweep, corpus_per_frequency, default_alpha_grid, table1, tone_experiment, SweepSource,
    TABLE1,
};
use stft_phase::quant::{run_band_quantization_experiment, QuantExperimentOptions};
use stft_phase::rng::Stream;
use stft_phase::signal::{make_corpus, CorpusKind, CorpusSpec};
use stft_phase::stats::{cell_distance, nonuniformity_ubar, PhaseHistogram};
use stft_phase::stft::{istft_ola, stft, stft_frames, StftConfig};
use stft_phase::window::{make_window, WindowMode, WindowSpec};

const SEED: u64 = 2024;

type Check = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn example_rows() -> Outcome {
    let start = Instant::now();
    let rows = table1();
    let elapsed = start.elapsed().as_secs_f64();
    let mut detail = Vec::new();
    for r in &rows {
        let flag = if r.ok() { "" } else { " MISMATCH" };
        detail.push(format!(
            "ex{} {:.3}/{:.3}pi (want {:.2}/{:.2}pi){flag}",
            r.example.label, r.ratio, r.angle_pi, r.example.ratio, r.example.angle_pi
        ));
    }
    detail.push(format!("{elapsed:.3}s"));
    outcome(
        rows.iter().all(|r| r.ok()) && elapsed < 1.0,
        detail.join("; "),
    )
}

fn on_bin_identity() -> Outcome {
    let n = 512;
    let worst = |alpha: f64, mode: WindowMode| {
        let mut worst = 0.0f64;
        for k in 1..n / 2 {
            let omega = TAU * k as f64 / n as f64;
            let ctx = AnalyticContext::new(omega, k, n, alpha, mode).unwrap();
            for j in 0..100 {
                let theta = -PI + TAU * j as f64 / 100.0;
                worst =
                    worst.max(principal_angle_pi(tone_to_stft_phase(&ctx, theta) - theta).abs());
            }
        }
        worst
    };
    let rect = worst(0.0, WindowMode::Periodic);
    let periodic = worst(0.46, WindowMode::Periodic);
    let symmetric = worst(0.46, WindowMode::Symmetric);
    outcome(
        rect <= 1e-9 && periodic <= 1e-9 && symmetric > 0.0 && symmetric <= 0.01,
        format!("rectangular {rect:.1e}, periodic Hamming {periodic:.1e}, symmetric Hamming {symmetric:.1e} rad"),
    )
}

fn closed_form_matches_direct_sum() -> Outcome {
    let start = Instant::now();
    let mut s = Stream::new(SEED, 3);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = 2 * (2 + (s.unit() * 511.0) as usize);
        let k = 1 + (s.unit() * (n / 2 - 1) as f64) as usize;
        let omega_t = s.uniform_closed(0.0, PI);
        let theta = s.uniform(-PI, PI);
        let alpha = s.uniform_closed(0.0, 0.5);
        let mode = if s.unit() < 0.5 {
            WindowMode::Symmetric
        } else {
            WindowMode::Periodic
        };
        let ctx = AnalyticContext::new(omega_t, k, n, alpha, mode).unwrap();
        let w = make_window(&WindowSpec::new(alpha, mode, n).unwrap()).unwrap();
        let direct: Complex64 = (0..n)
            .map(|i| {
                let x = (omega_t * i as f64 + theta).cos();
                Complex64::from_polar(w[i] * x, -TAU * (k * i) as f64 / n as f64)
            })
            .sum();
        let err = (coefficient(&ctx, theta) - direct).norm() / direct.norm().max(1.0);
        worst = worst.max(err);
    }
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-8 && elapsed < 10.0,
        format!("max relative error {worst:.1e}, {elapsed:.2}s"),
    )
}

fn peak_locations() -> Outcome {
    let start = Instant::now();
    let rect = tone_experiment(10_000, &WindowSpec::rectangular(512).unwrap(), SEED, 64).unwrap();
    let hamming = tone_experiment(10_000, &WindowSpec::hamming(512).unwrap(), SEED, 64).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let mut qualifying = 0;
    let mut rect_misses = Vec::new();
    let mut hamming_misses = Vec::new();
    for (r, h) in rect.peaks.iter().zip(&hamming.peaks) {
        if !r.dominated(0.9) {
            continue;
        }
        qualifying += 1;
        if r.distance_cells > 1 {
            rect_misses.push(r.bin);
        }
        if r.peak_cells
            .iter()
            .zip(&h.peak_cells)
            .any(|(&a, &b)| cell_distance(a, b, 64) > 1)
        {
            hamming_misses.push(h.bin);
        }
    }
    outcome(
        qualifying > 0 && rect_misses.is_empty() && hamming_misses.is_empty() && elapsed < 120.0,
        format!(
            "{qualifying} qualifying bins, rectangular misses {rect_misses:?}, Hamming vs rectangular peak-cell misses {hamming_misses:?}, {elapsed:.1}s"
        ),
    )
}

fn density_matches_sampling() -> Outcome {
    let cells = 64;
    let draws = 1_000_000;
    let mut detail = Vec::new();
    let mut pass = true;
    for ex in TABLE1 {
        let ctx = ex.context();
        let masses = pdf_cell_masses(&ctx, 1 << 16, cells).unwrap();
        let mut s = Stream::new(SEED, 10 + ex.label as u64);
        let hist = PhaseHistogram::from_phases(
            cells,
            (0..draws).map(|_| tone_to_stft_phase(&ctx, s.uniform(-PI, PI))),
        )
        .unwrap();
        let tv = 0.5
            * hist
                .probabilities()
                .iter()
                .zip(&masses)
                .map(|(p, q)| (p - q).abs())
                .sum::<f64>();
        pass &= tv <= 0.02;
        detail.push(format!("ex{} {tv:.4}", ex.label));
    }
    outcome(pass, format!("total variation: {}", detail.join(", ")))
}

fn nonuniformity_anchors() -> Outcome {
    let m = 64;
    let uniform = nonuniformity_ubar(&PhaseHistogram::from_counts(vec![7; m]).unwrap()).unwrap();
    let mut delta = vec![0; m];
    delta[m / 2] = 1000;
    let delta = nonuniformity_ubar(&PhaseHistogram::from_counts(delta).unwrap()).unwrap();
    let spec = CorpusSpec::new(CorpusKind::Noise, 40_000, 512, SEED).unwrap();
    let set = corpus_per_frequency(&spec, &WindowSpec::hamming(512).unwrap(), m).unwrap();
    let noise = set
        .ubar()
        .into_iter()
        .filter_map(|(_, u)| u)
        .fold(0.0, f64::max);
    outcome(
        uniform == 0.0 && delta == 1.0 && noise <= 0.05,
        format!("uniform {uniform}, central delta {delta}, noise max {noise:.4}"),
    )
}

fn window_shape_trend() -> Outcome {
    let bins = [150, 200, 240];
    let spec = CorpusSpec::new(CorpusKind::TonalMixture, 4000, 512, SEED).unwrap();
    let alphas = default_alpha_grid();
    let rows = alpha_sweep(SweepSource::Corpus(spec), 512, &bins, &alphas, 64).unwrap();
    let at = |a: f64| rows.iter().find(|r| (r.alpha - a).abs() < 1e-12).unwrap();
    let (r0, rh, r5) = (at(0.0), at(0.46), at(0.5));
    let mut pass = true;
    let mut detail = Vec::new();
    for (i, k) in bins.iter().enumerate() {
        let (u0, uh, u5) = (r0.ubar[i].1, rh.ubar[i].1, r5.ubar[i].1);
        pass &= u0 > uh && uh > u5;
        detail.push(format!("k={k} {u0:.3}>{uh:.3}>{u5:.3}"));
    }
    let monotone = rows.windows(2).all(|w| w[1].sidelobe_db < w[0].sidelobe_db);
    detail.push(format!(
        "sidelobes {:.1} to {:.1} dB monotone={monotone}",
        rows[0].sidelobe_db,
        rows[rows.len() - 1].sidelobe_db
    ));
    outcome(pass && monotone, detail.join("; "))
}

fn quantization() -> Outcome {
    let n = 512;
    let corpus = make_corpus(&CorpusSpec::new(CorpusKind::RandomTones, 10_000, n, SEED).unwrap());
    let grid = stft_frames(&corpus, WindowSpec::rectangular(n).unwrap()).unwrap();
    let report =
        run_band_quantization_experiment(&grid, 48_000.0, &QuantExperimentOptions::default())
            .unwrap();
    let all_le = report.records.iter().all(|r| r.rms_pdf_opt <= r.rms_urq);
    let avg = report.average_reduction_percent();
    let per_c: Vec<String> = report
        .records
        .iter()
        .map(|r| format!("C={} {:.1}%", r.cells, r.reduction_percent))
        .collect();
    outcome(
        all_le && avg > 0.0,
        format!("average reduction {avg:.2}% ({})", per_c.join(", ")),
    )
}

fn reconstruction() -> Outcome {
    let n = 512;
    let mut s = Stream::new(SEED, 9);
    let x: Vec<f64> = (0..n * 40).map(|_| s.uniform(-1.0, 1.0)).collect();
    let mut detail = Vec::new();
    let mut pass = true;
    for (name, window) in [
        ("Hann", WindowSpec::hann(n).unwrap()),
        ("Hamming", WindowSpec::hamming(n).unwrap()),
    ] {
        let config = StftConfig::with_stride(window, n / 2).unwrap();
        let y = istft_ola(&stft(&x, &config).unwrap()).unwrap();
        let interior = n..y.len() - n;
        let scale = x[interior.clone()]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let err = interior.map(|i| (y[i] - x[i]).abs()).fold(0.0, f64::max) / scale;
        pass &= err <= 1e-6;
        detail.push(format!("{name} {err:.1e}"));
    }
    outcome(pass, detail.join(", "))
}

fn main() -> ExitCode {
    let checks: [Check; 9] = [
        ("example table", example_rows),
        ("on-bin phase identity", on_bin_identity),
        ("closed form vs direct STFT", closed_form_matches_direct_sum),
        ("histogram peak locations", peak_locations),
        ("density vs sampled histogram", density_matches_sampling),
        ("nonuniformity anchors", nonuniformity_anchors),
        ("window-shape trend", window_shape_trend),
        ("quantization", quantization),
        ("overlap-add reconstruction", reconstruction),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let o = check();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{status}] {name}: {}", i + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "{} of {} criteria pass",
        checks.len() - failed,
        checks.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
