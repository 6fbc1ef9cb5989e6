use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use stft_phase::experiments::{self as exp, SweepSource};
use stft_phase::quant::{run_band_quantization_experiment, QuantExperimentOptions};
use stft_phase::signal::{make_corpus, CorpusKind, CorpusSpec};
use stft_phase::stats::{
    accumulate_per_frequency, accumulate_per_magnitude, PerFrequencyHistogramSet,
};
use stft_phase::stft::{bin_frequency_hz, perturb_phase, stft, stft_frames, StftFrameGrid};
use stft_phase::wav::{read_wav, write_wav_pcm16, AudioBuffer};

use crate::args::*;
use crate::output::{csv_writer, file, pgm, pi_units};

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn corpus_kind(c: CorpusArg) -> CorpusKind {
    match c {
        CorpusArg::Tones => CorpusKind::RandomTones,
        CorpusArg::Noise => CorpusKind::Noise,
        CorpusArg::Tonal => CorpusKind::TonalMixture,
    }
}

/// Reads every file it can; failures are reported and skipped.
fn read_all(paths: &[PathBuf]) -> Result<Vec<(PathBuf, AudioBuffer)>> {
    let mut ok = Vec::new();
    for p in paths {
        match read_wav(p) {
            Ok(a) => ok.push((p.clone(), a)),
            Err(e) => eprintln!("skipping {}: {e}", p.display()),
        }
    }
    if ok.is_empty() {
        bail!("none of the {} input files could be read", paths.len());
    }
    Ok(ok)
}

/// STFT of each file, concatenated. Files too short for one frame are skipped.
fn grids(audio: &[(PathBuf, AudioBuffer)], window: &WindowArgs) -> Result<(StftFrameGrid, f64)> {
    let config = window.config()?;
    let rate = audio[0].1.sample_rate;
    let mut all: Option<StftFrameGrid> = None;
    for (path, a) in audio {
        if a.sample_rate != rate {
            eprintln!(
                "note: {} is at {} Hz, frequencies are reported for {rate} Hz",
                path.display(),
                a.sample_rate
            );
        }
        let grid = match stft(&a.samples, &config) {
            Ok(g) => g,
            Err(e) => {
                eprintln!("skipping {}: {e}", path.display());
                continue;
            }
        };
        all = Some(match all {
            Some(acc) => acc.concat(&grid)?,
            None => grid,
        });
    }
    let grid = all.context("no input is long enough for one frame")?;
    Ok((grid, rate as f64))
}

fn write_ubar(
    set: &PerFrequencyHistogramSet,
    rate: Option<f64>,
    args: &OutArgs,
    name: &str,
) -> Result<Vec<(usize, f64)>> {
    let mut w = csv_writer(&args.out_dir, name)?;
    w.write_record(["bin", "frequency_hz", "ubar"])?;
    let mut ranked = Vec::new();
    for (k, u) in set.ubar() {
        let hz = rate
            .map(|r| format!("{:.3}", bin_frequency_hz(k, set.transform_len(), r)))
            .unwrap_or_default();
        let u_text = u.map(|u| format!("{u:.6}")).unwrap_or_default();
        w.write_record([k.to_string(), hz, u_text])?;
        if let Some(u) = u {
            ranked.push((k, u));
        }
    }
    w.flush()?;
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(ranked)
}

pub fn analyze(a: &AnalyzeArgs) -> Result<ExitCode> {
    let audio = read_all(&a.wavs)?;
    let (grid, rate) = grids(&audio, &a.window)?;
    let per_freq = accumulate_per_frequency(&grid, a.hist.phase_bins)?;
    let per_mag =
        accumulate_per_magnitude(&grid, a.hist.phase_bins, a.hist.mag_bands, a.hist.banding())?;
    let dir = &a.out.out_dir;
    pgm(dir, "per_frequency.pgm", &per_freq.render())?;
    pgm(dir, "per_magnitude.pgm", &per_mag.render(256))?;
    stft_phase::export::write_per_frequency_csv(&per_freq, file(dir, "per_frequency.csv")?)?;
    stft_phase::export::write_per_magnitude_csv(&per_mag, file(dir, "per_magnitude.csv")?)?;
    let ranked = write_ubar(&per_freq, Some(rate), &a.out, "ubar.csv")?;
    println!(
        "{} frames from {} file(s), N = {}",
        grid.frames(),
        audio.len(),
        grid.len()
    );
    println!("highest nonuniformity:");
    println!("{:>6} {:>12} {:>8}", "bin", "Hz", "ubar");
    for (k, u) in ranked.iter().take(10) {
        println!(
            "{k:>6} {:>12.1} {u:>8.4}",
            bin_frequency_hz(*k, grid.len(), rate)
        );
    }
    Ok(ExitCode::SUCCESS)
}

pub fn table1(a: &OutArgs) -> Result<ExitCode> {
    let rows = exp::table1();
    let mut w = csv_writer(&a.out_dir, "table1.csv")?;
    w.write_record([
        "example",
        "omega_k",
        "omega_t",
        "n",
        "bin",
        "ratio",
        "angle",
        "expected_ratio",
        "expected_angle",
        "ok",
    ])?;
    println!(
        "{:>3} {:>6} {:>6} {:>5} {:>8} {:>8} {:>9} {:>8}",
        "ex", "w_k", "w_t", "N", "ratio", "angle", "want", "want"
    );
    for r in &rows {
        let e = &r.example;
        w.write_record([
            e.label.to_string(),
            format!("{:.2}", e.omega_k_pi),
            format!("{:.2}", e.omega_t_pi),
            e.n.to_string(),
            r.bin.to_string(),
            format!("{:.4}", r.ratio),
            format!("{:.4}", r.angle_pi),
            format!("{:.2}", e.ratio),
            format!("{:.2}", e.angle_pi),
            r.ok().to_string(),
        ])?;
        println!(
            "{:>3} {:>5.2}π {:>5.2}π {:>5} {:>8.3} {:>7.3}π {:>9.2} {:>7.2}π{}",
            e.label,
            e.omega_k_pi,
            e.omega_t_pi,
            e.n,
            r.ratio,
            r.angle_pi,
            e.ratio,
            e.angle_pi,
            if r.ok() { "" } else { "  MISMATCH" }
        );
    }
    w.flush()?;
    Ok(if rows.iter().all(|r| r.ok()) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_MISMATCH)
    })
}

pub fn fig2(a: &Fig2Args) -> Result<ExitCode> {
    if a.n < 4 || !a.n.is_multiple_of(2) || a.points == 0 {
        eprintln!("--n must be even and at least 4, --points positive");
        return Ok(ExitCode::from(EXIT_USAGE));
    }
    let mut w = csv_writer(&a.out.out_dir, "fig2.csv")?;
    w.write_record(["bin", "omega_t", "ratio", "angle"])?;
    for p in exp::fig2_curves(a.n, a.points) {
        w.write_record([
            p.bin.to_string(),
            pi_units(p.omega_t),
            format!("{:.6}", p.ratio),
            pi_units(p.angle),
        ])?;
    }
    w.flush()?;
    let mut ok = true;
    for k in 1..a.n / 2 {
        let (ratio, angle) = exp::fig2_anchor(k, a.n);
        if (ratio - 1.0).abs() > 1e-6 || (angle - PI / 2.0).abs() > 1e-6 {
            ok = false;
            eprintln!(
                "anchor failed at k = {k}: ratio {ratio}, angle {}π",
                angle / PI
            );
        }
    }
    println!(
        "{} rows; on-bin anchors {}",
        (a.n / 2 - 1) * a.points,
        if ok { "hold" } else { "FAIL" }
    );
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_MISMATCH)
    })
}

pub fn fig3(a: &Fig3Args) -> Result<ExitCode> {
    if a.points < 2 {
        eprintln!("--points must be at least 2");
        return Ok(ExitCode::from(EXIT_USAGE));
    }
    let mut w = csv_writer(&a.out.out_dir, "fig3.csv")?;
    w.write_record(["example", "theta", "phi"])?;
    for (ex, curve) in exp::fig3_curves(a.points) {
        for (theta, phi) in &curve {
            w.write_record([ex.label.to_string(), pi_units(*theta), pi_units(*phi)])?;
        }
        println!(
            "example {}: largest deviation from a line {:.4}π",
            ex.label,
            exp::linear_fit_deviation(&curve) / PI
        );
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

pub fn tone_experiment(a: &ToneArgs) -> Result<ExitCode> {
    let window = a.window.window()?;
    let dir = &a.out.out_dir;
    if a.corpus != CorpusArg::Tones {
        let spec = CorpusSpec::new(corpus_kind(a.corpus), a.count, window.length, a.seed)?;
        let set = exp::corpus_per_frequency(&spec, &window, a.phase_bins)?;
        pgm(dir, "tone_histogram.pgm", &set.render())?;
        stft_phase::export::write_per_frequency_csv(&set, file(dir, "tone_histogram.csv")?)?;
        let ranked = write_ubar(&set, None, &a.out, "tone_ubar.csv")?;
        println!("largest ubar {:.4} at bin {}", ranked[0].1, ranked[0].0);
        return Ok(ExitCode::SUCCESS);
    }
    let result = exp::tone_experiment(a.count, &window, a.seed, a.phase_bins)?;
    pgm(dir, "tone_histogram.pgm", &result.histograms.render())?;
    stft_phase::export::write_per_frequency_csv(
        &result.histograms,
        file(dir, "tone_histogram.csv")?,
    )?;
    write_ubar(&result.histograms, None, &a.out, "tone_ubar.csv")?;
    let mut w = csv_writer(dir, "tone_peaks.csv")?;
    w.write_record([
        "bin",
        "fraction_below",
        "argmax",
        "predicted_low",
        "predicted_high",
        "peak_low",
        "peak_high",
        "distance_cells",
    ])?;
    let (mut qualifying, mut hits) = (0, 0);
    for p in &result.peaks {
        let h = result.histograms.bin(p.bin);
        w.write_record([
            p.bin.to_string(),
            format!("{:.4}", p.fraction_below),
            pi_units(p.argmax_phase),
            pi_units(p.predicted[0]),
            pi_units(p.predicted[1]),
            pi_units(h.cell_center(p.peak_cells[0])),
            pi_units(h.cell_center(p.peak_cells[1])),
            p.distance_cells.to_string(),
        ])?;
        if p.dominated(0.9) {
            qualifying += 1;
            hits += usize::from(p.distance_cells <= 1);
        }
    }
    w.flush()?;
    println!("{hits} of {qualifying} one-sided bins peak within one cell of the prediction");
    Ok(ExitCode::SUCCESS)
}

pub fn alpha_sweep(a: &SweepArgs) -> Result<ExitCode> {
    let alphas = a.alphas.clone().unwrap_or_else(exp::default_alpha_grid);
    let signal: Vec<f64>;
    let source = if a.wavs.is_empty() {
        SweepSource::Corpus(CorpusSpec::new(
            corpus_kind(a.corpus),
            a.count,
            a.n,
            a.seed,
        )?)
    } else {
        signal = read_all(&a.wavs)?
            .into_iter()
            .flat_map(|(_, b)| b.samples)
            .collect();
        SweepSource::Signal(&signal)
    };
    if let Some(&k) = a.bins.iter().find(|&&k| k == 0 || k >= a.n / 2) {
        eprintln!("bin {k} is outside 1..{}", a.n / 2);
        return Ok(ExitCode::from(EXIT_USAGE));
    }
    let rows = exp::alpha_sweep(source, a.n, &a.bins, &alphas, a.phase_bins)?;
    let mut w = csv_writer(&a.out.out_dir, "alpha_sweep.csv")?;
    let mut header = vec!["alpha".to_string(), "sidelobe_db".to_string()];
    header.extend(a.bins.iter().map(|k| format!("ubar_{k}")));
    w.write_record(&header)?;
    println!("{}", header.join("\t"));
    for r in &rows {
        let mut rec = vec![format!("{:.2}", r.alpha), format!("{:.2}", r.sidelobe_db)];
        rec.extend(r.ubar.iter().map(|(_, u)| format!("{u:.4}")));
        println!("{}", rec.join("\t"));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

pub fn quant_experiment(a: &QuantArgs) -> Result<ExitCode> {
    let (grid, rate) = if a.wavs.is_empty() {
        let spec = CorpusSpec::new(corpus_kind(a.corpus), a.count, a.window.n, a.seed)?;
        (
            stft_frames(&make_corpus(&spec), a.window.window()?)?,
            a.sample_rate,
        )
    } else {
        grids(&read_all(&a.wavs)?, &a.window)?
    };
    let options = QuantExperimentOptions {
        cells: a.cells.0..=a.cells.1,
        holdout: a.holdout,
        ..Default::default()
    };
    let report = run_band_quantization_experiment(&grid, rate, &options)?;
    print!("{}", report.to_text());
    std::fs::write(
        crate::output::out_path(&a.out.out_dir, "quant.csv")?,
        report.to_csv()?,
    )?;
    Ok(ExitCode::SUCCESS)
}

pub fn perturb(a: &PerturbArgs) -> Result<ExitCode> {
    let n = a.window.n;
    if a.bin == 0 || a.bin >= n / 2 {
        eprintln!("--bin must lie in 1..{}", n / 2);
        return Ok(ExitCode::from(EXIT_USAGE));
    }
    let audio = read_wav(&a.input)?;
    let config = a.window.config()?;
    let grid = stft(&audio.samples, &config)?;
    let noisy = perturb_phase(&grid, a.bin, a.halfwidth, a.seed)?;
    let out = stft_phase::stft::istft_ola(&noisy)?;
    write_wav_pcm16(&a.output, &out, audio.sample_rate)?;
    println!(
        "bin {} ({:.1} Hz) perturbed by up to ±{:.3} rad over {} frames",
        a.bin,
        bin_frequency_hz(a.bin, n, audio.sample_rate as f64),
        a.halfwidth,
        grid.frames()
    );
    Ok(ExitCode::SUCCESS)
}
