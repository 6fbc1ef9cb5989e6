use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use stft_phase::stats::GrayImage;

pub fn out_path(dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir.join(name))
}

pub fn csv_writer(dir: &Path, name: &str) -> Result<csv::Writer<fs::File>> {
    let path = out_path(dir, name)?;
    csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))
}

pub fn pgm(dir: &Path, name: &str, image: &GrayImage) -> Result<()> {
    stft_phase::export::write_pgm(out_path(dir, name)?, image)?;
    Ok(())
}

pub fn file(dir: &Path, name: &str) -> Result<fs::File> {
    let path = out_path(dir, name)?;
    fs::File::create(&path).with_context(|| format!("creating {}", path.display()))
}

/// Radians to units of π, rounded for stable text output.
pub fn pi_units(x: f64) -> String {
    format!("{:.6}", x / std::f64::consts::PI)
}
