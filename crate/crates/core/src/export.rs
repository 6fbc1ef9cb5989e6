//! CSV and PGM writers.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::stats::{GrayImage, PerFrequencyHistogramSet, PerMagnitudeHistogramSet};

fn centre_header(first: &[&str], centers: &[f64]) -> Vec<String> {
    first
        .iter()
        .map(|s| s.to_string())
        .chain(centers.iter().map(|c| format!("{c:.6}")))
        .collect()
}

/// One row per bin; the header names each phase cell by its centre in radians.
pub fn write_per_frequency_csv<W: Write>(set: &PerFrequencyHistogramSet, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let Some((_, first)) = set.iter().next() else {
        return Ok(());
    };
    w.write_record(centre_header(&["bin"], &first.centers()))?;
    for (k, h) in set.iter() {
        w.write_record(
            std::iter::once(k.to_string()).chain(h.counts().iter().map(u64::to_string)),
        )?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// One row per magnitude band with its bounds (`lower` exclusive, `upper`
/// inclusive, empty for the open ends).
pub fn write_per_magnitude_csv<W: Write>(set: &PerMagnitudeHistogramSet, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(centre_header(
        &["band", "lower", "upper"],
        &set.bands()[0].centers(),
    ))?;
    let t = set.thresholds();
    for (b, h) in set.bands().iter().enumerate() {
        let lower = if b == 0 {
            String::new()
        } else {
            format!("{:e}", t[b - 1])
        };
        let upper = t.get(b).map(|v| format!("{v:e}")).unwrap_or_default();
        let row = [b.to_string(), lower, upper]
            .into_iter()
            .chain(h.counts().iter().map(u64::to_string));
        w.write_record(row)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn write_pgm(path: impl AsRef<Path>, image: &GrayImage) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, image.to_pgm()).map_err(|e| Error::io(path, e))
}
