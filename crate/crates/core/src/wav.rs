//! Minimal RIFF/WAVE reader for 16-bit PCM and 32-bit float files, plus a
//! 16-bit PCM writer.
//!
//! 16-bit samples are scaled by `1/32768`, so full-scale positive is
//! `32767/32768`. Stereo is averaged to mono. Chunks other than `fmt ` and
//! `data` are skipped.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

const FORMAT_PCM: u16 = 0x0001;
const FORMAT_FLOAT: u16 = 0x0003;
const FORMAT_EXTENSIBLE: u16 = 0xfffe;

#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    /// Channel count of the source file before downmixing.
    pub source_channels: u16,
}

impl AudioBuffer {
    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_wav(&bytes)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < len {
            return Err(Error::Parse {
                offset: self.pos as u64,
                reason: format!(
                    "truncated {what}: need {len} bytes, {} left",
                    self.bytes.len() - self.pos
                ),
            });
        }
        let s = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

struct Format {
    tag: u16,
    channels: u16,
    sample_rate: u32,
    bits: u16,
}

pub fn parse_wav(bytes: &[u8]) -> Result<AudioBuffer> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(4, "RIFF header")? != b"RIFF" {
        return Err(Error::Parse {
            offset: 0,
            reason: "missing RIFF signature".into(),
        });
    }
    cur.u32("RIFF size")?;
    if cur.take(4, "WAVE signature")? != b"WAVE" {
        return Err(Error::Parse {
            offset: 8,
            reason: "missing WAVE signature".into(),
        });
    }
    let mut format: Option<Format> = None;
    loop {
        if cur.pos == bytes.len() {
            return Err(Error::Parse {
                offset: cur.pos as u64,
                reason: "no data chunk".into(),
            });
        }
        let id = cur.take(4, "chunk id")?;
        let size = cur.u32("chunk size")? as usize;
        let start = cur.pos;
        match id {
            b"fmt " => {
                let body = cur.take(size, "fmt chunk")?;
                format = Some(parse_format(body, start)?);
            }
            b"data" => {
                let fmt = format.ok_or(Error::Parse {
                    offset: start as u64 - 8,
                    reason: "data chunk before fmt chunk".into(),
                })?;
                let body = cur.take(size, "data chunk")?;
                return decode(body, &fmt);
            }
            _ => {
                cur.take(size, "chunk")?;
            }
        }
        if size % 2 == 1 && cur.pos < bytes.len() {
            cur.pos += 1;
        }
    }
}

fn parse_format(body: &[u8], offset: usize) -> Result<Format> {
    let mut cur = Cursor {
        bytes: body,
        pos: 0,
    };
    let wrap = |e: Error| match e {
        Error::Parse { offset: o, reason } => Error::Parse {
            offset: o + offset as u64,
            reason,
        },
        other => other,
    };
    let mut tag = cur.u16("format tag").map_err(wrap)?;
    let channels = cur.u16("channel count").map_err(wrap)?;
    let sample_rate = cur.u32("sample rate").map_err(wrap)?;
    cur.u32("byte rate").map_err(wrap)?;
    cur.u16("block align").map_err(wrap)?;
    let bits = cur.u16("bits per sample").map_err(wrap)?;
    if tag == FORMAT_EXTENSIBLE {
        cur.u16("extension size").map_err(wrap)?;
        cur.u16("valid bits").map_err(wrap)?;
        cur.u32("channel mask").map_err(wrap)?;
        // first two bytes of the subformat GUID carry the plain format tag
        tag = cur.u16("subformat").map_err(wrap)?;
    }
    let supported = matches!((tag, bits), (FORMAT_PCM, 16) | (FORMAT_FLOAT, 32));
    if !supported {
        return Err(Error::UnsupportedFormat { tag, bits });
    }
    if !(1..=2).contains(&channels) {
        return Err(Error::Unsupported(format!(
            "{channels} channels; only mono and stereo are read"
        )));
    }
    if sample_rate == 0 {
        return Err(Error::Parse {
            offset: offset as u64 + 4,
            reason: "zero sample rate".into(),
        });
    }
    Ok(Format {
        tag,
        channels,
        sample_rate,
        bits,
    })
}

fn decode(body: &[u8], fmt: &Format) -> Result<AudioBuffer> {
    let width = (fmt.bits / 8) as usize;
    let channels = fmt.channels as usize;
    let frame = width * channels;
    let sample = |b: &[u8]| -> f64 {
        match fmt.tag {
            FORMAT_PCM => i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0,
            _ => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
        }
    };
    let samples: Vec<f64> = body
        .chunks_exact(frame)
        .map(|f| f.chunks_exact(width).map(sample).sum::<f64>() / channels as f64)
        .collect();
    if let Some(pos) = samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::Parse {
            offset: (pos * frame) as u64,
            reason: "non-finite sample".into(),
        });
    }
    Ok(AudioBuffer {
        samples,
        sample_rate: fmt.sample_rate,
        source_channels: fmt.channels,
    })
}

/// Encodes interleaved samples as 16-bit PCM. Values are scaled by 32768,
/// rounded and clipped.
pub fn encode_wav_pcm16(samples: &[f64], channels: u16, sample_rate: u32) -> Vec<u8> {
    let data_len = (samples.len() * 2) as u32;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&channels.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(sample_rate * channels as u32 * 2).to_le_bytes());
    out.extend_from_slice(&(channels * 2).to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in samples {
        let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn write_wav_pcm16(path: impl AsRef<Path>, samples: &[f64], sample_rate: u32) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_wav_pcm16(samples, 1, sample_rate)).map_err(|e| Error::io(path, e))
}
