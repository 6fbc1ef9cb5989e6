use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("signal has {len} samples but one frame needs {frame}")]
    EmptyGrid { len: usize, frame: usize },

    #[error("reconstruction unsupported: {0}")]
    ReconstructionUnsupported(String),

    #[error("bin {bin} is outside the unique-phase range 1..={max}")]
    BinOutOfRange { bin: usize, max: usize },

    #[error("frequency {omega} rad/sample is not a bin frequency for N = {n}")]
    NotBinFrequency { omega: f64, n: usize },

    #[error("degenerate decomposition: imaginary-part amplitude is zero")]
    DegenerateDecomposition,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("histogram is empty")]
    EmptyHistogram,

    #[error("cannot form magnitude bands: {0}")]
    Banding(String),

    #[error(
        "degenerate quantizer design: {populated} populated cells for {cells} quantizer cells"
    )]
    DegenerateDesign { populated: usize, cells: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unsupported WAV format tag 0x{tag:04x} ({bits} bits)")]
    UnsupportedFormat { tag: u16, bits: u16 },

    #[error("WAV parse error at byte {offset}: {reason}")]
    Parse { offset: u64, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
