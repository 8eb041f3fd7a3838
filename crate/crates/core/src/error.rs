use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bad magic number: expected {expected}")]
    BadMagic { expected: &'static str },
    #[error("bad header: {0}")]
    BadHeader(String),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("invalid image dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("palette has {len} entries but label {max_label} needs an entry")]
    PaletteTooSmall { len: usize, max_label: u32 },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("degenerate data: {distinct} distinct values for {clusters} clusters")]
    DegenerateData { distinct: usize, clusters: usize },
    #[error("cluster index {index} out of range for {clusters} clusters")]
    IndexOutOfRange { index: usize, clusters: usize },
    #[error("image holds a single intensity class; no threshold exists")]
    SingleClass,
    #[error("mask has no foreground pixels")]
    EmptyMask,
    #[error("empty input")]
    EmptyInput,
    #[error("phantom bodies do not fit the canvas: {0}")]
    SpecOverflow(String),
    #[error("ground truth required but not supplied")]
    MissingTruth,
    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

impl Error {
    /// Process exit status for command-line front ends: 2 for input and
    /// format problems, 3 for degenerate data, 4 for configuration.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DegenerateData { .. } | Error::SingleClass => 3,
            Error::Config { .. }
            | Error::InvalidParams(_)
            | Error::IndexOutOfRange { .. }
            | Error::SpecOverflow(_) => 4,
            _ => 2,
        }
    }
}
