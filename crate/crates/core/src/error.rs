use thiserror::Error;

/// Errors raised by the numeric routines, the table persistence layer and the certifier.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("integrand blow-up at t = {abscissa:e} (value {value})")]
    Blowup { abscissa: f64, value: f64 },

    #[error("integrand blow-up at (x, y) = ({x:e}, {y:e}) (value {value})")]
    Blowup2d { x: f64, y: f64, value: f64 },

    #[error("coefficient table does not cover (m, n) = ({m}, {n})")]
    Coverage { m: u32, n: u32 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("table file contains no entries")]
    EmptyTable,

    #[error("unknown check `{0}`")]
    UnknownCheck(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
