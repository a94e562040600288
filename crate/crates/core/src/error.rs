//! Error type shared by every module of the crate.

use std::path::PathBuf;

/// Errors raised by radarkit operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A bin index fell outside an axis.
    #[error("bin {bin} out of range for {axis} axis with {bins} bins")]
    Index {
        axis: &'static str,
        bin: usize,
        bins: usize,
    },

    /// A physical value fell outside the padded extent of an axis.
    #[error("value {value} outside the {axis} axis extent [{lo}, {hi}]")]
    Range {
        axis: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// An operation received an invalid parameter.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// Two inputs that must agree in shape do not.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A value is mathematically undefined at this input.
    #[error("singular input: {0}")]
    Singular(String),

    /// A point is not covered by any sensor mode.
    #[error("point (alpha={alpha_deg} deg, r={range_m} m) is out of sensor scope")]
    OutOfScope { alpha_deg: f64, range_m: f64 },

    /// A file violates its declared format.
    #[error("format error in `{field}`: {reason}")]
    Format { field: String, reason: String },

    /// Filesystem failure with the offending path attached.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn format(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Format {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
