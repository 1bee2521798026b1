use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing configuration key `{0}`")]
    MissingKey(String),

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },

    #[error("`{field}` = {value} is out of range: must be {bound}")]
    OutOfRange {
        field: &'static str,
        value: f64,
        bound: &'static str,
    },

    #[error("low altitude {low:.3} m is not below high altitude {high:.3} m (reduce h_0)")]
    GuardViolation { low: f64, high: f64 },

    #[error("distance {distance} m is shorter than altitude {altitude} m")]
    Geometry { distance: f64, altitude: f64 },

    #[error("altitude {0} m is neither the low nor the high altitude level")]
    NotAnAltitudeLevel(f64),

    #[error("both UAVs at the high altitude is not a candidate configuration")]
    InvalidAltitudePair,

    #[error("activation rate must be positive, got {0}")]
    NonPositiveRate(f64),

    #[error("activation rate {lambda} exceeds the per-cell population {n_users}")]
    RateExceedsPopulation { lambda: f64, n_users: u32 },

    #[error("non-finite result: {0}")]
    Numeric(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
