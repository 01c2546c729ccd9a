use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// A loss exceeded the declared supremum `C`.
    #[error("loss {loss} of sample `{id}` exceeds the loss supremum C = {c_sup}")]
    LossAboveSupremum { id: String, loss: f64, c_sup: f64 },

    #[error("alpha = {alpha} exceeds the validity ceiling {ceiling} for these n, K and gamma")]
    AlphaAboveCeiling { alpha: f64, ceiling: f64 },

    #[error("delta1 = {delta1} is below its floor exp(-u ln(gamma) / (4n - 3)) = {floor}")]
    DeltaBelowFloor { delta1: f64, floor: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("lambda = {lambda} is outside the admissible range [0, {max}] of the {regime} regime")]
    LambdaOutOfRange { regime: &'static str, lambda: f64, max: f64 },

    #[error("deviation t = {t} is outside the admissible range [0, {max}]")]
    DeviationOutOfRange { t: f64, max: f64 },

    #[error("{path}: line {line}: {message}")]
    Csv { path: String, line: u64, message: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Stable machine-readable tag for each variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::Parameter { .. } => "parameter",
            Error::LossAboveSupremum { .. } => "loss_above_supremum",
            Error::AlphaAboveCeiling { .. } => "alpha_above_ceiling",
            Error::DeltaBelowFloor { .. } => "delta_below_floor",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::LambdaOutOfRange { .. } => "lambda_out_of_range",
            Error::DeviationOutOfRange { .. } => "deviation_out_of_range",
            Error::Csv { .. } => "csv",
            Error::Io { .. } => "io",
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
