use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("step size underflow at t = {t} (h = {h})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("integration exceeded {max_steps} steps at t = {t}")]
    TooManySteps { t: f64, max_steps: usize },

    #[error("non-finite value encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("generator kernel has dimension {dimension}; stationary state is not unique")]
    DegenerateKernel { dimension: usize },

    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain { what, detail: detail.into() }
}
