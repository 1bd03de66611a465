use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("only two-detector arrangements are supported (got {0})")]
    UnsupportedDetectorCount(usize),

    #[error("component index {idx} out of range ({len} components)")]
    IndexOutOfRange { idx: usize, len: usize },

    #[error("component {0} is a phantom and cannot be chosen")]
    PhantomChosen(usize),

    #[error("component {0} has neither weight nor inflow and cannot be chosen")]
    EmptyChoice(usize),

    #[error("component {0} is not environmentally decoherent; objective reduction is not allowed")]
    NotDecoherent(usize),

    #[error("total square modulus is zero")]
    ZeroModulus,

    #[error("step too large: hazard*dt = {product:.4} >= 0.1 at t = {t}; reduce dt")]
    StepTooLarge { product: f64, t: f64 },

    #[error("invalid step size {0}")]
    InvalidStep(f64),

    #[error("frame velocity {0} is not below the speed of light")]
    Superluminal(f64),

    #[error("profile is not integrable: {0}")]
    NonIntegrable(String),

    #[error("spacelike separation required: {0}")]
    TimelikeGeometry(String),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// Errors from the numerical guards, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::StepTooLarge { .. } | Error::InvalidStep(_))
    }
}
