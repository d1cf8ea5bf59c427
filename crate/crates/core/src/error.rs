use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point ({re}, {im}) is not strictly inside the unit disk")]
    OutsideDisk { re: f64, im: f64 },

    #[error("non-finite number in input: {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },

    #[error("separation violated: {0}")]
    Separation(String),

    #[error("evaluation point lies on the zero set")]
    OnZeroSet,

    #[error("grid coverage: {0}")]
    Coverage(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! ensure {
    ($cond:expr, $err:expr) => {
        if !$cond {
            return Err($err);
        }
    };
}
pub(crate) use ensure;
