use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular tensor at point: {0}")]
    SingularTensor(String),

    #[error("index {index} outside built range [{lo}, {hi}]")]
    Range { index: i64, lo: i64, hi: i64 },

    #[error("eigensolver did not converge after {iterations} iterations")]
    Convergence { iterations: usize },

    #[error("trajectory left the admissible set ({exclusion}) at t = {t}")]
    ExclusionBreach { exclusion: String, t: f64 },

    #[error("adaptive step fell below {dt_min:e} at t = {t}")]
    StepUnderflow { t: f64, dt_min: f64 },

    #[error("unknown system `{0}`")]
    UnknownSystem(String),

    #[error("unsupported multivector degree combination ({0}, {1})")]
    Degree(usize, usize),

    #[error("sampler exhausted {attempts} attempts without an admissible point")]
    SamplerExhausted { attempts: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
