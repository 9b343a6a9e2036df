use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("numeric error: {message}\n{matrix}")]
    Numeric { message: String, matrix: String },

    #[error("mode index {index} out of range for a {n_modes}-mode state")]
    ModeRange { index: usize, n_modes: usize },

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("singular covariance block for party {party} (scaled det = {det:e})")]
    SingularBlock { party: String, det: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not unitary (max |UU^dagger - I| = {0:e})")]
    NotUnitary(f64),

    #[error("no closed form for {0}")]
    UnsupportedFormula(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn numeric(message: impl Into<String>, matrix: &nalgebra::DMatrix<f64>) -> Self {
        Error::Numeric {
            message: message.into(),
            matrix: format!("{matrix:.6}"),
        }
    }
}
