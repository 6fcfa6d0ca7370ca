use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid deformation: det(F) = {det:e} must be positive")]
    InvalidDeformation { det: f64 },

    #[error("singular tensor: |det| = {det:e}")]
    Singular { det: f64 },

    #[error("parameter `{name}` = {value} out of domain ({expected})")]
    ParameterDomain {
        name: String,
        value: f64,
        expected: String,
    },

    #[error("corrupted state: {0}")]
    StateCorruption(String),

    #[error("{context}: no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        context: String,
        iterations: usize,
        residual: f64,
        /// Residual norm per iteration.
        trace: Vec<f64>,
    },

    #[error("element {element} inverted (det J = {det:e} at Gauss point {gauss_point})")]
    ElementInversion {
        element: usize,
        gauss_point: usize,
        det: f64,
    },

    #[error("degenerate face on element {element}, local face {face}")]
    DegenerateFace { element: usize, face: u8 },

    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("invalid load program: {0}")]
    Program(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("linear solver failed: {0}")]
    LinearSolve(String),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn domain(name: impl Into<String>, value: f64, expected: impl Into<String>) -> Self {
        Error::ParameterDomain {
            name: name.into(),
            value,
            expected: expected.into(),
        }
    }

    /// True for failures of an iterative solver (as opposed to bad input).
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::ElementInversion { .. }
                | Error::LinearSolve(_)
                | Error::InvalidDeformation { .. }
                | Error::Singular { .. }
                | Error::DegenerateFace { .. }
        )
    }
}
