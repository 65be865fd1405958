use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid polygon size {0}: need n >= 4")]
    InvalidPolygon(usize),
    #[error("invalid diagonal ({i},{j}) for n = {n}")]
    InvalidDiagonal { n: usize, i: usize, j: usize },
    #[error("invalid flip: {0}")]
    InvalidFlip(String),
    #[error("invalid face: {0}")]
    InvalidFace(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("random generation failed: {0}")]
    GenerationFailure(String),
    #[error("orientation inconsistency at {0}")]
    OrientationInconsistent(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("incomplete solution set: expected {expected}, found {found}")]
    IncompleteSolutions { expected: usize, found: usize },
    #[error("divergent integral: {0}")]
    Divergent(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("no witness: {0}")]
    NoWitness(String),
    #[error("classification failure: {0}")]
    Classification(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short variant name used in machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidPolygon(_) => "invalid_polygon",
            Error::InvalidDiagonal { .. } => "invalid_diagonal",
            Error::InvalidFlip(_) => "invalid_flip",
            Error::InvalidFace(_) => "invalid_face",
            Error::InvalidInput(_) => "invalid_input",
            Error::Pole(_) => "pole",
            Error::GenerationFailure(_) => "generation_failure",
            Error::OrientationInconsistent(_) => "orientation_inconsistent",
            Error::Solver(_) => "solver",
            Error::IncompleteSolutions { .. } => "incomplete_solutions",
            Error::Divergent(_) => "divergent",
            Error::Unsupported(_) => "unsupported",
            Error::NoWitness(_) => "no_witness",
            Error::Classification(_) => "classification",
        }
    }
}
