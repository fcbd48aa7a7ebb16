use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::models::{ModelKind, Role};

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("lattice side L = {l} is too small for support radius {q}; need L >= {min}")]
    LatticeTooSmall { l: usize, q: usize, min: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state has {found} entries, lattice has {expected} sites")]
    SizeMismatch { expected: usize, found: usize },

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("{kind} model requires operator {role}")]
    MissingArray { kind: ModelKind, role: Role },

    #[error("operator {role} is not {property}")]
    AssumptionViolated { role: Role, property: &'static str },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("symbol is not Hurwitz at theta = {theta:?}: eigenvalue {eigenvalue}")]
    NotHurwitz { theta: Vec<f64>, eigenvalue: Complex64 },

    #[error("unstable at L = {l}: wavenumber {wavenumber:?} has eigenvalue {eigenvalue}")]
    UnstableWavenumber {
        l: usize,
        wavenumber: Vec<i64>,
        eigenvalue: Complex64,
    },

    #[error("Lyapunov residual {residual:e} exceeds tolerance at theta = {theta:?}")]
    IllConditioned { theta: Vec<f64>, residual: f64 },

    #[error("no closed form: {0}")]
    Unsupported(&'static str),

    #[error("quadrature did not converge: estimate {estimate}, error {error_estimate:e}")]
    QuadratureNonConvergence { estimate: f64, error_estimate: f64 },

    #[error("state dimension {size} exceeds the dense budget of {budget}")]
    BudgetExceeded { size: usize, budget: usize },

    #[error("Schur decomposition did not converge")]
    SchurNonConvergence,

    #[error("closed-loop matrix is unstable: eigenvalue with real part {real_part:e}")]
    DenseUnstable { real_part: f64 },

    #[error("time step {dt} too large: spectral radius {radius} at wavenumber {wavenumber}")]
    StepTooLarge { dt: f64, radius: f64, wavenumber: i64 },

    #[error("hypothesis not applicable: {0}")]
    NotApplicable(&'static str),

    #[error("need at least {needed} samples, have {found}")]
    InsufficientSamples { needed: usize, found: usize },
}
