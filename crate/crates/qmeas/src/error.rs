//! Error type shared by every operation in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong when validating states, measures, grids or
/// detector profiles, or when an operation's numerical contract is violated.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not hermitian: max |M - M^H| = {defect:.3e} exceeds {tol:.3e}")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("trace is not one: |tr - 1| = {defect:.3e} exceeds {tol:.3e}")]
    NotUnitTrace { defect: f64, tol: f64 },

    #[error("operator is not positive semi-definite: min eigenvalue {min_eig:.3e} < -{tol:.3e}")]
    NotPositiveSemidefinite { min_eig: f64, tol: f64 },

    #[error("invalid projective measure: {reason}")]
    InvalidPvm { reason: String },

    #[error("invalid POVM: {reason}")]
    InvalidPovm { reason: String },

    #[error("invalid weak-measurement profile: {reason}")]
    InvalidWeakProfile { reason: String },

    #[error("expectation has imaginary residue {residue:.3e}, exceeds {tol:.3e}")]
    ImaginaryResidue { residue: f64, tol: f64 },

    #[error("conditioning on null event: branch probability {prob:.3e} below {tol:.3e}")]
    NullEvent { prob: f64, tol: f64 },

    #[error("parameter {name} = {value} outside [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("contextual values undefined at uniform limit: g = {g:.3e}")]
    UniformLimit { g: f64 },

    #[error("POVM outcome labels do not match the reference eigenvalues")]
    LabelMismatch,

    #[error("dilation prescription unavailable for {n} outcomes (defined for 2 <= N <= 4)")]
    DilationUnavailable { n: usize },

    #[error("grid too coarse: {reason}")]
    GridTooCoarse { reason: String },

    #[error("grid too narrow: {reason}")]
    GridTooNarrow { reason: String },

    #[error("momentum content too close to grid Nyquist: {reason}")]
    Aliasing { reason: String },

    #[error("invalid acceptance profile: {reason}")]
    InvalidProfile { reason: String },

    #[error("interval [{lo}, {hi}] extends outside the grid [{x_min}, {x_max}]")]
    IntervalOutsideGrid {
        lo: f64,
        hi: f64,
        x_min: f64,
        x_max: f64,
    },

    #[error("no disturbance-matched joint measurement exists: sigma_x*sigma_p = {value} > 1/4")]
    NoMatchedJoint { value: f64 },

    /// An identity the implementation verifies internally (e.g. two routes to
    /// the same quantity) failed beyond tolerance. Indicates a bug or an
    /// under-resolved grid, never a caller mistake.
    #[error("numerical contract violated: {what} (defect {defect:.3e}, tol {tol:.3e})")]
    NumericalContract {
        what: &'static str,
        defect: f64,
        tol: f64,
    },
}
