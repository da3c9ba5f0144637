//! Error taxonomy shared by every module in the crate.

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A probability vector failed validation (negative entry, bad sum, wrong size).
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    /// A conditional-law grid failed validation (negative entry or non-stochastic column).
    #[error("invalid transition matrix: {0}")]
    InvalidTransition(String),

    /// Operand shapes do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Input is outside the mathematical domain of the operation
    /// (support violations, zero denominators, out-of-range probabilities).
    #[error("domain error: {0}")]
    Domain(String),

    /// A perturbation strategy violated orthogonality, consistency, or the
    /// epsilon validity bound.
    #[error("invalid perturbation strategy: {0}")]
    InvalidStrategy(String),

    /// The eavesdropper Gram matrix is not positive definite on the
    /// perturbation subspace, so the generalized eigenvalue problem
    /// (and everything downstream of it) is undefined.
    #[error("singular pencil: {0}")]
    SingularPencil(String),

    /// The capped-max multiplier program has an empty feasible region.
    #[error("infeasible program: {0}")]
    Infeasible(String),

    /// An operation that requires commuting utility/leakage Gram matrices was
    /// invoked on a non-commuting system.
    #[error("not a commuting system: {0}")]
    NotCommuting(String),

    /// A numerical routine failed to converge within its iteration budget.
    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// A scalar parameter is out of range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
