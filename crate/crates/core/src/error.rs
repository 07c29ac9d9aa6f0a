//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by state construction, Hamiltonian evolution and the
/// measurement pipeline.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The Fock truncation cannot represent the requested coherent amplitude
    /// (truncated norm fell below `1 - 1e-10`), or `nmax < 2`.
    #[error(
        "Fock cutoff nmax={nmax} too small for |alpha|={alpha_abs:.6} (truncated norm {norm:.12})"
    )]
    CutoffTooSmall {
        nmax: usize,
        alpha_abs: f64,
        norm: f64,
    },

    /// Tensor operands or state/operator dimensions do not match the fixed
    /// atom1 ⊗ atom2 ⊗ mode1 ⊗ mode2 layout.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An operator flagged hermitian deviates from its adjoint by more than
    /// 1e-12 in some entry.
    #[error("operator is not hermitian (max |M - M^dag| entry = {deviation:.3e})")]
    NonHermitian { deviation: f64 },

    /// Time evolution changed the state norm by more than 1e-9.
    #[error("norm drift after evolution: |psi| = {norm:.15}")]
    NormDrift { norm: f64 },

    /// A basis-dependent operation received a state in the wrong atomic basis.
    #[error("atomic basis mismatch: expected {expected}, got {got}")]
    BasisFlagMismatch {
        expected: &'static str,
        got: &'static str,
    },

    /// The minus branch of the post-detection field state vanishes
    /// identically (its normalization constant is below 1e-12).
    #[error("degenerate minus branch at t={t}: normalization constant {m:.3e} < 1e-12")]
    DegenerateBranch { t: f64, m: f64 },

    /// Retrieval was requested with a duration different from the deposit
    /// duration; only equal times are supported.
    #[error("retrieval time t'={tprime} must equal deposit time t={t}")]
    TPrimeMismatch { t: f64, tprime: f64 },

    /// All four qubit-pair amplitudes vanish; the state cannot be normalized.
    #[error("qubit-pair state is identically zero")]
    ZeroState,

    /// The supplied 4x4 matrix is not a valid two-qubit density matrix.
    #[error("invalid density matrix: {reason}")]
    InvalidDensityMatrix { reason: String },

    /// Physical parameters are out of range (negative or non-finite).
    #[error("invalid system parameters: {reason}")]
    InvalidParams { reason: String },

    /// A concurrence computation produced a value outside [0, 1] by more
    /// than the roundoff allowance of 1e-12.
    #[error("concurrence {value} outside [0, 1] beyond roundoff tolerance")]
    ConcurrenceOutOfRange { value: f64 },

    /// A field state does not have the two-term entangled-coherent-state
    /// shape expected by the closed-form concurrence.
    #[error("field state is not in the expected entangled-coherent-state form: {reason}")]
    MalformedEcs { reason: String },

    /// A dense linear-algebra kernel (eigensolver, inverse) failed.
    #[error("linear algebra failure: {0}")]
    LinAlg(String),
}

pub type Result<T> = std::result::Result<T, Error>;
