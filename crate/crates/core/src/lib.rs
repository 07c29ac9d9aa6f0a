//! Simulator and analysis library for entanglement reciprocation between a
//! pair of driven atomic qubits and a two-mode entangled coherent state in
//! cavity QED.
//!
//! The deposit stage transfers a Bell state of two classically driven atoms
//! into an entangled coherent state of their cavities, conditioned on an
//! atomic level detection; the retrieval stage runs fresh ground-state atoms
//! through the entangled cavities and post-selects the fields on coherent
//! products, recovering the atomic entanglement. Everything is available
//! twice: as closed forms and as truncated-Fock numerics, cross-validated
//! against each other, plus a numerical study of the strong-driving
//! (rotating-wave) approximation the effective model rests on.
//!
//! Modules:
//! - [`hilbert`]: dense complex linear algebra on truncated Fock spaces.
//! - [`model`]: Hamiltonians, bare/dressed transforms, frame rotations.
//! - [`analytic`]: closed-form state generators and post-selection
//!   amplitudes.
//! - [`entanglement`]: concurrence measures and the independent oracle.
//! - [`protocol`]: end-to-end deposit/retrieval runs and the RWA study.
//!
//! All values are immutable after construction and all operations are pure
//! functions, so everything here is safe to share across threads; sweep
//! points can be evaluated independently.
//!
//! ```
//! use ecsim_core::{run_retrieval, Branch, Engine, ProjectionKind, SystemParams};
//!
//! let params = SystemParams::new(1.0, 1.0, 20.0, 20.0)?;
//! let results = run_retrieval(&params, 4.0, Branch::Plus, Engine::Analytic, None)?;
//! let vacuum = results
//!     .iter()
//!     .find(|r| r.projection == ProjectionKind::VacVac)
//!     .unwrap();
//! assert!((vacuum.concurrence.value() - 1.0).abs() < 1e-3);
//! assert!((vacuum.projection_prob - 0.25).abs() < 1e-3);
//! # Ok::<(), ecsim_core::Error>(())
//! ```

pub mod analytic;
pub mod entanglement;
pub mod error;
pub mod hilbert;
pub mod model;
pub mod protocol;

pub use analytic::{
    bare_amplitudes, deposit_state_analytic, norm_const, p_coeffs, retrieval_state_analytic,
    AtomicOutcome, Branch, DressedSector, EcsState, EcsTerm, ProjectionKind, QubitPairState,
};
pub use entanglement::{
    ecs_concurrence, pure2q_concurrence, schmidt_oracle, wootters_concurrence, ConcurrenceMethod,
    ConcurrenceValue,
};
pub use error::{Error, Result};
pub use hilbert::{
    coherent_state, evolve, fidelity, matrix_exp, overlap_analytic, AtomBasis, CompositeState,
    FockCutoff, Operator, Propagator, TwoModeState,
};
pub use model::{
    bare_from_dressed, build_effective_hamiltonian, build_full_hamiltonian, build_h0, build_hi,
    dressed_from_bare, interaction_frame_rotation, EffectivePropagator, SystemParams,
};
pub use protocol::{
    deposit_cutoff, retrieval_cutoff, run_deposit, run_retrieval, rwa_validation, DepositField,
    DepositResult, Engine, RetrievalResult, RwaRecord,
};
