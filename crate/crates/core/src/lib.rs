//! Spin entanglement of fermion pairs drawn from a degenerate Fermi gas.
//!
//! * [`spin`]: one- and two-qubit operators in the Pauli product basis.
//! * [`fermi`]: the smeared one-body kernel of the filled Fermi sphere and the
//!   conditional spin state of a detected pair, plus a brute-force
//!   occupation-number oracle for small mode sets.
//! * [`entanglement`]: negativity, concurrence, maximal CHSH value and the
//!   entanglement distance.
//! * [`experiment`]: flux and coincidence-rate estimates for a neutron
//!   storage vessel, and an event-level coincidence Monte Carlo.
//! * [`tomography`]: state reconstruction from coincidence counts.
//!
//! All lengths are in units of `1/k_f`.

// 2×2 / 4×4 index loops read closer to the matrix algebra
#![allow(clippy::needless_range_loop)]

pub mod entanglement;
pub mod error;
pub mod experiment;
pub mod fermi;
pub mod quadrature;
pub mod roots;
pub mod spin;
pub mod tomography;

pub use entanglement::{
    chsh_max, concurrence, entanglement_distance, negativity, partial_transpose, EntanglementReport,
};
pub use error::{Error, Result};
pub use experiment::{
    AnalyzerSetting, CountsRecord, ExperimentConfig, JointOutcome, PlanEntry, Port, Target,
};
pub use fermi::{kernel, pair_state, wick_oracle, DetectorProfile, FiniteModeGas, PairQuery};
pub use spin::{
    compose, decompose, is_physical, pauli, tensor_basis, HermitianOp2, HermitianOp4,
    PauliCoefficients, TwoQubitState,
};
pub use tomography::{end_to_end, TomographyResult};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
