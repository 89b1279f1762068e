//! Classical simulation of phase-estimation energy calculations for
//! mixed-statistics (fermion / boson / distinguishable) second-quantized
//! Hamiltonians.
//!
//! The crate covers the full pipeline:
//!
//! * [`particles`] / [`fock`] / [`hamiltonian`] / [`matrix`]: particle
//!   classes, configuration bases, ladder-operator algebra and exact
//!   Hermitian matrices for oracle diagonalization.
//! * [`mapping`]: Jordan-Wigner, direct (one-hot) and compact (binary) boson
//!   encodings, and the one-qubit encoding for distinguishable particles.
//! * [`propagator`]: exact and first-order Trotterized e^{i tau H}.
//! * [`ipea`]: iterative phase estimation (versions A and B), exact
//!   branching success probabilities and majority-vote repetition analysis.
//! * [`blocks`] / [`cost`]: block structure of the 4-index boson Trotter
//!   term, gate-count formulas with brute-force oracles, and whole-system
//!   Trotter-step cost reports.
//! * [`systemfile`] / [`toys`]: the `.nomo` integral file format and bundled
//!   synthetic test systems.

pub mod blocks;
pub mod checks;
pub mod cost;
pub mod error;
pub mod fock;
pub mod hamiltonian;
pub mod ipea;
pub mod mapping;
pub mod matrix;
pub mod particles;
pub mod propagator;
pub mod systemfile;
pub mod toys;

pub use error::{Error, Result};
