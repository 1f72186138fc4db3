//! Effective-state dynamics in Liouville space.
//!
//! Density matrices on a finite momentum lattice evolve exactly under a free
//! plus screened-Coulomb Hamiltonian. Keeping only the zero-Bohr-frequency
//! part of a state (its block-diagonal part over energy shells) gives the
//! effective state seen by every observable that commutes with the free
//! Hamiltonian. Effective purity and effective entropy are defined shell by
//! shell; the global von Neumann quantities stay constant under the unitary
//! dynamics while the effective ones can grow.
//!
//! [`classical`] carries the same construction over to phase-space densities.

pub mod basis;
pub mod classical;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod reduction;
pub mod sampling;
pub mod states;

pub use basis::{LatticeKind, MomentumBasis, ShellTable};
pub use classical::{BetaMarginal, KickShape, PhaseSpaceDensity, PhaseSpaceGrid};
pub use dynamics::{Hamiltonian, Propagator, Superoperator, YukawaPotential};
pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector};
pub use reduction::{AlphaDecomposition, ShellDecomposition, ShellOperator, TraceRow};
pub use states::{DensityMatrix, PureState, ShellVector};
