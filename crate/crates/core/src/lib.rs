//! Simulation toolkit for tripartite entanglement between the path, spin and
//! energy degrees of freedom of a single neutron.
//!
//! The composite Hilbert space is `H_path ⊗ H_spin ⊗ H_energy` with dimensions
//! (2, 2, 3). The crate provides
//!
//! * [`tensor`] — basis bookkeeping, pure states, density matrices and the
//!   two-copy permutation machinery,
//! * [`states`] — GHZ/W constructors, separable-state samplers and the path
//!   dephasing channel,
//! * [`witnesses`] — nonlinear entanglement witnesses with closed-form and
//!   element-map evaluation,
//! * [`beamline`] — operator-level interferometer simulation,
//! * [`experiment`] — contrast scans, fringe fitting and matrix-element
//!   extraction,
//! * [`suites`] — seeded nonpositivity sampling suites.

pub mod beamline;
pub mod error;
pub mod experiment;
pub mod states;
pub mod suites;
pub mod tensor;
pub mod witnesses;

pub use error::{Error, Result};
pub use tensor::{BasisLabel, DensityMatrix, PureState, SubsystemSet};
