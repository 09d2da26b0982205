//! SU(n) generator algebra, the Theta-calculus built on its structure
//! tensors, and decision procedures for bilinear quantum stochastic
//! state-space models on SU(n) variables.
//!
//! `no_std` with `alloc`. File formats and the command-line front end live
//! in the `sunqsde` crate.

#![no_std]

extern crate alloc;

pub mod algebra;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod report;
pub mod theta;

pub use algebra::{GellMannBasis, GeneratorLabel, StructureTensors, Tensor3, DEFAULT_TOL};
pub use error::{Error, Result};
pub use model::{
    check_physical_realizability, check_preservation, extract_slh, random_model, synthesize_state_space, ModelKind,
    PreservationReport, RealizabilityReport, SlhExtraction, SlhParams, StateSpaceModel,
};
pub use oracle::{init_moments, integrate_moments, ito_integrands, MomentState, OperatorMatrix, Trajectory};
pub use report::{ConditionResult, IdentityCheck, IdentityReport};
pub use theta::{KronPermutation, Reconstruction, ThetaContext};
