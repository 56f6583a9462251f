//! Exact diagonalization on the `N`-particle sector of a truncated bosonic
//! Fock space.

pub mod basis;
pub mod eigen;
pub mod expm;
pub mod operators;
pub mod sparse;
pub mod tensors;
pub mod verify;

pub use basis::FockBasis;
pub use eigen::{ed_lowest, EigenPairs, LinearOperator};
pub use expm::{apply_udagger_condensate, expm_apply};
pub use operators::{assemble_hbog, assemble_hn, assemble_x, observables};
pub use sparse::CsrMatrix;
pub use tensors::{compute_tensors, ManyBodyTensors};
pub use verify::{
    return_amplitude_curvature, sweep_checks, verify_point, verify_theorem, EdConfig, EdModel, StateBounds, TheoremRow,
    TrendCheck,
};
