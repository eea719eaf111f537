//! Low-rank tensor completion under the tensor Q-rank model.
//!
//! A 3-order tensor `T` is transformed along its third mode by a
//! column-orthonormal `Q` (`G = T ×₃ Q`); the Q-rank and Q-nuclear norm are
//! the summed ranks and nuclear norms of the frontal slices of `G`. Choosing
//! `Q` as the leading right singular vectors of the mode-3 unfolding (the PCA
//! operator) concentrates the tensor's energy in few slices, and the ADMM
//! solver in [`solver`] re-estimates that `Q` while it completes missing
//! entries.
//!
//! Modules:
//! * [`tensor3`]: dense tensors, mode-3 algebra, observation masks
//! * [`orth`]: orthonormal transforms (PCA, identity, DCT, random)
//! * [`qnorm`]: Q-rank, Q-norms and the Q-nuclear proximal operator
//! * [`solver`]: the completion ADMM
//! * [`bench`]: synthetic data, PSNR and phase-transition grids
//! * [`io`]: text formats for tensors, masks and transforms

pub mod bench;
pub mod error;
pub mod io;
mod linalg;
pub mod orth;
pub mod qnorm;
pub mod solver;
pub mod tensor3;

pub use error::{Error, Result};
pub use orth::OrthoMatrix;
pub use qnorm::QSingularValues;
pub use solver::{QMode, SolverConfig, SolverReport};
pub use tensor3::{Dims, ObservationMask, Tensor3};

pub use nalgebra::DMatrix;
