//! Motion-compensated compressed sensing for dynamic image sequences.
//!
//! The crate reconstructs a time series of complex images from undersampled
//! multi-coil k-space by penalising the L1 norm of motion-compensated frame
//! differences `||K_t(v) x||_1` under a data-consistency constraint
//! `||y - H x||^2 <= eps`. Motion is either estimated from an initial
//! temporal-TV reconstruction ([`solvers::reconstruct_separate`]) or jointly
//! with the images ([`solvers::reconstruct_joint`]). Temporal TV and temporal
//! DFT priors are available as baselines.

pub mod datagen;
pub mod error;
pub mod eval;
pub mod fft;
pub mod linop;
pub mod motion;
pub mod operators;
pub mod solvers;
pub mod tensor;
pub mod vecops;

pub use error::{Error, Result};
pub use linop::LinearOperator;
pub use tensor::{CoilSensitivities, Dims, ImageSequence, C64};
