//! Motion estimation: demons-style deformable registration, global
//! translation by phase correlation, and the direct bilinear warp.

mod demons;
mod field;
mod smoothing;
mod translation;
mod warp;

pub use demons::{register_pair, register_sequence, PairRegistration, RegistrationConfig};
pub use field::{gradient_energy, Displacement, MotionField};
pub use smoothing::{gaussian_kernel, smooth_field, smooth_real};
pub use translation::estimate_global_translation;
pub use warp::{warp_frame, Sample};
