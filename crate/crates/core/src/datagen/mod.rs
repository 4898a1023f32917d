//! Synthetic experiment inputs: a moving phantom with analytic motion, coil
//! maps, Gaussian line masks and noisy multi-coil acquisition.

mod acquisition;
mod coils;
mod mask;
mod phantom;

pub use acquisition::simulate_acquisition;
pub use coils::generate_coils;
pub use mask::{generate_mask, MaskSpec};
pub use phantom::{generate_phantom, EllipseObject, Phantom, PhantomSpec, Trajectory};
