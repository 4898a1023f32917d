//! ADMM reconstruction engines and their building blocks.

mod admm;
mod cg;
mod diagnostics;
mod joint;
mod prox;
mod separate;

pub use admm::{epsilon_for_noise, reconstruct_admm, reconstruct_motion_tv, AdmmOutput, AdmmParams, PriorKind, SolverState};
pub use cg::{cg_solve, CgOutcome};
pub use diagnostics::{objective_log, IterRecord};
pub use joint::{reconstruct_joint, JointOutput, JointParams, TemporalFilter};
pub use prox::{project_consistency, soft_threshold, soft_threshold_scalar};
pub use separate::{reconstruct_separate, InitialPrior, SeparateOutput};
