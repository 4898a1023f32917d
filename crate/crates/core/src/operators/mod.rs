//! Concrete linear operators: temporal difference, temporal DFT, the sparse
//! motion-compensated difference and the multi-coil measurement operator.

mod dft;
mod interp;
mod mask;
mod measurement;
mod motion_matrix;
mod temporal;

pub use dft::TemporalDft;
pub use interp::{bilinear_taps, Taps};
pub use mask::{lines_per_frame, SamplingMask};
pub use measurement::{KSpaceData, MeasurementOperator};
pub use motion_matrix::{CsrMatrix, MotionMatrix};
pub use temporal::TemporalDifference;

/// Frame pairs `(target, source)` compared by the temporal priors, in output
/// order: `(1, 0), (2, 1), ..., (nt-1, nt-2)` and, when `periodic`, the wrap
/// `(0, nt-1)` last.
pub fn transition_pairs(nt: usize, periodic: bool) -> Vec<(usize, usize)> {
    let mut pairs: Vec<_> = (1..nt).map(|t| (t, t - 1)).collect();
    if periodic && nt >= 2 {
        pairs.push((0, nt - 1));
    }
    pairs
}

pub fn n_transitions(nt: usize, periodic: bool) -> usize {
    if nt < 2 {
        0
    } else {
        nt - 1 + usize::from(periodic)
    }
}
