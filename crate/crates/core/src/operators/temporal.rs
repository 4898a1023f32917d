use crate::error::{Error, Result};
use crate::linop::LinearOperator;
use crate::tensor::{Dims, ImageSequence, C64};

use super::transition_pairs;

/// Temporal finite difference `D_t`: output frame `j` is
/// `x[target_j] - x[source_j]` over [`transition_pairs`].
#[derive(Clone, Debug)]
pub struct TemporalDifference {
    dims: Dims,
    pairs: Vec<(usize, usize)>,
}

impl TemporalDifference {
    pub fn new(dims: Dims, periodic: bool) -> Result<Self> {
        if dims.nt < 2 {
            return Err(Error::shape("temporal difference frames", ">= 2", dims.nt));
        }
        Ok(TemporalDifference {
            dims,
            pairs: transition_pairs(dims.nt, periodic),
        })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn n_outputs(&self) -> usize {
        self.pairs.len()
    }

    /// Applies the difference to a sequence.
    pub fn forward(&self, x: &ImageSequence) -> Result<Vec<C64>> {
        if x.dims() != self.dims {
            return Err(Error::shape("temporal difference input", self.dims, x.dims()));
        }
        self.apply(x.as_slice())
    }
}

impl LinearOperator for TemporalDifference {
    fn domain_len(&self) -> usize {
        self.dims.len()
    }

    fn range_len(&self) -> usize {
        self.pairs.len() * self.dims.frame_len()
    }

    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        let n = self.dims.frame_len();
        assert_eq!(x.len(), self.domain_len());
        assert_eq!(out.len(), self.range_len());
        for (j, &(t, s)) in self.pairs.iter().enumerate() {
            let dst = &mut out[j * n..(j + 1) * n];
            let cur = &x[t * n..(t + 1) * n];
            let prev = &x[s * n..(s + 1) * n];
            for k in 0..n {
                dst[k] = cur[k] - prev[k];
            }
        }
    }

    fn adjoint_into(&self, y: &[C64], out: &mut [C64]) {
        let n = self.dims.frame_len();
        assert_eq!(y.len(), self.range_len());
        assert_eq!(out.len(), self.domain_len());
        out.fill(C64::new(0.0, 0.0));
        for (j, &(t, s)) in self.pairs.iter().enumerate() {
            let r = &y[j * n..(j + 1) * n];
            for k in 0..n {
                out[t * n + k] += r[k];
                out[s * n + k] -= r[k];
            }
        }
    }
}
