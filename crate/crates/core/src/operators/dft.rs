use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::linop::LinearOperator;
use crate::tensor::{Dims, C64};

/// Orthonormal DFT along the frame axis, applied independently at every
/// pixel. Output frame `k` holds temporal frequency `k` (uncentered).
#[derive(Clone)]
pub struct TemporalDft {
    dims: Dims,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for TemporalDft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TemporalDft").field("dims", &self.dims).finish()
    }
}

impl TemporalDft {
    pub fn new(dims: Dims) -> Self {
        let mut planner = FftPlanner::new();
        TemporalDft {
            dims,
            fwd: planner.plan_fft_forward(dims.nt),
            inv: planner.plan_fft_inverse(dims.nt),
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    fn run(&self, src: &[C64], out: &mut [C64], fft: &Arc<dyn Fft<f64>>) {
        let (nt, np) = (self.dims.nt, self.dims.frame_len());
        assert_eq!(src.len(), nt * np);
        assert_eq!(out.len(), nt * np);
        let mut series = vec![C64::new(0.0, 0.0); nt * np];
        for t in 0..nt {
            for p in 0..np {
                series[p * nt + t] = src[t * np + p];
            }
        }
        fft.process(&mut series);
        let scale = 1.0 / (nt as f64).sqrt();
        for t in 0..nt {
            for p in 0..np {
                out[t * np + p] = series[p * nt + t] * scale;
            }
        }
    }
}

impl LinearOperator for TemporalDft {
    fn domain_len(&self) -> usize {
        self.dims.len()
    }

    fn range_len(&self) -> usize {
        self.dims.len()
    }

    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        self.run(x, out, &self.fwd);
    }

    fn adjoint_into(&self, y: &[C64], out: &mut [C64]) {
        self.run(y, out, &self.inv);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vecops::{dist, l2_norm};

    fn seq(d: Dims) -> Vec<C64> {
        (0..d.len())
            .map(|i| C64::new((i as f64 * 1.3).sin(), (i as f64 * 0.7).cos()))
            .collect()
    }

    #[test]
    fn constant_in_time_lands_in_zero_frequency() {
        let d = Dims::new(2, 3, 5).unwrap();
        let x: Vec<C64> = (0..d.len()).map(|i| C64::new((i % 6) as f64, 1.0)).collect();
        let op = TemporalDft::new(d);
        let f = op.apply(&x).unwrap();
        let n = d.frame_len();
        for (i, z) in f.iter().enumerate() {
            if i >= n {
                assert!(z.norm() < 1e-12);
            } else {
                assert!((z - x[i] * (5f64).sqrt()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn unitary() {
        let d = Dims::new(3, 4, 6).unwrap();
        let op = TemporalDft::new(d);
        let x = seq(d);
        let f = op.apply(&x).unwrap();
        assert!((l2_norm(&f) - l2_norm(&x)).abs() < 1e-12);
        let back = op.adjoint(&f).unwrap();
        assert!(dist(&back, &x) < 1e-12);
    }
}
