use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linop::LinearOperator;
use crate::motion::MotionField;
use crate::tensor::{Dims, ImageSequence, C64};

use super::interp::bilinear_taps;
use super::transition_pairs;

/// Row-compressed real sparse matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn n_rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.cols[a..b].iter().copied().zip(self.vals[a..b].iter().copied())
    }

    /// `out = M x`.
    pub fn mul_into(&self, x: &[C64], out: &mut [C64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (c, w) in self.row(r) {
                acc += x[c] * w;
            }
            *o = acc;
        }
    }

    /// `out += M' y`, traversing rows rather than materialising the transpose.
    pub fn mul_transpose_add(&self, y: &[C64], out: &mut [C64]) {
        for (r, yr) in y.iter().enumerate() {
            for (c, w) in self.row(r) {
                out[c] += yr * w;
            }
        }
    }
}

/// The stacked motion-compensated difference `K_t(v)`.
///
/// Block `j` maps the sequence to `x_target - K_j x_source`, where `K_j`
/// resamples the source frame bilinearly along the motion of transition `j`.
/// With `v = 0` every `K_j` is the identity and the operator equals
/// [`super::TemporalDifference`] exactly.
#[derive(Clone, Debug)]
pub struct MotionMatrix {
    dims: Dims,
    pairs: Vec<(usize, usize)>,
    blocks: Vec<CsrMatrix>,
}

impl MotionMatrix {
    pub fn build(field: &MotionField, dims: Dims, periodic: bool) -> Result<Self> {
        if dims.nt < 2 {
            return Err(Error::shape("motion matrix frames", ">= 2", dims.nt));
        }
        let pairs = transition_pairs(dims.nt, periodic);
        if field.nx() != dims.nx || field.ny() != dims.ny || field.n_transitions() != pairs.len() {
            return Err(Error::shape(
                "motion field",
                format!("{}x{} with {} transitions", dims.nx, dims.ny, pairs.len()),
                format!("{}x{} with {} transitions", field.nx(), field.ny(), field.n_transitions()),
            ));
        }
        field.validate()?;
        let blocks = (0..pairs.len())
            .into_par_iter()
            .map(|j| Self::build_block(field.transition(j), dims.nx, dims.ny))
            .collect();
        Ok(MotionMatrix { dims, pairs, blocks })
    }

    fn build_block(v: &[[f64; 2]], nx: usize, ny: usize) -> CsrMatrix {
        let n = nx * ny;
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(4 * n);
        let mut vals = Vec::with_capacity(4 * n);
        row_ptr.push(0);
        for y in 0..ny {
            for x in 0..nx {
                let d = v[y * nx + x];
                for (i, w) in bilinear_taps(y, x, d[0], d[1], nx, ny).iter() {
                    cols.push(i);
                    vals.push(w);
                }
                row_ptr.push(cols.len());
            }
        }
        CsrMatrix {
            n_cols: n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn block(&self, j: usize) -> &CsrMatrix {
        &self.blocks[j]
    }

    /// Motion-compensated residual stack for a sequence.
    pub fn residual(&self, x: &ImageSequence) -> Result<Vec<C64>> {
        if x.dims() != self.dims {
            return Err(Error::shape("motion residual input", self.dims, x.dims()));
        }
        self.apply(x.as_slice())
    }
}

impl LinearOperator for MotionMatrix {
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
        out.par_chunks_mut(n).enumerate().for_each(|(j, dst)| {
            let (t, s) = self.pairs[j];
            self.blocks[j].mul_into(&x[s * n..(s + 1) * n], dst);
            let cur = &x[t * n..(t + 1) * n];
            for k in 0..n {
                dst[k] = cur[k] - dst[k];
            }
        });
    }

    fn adjoint_into(&self, y: &[C64], out: &mut [C64]) {
        let n = self.dims.frame_len();
        assert_eq!(y.len(), self.range_len());
        assert_eq!(out.len(), self.domain_len());
        out.fill(C64::new(0.0, 0.0));
        // sequential over transitions: fixed accumulation order
        for (j, &(t, s)) in self.pairs.iter().enumerate() {
            let r = &y[j * n..(j + 1) * n];
            for k in 0..n {
                out[t * n + k] += r[k];
            }
            let mut back = vec![C64::new(0.0, 0.0); n];
            self.blocks[j].mul_transpose_add(r, &mut back);
            for k in 0..n {
                out[s * n + k] -= back[k];
            }
        }
    }
}
