use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::linop::LinearOperator;
use crate::tensor::{CoilSensitivities, Dims, ImageSequence, C64};

use super::SamplingMask;

/// Multi-coil k-space on the full Cartesian grid, laid out `(c, t, y, x)`,
/// with unsampled rows held at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct KSpaceData {
    pub dims: Dims,
    pub n_coils: usize,
    pub data: Vec<C64>,
    pub mask: SamplingMask,
}

impl KSpaceData {
    pub fn new(dims: Dims, n_coils: usize, data: Vec<C64>, mask: SamplingMask) -> Result<Self> {
        if data.len() != dims.len() * n_coils {
            return Err(Error::shape("k-space data", dims.len() * n_coils, data.len()));
        }
        if mask.n_frames() != dims.nt || mask.ny() != dims.ny {
            return Err(Error::shape(
                "sampling mask",
                format!("{} frames of {} lines", dims.nt, dims.ny),
                format!("{} frames of {} lines", mask.n_frames(), mask.ny()),
            ));
        }
        Ok(KSpaceData {
            dims,
            n_coils,
            data,
            mask,
        })
    }
}

/// `H = M F C`: coil weighting, centered orthonormal 2D FFT and row masking
/// per frame and coil.
#[derive(Clone, Debug)]
pub struct MeasurementOperator {
    dims: Dims,
    mask: SamplingMask,
    row_masks: Vec<Vec<bool>>,
    coils: CoilSensitivities,
    plans: Plans,
}

/// FFT plans and transposed coil maps. The mask selects whole `k_y` rows,
/// so `H` transforms along `y` first and along `x` only on sampled rows,
/// and in `H'H` the `x` transforms cancel altogether, leaving
/// `sum_c C_c' Fy' M_t Fy C_c`. Maps are held transposed (columns
/// contiguous) with rows in uncentered order, `(x, i)` with row
/// `i` = centered row `(i + ny/2) % ny` and column `x` likewise shifted.
#[derive(Clone)]
struct Plans {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    /// `1 / sqrt(nx ny)`
    scale: f64,
    maps: Vec<Vec<C64>>,
    /// Per frame, sampled rows indexed by uncentered frequency.
    freq_masks: Vec<Vec<bool>>,
}

impl std::fmt::Debug for Plans {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Plans").finish_non_exhaustive()
    }
}

impl Plans {
    fn new(dims: Dims, row_masks: &[Vec<bool>], coils: &CoilSensitivities) -> Self {
        let (nx, ny) = (dims.nx, dims.ny);
        let (h, hx) = (ny / 2, nx / 2);
        let mut planner = FftPlanner::new();
        let maps = (0..coils.n_coils())
            .map(|c| {
                let m = coils.map(c);
                let mut out = vec![C64::new(0.0, 0.0); nx * ny];
                for x in 0..nx {
                    for i in 0..ny {
                        out[x * ny + i] = m[((i + h) % ny) * nx + (x + hx) % nx];
                    }
                }
                out
            })
            .collect();
        let freq_masks = row_masks
            .iter()
            .map(|rows| (0..ny).map(|k| rows[(k + h) % ny]).collect())
            .collect();
        Plans {
            fwd: planner.plan_fft_forward(ny),
            inv: planner.plan_fft_inverse(ny),
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            scale: 1.0 / ((nx * ny) as f64).sqrt(),
            maps,
            freq_masks,
        }
    }
}

impl MeasurementOperator {
    pub fn new(dims: Dims, mask: SamplingMask, coils: CoilSensitivities) -> Result<Self> {
        if mask.n_frames() != dims.nt {
            return Err(Error::shape("mask frame count", dims.nt, mask.n_frames()));
        }
        if mask.ny() != dims.ny {
            return Err(Error::shape("mask rows", dims.ny, mask.ny()));
        }
        if coils.nx() != dims.nx || coils.ny() != dims.ny {
            return Err(Error::shape(
                "coil maps",
                format!("{}x{}", dims.nx, dims.ny),
                format!("{}x{}", coils.nx(), coils.ny()),
            ));
        }
        let row_masks: Vec<Vec<bool>> = (0..dims.nt).map(|t| mask.row_mask(t)).collect();
        let plans = Plans::new(dims, &row_masks, &coils);
        Ok(MeasurementOperator {
            dims,
            mask,
            row_masks,
            coils,
            plans,
        })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn mask(&self) -> &SamplingMask {
        &self.mask
    }

    pub fn coils(&self) -> &CoilSensitivities {
        &self.coils
    }

    pub fn n_coils(&self) -> usize {
        self.coils.n_coils()
    }

    /// Number of acquired complex samples (sampled rows x columns x coils).
    pub fn n_measurements(&self) -> usize {
        self.mask.total_lines() * self.dims.nx * self.n_coils()
    }

    /// Zeroes unsampled rows in place; `data` is laid out like the range.
    pub fn apply_mask(&self, data: &mut [C64]) {
        let (nx, ny, nt) = (self.dims.nx, self.dims.ny, self.dims.nt);
        let n = nx * ny;
        for (ct, frame) in data.chunks_mut(n).enumerate() {
            let rows = &self.row_masks[ct % nt];
            for (y, row) in frame.chunks_mut(nx).enumerate() {
                if !rows[y] {
                    row.fill(C64::new(0.0, 0.0));
                }
            }
        }
    }

    pub fn forward(&self, x: &ImageSequence) -> Result<KSpaceData> {
        if x.dims() != self.dims {
            return Err(Error::shape("measurement input", self.dims, x.dims()));
        }
        let data = self.apply(x.as_slice())?;
        KSpaceData::new(self.dims, self.n_coils(), data, self.mask.clone())
    }

    pub fn backward(&self, y: &KSpaceData) -> Result<ImageSequence> {
        if y.dims != self.dims || y.n_coils != self.n_coils() {
            return Err(Error::shape(
                "k-space data",
                format!("{} with {} coils", self.dims, self.n_coils()),
                format!("{} with {} coils", y.dims, y.n_coils),
            ));
        }
        ImageSequence::new(self.dims, self.adjoint(&y.data)?)
    }
}

impl LinearOperator for MeasurementOperator {
    fn domain_len(&self) -> usize {
        self.dims.len()
    }

    fn range_len(&self) -> usize {
        self.dims.len() * self.n_coils()
    }

    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        let (nx, ny, nt) = (self.dims.nx, self.dims.ny, self.dims.nt);
        let n = nx * ny;
        let (hx, hy) = (nx / 2, ny / 2);
        let plan = &self.plans;
        assert_eq!(x.len(), self.domain_len());
        assert_eq!(out.len(), self.range_len());
        let zero = C64::new(0.0, 0.0);
        // y transform first so that x transforms run on sampled rows only
        out.par_chunks_mut(n).enumerate().for_each(|(ct, dst)| {
            let (c, t) = (ct / nt, ct % nt);
            let map = &plan.maps[c];
            let src = &x[t * n..(t + 1) * n];
            let mut cols = vec![zero; n];
            for j in 0..nx {
                let xx = (j + hx) % nx;
                for i in 0..ny {
                    cols[j * ny + i] = map[j * ny + i] * src[((i + hy) % ny) * nx + xx];
                }
            }
            plan.fwd.process(&mut cols);
            dst.fill(zero);
            let mut row = vec![zero; nx];
            for &r in self.mask.lines(t) {
                let k = (r + ny - hy) % ny;
                for j in 0..nx {
                    row[j] = cols[j * ny + k];
                }
                plan.fwd_x.process(&mut row);
                let out_row = &mut dst[r * nx..(r + 1) * nx];
                for l in 0..nx {
                    out_row[(l + hx) % nx] = row[l] * plan.scale;
                }
            }
        });
    }

    fn adjoint_into(&self, y: &[C64], out: &mut [C64]) {
        let (nx, ny, nt) = (self.dims.nx, self.dims.ny, self.dims.nt);
        let n = nx * ny;
        let (hx, hy) = (nx / 2, ny / 2);
        let plan = &self.plans;
        assert_eq!(y.len(), self.range_len());
        assert_eq!(out.len(), self.domain_len());
        let zero = C64::new(0.0, 0.0);
        // coils summed in index order inside each frame, so the result does
        // not depend on the thread schedule
        out.par_chunks_mut(n).enumerate().for_each(|(t, dst)| {
            let mut acc = vec![zero; n];
            let mut cols = vec![zero; n];
            let mut row = vec![zero; nx];
            for (c, map) in plan.maps.iter().enumerate() {
                let src = &y[(c * nt + t) * n..(c * nt + t + 1) * n];
                cols.fill(zero);
                for &r in self.mask.lines(t) {
                    let k = (r + ny - hy) % ny;
                    let in_row = &src[r * nx..(r + 1) * nx];
                    for l in 0..nx {
                        row[l] = in_row[(l + hx) % nx];
                    }
                    plan.inv_x.process(&mut row);
                    for j in 0..nx {
                        cols[j * ny + k] = row[j];
                    }
                }
                plan.inv.process(&mut cols);
                for k in 0..n {
                    acc[k] += map[k].conj() * cols[k];
                }
            }
            for j in 0..nx {
                let xx = (j + hx) % nx;
                for i in 0..ny {
                    dst[((i + hy) % ny) * nx + xx] = acc[j * ny + i] * plan.scale;
                }
            }
        });
    }

    fn normal_into(&self, x: &[C64], _tmp: &mut [C64], out: &mut [C64]) {
        let (nx, ny) = (self.dims.nx, self.dims.ny);
        let n = nx * ny;
        let h = ny / 2;
        let plan = &self.plans;
        assert_eq!(x.len(), self.domain_len());
        assert_eq!(out.len(), self.domain_len());
        let scratch_len = plan.fwd.get_inplace_scratch_len().max(plan.inv.get_inplace_scratch_len());
        let zero = C64::new(0.0, 0.0);
        out.par_chunks_mut(n).enumerate().for_each(|(t, dst)| {
            let src = &x[t * n..(t + 1) * n];
            let fmask = &plan.freq_masks[t];
            let full = fmask.iter().all(|&b| b);
            let mut xt = vec![zero; n];
            for x in 0..nx {
                let xx = (x + nx / 2) % nx;
                for i in 0..ny {
                    xt[x * ny + i] = src[((i + h) % ny) * nx + xx];
                }
            }
            let mut acc = vec![zero; n];
            let mut buf = vec![zero; n];
            let mut scratch = vec![zero; scratch_len];
            for map in &plan.maps {
                for k in 0..n {
                    buf[k] = map[k] * xt[k];
                }
                if !full {
                    plan.fwd.process_with_scratch(&mut buf, &mut scratch[..plan.fwd.get_inplace_scratch_len()]);
                    for col in buf.chunks_mut(ny) {
                        for (v, &keep) in col.iter_mut().zip(fmask) {
                            if !keep {
                                *v = zero;
                            }
                        }
                    }
                    plan.inv.process_with_scratch(&mut buf, &mut scratch[..plan.inv.get_inplace_scratch_len()]);
                }
                for k in 0..n {
                    acc[k] += map[k].conj() * buf[k];
                }
            }
            let scale = if full { 1.0 } else { 1.0 / ny as f64 };
            for x in 0..nx {
                let xx = (x + nx / 2) % nx;
                for i in 0..ny {
                    dst[((i + h) % ny) * nx + xx] = acc[x * ny + i] * scale;
                }
            }
        });
    }
}
