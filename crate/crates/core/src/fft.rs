//! Centered, orthonormal 2D discrete Fourier transform.
//!
//! The DC coefficient sits at `(n_y / 2, n_x / 2)` and both directions are
//! scaled by `1 / sqrt(n_x * n_y)`, so the inverse is the adjoint.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::tensor::C64;

/// Planned centered 2D FFT for a fixed `(n_x, n_y)` grid. Cheap to clone and
/// safe to share across threads.
#[derive(Clone)]
pub struct Fft2 {
    nx: usize,
    ny: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("nx", &self.nx).field("ny", &self.ny).finish()
    }
}

impl Fft2 {
    pub fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            nx,
            ny,
            row_fwd: planner.plan_fft_forward(nx),
            row_inv: planner.plan_fft_inverse(nx),
            col_fwd: planner.plan_fft_forward(ny),
            col_inv: planner.plan_fft_inverse(ny),
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.nx * self.ny {
            return Err(Error::shape(
                "fft2 frame",
                format!("{}x{}", self.nx, self.ny),
                format!("{len} samples"),
            ));
        }
        Ok(())
    }

    /// Forward transform of one frame, returning centered k-space.
    pub fn forward(&self, img: &[C64]) -> Result<Vec<C64>> {
        self.check(img.len())?;
        let mut out = img.to_vec();
        self.forward_in_place(&mut out);
        Ok(out)
    }

    /// Inverse of [`Fft2::forward`].
    pub fn inverse(&self, ksp: &[C64]) -> Result<Vec<C64>> {
        self.check(ksp.len())?;
        let mut out = ksp.to_vec();
        self.inverse_in_place(&mut out);
        Ok(out)
    }

    /// In-place forward transform. Panics if `buf` is not one frame long.
    pub fn forward_in_place(&self, buf: &mut [C64]) {
        self.transform(buf, false);
    }

    /// In-place inverse transform. Panics if `buf` is not one frame long.
    pub fn inverse_in_place(&self, buf: &mut [C64]) {
        self.transform(buf, true);
    }

    fn transform(&self, buf: &mut [C64], inverse: bool) {
        let (nx, ny) = (self.nx, self.ny);
        assert_eq!(buf.len(), nx * ny, "fft2 buffer length");
        let (row, col) = if inverse {
            (&self.row_inv, &self.col_inv)
        } else {
            (&self.row_fwd, &self.col_fwd)
        };

        // ifftshift: sample i reads (i + n/2) mod n; the fftshift at the end
        // writes sample i to (i + n/2) mod n, its inverse for any n
        let mut work = vec![C64::new(0.0, 0.0); nx * ny];
        for y in 0..ny {
            let sy = (y + ny / 2) % ny;
            for x in 0..nx {
                let sx = (x + nx / 2) % nx;
                work[y * nx + x] = buf[sy * nx + sx];
            }
        }

        let mut scratch =
            vec![C64::new(0.0, 0.0); row.get_inplace_scratch_len().max(col.get_inplace_scratch_len())];
        row.process_with_scratch(&mut work, &mut scratch[..row.get_inplace_scratch_len()]);

        // columns via transpose
        let mut cols = vec![C64::new(0.0, 0.0); nx * ny];
        for y in 0..ny {
            for x in 0..nx {
                cols[x * ny + y] = work[y * nx + x];
            }
        }
        col.process_with_scratch(&mut cols, &mut scratch[..col.get_inplace_scratch_len()]);

        // transpose back fused with fftshift and scaling
        let scale = 1.0 / ((nx * ny) as f64).sqrt();
        for x in 0..nx {
            let dx = (x + nx / 2) % nx;
            for y in 0..ny {
                let dy = (y + ny / 2) % ny;
                buf[dy * nx + dx] = cols[x * ny + y] * scale;
            }
        }
    }
}

/// Centered orthonormal FFT of a single `n_x x n_y` frame.
pub fn fft2_centered(img: &[C64], nx: usize, ny: usize) -> Result<Vec<C64>> {
    Fft2::new(nx, ny).forward(img)
}

/// Inverse of [`fft2_centered`].
pub fn ifft2_centered(ksp: &[C64], nx: usize, ny: usize) -> Result<Vec<C64>> {
    Fft2::new(nx, ny).inverse(ksp)
}
