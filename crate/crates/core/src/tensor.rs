//! Complex image containers.
//!
//! Everything is stored row-major in `(t, y, x)` order, so a frame is a
//! contiguous slice of `n_x * n_y` samples and a row of a frame is a
//! contiguous slice of `n_x` samples.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Grid size of a dynamic sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
}

impl Dims {
    pub fn new(nx: usize, ny: usize, nt: usize) -> Result<Self> {
        for (name, v) in [("nx", nx), ("ny", ny), ("nt", nt)] {
            if v == 0 {
                return Err(Error::param(name, "must be positive"));
            }
        }
        Ok(Dims { nx, ny, nt })
    }

    #[inline]
    pub fn frame_len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nt
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, t: usize, y: usize, x: usize) -> usize {
        (t * self.ny + y) * self.nx + x
    }

    /// Same spatial grid with a different number of frames.
    pub fn with_frames(&self, nt: usize) -> Dims {
        Dims { nt, ..*self }
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.nx, self.ny, self.nt)
    }
}

/// A complex-valued dynamic image stack `x = [x_1 ... x_nt]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageSequence {
    dims: Dims,
    data: Vec<C64>,
}

impl ImageSequence {
    /// Wraps `data` laid out as `(t, y, x)`. Rejects wrong lengths and
    /// non-finite samples.
    pub fn new(dims: Dims, data: Vec<C64>) -> Result<Self> {
        let dims = Dims::new(dims.nx, dims.ny, dims.nt)?;
        if data.len() != dims.len() {
            return Err(Error::shape("image sequence", dims.len(), data.len()));
        }
        if !data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("image sequence"));
        }
        Ok(ImageSequence { dims, data })
    }

    pub fn zeros(dims: Dims) -> Self {
        ImageSequence {
            dims,
            data: vec![C64::new(0.0, 0.0); dims.len()],
        }
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> C64) -> Result<Self> {
        let mut data = Vec::with_capacity(dims.len());
        for t in 0..dims.nt {
            for y in 0..dims.ny {
                for x in 0..dims.nx {
                    data.push(f(t, y, x));
                }
            }
        }
        Self::new(dims, data)
    }

    /// Builds a sequence from real per-frame images.
    pub fn from_real_frames(dims: Dims, frames: &[Vec<f64>]) -> Result<Self> {
        if frames.len() != dims.nt {
            return Err(Error::shape("frame count", dims.nt, frames.len()));
        }
        let mut data = Vec::with_capacity(dims.len());
        for f in frames {
            if f.len() != dims.frame_len() {
                return Err(Error::shape("frame", dims.frame_len(), f.len()));
            }
            data.extend(f.iter().map(|&v| C64::new(v, 0.0)));
        }
        Self::new(dims, data)
    }

    #[inline]
    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    #[inline]
    pub fn get(&self, t: usize, y: usize, x: usize) -> C64 {
        self.data[self.dims.index(t, y, x)]
    }

    pub fn frame(&self, t: usize) -> &[C64] {
        let n = self.dims.frame_len();
        &self.data[t * n..(t + 1) * n]
    }

    pub fn frame_magnitude(&self, t: usize) -> Vec<f64> {
        self.frame(t).iter().map(|z| z.norm()).collect()
    }

    pub fn max_magnitude(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

/// Per-coil complex sensitivity maps, laid out `(c, y, x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoilSensitivities {
    nx: usize,
    ny: usize,
    n_coils: usize,
    maps: Vec<C64>,
}

impl CoilSensitivities {
    pub fn new(nx: usize, ny: usize, n_coils: usize, maps: Vec<C64>) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::param("coil grid", "dimensions must be positive"));
        }
        if n_coils == 0 {
            return Err(Error::param("n_coils", "at least one coil is required"));
        }
        if maps.len() != nx * ny * n_coils {
            return Err(Error::shape("coil maps", nx * ny * n_coils, maps.len()));
        }
        if !maps.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("coil maps"));
        }
        Ok(CoilSensitivities {
            nx,
            ny,
            n_coils,
            maps,
        })
    }

    /// A single coil of unit sensitivity.
    pub fn unit(nx: usize, ny: usize) -> Self {
        CoilSensitivities {
            nx,
            ny,
            n_coils: 1,
            maps: vec![C64::new(1.0, 0.0); nx * ny],
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn n_coils(&self) -> usize {
        self.n_coils
    }

    pub fn map(&self, c: usize) -> &[C64] {
        let n = self.nx * self.ny;
        &self.maps[c * n..(c + 1) * n]
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.maps
    }

    /// Root-sum-of-squares over coils at every pixel.
    pub fn rss(&self) -> Vec<f64> {
        let n = self.nx * self.ny;
        (0..n)
            .map(|i| {
                (0..self.n_coils)
                    .map(|c| self.maps[c * n + i].norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }
}
