use std::ops::{Add, Mul};

use crate::error::{Error, Result};
use crate::operators::bilinear_taps;
use crate::tensor::C64;

use super::Displacement;

/// Pixel types the warp can resample.
pub trait Sample: Copy + Send + Sync + Add<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
}

impl Sample for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl Sample for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
}

/// Motion-compensated estimate of a target frame from `source`:
/// `out(s) = source(s + v(s))`, bilinear with clamped coordinates.
///
/// Accumulates taps in the same order as the sparse motion matrix, so the
/// two paths agree bit for bit.
pub fn warp_frame<T: Sample>(source: &[T], field: &[Displacement], nx: usize, ny: usize) -> Result<Vec<T>> {
    let n = nx * ny;
    if source.len() != n {
        return Err(Error::shape("warp source", n, source.len()));
    }
    if field.len() != n {
        return Err(Error::shape("warp field", n, field.len()));
    }
    let mut out = Vec::with_capacity(n);
    for y in 0..ny {
        for x in 0..nx {
            let d = field[y * nx + x];
            let mut acc = T::zero();
            for (i, w) in bilinear_taps(y, x, d[0], d[1], nx, ny).iter() {
                acc = acc + source[i] * w;
            }
            out.push(acc);
        }
    }
    Ok(out)
}
