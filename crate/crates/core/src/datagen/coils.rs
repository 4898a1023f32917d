//! Synthetic coil sensitivities.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::tensor::{CoilSensitivities, Dims, C64};

/// Gaussian-profile maps centred on `n_c` points spaced evenly on a circle
/// through the image border, each with a constant phase `2 pi c / n_c`, then
/// normalised to unit root-sum-of-squares at every pixel.
pub fn generate_coils(dims: Dims, n_c: usize) -> Result<CoilSensitivities> {
    if n_c < 1 {
        return Err(Error::param("n_coils", "at least one coil is required"));
    }
    let Dims { nx, ny, .. } = Dims::new(dims.nx, dims.ny, dims.nt.max(1))?;
    let n = nx.max(ny) as f64;
    let (cy, cx) = ((ny as f64 - 1.0) / 2.0, (nx as f64 - 1.0) / 2.0);
    let radius = 0.5 * n;
    let width = 0.5 * n;

    let mut maps = vec![C64::new(0.0, 0.0); n_c * nx * ny];
    for c in 0..n_c {
        let theta = 2.0 * PI * c as f64 / n_c as f64;
        let (py, px) = (cy + radius * theta.sin(), cx + radius * theta.cos());
        let phase = C64::from_polar(1.0, theta);
        for y in 0..ny {
            for x in 0..nx {
                let d2 = (y as f64 - py).powi(2) + (x as f64 - px).powi(2);
                maps[(c * ny + y) * nx + x] = phase * (-d2 / (2.0 * width * width)).exp();
            }
        }
    }
    for i in 0..nx * ny {
        let rss = (0..n_c).map(|c| maps[c * nx * ny + i].norm_sqr()).sum::<f64>().sqrt();
        for c in 0..n_c {
            maps[c * nx * ny + i] /= rss;
        }
    }
    CoilSensitivities::new(nx, ny, n_c, maps)
}
