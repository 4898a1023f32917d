//! Noisy multi-coil acquisition.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::operators::{KSpaceData, MeasurementOperator, SamplingMask};
use crate::tensor::{CoilSensitivities, ImageSequence, C64};

/// `y = M F C x + n` with complex white noise of total variance
/// `noise_sigma^2` per sample (each component `noise_sigma / sqrt(2)`) added
/// only at sampled entries. Noise is drawn in `(c, t, line, x)` order.
pub fn simulate_acquisition(
    x_true: &ImageSequence,
    coils: &CoilSensitivities,
    mask: &SamplingMask,
    noise_sigma: f64,
    seed: u64,
) -> Result<KSpaceData> {
    if !noise_sigma.is_finite() || noise_sigma < 0.0 {
        return Err(Error::param("noise_sigma", "must be finite and non-negative"));
    }
    let dims = x_true.dims();
    let h = MeasurementOperator::new(dims, mask.clone(), coils.clone())?;
    let mut y = h.forward(x_true)?;
    if noise_sigma == 0.0 {
        return Ok(y);
    }
    let sd = noise_sigma / 2f64.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (nx, ny, nt) = (dims.nx, dims.ny, dims.nt);
    let n_c = coils.n_coils();
    let mut data = std::mem::take(&mut y.data);
    for c in 0..n_c {
        for t in 0..nt {
            for &l in mask.lines(t) {
                let row = ((c * nt + t) * ny + l) * nx;
                for v in &mut data[row..row + nx] {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    *v += C64::new(sd * re, sd * im);
                }
            }
        }
    }
    KSpaceData::new(dims, n_c, data, mask.clone())
}
