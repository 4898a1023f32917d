//! Variable-density Cartesian line masks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{lines_per_frame, SamplingMask};
use crate::tensor::Dims;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MaskSpec {
    pub rate: f64,
    /// Standard deviation of the line density as a fraction of `n_y`.
    pub sigma_fraction: f64,
    pub seed: u64,
    pub always_sample_dc: bool,
}

impl Default for MaskSpec {
    fn default() -> Self {
        MaskSpec {
            rate: 8.0,
            sigma_fraction: 0.25,
            seed: 0,
            always_sample_dc: true,
        }
    }
}

/// Draws `round(n_y / R)` distinct phase-encode lines per frame, each new
/// line picked with probability proportional to a Gaussian centred on the
/// DC row among the lines not yet chosen. Frames use consecutive draws from
/// one seeded stream, so patterns differ between frames.
pub fn generate_mask(spec: &MaskSpec, dims: Dims) -> Result<SamplingMask> {
    let Dims { ny, nt, .. } = Dims::new(dims.nx, dims.ny, dims.nt)?;
    if spec.rate.is_nan() || spec.rate < 1.0 || spec.rate > ny as f64 {
        return Err(Error::param("rate", format!("must lie in [1, n_y = {ny}], got {}", spec.rate)));
    }
    if spec.sigma_fraction.is_nan() || spec.sigma_fraction <= 0.0 {
        return Err(Error::param("sigma_fraction", "must be positive"));
    }
    let count = lines_per_frame(ny, spec.rate);
    if count == 0 {
        return Err(Error::param("rate", "no lines left per frame"));
    }
    let dc = ny / 2;
    let sigma = spec.sigma_fraction * ny as f64;
    let weights: Vec<f64> = (0..ny)
        .map(|l| {
            let d = l as f64 - dc as f64;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut lines = Vec::with_capacity(nt);
    for _ in 0..nt {
        let mut taken = vec![false; ny];
        let mut chosen = Vec::with_capacity(count);
        if spec.always_sample_dc {
            taken[dc] = true;
            chosen.push(dc);
        }
        while chosen.len() < count {
            let total: f64 = weights.iter().zip(&taken).filter(|(_, &t)| !t).map(|(w, _)| w).sum();
            let mut u = rng.random::<f64>() * total;
            let mut pick = None;
            for (l, (&w, &t)) in weights.iter().zip(&taken).enumerate() {
                if t {
                    continue;
                }
                pick = Some(l);
                if u < w {
                    break;
                }
                u -= w;
            }
            let l = pick.expect("at least one free line");
            taken[l] = true;
            chosen.push(l);
        }
        lines.push(chosen);
    }
    SamplingMask::new(ny, spec.rate, lines)
}
