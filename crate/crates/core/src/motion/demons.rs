//! Demons registration.
//!
//! Each iteration pushes the field along the Thirion force
//! `dv = -e grad(w) / (|grad(w)|^2 + e^2 + eps)`, with `w` the warped source
//! and `e = w - target`, then smooths the field with a Gaussian. The
//! smoothing plays the role of the gradient-energy regulariser on `v`; its
//! width stands in for the regularisation weight.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::transition_pairs;
use crate::tensor::ImageSequence;

use super::{smooth_field, warp_frame, Displacement, MotionField};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegistrationConfig {
    pub step_scale: f64,
    /// Gaussian width in pixels applied to the field after every update.
    pub smoothing_sigma: f64,
    pub max_iters: usize,
    pub force_epsilon: f64,
}

impl Default for RegistrationConfig {
    fn default() -> Self {
        RegistrationConfig {
            step_scale: 1.0,
            smoothing_sigma: 1.5,
            max_iters: 50,
            force_epsilon: 1e-6,
        }
    }
}

impl RegistrationConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be positive, got {v}")))
            }
        };
        pos("step_scale", self.step_scale)?;
        pos("smoothing_sigma", self.smoothing_sigma)?;
        pos("force_epsilon", self.force_epsilon)
    }
}

/// Result of registering one frame pair.
#[derive(Clone, Debug)]
pub struct PairRegistration {
    pub field: Vec<Displacement>,
    /// `||target - warp(source, v_k)||^2`, starting with the initial field.
    pub objective: Vec<f64>,
}

fn mismatch(target: &[f64], warped: &[f64]) -> f64 {
    target.iter().zip(warped).map(|(a, b)| (b - a) * (b - a)).sum()
}

/// Central-difference gradient `(d/dy, d/dx)` with clamped borders.
fn gradient(img: &[f64], nx: usize, ny: usize) -> Vec<[f64; 2]> {
    let mut g = vec![[0.0, 0.0]; nx * ny];
    for y in 0..ny {
        let (ym, yp) = (y.saturating_sub(1), (y + 1).min(ny - 1));
        for x in 0..nx {
            let (xm, xp) = (x.saturating_sub(1), (x + 1).min(nx - 1));
            let gy = if yp > ym {
                (img[yp * nx + x] - img[ym * nx + x]) / (yp - ym) as f64
            } else {
                0.0
            };
            let gx = if xp > xm {
                (img[y * nx + xp] - img[y * nx + xm]) / (xp - xm) as f64
            } else {
                0.0
            };
            g[y * nx + x] = [gy, gx];
        }
    }
    g
}

const BACKTRACK_STEPS: usize = 4;

/// Registers `source` onto `target` (real magnitude frames), refining
/// `v_init` so that `warp(source, v)` approaches `target`.
///
/// A step that would raise the mismatch is retried with half the step up to
/// four times; if none helps the iteration stops, so the recorded objective
/// never increases.
pub fn register_pair(
    target: &[f64],
    source: &[f64],
    nx: usize,
    ny: usize,
    v_init: &[Displacement],
    cfg: &RegistrationConfig,
) -> Result<PairRegistration> {
    cfg.validate()?;
    let n = nx * ny;
    if target.len() != n || source.len() != n {
        return Err(Error::shape("registration frames", n, format!("{} and {}", target.len(), source.len())));
    }
    if v_init.len() != n {
        return Err(Error::shape("initial field", n, v_init.len()));
    }
    if !target.iter().chain(source).all(|v| v.is_finite()) {
        return Err(Error::NonFinite("registration frames"));
    }
    if !v_init.iter().all(|v| v[0].is_finite() && v[1].is_finite()) {
        return Err(Error::InvalidMotion("non-finite initial field".into()));
    }

    let mut v = v_init.to_vec();
    let mut warped = warp_frame(source, &v, nx, ny)?;
    let mut obj = mismatch(target, &warped);
    let mut history = vec![obj];

    for _ in 0..cfg.max_iters {
        let grad = gradient(&warped, nx, ny);
        let force: Vec<Displacement> = (0..n)
            .map(|i| {
                let e = warped[i] - target[i];
                let [gy, gx] = grad[i];
                let denom = gy * gy + gx * gx + e * e + cfg.force_epsilon;
                [-e * gy / denom, -e * gx / denom]
            })
            .collect();

        let mut step = cfg.step_scale;
        let mut accepted = None;
        for _ in 0..=BACKTRACK_STEPS {
            let moved: Vec<Displacement> = v
                .iter()
                .zip(&force)
                .map(|(a, f)| [a[0] + step * f[0], a[1] + step * f[1]])
                .collect();
            let cand = smooth_field(&moved, nx, ny, cfg.smoothing_sigma);
            let cand_warped = warp_frame(source, &cand, nx, ny)?;
            let cand_obj = mismatch(target, &cand_warped);
            if cand_obj <= obj {
                accepted = Some((cand, cand_warped, cand_obj));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((cand, cand_warped, cand_obj)) => {
                v = cand;
                warped = cand_warped;
                obj = cand_obj;
                history.push(obj);
            }
            None => break,
        }
    }
    Ok(PairRegistration {
        field: v,
        objective: history,
    })
}

/// Registers every frame transition of `x` independently on magnitude
/// images. Whether the wrap transition is included follows the transition
/// count of `v_init`.
pub fn register_sequence(x: &ImageSequence, v_init: &MotionField, cfg: &RegistrationConfig) -> Result<MotionField> {
    let d = x.dims();
    if d.nt < 2 {
        return Err(Error::shape("registration frames", ">= 2", d.nt));
    }
    let periodic = match v_init.n_transitions() {
        k if k == d.nt - 1 => false,
        k if k == d.nt => true,
        k => return Err(Error::shape("initial field transitions", format!("{} or {}", d.nt - 1, d.nt), k)),
    };
    if v_init.nx() != d.nx || v_init.ny() != d.ny {
        return Err(Error::shape(
            "initial field grid",
            format!("{}x{}", d.nx, d.ny),
            format!("{}x{}", v_init.nx(), v_init.ny()),
        ));
    }
    let mags: Vec<Vec<f64>> = (0..d.nt).map(|t| x.frame_magnitude(t)).collect();
    let pairs = transition_pairs(d.nt, periodic);
    let fields = pairs
        .par_iter()
        .enumerate()
        .map(|(j, &(t, s))| register_pair(&mags[t], &mags[s], d.nx, d.ny, v_init.transition(j), cfg).map(|r| r.field))
        .collect::<Result<Vec<_>>>()?;
    MotionField::new(d.nx, d.ny, pairs.len(), fields.concat())
}
