//! Reconstruction quality metrics: ROI RMSE, pixel time courses and motion
//! endpoint error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motion::MotionField;
use crate::tensor::{Dims, ImageSequence};

/// Half-open rectangle `[x0, x1) x [y0, y1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roi {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Roi {
    pub fn full(dims: Dims) -> Self {
        Roi {
            x0: 0,
            y0: 0,
            x1: dims.nx,
            y1: dims.ny,
        }
    }

    pub fn n_pixels(&self) -> usize {
        self.x1.saturating_sub(self.x0) * self.y1.saturating_sub(self.y0)
    }

    pub fn validate(&self, dims: Dims) -> Result<()> {
        if self.x0 >= self.x1 || self.y0 >= self.y1 {
            return Err(Error::EmptyRegion(format!("roi {self:?}")));
        }
        if self.x1 > dims.nx || self.y1 > dims.ny {
            return Err(Error::param("roi", format!("{self:?} exceeds {}x{}", dims.nx, dims.ny)));
        }
        Ok(())
    }
}

/// Per-frame and pooled RMSE of the complex difference inside `roi`.
pub fn rmse_roi(x: &ImageSequence, reference: &ImageSequence, roi: Roi) -> Result<(Vec<f64>, f64)> {
    let dims = x.dims();
    if reference.dims() != dims {
        return Err(Error::shape("reference", dims, reference.dims()));
    }
    roi.validate(dims)?;
    let n = roi.n_pixels() as f64;
    let mut per_frame = Vec::with_capacity(dims.nt);
    let mut total = 0.0;
    for t in 0..dims.nt {
        let (a, b) = (x.frame(t), reference.frame(t));
        let mut acc = 0.0;
        for y in roi.y0..roi.y1 {
            for i in y * dims.nx + roi.x0..y * dims.nx + roi.x1 {
                acc += (a[i] - b[i]).norm_sqr();
            }
        }
        total += acc;
        per_frame.push((acc / n).sqrt());
    }
    Ok((per_frame, (total / (n * dims.nt as f64)).sqrt()))
}

/// Magnitude time course at each `(y, x)` pixel.
pub fn pixel_traces(x: &ImageSequence, pixels: &[(usize, usize)]) -> Result<Vec<Vec<f64>>> {
    let d = x.dims();
    pixels
        .iter()
        .map(|&(y, xx)| {
            if y >= d.ny || xx >= d.nx {
                return Err(Error::param("pixel", format!("({y}, {xx}) outside {}x{}", d.nx, d.ny)));
            }
            Ok((0..d.nt).map(|t| x.get(t, y, xx).norm()).collect())
        })
        .collect()
}

/// Mean Euclidean distance between two fields over the pixels flagged in
/// `support` (one mask per transition).
pub fn motion_endpoint_error(v: &MotionField, v_true: &MotionField, support: &[Vec<bool>]) -> Result<f64> {
    let shape = |f: &MotionField| (f.nx(), f.ny(), f.n_transitions());
    if shape(v) != shape(v_true) {
        return Err(Error::shape("motion field", format!("{:?}", shape(v_true)), format!("{:?}", shape(v))));
    }
    if support.len() != v.n_transitions() || support.iter().any(|s| s.len() != v.nx() * v.ny()) {
        return Err(Error::shape("support", v.n_transitions(), support.len()));
    }
    let (mut sum, mut count) = (0.0, 0usize);
    for (j, mask) in support.iter().enumerate() {
        for ((a, b), _) in v
            .transition(j)
            .iter()
            .zip(v_true.transition(j))
            .zip(mask)
            .filter(|(_, &m)| m)
        {
            sum += ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptyRegion("motion support".into()));
    }
    Ok(sum / count as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PixelTrace {
    pub y: usize,
    pub x: usize,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_frame_rmse: Vec<f64>,
    pub overall_rmse: f64,
    pub roi: Roi,
    pub pixel_traces: Vec<PixelTrace>,
    pub motion_epe: Option<f64>,
}

/// Motion comparison input: estimate, ground truth and support masks.
pub type MotionComparison<'a> = (&'a MotionField, &'a MotionField, &'a [Vec<bool>]);

pub fn evaluate(
    x: &ImageSequence,
    reference: &ImageSequence,
    roi: Roi,
    pixels: &[(usize, usize)],
    motion: Option<MotionComparison<'_>>,
) -> Result<EvalReport> {
    let (per_frame_rmse, overall_rmse) = rmse_roi(x, reference, roi)?;
    let traces = pixel_traces(x, pixels)?;
    let motion_epe = motion.map(|(v, vt, s)| motion_endpoint_error(v, vt, s)).transpose()?;
    Ok(EvalReport {
        per_frame_rmse,
        overall_rmse,
        roi,
        pixel_traces: pixels
            .iter()
            .zip(traces)
            .map(|(&(y, x), values)| PixelTrace { y, x, values })
            .collect(),
        motion_epe,
    })
}
