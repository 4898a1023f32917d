//! Anti-aliased ellipse phantom with periodic motion.
//!
//! Objects are composited in list order. Moving objects translate along a
//! periodic trajectory and may breathe (scale about their centre); their
//! ground-truth backward displacement is the inverse affine map between
//! frames, assigned to every pixel within `motion_margin` of the object.
//! Moving objects are expected to sit on a locally uniform background so
//! that this assignment is exact up to interpolation error.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::Roi;
use crate::motion::{Displacement, MotionField};
use crate::operators::transition_pairs;
use crate::tensor::{Dims, ImageSequence};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Trajectory {
    Static,
    /// Moves `step` pixels per frame for half the cycle, then back.
    Triangle { step: [f64; 2] },
    Sinusoid { amplitude: [f64; 2], phase: f64 },
}

impl Trajectory {
    /// Offset `(dy, dx)` of the centre at frame `t` of an `nt`-frame cycle.
    pub fn offset(&self, t: usize, nt: usize) -> [f64; 2] {
        match *self {
            Trajectory::Static => [0.0, 0.0],
            Trajectory::Triangle { step } => {
                let k = t.min(nt - t) as f64;
                [step[0] * k, step[1] * k]
            }
            Trajectory::Sinusoid { amplitude, phase } => {
                let s = (2.0 * PI * t as f64 / nt as f64 + phase).sin();
                [amplitude[0] * s, amplitude[1] * s]
            }
        }
    }

    pub fn is_static(&self) -> bool {
        matches!(self, Trajectory::Static)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipseObject {
    /// `(y, x)` at frame 0, pixels.
    pub center: [f64; 2],
    /// `(semi-axis along y, semi-axis along x)`, pixels.
    pub semi_axes: [f64; 2],
    pub intensity: f64,
    pub trajectory: Trajectory,
    /// Relative breathing amplitude: semi-axes scale by `1 + a sin(2 pi t / nt)`.
    #[serde(default)]
    pub deformation: f64,
}

impl EllipseObject {
    pub fn is_moving(&self) -> bool {
        !self.trajectory.is_static() || self.deformation != 0.0
    }

    fn geometry(&self, t: usize, nt: usize) -> ([f64; 2], [f64; 2]) {
        let o = self.trajectory.offset(t, nt);
        let s = 1.0 + self.deformation * (2.0 * PI * t as f64 / nt as f64).sin();
        (
            [self.center[0] + o[0], self.center[1] + o[1]],
            [self.semi_axes[0] * s, self.semi_axes[1] * s],
        )
    }

    /// Approximate signed distance (pixels, negative inside) at frame `t`.
    fn signed_distance(&self, y: f64, x: f64, t: usize, nt: usize) -> f64 {
        let (c, a) = self.geometry(t, nt);
        let (u, v) = ((y - c[0]) / a[0], (x - c[1]) / a[1]);
        let q = u * u + v * v;
        let g = 2.0 * ((u / a[0]).powi(2) + (v / a[1]).powi(2)).sqrt();
        if g == 0.0 {
            f64::NEG_INFINITY
        } else {
            (q - 1.0) / g
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub dims: Dims,
    pub objects: Vec<EllipseObject>,
    pub background: f64,
    /// Evaluation region; `None` derives it from the moving objects.
    pub roi: Option<Roi>,
    /// Edge scale in pixels: coverage is the logistic of `-d / edge_width`.
    pub edge_width: f64,
    /// Distance outside a moving object that still follows its motion.
    pub motion_margin: f64,
}

impl PhantomSpec {
    /// Cardiac-like layout: a static torso with static side structures and a
    /// translating, breathing two-compartment "heart" moving about 2 px per
    /// frame. Geometry scales with the grid; the motion step does not.
    pub fn cardiac(nx: usize, ny: usize, nt: usize) -> Self {
        let (fy, fx) = (ny as f64, nx as f64);
        let heart = |semi: f64, intensity: f64| EllipseObject {
            center: [0.40 * fy, 0.52 * fx],
            semi_axes: [semi * fy, 0.86 * semi * fx],
            intensity,
            trajectory: Trajectory::Triangle { step: [2.0, 1.0] },
            deformation: 0.12,
        };
        PhantomSpec {
            dims: Dims { nx, ny, nt },
            objects: vec![
                EllipseObject {
                    center: [0.5 * fy, 0.5 * fx],
                    semi_axes: [0.42 * fy, 0.45 * fx],
                    intensity: 0.35,
                    trajectory: Trajectory::Static,
                    deformation: 0.0,
                },
                EllipseObject {
                    center: [0.52 * fy, 0.2 * fx],
                    semi_axes: [0.12 * fy, 0.06 * fx],
                    intensity: 0.6,
                    trajectory: Trajectory::Static,
                    deformation: 0.0,
                },
                EllipseObject {
                    center: [0.86 * fy, 0.5 * fx],
                    semi_axes: [0.035 * fy, 0.08 * fx],
                    intensity: 0.8,
                    trajectory: Trajectory::Static,
                    deformation: 0.0,
                },
                heart(0.14, 0.65),
                heart(0.08, 1.0),
            ],
            background: 0.0,
            roi: None,
            edge_width: 1.0,
            motion_margin: 6.0,
        }
    }

    /// Full-size profile: 256 x 256, 24 frames.
    pub fn default_profile() -> Self {
        Self::cardiac(256, 256, 24)
    }

    /// CI profile: 64 x 64, 8 frames.
    pub fn small_profile() -> Self {
        Self::cardiac(64, 64, 8)
    }

    pub fn validate(&self) -> Result<()> {
        Dims::new(self.dims.nx, self.dims.ny, self.dims.nt)?;
        if self.edge_width.is_nan() || self.edge_width <= 0.0 {
            return Err(Error::param("edge_width", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.background) {
            return Err(Error::param("background", "must lie in [0, 1]"));
        }
        let (nx, ny, nt) = (self.dims.nx as f64, self.dims.ny as f64, self.dims.nt);
        for (k, o) in self.objects.iter().enumerate() {
            if !(0.0..=1.0).contains(&o.intensity) {
                return Err(Error::param("intensity", format!("object {k}: must lie in [0, 1]")));
            }
            if !(o.semi_axes[0] > 0.0 && o.semi_axes[1] > 0.0) {
                return Err(Error::param("semi_axes", format!("object {k}: must be positive")));
            }
            for t in 0..nt {
                let (c, a) = o.geometry(t, nt);
                if c[0] - a[0] < 0.0 || c[0] + a[0] > ny - 1.0 || c[1] - a[1] < 0.0 || c[1] + a[1] > nx - 1.0 {
                    return Err(Error::param("objects", format!("object {k} leaves the image at frame {t}")));
                }
            }
        }
        if let Some(roi) = self.roi {
            roi.validate(self.dims)?;
        }
        Ok(())
    }
}

/// Generated ground truth.
#[derive(Clone, Debug)]
pub struct Phantom {
    pub x: ImageSequence,
    pub motion: MotionField,
    pub roi: Roi,
    /// Per transition: pixels inside a moving object in the target frame.
    pub moving_support: Vec<Vec<bool>>,
}

pub fn generate_phantom(spec: &PhantomSpec, periodic: bool) -> Result<Phantom> {
    spec.validate()?;
    let Dims { nx, ny, nt } = spec.dims;

    let mut frames = Vec::with_capacity(nt);
    for t in 0..nt {
        let mut img = vec![spec.background; nx * ny];
        for o in &spec.objects {
            for y in 0..ny {
                for x in 0..nx {
                    let d = o.signed_distance(y as f64, x as f64, t, nt);
                    let alpha = 0.5 * (1.0 - (0.5 * d / spec.edge_width).tanh());
                    let v = &mut img[y * nx + x];
                    *v = *v * (1.0 - alpha) + o.intensity * alpha;
                }
            }
        }
        frames.push(img);
    }
    let peak = frames.iter().flatten().fold(0.0f64, |m, &v| m.max(v.abs()));
    if peak > 0.0 {
        frames.iter_mut().flatten().for_each(|v| *v /= peak);
    }
    let x = ImageSequence::from_real_frames(spec.dims, &frames)?;

    let pairs = transition_pairs(nt, periodic);
    let moving: Vec<&EllipseObject> = spec.objects.iter().filter(|o| o.is_moving()).collect();
    let mut field = Vec::with_capacity(pairs.len() * nx * ny);
    let mut support = Vec::with_capacity(pairs.len());
    for &(tgt, src) in &pairs {
        let mut sup = vec![false; nx * ny];
        for y in 0..ny {
            for x in 0..nx {
                let (py, px) = (y as f64, x as f64);
                let mut v: Displacement = [0.0, 0.0];
                for o in moving.iter().rev() {
                    let d = o.signed_distance(py, px, tgt, nt);
                    if d < spec.motion_margin {
                        let (ct, at) = o.geometry(tgt, nt);
                        let (cs, as_) = o.geometry(src, nt);
                        v = [
                            cs[0] + (py - ct[0]) * as_[0] / at[0] - py,
                            cs[1] + (px - ct[1]) * as_[1] / at[1] - px,
                        ];
                        break;
                    }
                }
                sup[y * nx + x] = moving.iter().any(|o| o.signed_distance(py, px, tgt, nt) < 0.0);
                field.push(v);
            }
        }
        support.push(sup);
    }
    let motion = MotionField::new(nx, ny, pairs.len(), field)?;

    let roi = match spec.roi {
        Some(r) => r,
        None => moving_bounding_box(spec, &moving),
    };
    Ok(Phantom {
        x,
        motion,
        roi,
        moving_support: support,
    })
}

fn moving_bounding_box(spec: &PhantomSpec, moving: &[&EllipseObject]) -> Roi {
    let Dims { nx, ny, nt } = spec.dims;
    if moving.is_empty() {
        return Roi {
            x0: 0,
            y0: 0,
            x1: nx,
            y1: ny,
        };
    }
    let (mut y0, mut y1, mut x0, mut x1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for o in moving {
        for t in 0..nt {
            let (c, a) = o.geometry(t, nt);
            y0 = y0.min(c[0] - a[0]);
            y1 = y1.max(c[0] + a[0]);
            x0 = x0.min(c[1] - a[1]);
            x1 = x1.max(c[1] + a[1]);
        }
    }
    let pad = spec.motion_margin + 1.0;
    Roi {
        x0: (x0 - pad).floor().max(0.0) as usize,
        y0: (y0 - pad).floor().max(0.0) as usize,
        x1: ((x1 + pad).ceil() as usize + 1).min(nx),
        y1: ((y1 + pad).ceil() as usize + 1).min(ny),
    }
}
