use crate::error::{Error, Result};

/// One displacement `(dy, dx)` in pixels.
pub type Displacement = [f64; 2];

/// Dense per-transition displacement fields, laid out `(transition, y, x)`.
///
/// Transition `j` follows [`crate::operators::transition_pairs`]; its vector
/// at pixel `s` points from `s` in the target frame to the sampling location
/// in the source frame, i.e. `x_target(s) ~ x_source(s + v(s))`.
#[derive(Clone, Debug, PartialEq)]
pub struct MotionField {
    nx: usize,
    ny: usize,
    n_transitions: usize,
    data: Vec<Displacement>,
}

impl MotionField {
    pub fn new(nx: usize, ny: usize, n_transitions: usize, data: Vec<Displacement>) -> Result<Self> {
        if data.len() != nx * ny * n_transitions {
            return Err(Error::shape("motion field", nx * ny * n_transitions, data.len()));
        }
        let f = MotionField {
            nx,
            ny,
            n_transitions,
            data,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn zeros(nx: usize, ny: usize, n_transitions: usize) -> Self {
        Self::uniform(nx, ny, n_transitions, [0.0, 0.0])
    }

    pub fn uniform(nx: usize, ny: usize, n_transitions: usize, v: Displacement) -> Self {
        MotionField {
            nx,
            ny,
            n_transitions,
            data: vec![v; nx * ny * n_transitions],
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn n_transitions(&self) -> usize {
        self.n_transitions
    }

    pub fn as_slice(&self) -> &[Displacement] {
        &self.data
    }

    pub fn transition(&self, j: usize) -> &[Displacement] {
        let n = self.nx * self.ny;
        &self.data[j * n..(j + 1) * n]
    }

    pub fn transition_mut(&mut self, j: usize) -> &mut [Displacement] {
        let n = self.nx * self.ny;
        &mut self.data[j * n..(j + 1) * n]
    }

    /// Errors if any component is NaN or infinite.
    pub fn validate(&self) -> Result<()> {
        match self
            .data
            .iter()
            .position(|v| !(v[0].is_finite() && v[1].is_finite()))
        {
            None => Ok(()),
            Some(i) => {
                let n = self.nx * self.ny;
                Err(Error::InvalidMotion(format!(
                    "non-finite displacement at transition {}, pixel ({}, {})",
                    i / n,
                    (i % n) / self.nx,
                    i % self.nx
                )))
            }
        }
    }

    /// `sum ||grad v_j||^2` over all transitions, forward differences.
    pub fn gradient_energy(&self) -> f64 {
        (0..self.n_transitions)
            .map(|j| gradient_energy(self.transition(j), self.nx, self.ny))
            .sum()
    }

    /// Root-mean-square displacement magnitude.
    pub fn rms(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        (self.data.iter().map(|v| v[0] * v[0] + v[1] * v[1]).sum::<f64>() / self.data.len() as f64)
            .sqrt()
    }
}

/// Forward-difference gradient energy of one displacement grid.
pub fn gradient_energy(field: &[Displacement], nx: usize, ny: usize) -> f64 {
    let mut e = 0.0;
    for y in 0..ny {
        for x in 0..nx {
            let v = field[y * nx + x];
            if x + 1 < nx {
                let w = field[y * nx + x + 1];
                e += (w[0] - v[0]).powi(2) + (w[1] - v[1]).powi(2);
            }
            if y + 1 < ny {
                let w = field[(y + 1) * nx + x];
                e += (w[0] - v[0]).powi(2) + (w[1] - v[1]).powi(2);
            }
        }
    }
    e
}
