use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cartesian phase-encode sampling: for each frame, the set of k-space rows
/// that were acquired.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingMask {
    ny: usize,
    rate: f64,
    lines: Vec<Vec<usize>>,
}

/// Lines per frame for an acceleration `rate`: `round(ny / rate)`.
pub fn lines_per_frame(ny: usize, rate: f64) -> usize {
    (ny as f64 / rate).round() as usize
}

impl SamplingMask {
    /// Validates and sorts the per-frame line sets. Every frame must hold
    /// exactly `round(ny / rate)` distinct rows in `[0, ny)`.
    pub fn new(ny: usize, rate: f64, mut lines: Vec<Vec<usize>>) -> Result<Self> {
        if !(rate.is_finite() && rate >= 1.0) {
            return Err(Error::param("rate", format!("must be >= 1, got {rate}")));
        }
        let want = lines_per_frame(ny, rate);
        if want == 0 {
            return Err(Error::param("rate", format!("{rate} leaves no lines out of {ny}")));
        }
        if lines.is_empty() {
            return Err(Error::param("lines", "mask has no frames"));
        }
        for (t, frame) in lines.iter_mut().enumerate() {
            frame.sort_unstable();
            frame.dedup();
            if frame.len() != want {
                return Err(Error::shape("mask lines per frame", want, format!("{} in frame {t}", frame.len())));
            }
            if let Some(&bad) = frame.iter().find(|&&l| l >= ny) {
                return Err(Error::param("lines", format!("line {bad} out of range in frame {t}")));
            }
        }
        Ok(SamplingMask { ny, rate, lines })
    }

    /// Every line of every frame.
    pub fn full(ny: usize, nt: usize) -> Self {
        SamplingMask {
            ny,
            rate: 1.0,
            lines: vec![(0..ny).collect(); nt],
        }
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn n_frames(&self) -> usize {
        self.lines.len()
    }

    pub fn lines(&self, t: usize) -> &[usize] {
        &self.lines[t]
    }

    pub fn all_lines(&self) -> &[Vec<usize>] {
        &self.lines
    }

    /// Row indicator for frame `t`.
    pub fn row_mask(&self, t: usize) -> Vec<bool> {
        let mut m = vec![false; self.ny];
        for &l in &self.lines[t] {
            m[l] = true;
        }
        m
    }

    pub fn includes_dc_everywhere(&self) -> bool {
        self.lines.iter().all(|f| f.binary_search(&(self.ny / 2)).is_ok())
    }

    pub fn total_lines(&self) -> usize {
        self.lines.iter().map(Vec::len).sum()
    }
}
