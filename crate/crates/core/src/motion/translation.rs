use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::tensor::C64;

/// Global shift `d` with `target(s) ~ source(s + d)`, in the same convention
/// as motion fields.
///
/// Normalised cross-power spectrum (phase correlation) gives the integer
/// peak; a three-point parabola along each axis refines it.
pub fn estimate_global_translation(target: &[f64], source: &[f64], nx: usize, ny: usize) -> Result<[f64; 2]> {
    let n = nx * ny;
    if target.len() != n || source.len() != n {
        return Err(Error::shape("translation frames", n, format!("{} and {}", target.len(), source.len())));
    }
    if target.iter().all(|&v| v == 0.0) || source.iter().all(|&v| v == 0.0) {
        return Err(Error::Degenerate("cannot correlate an all-zero frame".into()));
    }
    let fft = Fft2::new(nx, ny);
    let to_c = |v: &[f64]| v.iter().map(|&r| C64::new(r, 0.0)).collect::<Vec<_>>();
    let ft = fft.forward(&to_c(target))?;
    let fs = fft.forward(&to_c(source))?;
    let peak_mag = fs.iter().zip(&ft).map(|(a, b)| (a * b.conj()).norm()).fold(0.0, f64::max);
    let floor = 1e-12 * peak_mag;
    let cross: Vec<C64> = fs
        .iter()
        .zip(&ft)
        .map(|(a, b)| {
            let p = a * b.conj();
            let m = p.norm();
            if m > floor {
                p / m
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    // centered transforms put lag d at index d + n/2
    let corr: Vec<f64> = fft.inverse(&cross)?.iter().map(|z| z.re).collect();
    let (mut best, mut best_i) = (f64::NEG_INFINITY, 0);
    for (i, &c) in corr.iter().enumerate() {
        if c > best {
            best = c;
            best_i = i;
        }
    }
    let (py, px) = (best_i / nx, best_i % nx);
    let at = |y: usize, x: usize| corr[y * nx + x];
    let refine = |m: f64, c: f64, p: f64| {
        let denom = m - 2.0 * c + p;
        if denom.abs() < 1e-15 {
            0.0
        } else {
            (0.5 * (m - p) / denom).clamp(-0.5, 0.5)
        }
    };
    let dy = if ny >= 3 {
        refine(at((py + ny - 1) % ny, px), at(py, px), at((py + 1) % ny, px))
    } else {
        0.0
    };
    let dx = if nx >= 3 {
        refine(at(py, (px + nx - 1) % nx), at(py, px), at(py, (px + 1) % nx))
    } else {
        0.0
    };
    Ok([
        py as f64 - (ny / 2) as f64 + dy,
        px as f64 - (nx / 2) as f64 + dx,
    ])
}
