//! Separable Gaussian smoothing with half-sample symmetric boundaries.

use super::Displacement;

/// Normalised Gaussian taps of radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil().max(1.0) as isize;
    let mut k: Vec<f64> = (-r..=r)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Reflects an out-of-range index: `... 1 0 | 0 1 ... n-1 | n-1 n-2 ...`.
#[inline]
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let p = 2 * n;
    let m = i.rem_euclid(p);
    (if m < n { m } else { p - 1 - m }) as usize
}

fn convolve_rows(src: &[f64], dst: &mut [f64], nx: usize, ny: usize, k: &[f64]) {
    let r = (k.len() / 2) as isize;
    for y in 0..ny {
        let row = &src[y * nx..(y + 1) * nx];
        for x in 0..nx {
            let mut acc = 0.0;
            for (j, w) in k.iter().enumerate() {
                acc += w * row[reflect(x as isize + j as isize - r, nx)];
            }
            dst[y * nx + x] = acc;
        }
    }
}

fn convolve_cols(src: &[f64], dst: &mut [f64], nx: usize, ny: usize, k: &[f64]) {
    let r = (k.len() / 2) as isize;
    for y in 0..ny {
        for x in 0..nx {
            let mut acc = 0.0;
            for (j, w) in k.iter().enumerate() {
                acc += w * src[reflect(y as isize + j as isize - r, ny) * nx + x];
            }
            dst[y * nx + x] = acc;
        }
    }
}

/// Gaussian blur of a real image.
pub fn smooth_real(img: &[f64], nx: usize, ny: usize, sigma: f64) -> Vec<f64> {
    assert_eq!(img.len(), nx * ny);
    let k = gaussian_kernel(sigma);
    let mut tmp = vec![0.0; nx * ny];
    let mut out = vec![0.0; nx * ny];
    convolve_rows(img, &mut tmp, nx, ny, &k);
    convolve_cols(&tmp, &mut out, nx, ny, &k);
    out
}

/// Gaussian blur applied to both displacement components.
pub fn smooth_field(field: &[Displacement], nx: usize, ny: usize, sigma: f64) -> Vec<Displacement> {
    let dy: Vec<f64> = field.iter().map(|v| v[0]).collect();
    let dx: Vec<f64> = field.iter().map(|v| v[1]).collect();
    let sy = smooth_real(&dy, nx, ny, sigma);
    let sx = smooth_real(&dx, nx, ny, sigma);
    sy.into_iter().zip(sx).map(|(a, b)| [a, b]).collect()
}
