//! Bilinear interpolation weights shared by the sparse motion matrix and the
//! direct warp, so both paths produce identical numbers.

/// Up to four `(flat index, weight)` taps in the order `s1, s2, s3, s4`
/// (top-left, top-right, bottom-left, bottom-right). Zero-weight taps are
/// dropped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Taps {
    pub len: usize,
    pub index: [usize; 4],
    pub weight: [f64; 4],
}

impl Taps {
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.len).map(move |k| (self.index[k], self.weight[k]))
    }
}

/// Splits a coordinate clamped to `[0, n-1]` into a base index and a
/// fractional offset toward `base + 1`.
#[inline]
fn split(coord: f64, n: usize) -> (usize, usize, f64) {
    let max = (n - 1) as f64;
    let c = coord.clamp(0.0, max);
    if n == 1 {
        return (0, 0, 0.0);
    }
    let base = (c.floor() as usize).min(n - 2);
    (base, base + 1, c - base as f64)
}

/// Taps for sampling an `nx x ny` frame at `(y + dy, x + dx)`, with the
/// source location clamped to the image.
///
/// `a` is the fractional vertical offset and `b` the fractional horizontal
/// one; the weights are `(1-a)(1-b), (1-a)b, a(1-b), ab`.
#[inline]
pub fn bilinear_taps(y: usize, x: usize, dy: f64, dx: f64, nx: usize, ny: usize) -> Taps {
    let (y0, y1, a) = split(y as f64 + dy, ny);
    let (x0, x1, b) = split(x as f64 + dx, nx);
    let cand = [
        (y0 * nx + x0, (1.0 - a) * (1.0 - b)),
        (y0 * nx + x1, (1.0 - a) * b),
        (y1 * nx + x0, a * (1.0 - b)),
        (y1 * nx + x1, a * b),
    ];
    let mut taps = Taps {
        len: 0,
        index: [0; 4],
        weight: [0.0; 4],
    };
    for (i, w) in cand {
        if w != 0.0 {
            taps.index[taps.len] = i;
            taps.weight[taps.len] = w;
            taps.len += 1;
        }
    }
    taps
}
