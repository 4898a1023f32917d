//! Inner products, norms and the few BLAS-1 style helpers the solvers need.

use crate::error::{Error, Result};
use crate::tensor::C64;

/// `sum_k u_k * conj(w_k)`: linear in `u`, conjugate-linear in `w`.
pub fn inner(u: &[C64], w: &[C64]) -> Result<C64> {
    if u.len() != w.len() {
        return Err(Error::shape("inner product", u.len(), w.len()));
    }
    Ok(u.iter().zip(w).map(|(a, b)| a * b.conj()).sum())
}

pub fn l1_norm(u: &[C64]) -> f64 {
    u.iter().map(|z| z.norm()).sum()
}

pub fn l2_norm(u: &[C64]) -> f64 {
    norm_sq(u).sqrt()
}

/// Number of entries with magnitude strictly above `tol`.
pub fn l0_count(u: &[C64], tol: f64) -> usize {
    u.iter().filter(|z| z.norm() > tol).count()
}

#[inline]
pub fn norm_sq(u: &[C64]) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum()
}

/// `||a - b||_2`, panics on length mismatch.
pub fn dist(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn all_finite(u: &[C64]) -> bool {
    u.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn inner_examples() {
        let e1 = [c(1.0, 0.0), c(0.0, 0.0)];
        assert_eq!(inner(&e1, &e1).unwrap(), c(1.0, 0.0));
        let u = [c(1.0, 2.0), c(-0.5, 3.0)];
        let w = [c(0.25, -1.0), c(2.0, 0.5)];
        assert_eq!(inner(&u, &w).unwrap(), inner(&w, &u).unwrap().conj());
        assert!((inner(&u, &u).unwrap().re - l2_norm(&u).powi(2)).abs() < 1e-12);
        assert!(inner(&u, &e1[..1]).is_err());
    }

    #[test]
    fn norm_examples() {
        assert_eq!(l1_norm(&[c(3.0, 0.0), c(0.0, -4.0)]), 7.0);
        assert_eq!(l2_norm(&[c(3.0, 0.0), c(4.0, 0.0)]), 5.0);
        assert_eq!(l0_count(&[c(0.0, 0.0), c(1e-3, 0.0), c(2.0, 0.0)], 1e-2), 1);
    }
}
