//! The forward/adjoint contract shared by every operator in the crate.

use crate::error::{Error, Result};
use crate::tensor::C64;
use crate::vecops::{inner, l2_norm};

/// A linear map between flat complex vectors together with its adjoint.
///
/// Implementations are read-only after construction and may be applied from
/// several threads at once.
pub trait LinearOperator: Send + Sync {
    fn domain_len(&self) -> usize;
    fn range_len(&self) -> usize;

    /// `out = A x`. Panics on length mismatch; use [`LinearOperator::apply`]
    /// for a checked call.
    fn apply_into(&self, x: &[C64], out: &mut [C64]);

    /// `out = A' y`. Panics on length mismatch.
    fn adjoint_into(&self, y: &[C64], out: &mut [C64]);

    fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.domain_len() {
            return Err(Error::shape("operator domain", self.domain_len(), x.len()));
        }
        let mut out = vec![C64::new(0.0, 0.0); self.range_len()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    fn adjoint(&self, y: &[C64]) -> Result<Vec<C64>> {
        if y.len() != self.range_len() {
            return Err(Error::shape("operator range", self.range_len(), y.len()));
        }
        let mut out = vec![C64::new(0.0, 0.0); self.domain_len()];
        self.adjoint_into(y, &mut out);
        Ok(out)
    }

    /// `out = A'A x`, using `tmp` (range-sized) as scratch.
    fn normal_into(&self, x: &[C64], tmp: &mut [C64], out: &mut [C64]) {
        self.apply_into(x, tmp);
        self.adjoint_into(tmp, out);
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn domain_len(&self) -> usize {
        (**self).domain_len()
    }
    fn range_len(&self) -> usize {
        (**self).range_len()
    }
    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        (**self).apply_into(x, out)
    }
    fn adjoint_into(&self, y: &[C64], out: &mut [C64]) {
        (**self).adjoint_into(y, out)
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for Box<T> {
    fn domain_len(&self) -> usize {
        (**self).domain_len()
    }
    fn range_len(&self) -> usize {
        (**self).range_len()
    }
    fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        (**self).apply_into(x, out)
    }
    fn adjoint_into(&self, y: &[C64], out: &mut [C64]) {
        (**self).adjoint_into(y, out)
    }
}

/// Relative adjoint mismatch `|<Au, w> - <u, A'w>| / (||u|| ||w||)`.
pub fn adjoint_mismatch<A: LinearOperator + ?Sized>(op: &A, u: &[C64], w: &[C64]) -> Result<f64> {
    let au = op.apply(u)?;
    let atw = op.adjoint(w)?;
    let lhs = inner(&au, w)?;
    let rhs = inner(u, &atw)?;
    let scale = l2_norm(u) * l2_norm(w);
    Ok(if scale == 0.0 { (lhs - rhs).norm() } else { (lhs - rhs).norm() / scale })
}

/// Materialises `A` column by column. Only meant for tiny test instances.
pub fn dense_matrix<A: LinearOperator + ?Sized>(op: &A) -> Vec<Vec<C64>> {
    let n = op.domain_len();
    let m = op.range_len();
    let mut rows = vec![vec![C64::new(0.0, 0.0); n]; m];
    let mut e = vec![C64::new(0.0, 0.0); n];
    let mut col = vec![C64::new(0.0, 0.0); m];
    for j in 0..n {
        e[j] = C64::new(1.0, 0.0);
        op.apply_into(&e, &mut col);
        for i in 0..m {
            rows[i][j] = col[i];
        }
        e[j] = C64::new(0.0, 0.0);
    }
    rows
}
