use crate::error::{Error, Result};
use crate::tensor::C64;
use crate::vecops::{all_finite, norm_sq};

#[derive(Clone, Debug)]
pub struct CgOutcome {
    /// Iterate with the smallest residual seen.
    pub solution: Vec<C64>,
    pub iterations: usize,
    /// `||A z - b|| / ||b||` for the returned iterate (recurrence estimate).
    pub relative_residual: f64,
    pub converged: bool,
}

/// Conjugate gradients for a Hermitian positive-definite `A` given as a
/// closure `apply(v, out)` computing `out = A v`.
///
/// Stops when `||r|| <= tol ||b||` or after `iters` iterations.
pub fn cg_solve<F>(mut apply: F, b: &[C64], x0: Option<&[C64]>, iters: usize, tol: f64) -> Result<CgOutcome>
where
    F: FnMut(&[C64], &mut [C64]),
{
    if !all_finite(b) {
        return Err(Error::NonFinite("cg right-hand side"));
    }
    let n = b.len();
    let b_norm = norm_sq(b).sqrt();
    let mut x = match x0 {
        Some(v) => {
            if v.len() != n {
                return Err(Error::shape("cg initial guess", n, v.len()));
            }
            v.to_vec()
        }
        None => vec![C64::new(0.0, 0.0); n],
    };
    if b_norm == 0.0 {
        return Ok(CgOutcome {
            solution: vec![C64::new(0.0, 0.0); n],
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        });
    }

    let mut ap = vec![C64::new(0.0, 0.0); n];
    let mut r = b.to_vec();
    if x0.is_some() {
        apply(&x, &mut ap);
        for (ri, a) in r.iter_mut().zip(&ap) {
            *ri -= a;
        }
    }
    let mut rr = norm_sq(&r);
    let target = tol * b_norm;
    let mut best = (rr.sqrt(), x.clone());
    if rr.sqrt() <= target {
        return Ok(CgOutcome {
            solution: x,
            iterations: 0,
            relative_residual: rr.sqrt() / b_norm,
            converged: true,
        });
    }
    let mut p = r.clone();
    let mut done = 0;
    for it in 0..iters {
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| (a.conj() * b).re).sum();
        if pap <= 0.0 || !pap.is_finite() {
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += p[i] * alpha;
            r[i] -= ap[i] * alpha;
        }
        done = it + 1;
        let rr_new = norm_sq(&r);
        if rr_new.sqrt() < best.0 {
            best = (rr_new.sqrt(), x.clone());
        }
        if rr_new.sqrt() <= target {
            break;
        }
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + p[i] * beta;
        }
        rr = rr_new;
    }
    let (res, sol) = best;
    Ok(CgOutcome {
        solution: sol,
        iterations: done,
        relative_residual: res / b_norm,
        converged: res <= target,
    })
}
