use crate::tensor::C64;
use crate::vecops::norm_sq;

/// Complex soft threshold: shrinks the magnitude by `tau`, keeping the phase.
#[inline]
pub fn soft_threshold_scalar(a: C64, tau: f64) -> C64 {
    let m = a.norm();
    if m > tau {
        (a * (m - tau)) / m
    } else {
        C64::new(0.0, 0.0)
    }
}

pub fn soft_threshold(u: &[C64], tau: f64) -> Vec<C64> {
    u.iter().map(|&a| soft_threshold_scalar(a, tau)).collect()
}

pub(crate) fn soft_threshold_in_place(u: &mut [C64], tau: f64) {
    for a in u {
        *a = soft_threshold_scalar(*a, tau);
    }
}

/// Slack update for the data-consistency constraint, with
/// `r = y - H x - d3`: zero when `||r||^2 <= eps`, otherwise `r` rescaled to
/// squared norm `eps`.
pub fn project_consistency(r: &[C64], epsilon: f64) -> Vec<C64> {
    let nsq = norm_sq(r);
    if nsq <= epsilon {
        vec![C64::new(0.0, 0.0); r.len()]
    } else {
        let scale = epsilon.sqrt() / nsq.sqrt();
        r.iter().map(|z| z * scale).collect()
    }
}
