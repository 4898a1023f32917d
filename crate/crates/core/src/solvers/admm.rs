//! Constrained analysis-prior ADMM:
//! `min ||A x||_1  s.t.  ||y - H x||^2 <= eps`, split as `p = A m`, `m = x`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linop::LinearOperator;
use crate::motion::MotionField;
use crate::operators::{MeasurementOperator, MotionMatrix, TemporalDft, TemporalDifference};
use crate::tensor::{Dims, ImageSequence, C64};
use crate::vecops::{all_finite, l2_norm, norm_sq};

use super::cg::cg_solve;
use super::diagnostics::{log_with_hx, IterRecord};
use super::prox::{project_consistency, soft_threshold_in_place};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdmmParams {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    /// Bound on the squared data residual `||y - H x||^2`.
    pub epsilon: f64,
    pub max_iters: usize,
    pub cg_iters: usize,
    pub cg_tol: f64,
    /// Optional stop on `||x_k - x_{k-1}|| / ||x_k||`.
    pub rel_tol: Option<f64>,
    /// Include the last-to-first frame difference in temporal priors.
    pub periodic: bool,
}

impl Default for AdmmParams {
    fn default() -> Self {
        AdmmParams {
            mu1: 16.0,
            mu2: 16.0,
            mu3: 16.0,
            epsilon: 0.0,
            max_iters: 100,
            cg_iters: 10,
            cg_tol: 1e-6,
            rel_tol: None,
            periodic: true,
        }
    }
}

impl AdmmParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mu1", self.mu1), ("mu2", self.mu2), ("mu3", self.mu3), ("cg_tol", self.cg_tol)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::param("epsilon", format!("must be non-negative, got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// `eps = n_meas * sigma^2` for noisy data, `1e-10 ||y||^2` when noiseless.
pub fn epsilon_for_noise(n_measurements: usize, noise_sigma: f64, y: &[C64]) -> f64 {
    if noise_sigma > 0.0 {
        n_measurements as f64 * noise_sigma * noise_sigma
    } else {
        1e-10 * norm_sq(y)
    }
}

/// Temporal sparsifying transforms usable as the ADMM prior.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorKind {
    TemporalTv,
    TemporalDft,
}

impl PriorKind {
    pub fn build(self, dims: Dims, periodic: bool) -> Result<Box<dyn LinearOperator>> {
        Ok(match self {
            PriorKind::TemporalTv => Box::new(TemporalDifference::new(dims, periodic)?),
            PriorKind::TemporalDft => Box::new(TemporalDft::new(dims)),
        })
    }
}

/// ADMM variables. `p` and `d1` live in the prior's range, `s` and `d3` in
/// k-space, the rest in image space.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub p: Vec<C64>,
    pub m: Vec<C64>,
    pub x: Vec<C64>,
    pub s: Vec<C64>,
    pub d1: Vec<C64>,
    pub d2: Vec<C64>,
    pub d3: Vec<C64>,
    /// Filtered image used by the joint solver for registration.
    pub x_star: Option<Vec<C64>>,
    pub iter: usize,
}

impl SolverState {
    /// `x = H'y`, `m = x`, everything else zero.
    pub fn init<A: LinearOperator + ?Sized>(y: &[C64], h: &MeasurementOperator, prior: &A) -> Self {
        let zero = C64::new(0.0, 0.0);
        let x = h.adjoint(y).expect("k-space length checked by caller");
        SolverState {
            p: vec![zero; prior.range_len()],
            m: x.clone(),
            s: vec![zero; y.len()],
            d1: vec![zero; prior.range_len()],
            d2: vec![zero; x.len()],
            d3: vec![zero; y.len()],
            x,
            x_star: None,
            iter: 0,
        }
    }

    pub fn is_finite(&self) -> bool {
        [&self.p, &self.m, &self.x, &self.s, &self.d1, &self.d2, &self.d3]
            .iter()
            .all(|v| all_finite(v))
    }
}

/// The four primal updates, shared with the joint solver.
pub(crate) struct Steps<'a> {
    pub y: &'a [C64],
    pub h: &'a MeasurementOperator,
    pub params: &'a AdmmParams,
}

impl Steps<'_> {
    /// `p <- soft(A m + d1, 1 / (2 mu1))`
    pub fn update_p<A: LinearOperator + ?Sized>(&self, st: &mut SolverState, prior: &A) {
        prior.apply_into(&st.m, &mut st.p);
        for (p, d) in st.p.iter_mut().zip(&st.d1) {
            *p += d;
        }
        soft_threshold_in_place(&mut st.p, 1.0 / (2.0 * self.params.mu1));
    }

    /// `m <- (mu2/mu1 I + A'A)^-1 [A'(p - d1) + mu2/mu1 (x + d2)]`
    pub fn update_m<A: LinearOperator + ?Sized>(&self, st: &mut SolverState, prior: &A) -> Result<()> {
        let ratio = self.params.mu2 / self.params.mu1;
        let pd: Vec<C64> = st.p.iter().zip(&st.d1).map(|(p, d)| p - d).collect();
        let mut rhs = prior.adjoint(&pd)?;
        for ((r, x), d) in rhs.iter_mut().zip(&st.x).zip(&st.d2) {
            *r += (x + d) * ratio;
        }
        let mut tmp = vec![C64::new(0.0, 0.0); prior.range_len()];
        let out = cg_solve(
            |v, o| {
                prior.normal_into(v, &mut tmp, o);
                for (oi, vi) in o.iter_mut().zip(v) {
                    *oi += vi * ratio;
                }
            },
            &rhs,
            Some(&st.m),
            self.params.cg_iters,
            self.params.cg_tol,
        )?;
        st.m = out.solution;
        Ok(())
    }

    /// Slack from the current `H x`.
    pub fn update_s(&self, st: &mut SolverState, hx: &[C64]) {
        let r: Vec<C64> = self
            .y
            .iter()
            .zip(hx)
            .zip(&st.d3)
            .map(|((y, hx), d)| y - hx - d)
            .collect();
        st.s = project_consistency(&r, self.params.epsilon);
        debug_assert!(norm_sq(&st.s) <= self.params.epsilon * (1.0 + 1e-12) + 1e-300);
    }

    /// `x <- (mu2/mu3 I + H'H)^-1 [H'(y - s - d3) + mu2/mu3 (m - d2)]`
    pub fn update_x(&self, st: &mut SolverState) -> Result<()> {
        let ratio = self.params.mu2 / self.params.mu3;
        let ysd: Vec<C64> = self
            .y
            .iter()
            .zip(&st.s)
            .zip(&st.d3)
            .map(|((y, s), d)| y - s - d)
            .collect();
        let mut rhs = self.h.adjoint(&ysd)?;
        for ((r, m), d) in rhs.iter_mut().zip(&st.m).zip(&st.d2) {
            *r += (m - d) * ratio;
        }
        let mut tmp = vec![C64::new(0.0, 0.0); self.h.range_len()];
        let out = cg_solve(
            |v, o| {
                self.h.normal_into(v, &mut tmp, o);
                for (oi, vi) in o.iter_mut().zip(v) {
                    *oi += vi * ratio;
                }
            },
            &rhs,
            Some(&st.x),
            self.params.cg_iters,
            self.params.cg_tol,
        )?;
        st.x = out.solution;
        Ok(())
    }

    /// Bregman/dual updates; returns `A m` and `H x` for reuse.
    pub fn update_duals<A: LinearOperator + ?Sized>(&self, st: &mut SolverState, prior: &A, hx: &[C64]) {
        let mut am = vec![C64::new(0.0, 0.0); prior.range_len()];
        prior.apply_into(&st.m, &mut am);
        for ((d, p), a) in st.d1.iter_mut().zip(&st.p).zip(&am) {
            *d -= p - a;
        }
        for ((d, m), x) in st.d2.iter_mut().zip(&st.m).zip(&st.x) {
            *d -= m - x;
        }
        for (((d, y), h), s) in st.d3.iter_mut().zip(self.y).zip(hx).zip(&st.s) {
            *d -= y - h - s;
        }
    }
}

/// Tracks the divergence guard and the optional relative-change stop.
pub(crate) struct Guard {
    limit: f64,
    rel_tol: Option<f64>,
}

impl Guard {
    pub fn new(x0: &[C64], rel_tol: Option<f64>) -> Self {
        Guard {
            limit: 1e6 * l2_norm(x0).max(1e-12),
            rel_tol,
        }
    }

    /// `Ok(true)` to stop early.
    pub fn check(&self, iter: usize, prev: &[C64], st: &SolverState) -> Result<bool> {
        let norm = l2_norm(&st.x);
        if !norm.is_finite() || norm > self.limit || !st.is_finite() {
            return Err(Error::Divergence {
                iter,
                norm,
                limit: self.limit,
            });
        }
        Ok(match self.rel_tol {
            Some(tol) if norm > 0.0 => crate::vecops::dist(&st.x, prev) / norm < tol,
            _ => false,
        })
    }
}

#[derive(Clone, Debug)]
pub struct AdmmOutput {
    pub x: ImageSequence,
    pub log: Vec<IterRecord>,
    pub state: SolverState,
}

pub(crate) fn check_inputs(y: &[C64], h: &MeasurementOperator, prior_domain: usize) -> Result<()> {
    if y.len() != h.range_len() {
        return Err(Error::shape("k-space data", h.range_len(), y.len()));
    }
    if prior_domain != h.domain_len() {
        return Err(Error::shape("prior domain", h.domain_len(), prior_domain));
    }
    if !all_finite(y) {
        return Err(Error::NonFinite("k-space data"));
    }
    Ok(())
}

/// Fixed-prior ADMM. `prior` may be `K_t(v)` ([`MotionMatrix`]), `D_t` or
/// the temporal DFT.
pub fn reconstruct_admm<A: LinearOperator + ?Sized>(
    y: &[C64],
    h: &MeasurementOperator,
    prior: &A,
    params: &AdmmParams,
) -> Result<AdmmOutput> {
    params.validate()?;
    check_inputs(y, h, prior.domain_len())?;
    let steps = Steps { y, h, params };
    let mut st = SolverState::init(y, h, prior);
    let guard = Guard::new(&st.x, params.rel_tol);
    let mut hx = h.apply(&st.x)?;
    let mut log = Vec::with_capacity(params.max_iters);

    for k in 0..params.max_iters {
        let prev = st.x.clone();
        steps.update_p(&mut st, prior);
        steps.update_m(&mut st, prior)?;
        steps.update_s(&mut st, &hx);
        steps.update_x(&mut st)?;
        h.apply_into(&st.x, &mut hx);
        steps.update_duals(&mut st, prior, &hx);
        st.iter = k + 1;
        log.push(log_with_hx(&st, prior, &hx, y, None));
        if guard.check(k + 1, &prev, &st)? {
            break;
        }
    }
    Ok(AdmmOutput {
        x: ImageSequence::new(h.dims(), st.x.clone())?,
        log,
        state: st,
    })
}

/// Convenience: Motion-TV reconstruction with a known field.
pub fn reconstruct_motion_tv(
    y: &[C64],
    h: &MeasurementOperator,
    motion: &MotionField,
    params: &AdmmParams,
) -> Result<AdmmOutput> {
    let k = MotionMatrix::build(motion, h.dims(), params.periodic)?;
    reconstruct_admm(y, h, &k, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::SamplingMask;
    use crate::solvers::cg::tests::dense_solve;
    use crate::tensor::CoilSensitivities;
    use crate::vecops::dist;
    use crate::linop::dense_matrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
        (0..n).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect()
    }

    fn full_unit(d: Dims) -> MeasurementOperator {
        MeasurementOperator::new(d, SamplingMask::full(d.ny, d.nt), CoilSensitivities::unit(d.nx, d.ny)).unwrap()
    }

    #[test]
    fn invertible_measurement_recovers_truth() {
        let d = Dims::new(8, 8, 4).unwrap();
        let h = full_unit(d);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let xt = random(d.len(), &mut rng);
        let y = h.apply(&xt).unwrap();
        let params = AdmmParams {
            epsilon: 0.0,
            ..Default::default()
        };
        let prior = TemporalDifference::new(d, true).unwrap();
        let out = reconstruct_admm(&y, &h, &prior, &params).unwrap();
        let rel = dist(out.x.as_slice(), &xt) / l2_norm(&xt);
        assert!(rel < 1e-4, "relative error {rel}");
    }

    #[test]
    fn zero_data_gives_zero_image() {
        let d = Dims::new(6, 6, 3).unwrap();
        let h = full_unit(d);
        let y = vec![C64::new(0.0, 0.0); h.range_len()];
        let prior = TemporalDft::new(d);
        let out = reconstruct_admm(&y, &h, &prior, &AdmmParams::default()).unwrap();
        assert!(out.x.as_slice().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn zero_motion_matches_temporal_tv_iterates() {
        let d = Dims::new(8, 8, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let lines = (0..4).map(|t| vec![4, (t * 3) % 8]).collect();
        let mask = SamplingMask::new(8, 4.0, lines).unwrap();
        let h = MeasurementOperator::new(d, mask, CoilSensitivities::unit(8, 8)).unwrap();
        let y = h.apply(&random(d.len(), &mut rng)).unwrap();
        let params = AdmmParams {
            epsilon: 1e-3,
            max_iters: 15,
            ..Default::default()
        };
        let tv = reconstruct_admm(&y, &h, &TemporalDifference::new(d, true).unwrap(), &params).unwrap();
        let k0 = MotionMatrix::build(&MotionField::zeros(8, 8, 4), d, true).unwrap();
        let mtv = reconstruct_admm(&y, &h, &k0, &params).unwrap();
        assert_eq!(tv.x, mtv.x);
        assert_eq!(tv.state.p, mtv.state.p);
        assert_eq!(tv.state.d1, mtv.state.d1);
    }

    #[test]
    fn m_update_with_dft_prior_has_closed_form() {
        // Phi'Phi = I, so m = (A'(p - d1) + r (x + d2)) / (r + 1)
        let d = Dims::new(4, 4, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let h = full_unit(d);
        let prior = TemporalDft::new(d);
        let params = AdmmParams {
            mu1: 0.7,
            mu2: 1.3,
            cg_tol: 1e-14,
            ..Default::default()
        };
        let y = random(h.range_len(), &mut rng);
        let mut st = SolverState::init(&y, &h, &prior);
        st.p = random(prior.range_len(), &mut rng);
        st.d1 = random(prior.range_len(), &mut rng);
        st.d2 = random(d.len(), &mut rng);
        let r = params.mu2 / params.mu1;
        let pd: Vec<C64> = st.p.iter().zip(&st.d1).map(|(a, b)| a - b).collect();
        let at = prior.adjoint(&pd).unwrap();
        let want: Vec<C64> = at
            .iter()
            .zip(&st.x)
            .zip(&st.d2)
            .map(|((a, x), d2)| (a + (x + d2) * r) / (r + 1.0))
            .collect();
        Steps { y: &y, h: &h, params: &params }.update_m(&mut st, &prior).unwrap();
        assert!(dist(&st.m, &want) < 1e-10);
    }

    #[test]
    fn m_update_with_motion_prior_matches_dense_solve() {
        // (r I + K'K) m = rhs on a 4x4x3 instance, K densified
        let d = Dims::new(4, 4, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let field = MotionField::new(
            4,
            4,
            3,
            (0..48).map(|_| [2.0 * rng.random::<f64>() - 1.0, 2.0 * rng.random::<f64>() - 1.0]).collect(),
        )
        .unwrap();
        let k = MotionMatrix::build(&field, d, true).unwrap();
        let h = full_unit(d);
        let params = AdmmParams {
            mu1: 1.0,
            mu2: 0.5,
            cg_iters: 200,
            cg_tol: 1e-12,
            ..Default::default()
        };
        let y = random(h.range_len(), &mut rng);
        let mut st = SolverState::init(&y, &h, &k);
        st.p = random(k.range_len(), &mut rng);
        let r = params.mu2 / params.mu1;
        let pd: Vec<C64> = st.p.iter().zip(&st.d1).map(|(a, b)| a - b).collect();
        let mut rhs = k.adjoint(&pd).unwrap();
        for (v, x) in rhs.iter_mut().zip(&st.x) {
            *v += x * r;
        }
        let kd = dense_matrix(&k);
        let n = k.domain_len();
        let mut a = vec![vec![C64::new(0.0, 0.0); n]; n];
        for i in 0..n {
            for j in 0..n {
                a[i][j] = (0..k.range_len()).map(|q| kd[q][i].conj() * kd[q][j]).sum();
            }
            a[i][i] += r;
        }
        let want = dense_solve(&a, &rhs);
        Steps { y: &y, h: &h, params: &params }.update_m(&mut st, &k).unwrap();
        assert!(dist(&st.m, &want) < 1e-6);
    }

    #[test]
    fn slack_stays_inside_ball() {
        let d = Dims::new(8, 8, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let lines = (0..3).map(|t| vec![4, t + 1]).collect();
        let h = MeasurementOperator::new(d, SamplingMask::new(8, 4.0, lines).unwrap(), CoilSensitivities::unit(8, 8))
            .unwrap();
        let y = h.apply(&random(d.len(), &mut rng)).unwrap();
        let params = AdmmParams {
            epsilon: 0.05,
            max_iters: 20,
            ..Default::default()
        };
        let prior = TemporalDifference::new(d, true).unwrap();
        let out = reconstruct_admm(&y, &h, &prior, &params).unwrap();
        assert!(norm_sq(&out.state.s) <= params.epsilon * (1.0 + 1e-12));
    }

    #[test]
    fn rejects_bad_params_and_shapes() {
        let d = Dims::new(4, 4, 2).unwrap();
        let h = full_unit(d);
        let y = vec![C64::new(0.0, 0.0); h.range_len()];
        let prior = TemporalDifference::new(d, true).unwrap();
        let bad = AdmmParams {
            mu2: 0.0,
            ..Default::default()
        };
        assert!(reconstruct_admm(&y, &h, &prior, &bad).is_err());
        assert!(reconstruct_admm(&y[1..], &h, &prior, &AdmmParams::default()).is_err());
    }
}
