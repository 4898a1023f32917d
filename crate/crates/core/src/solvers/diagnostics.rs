use serde::{Deserialize, Serialize};

use crate::linop::LinearOperator;
use crate::operators::MeasurementOperator;
use crate::tensor::C64;
use crate::vecops::{dist, l1_norm};

use super::SolverState;

/// One row of per-iteration convergence diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    /// `||A x||_1`
    pub l1_prior: f64,
    /// `||y - H x||^2`
    pub data_residual_sq: f64,
    /// `||p - A m||`
    pub r_pm: f64,
    /// `||m - x||`
    pub r_mx: f64,
    /// `||y - H x - s||`
    pub r_ys: f64,
    /// Filtering threshold after this iteration (joint solver only).
    pub beta: Option<f64>,
}

/// Reads the state without modifying it.
pub fn objective_log<A: LinearOperator + ?Sized>(
    st: &SolverState,
    prior: &A,
    h: &MeasurementOperator,
    y: &[C64],
    beta: Option<f64>,
) -> IterRecord {
    let hx = h.apply(&st.x).expect("state matches measurement");
    log_with_hx(st, prior, &hx, y, beta)
}

/// [`objective_log`] with `H x` already computed.
pub(crate) fn log_with_hx<A: LinearOperator + ?Sized>(
    st: &SolverState,
    prior: &A,
    hx: &[C64],
    y: &[C64],
    beta: Option<f64>,
) -> IterRecord {
    let ax = prior.apply(&st.x).expect("state matches prior");
    let am = prior.apply(&st.m).expect("state matches prior");
    let res: Vec<C64> = y.iter().zip(hx).map(|(a, b)| a - b).collect();
    let data_residual_sq = res.iter().map(|z| z.norm_sqr()).sum();
    IterRecord {
        iter: st.iter,
        l1_prior: l1_norm(&ax),
        data_residual_sq,
        r_pm: dist(&st.p, &am),
        r_mx: dist(&st.m, &st.x),
        r_ys: dist(&res, &st.s),
        beta,
    }
}
