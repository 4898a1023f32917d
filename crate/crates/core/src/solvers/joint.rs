//! Joint image/motion ADMM with an annealed temporal-filtering step.
//!
//! After the usual `p, m, s, x` updates the image is denoised by soft
//! thresholding in an orthonormal temporal transform, `x* = Phi'
//! soft(Phi x, beta/2)`, the threshold decays as `beta <- beta / alpha`, the
//! field takes one incremental registration step on `x*`, and the dual
//! updates then use the refreshed `K_t(v)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linop::LinearOperator;
use crate::motion::{register_sequence, MotionField, RegistrationConfig};
use crate::operators::{n_transitions, MeasurementOperator, MotionMatrix, TemporalDft};
use crate::tensor::{ImageSequence, C64};

use super::admm::{check_inputs, Guard, Steps};
use super::diagnostics::log_with_hx;
use super::prox::soft_threshold_in_place;
use super::{AdmmParams, IterRecord, SolverState};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemporalFilter {
    #[default]
    Dft,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JointParams {
    pub beta0: f64,
    pub alpha: f64,
    /// `max_iters` here is the number of demons steps per outer iteration.
    pub registration: RegistrationConfig,
    pub temporal_transform: TemporalFilter,
}

impl Default for JointParams {
    fn default() -> Self {
        JointParams {
            beta0: 2.0,
            alpha: 1.09,
            registration: RegistrationConfig {
                max_iters: 1,
                ..RegistrationConfig::default()
            },
            temporal_transform: TemporalFilter::Dft,
        }
    }
}

impl JointParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta0.is_finite() && self.beta0 > 0.0) {
            return Err(Error::param("beta0", format!("must be positive, got {}", self.beta0)));
        }
        if !(self.alpha.is_finite() && self.alpha > 1.0) {
            return Err(Error::param("alpha", format!("must exceed 1, got {}", self.alpha)));
        }
        self.registration.validate()
    }
}

#[derive(Clone, Debug)]
pub struct JointOutput {
    pub x: ImageSequence,
    pub motion: MotionField,
    pub log: Vec<IterRecord>,
    pub state: SolverState,
}

pub fn reconstruct_joint(
    y: &[C64],
    h: &MeasurementOperator,
    params: &AdmmParams,
    joint: &JointParams,
) -> Result<JointOutput> {
    params.validate()?;
    joint.validate()?;
    let d = h.dims();
    check_inputs(y, h, d.len())?;
    let steps = Steps { y, h, params };
    let phi = TemporalDft::new(d);

    let mut v = MotionField::zeros(d.nx, d.ny, n_transitions(d.nt, params.periodic));
    let mut k = MotionMatrix::build(&v, d, params.periodic)?;
    let mut st = SolverState::init(y, h, &k);
    let guard = Guard::new(&st.x, params.rel_tol);
    let mut hx = h.apply(&st.x)?;
    let mut beta = joint.beta0;
    let mut log = Vec::with_capacity(params.max_iters);

    for it in 0..params.max_iters {
        let prev = st.x.clone();
        steps.update_p(&mut st, &k);
        steps.update_m(&mut st, &k)?;
        steps.update_s(&mut st, &hx);
        steps.update_x(&mut st)?;
        h.apply_into(&st.x, &mut hx);

        let x_star = match joint.temporal_transform {
            TemporalFilter::Dft => {
                let mut coef = phi.apply(&st.x)?;
                soft_threshold_in_place(&mut coef, beta / 2.0);
                phi.adjoint(&coef)?
            }
            TemporalFilter::None => st.x.clone(),
        };
        beta /= joint.alpha;

        if joint.registration.max_iters > 0 {
            let filtered = ImageSequence::new(d, x_star.clone())?;
            v = register_sequence(&filtered, &v, &joint.registration)?;
            k = MotionMatrix::build(&v, d, params.periodic)?;
        }
        st.x_star = Some(x_star);

        steps.update_duals(&mut st, &k, &hx);
        st.iter = it + 1;
        log.push(log_with_hx(&st, &k, &hx, y, Some(beta)));
        if guard.check(it + 1, &prev, &st)? {
            break;
        }
    }
    Ok(JointOutput {
        x: ImageSequence::new(d, st.x.clone())?,
        motion: v,
        log,
        state: st,
    })
}
