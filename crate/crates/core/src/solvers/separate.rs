//! Three-step pipeline: temporal-prior reconstruction, registration of that
//! reconstruction, then Motion-TV reconstruction with the estimated field.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::motion::{register_sequence, MotionField, RegistrationConfig};
use crate::operators::{n_transitions, MeasurementOperator, MotionMatrix};
use crate::tensor::{ImageSequence, C64};

use super::{reconstruct_admm, AdmmParams, IterRecord, PriorKind};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialPrior {
    #[default]
    Tv,
    Dft,
}

impl From<InitialPrior> for PriorKind {
    fn from(p: InitialPrior) -> Self {
        match p {
            InitialPrior::Tv => PriorKind::TemporalTv,
            InitialPrior::Dft => PriorKind::TemporalDft,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SeparateOutput {
    pub x: ImageSequence,
    pub motion: MotionField,
    pub initial: ImageSequence,
    pub initial_log: Vec<IterRecord>,
    pub log: Vec<IterRecord>,
}

pub fn reconstruct_separate(
    y: &[C64],
    h: &MeasurementOperator,
    params: &AdmmParams,
    registration: &RegistrationConfig,
    initial_prior: InitialPrior,
) -> Result<SeparateOutput> {
    let d = h.dims();
    let prior = PriorKind::from(initial_prior).build(d, params.periodic)?;
    let initial = reconstruct_admm(y, h, prior.as_ref(), params)?;

    let v0 = MotionField::zeros(d.nx, d.ny, n_transitions(d.nt, params.periodic));
    let motion = register_sequence(&initial.x, &v0, registration)?;

    let k = MotionMatrix::build(&motion, d, params.periodic)?;
    let fin = reconstruct_admm(y, h, &k, params)?;
    Ok(SeparateOutput {
        x: fin.x,
        motion,
        initial: initial.x,
        initial_log: initial.log,
        log: fin.log,
    })
}
