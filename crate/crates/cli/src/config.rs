//! Run configuration: TOML file plus command-line overrides (flags win).

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use motioncs::datagen::PhantomSpec;
use motioncs::motion::RegistrationConfig;
use motioncs::solvers::{AdmmParams, InitialPrior, JointParams};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[value(name = "dft")]
    Dft,
    #[value(name = "tv")]
    Tv,
    #[value(name = "motion_tv")]
    MotionTv,
    #[value(name = "joint_motion_tv")]
    JointMotionTv,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [SolverKind::Dft, SolverKind::Tv, SolverKind::MotionTv, SolverKind::JointMotionTv];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Dft => "dft",
            SolverKind::Tv => "tv",
            SolverKind::MotionTv => "motion_tv",
            SolverKind::JointMotionTv => "joint_motion_tv",
        }
    }

    pub fn estimates_motion(self) -> bool {
        matches!(self, SolverKind::MotionTv | SolverKind::JointMotionTv)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// 64 x 64 x 8, 4 coils
    #[default]
    Small,
    /// 256 x 256 x 24, 9 coils
    Default,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhantomConfig {
    pub profile: Profile,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub nt: Option<usize>,
    pub n_coils: Option<usize>,
}

impl PhantomConfig {
    pub fn spec(&self) -> Result<PhantomSpec> {
        let base = match self.profile {
            Profile::Small => PhantomSpec::small_profile(),
            Profile::Default => PhantomSpec::default_profile(),
        };
        let d = base.dims;
        let (nx, ny, nt) = (self.nx.unwrap_or(d.nx), self.ny.unwrap_or(d.ny), self.nt.unwrap_or(d.nt));
        motioncs::Dims::new(nx, ny, nt)?;
        Ok(if (nx, ny, nt) == (d.nx, d.ny, d.nt) {
            base
        } else {
            PhantomSpec::cardiac(nx, ny, nt)
        })
    }

    pub fn n_coils(&self) -> usize {
        self.n_coils.unwrap_or(match self.profile {
            Profile::Small => 4,
            Profile::Default => 9,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    pub rate: f64,
    pub sigma_fraction: f64,
    pub always_sample_dc: bool,
    pub noise_sigma: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            rate: 8.0,
            sigma_fraction: 0.25,
            always_sample_dc: true,
            noise_sigma: 0.01,
        }
    }
}

/// [`AdmmParams`] with `epsilon` left open: when unset it is derived from
/// the acquisition noise level recorded in `mask.json`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdmmConfig {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub epsilon: Option<f64>,
    pub max_iters: usize,
    pub cg_iters: usize,
    pub cg_tol: f64,
    pub rel_tol: Option<f64>,
    pub periodic: bool,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        let p = AdmmParams::default();
        AdmmConfig {
            mu1: p.mu1,
            mu2: p.mu2,
            mu3: p.mu3,
            epsilon: None,
            max_iters: p.max_iters,
            cg_iters: p.cg_iters,
            cg_tol: p.cg_tol,
            rel_tol: p.rel_tol,
            periodic: p.periodic,
        }
    }
}

impl AdmmConfig {
    pub fn params(&self, auto_epsilon: f64) -> AdmmParams {
        AdmmParams {
            mu1: self.mu1,
            mu2: self.mu2,
            mu3: self.mu3,
            epsilon: self.epsilon.unwrap_or(auto_epsilon),
            max_iters: self.max_iters,
            cg_iters: self.cg_iters,
            cg_tol: self.cg_tol,
            rel_tol: self.rel_tol,
            periodic: self.periodic,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// `(y, x)` pixels for time courses; empty means the ROI centre.
    pub pixels: Vec<[usize; 2]>,
    /// Reference sequence; defaults to `x_true.csq` in the input directory.
    pub reference: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub rates: Vec<f64>,
    pub solvers: Vec<SolverKind>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            rates: vec![8.0, 10.0, 12.0, 14.0],
            solvers: SolverKind::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    /// Directory holding inputs of the current step; defaults to `out`.
    pub input: Option<PathBuf>,
    pub solver: SolverKind,
    /// Known motion for `motion_tv`; skips estimation when set.
    pub motion: Option<PathBuf>,
    pub initial_prior: InitialPrior,
    pub phantom: PhantomConfig,
    pub mask: SampleConfig,
    pub admm: AdmmConfig,
    pub joint: JointParams,
    pub registration: RegistrationConfig,
    pub evaluate: EvalConfig,
    pub experiment: ExperimentConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out: PathBuf::from("out"),
            input: None,
            solver: SolverKind::MotionTv,
            motion: None,
            initial_prior: InitialPrior::Tv,
            phantom: PhantomConfig::default(),
            mask: SampleConfig::default(),
            admm: AdmmConfig::default(),
            joint: JointParams::default(),
            registration: RegistrationConfig::default(),
            evaluate: EvalConfig::default(),
            experiment: ExperimentConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                Self::from_toml(&text).map_err(|e| match e {
                    CliError::Config(m) => CliError::Config(format!("{}: {m}", p.display())),
                    other => other,
                })
            }
        }
    }

    pub fn input_dir(&self) -> &Path {
        self.input.as_deref().unwrap_or(&self.out)
    }
}

/// Flags that override config values.
#[derive(Args, Clone, Debug, Default)]
pub struct Overrides {
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub solver: Option<SolverKind>,
    #[arg(long, global = true)]
    pub rate: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true)]
    pub iters: Option<usize>,
    #[arg(long, global = true)]
    pub mu1: Option<f64>,
    #[arg(long, global = true)]
    pub mu2: Option<f64>,
    #[arg(long, global = true)]
    pub mu3: Option<f64>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, global = true)]
    pub beta0: Option<f64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub noise_sigma: Option<f64>,
    #[arg(long, global = true)]
    pub profile: Option<Profile>,
    #[arg(long, global = true)]
    pub nx: Option<usize>,
    #[arg(long, global = true)]
    pub ny: Option<usize>,
    #[arg(long, global = true)]
    pub nt: Option<usize>,
    #[arg(long, global = true)]
    pub coils: Option<usize>,
    /// Known motion field (CMV1) for the motion_tv solver.
    #[arg(long, global = true)]
    pub motion: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        macro_rules! set {
            ($src:expr => $dst:expr) => {
                if let Some(v) = $src.clone() {
                    $dst = v;
                }
            };
        }
        set!(self.seed => cfg.seed);
        set!(self.solver => cfg.solver);
        set!(self.rate => cfg.mask.rate);
        set!(self.out => cfg.out);
        set!(self.iters => cfg.admm.max_iters);
        set!(self.mu1 => cfg.admm.mu1);
        set!(self.mu2 => cfg.admm.mu2);
        set!(self.mu3 => cfg.admm.mu3);
        set!(self.beta0 => cfg.joint.beta0);
        set!(self.alpha => cfg.joint.alpha);
        set!(self.noise_sigma => cfg.mask.noise_sigma);
        set!(self.profile => cfg.phantom.profile);
        if self.input.is_some() {
            cfg.input = self.input.clone();
        }
        if self.epsilon.is_some() {
            cfg.admm.epsilon = self.epsilon;
        }
        if self.nx.is_some() {
            cfg.phantom.nx = self.nx;
        }
        if self.ny.is_some() {
            cfg.phantom.ny = self.ny;
        }
        if self.nt.is_some() {
            cfg.phantom.nt = self.nt;
        }
        if self.coils.is_some() {
            cfg.phantom.n_coils = self.coils;
        }
        if self.motion.is_some() {
            cfg.motion = self.motion.clone();
        }
    }
}
