//! Pipeline steps. Each reads its inputs from the run directory and writes
//! its outputs next to them.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use motioncs::datagen::{generate_coils, generate_mask, generate_phantom, simulate_acquisition, MaskSpec, Phantom};
use motioncs::eval::{evaluate, rmse_roi, EvalReport, Roi};
use motioncs::linop::LinearOperator;
use motioncs::motion::MotionField;
use motioncs::operators::{MeasurementOperator, MotionMatrix, SamplingMask, TemporalDft, TemporalDifference};
use motioncs::solvers::{
    epsilon_for_noise, reconstruct_admm, reconstruct_joint, reconstruct_motion_tv, reconstruct_separate, AdmmParams,
    InitialPrior, IterRecord,
};
use motioncs::vecops::l1_norm;
use motioncs::{CoilSensitivities, Dims, ImageSequence, C64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, SolverKind};
use crate::error::{CliError, Result};
use crate::io::{encode_pgm, read_cmv, read_csq, read_json, write_bytes, write_cmv, write_csq, write_json, Csq};

pub const X_TRUE: &str = "x_true.csq";
pub const V_TRUE: &str = "v_true.cmv";
pub const COILS: &str = "coils.csq";
pub const ROI: &str = "roi.json";
pub const SUPPORT: &str = "support.csq";
pub const Y: &str = "y.csq";
pub const MASK: &str = "mask.json";
pub const X_HAT: &str = "x_hat.csq";
pub const V_HAT: &str = "v_hat.cmv";
pub const ITERS: &str = "iters.csv";
pub const REPORT: &str = "report.csv";
pub const REPORT_JSON: &str = "report.json";
pub const TRACES: &str = "traces.csv";
pub const TABLE: &str = "table.csv";
pub const EXPERIMENT_JSON: &str = "experiment.json";

/// Seed of the noise stream; the mask uses the run seed itself.
pub fn noise_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

/// Contents of `mask.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskFile {
    #[serde(rename = "R")]
    pub rate: f64,
    pub seed: u64,
    pub lines: Vec<Vec<usize>>,
    pub noise_sigma: f64,
    pub sigma_fraction: f64,
}

/// Ground truth plus coils for one phantom configuration.
pub struct Truth {
    pub phantom: Phantom,
    pub coils: CoilSensitivities,
}

pub fn make_truth(cfg: &RunConfig) -> Result<Truth> {
    let spec = cfg.phantom.spec()?;
    let phantom = generate_phantom(&spec, cfg.admm.periodic)?;
    let coils = generate_coils(spec.dims, cfg.phantom.n_coils())?;
    Ok(Truth { phantom, coils })
}

fn support_to_csq(support: &[Vec<bool>]) -> Vec<C64> {
    support
        .iter()
        .flatten()
        .map(|&b| C64::new(if b { 1.0 } else { 0.0 }, 0.0))
        .collect()
}

pub fn cmd_phantom(cfg: &RunConfig) -> Result<()> {
    let Truth { phantom, coils } = make_truth(cfg)?;
    let d = phantom.x.dims();
    let out = &cfg.out;
    write_csq(&out.join(X_TRUE), d.nx, d.ny, d.nt, 1, phantom.x.as_slice())?;
    write_cmv(&out.join(V_TRUE), &phantom.motion)?;
    write_csq(&out.join(COILS), d.nx, d.ny, 1, coils.n_coils(), coils.as_slice())?;
    write_json(&out.join(ROI), &phantom.roi)?;
    let nj = phantom.moving_support.len();
    write_csq(&out.join(SUPPORT), d.nx, d.ny, nj, 1, &support_to_csq(&phantom.moving_support))?;
    Ok(())
}

fn image_from(csq: Csq, path: &Path) -> Result<ImageSequence> {
    if csq.nc != 1 {
        return Err(CliError::format(path, "n_c", format!("expected 1 for an image, found {}", csq.nc)));
    }
    Ok(ImageSequence::new(Dims::new(csq.nx, csq.ny, csq.nt)?, csq.data)?)
}

fn read_image(path: &Path) -> Result<ImageSequence> {
    image_from(read_csq(path)?, path)
}

fn read_coils(path: &Path, dims: Dims) -> Result<CoilSensitivities> {
    let c = read_csq(path)?;
    if c.nt != 1 {
        return Err(CliError::format(path, "n_t", format!("coil maps need n_t = 1, found {}", c.nt)));
    }
    if (c.nx, c.ny) != (dims.nx, dims.ny) {
        return Err(CliError::format(
            path,
            "n_x",
            format!("coil grid {}x{} does not match {}x{}", c.nx, c.ny, dims.nx, dims.ny),
        ));
    }
    Ok(CoilSensitivities::new(c.nx, c.ny, c.nc, c.data)?)
}

pub fn cmd_sample(cfg: &RunConfig) -> Result<()> {
    let input = cfg.input_dir();
    let x = read_image(&input.join(X_TRUE))?;
    let d = x.dims();
    let coils = read_coils(&input.join(COILS), d)?;
    let spec = MaskSpec {
        rate: cfg.mask.rate,
        sigma_fraction: cfg.mask.sigma_fraction,
        seed: cfg.seed,
        always_sample_dc: cfg.mask.always_sample_dc,
    };
    let mask = generate_mask(&spec, d)?;
    let y = simulate_acquisition(&x, &coils, &mask, cfg.mask.noise_sigma, noise_seed(cfg.seed))?;
    write_csq(&cfg.out.join(Y), d.nx, d.ny, d.nt, coils.n_coils(), &y.data)?;
    write_json(
        &cfg.out.join(MASK),
        &MaskFile {
            rate: cfg.mask.rate,
            seed: cfg.seed,
            lines: mask.all_lines().to_vec(),
            noise_sigma: cfg.mask.noise_sigma,
            sigma_fraction: cfg.mask.sigma_fraction,
        },
    )?;
    Ok(())
}

/// Loaded measurement problem.
pub struct Problem {
    pub h: MeasurementOperator,
    pub y: Vec<C64>,
    pub noise_sigma: f64,
}

impl Problem {
    pub fn auto_epsilon(&self) -> f64 {
        epsilon_for_noise(self.h.n_measurements(), self.noise_sigma, &self.y)
    }
}

pub fn load_problem(dir: &Path) -> Result<Problem> {
    let ypath = dir.join(Y);
    let y = read_csq(&ypath)?;
    let d = Dims::new(y.nx, y.ny, y.nt)?;
    let mpath = dir.join(MASK);
    let mf: MaskFile = read_json(&mpath)?;
    let mask = SamplingMask::new(d.ny, mf.rate, mf.lines).map_err(|e| CliError::format(&mpath, "lines", e.to_string()))?;
    if mask.n_frames() != d.nt {
        return Err(CliError::format(
            &mpath,
            "lines",
            format!("{} frames listed, k-space has {}", mask.n_frames(), d.nt),
        ));
    }
    let coils = read_coils(&dir.join(COILS), d)?;
    if coils.n_coils() != y.nc {
        return Err(CliError::format(
            &ypath,
            "n_c",
            format!("{} coils in k-space, {} coil maps", y.nc, coils.n_coils()),
        ));
    }
    let h = MeasurementOperator::new(d, mask, coils)?;
    Ok(Problem {
        h,
        y: y.data,
        noise_sigma: mf.noise_sigma,
    })
}

/// Output of one solver run.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub x: ImageSequence,
    pub motion: Option<MotionField>,
    pub log: Vec<IterRecord>,
    /// TV pass of the separate pipeline.
    pub initial: Option<(ImageSequence, Vec<IterRecord>)>,
}

pub fn run_solver(
    solver: SolverKind,
    problem: &Problem,
    params: &AdmmParams,
    cfg: &RunConfig,
    known_motion: Option<&MotionField>,
) -> Result<Reconstruction> {
    let (y, h) = (&problem.y, &problem.h);
    let d = h.dims();
    let fixed = |prior: &dyn LinearOperator| -> Result<Reconstruction> {
        let out = reconstruct_admm(y, h, prior, params)?;
        Ok(Reconstruction {
            x: out.x,
            motion: None,
            log: out.log,
            initial: None,
        })
    };
    match solver {
        SolverKind::Dft => fixed(&TemporalDft::new(d)),
        SolverKind::Tv => fixed(&TemporalDifference::new(d, params.periodic)?),
        SolverKind::MotionTv => match known_motion {
            Some(v) => {
                let out = reconstruct_motion_tv(y, h, v, params)?;
                Ok(Reconstruction {
                    x: out.x,
                    motion: Some(v.clone()),
                    log: out.log,
                    initial: None,
                })
            }
            None => {
                let out = reconstruct_separate(y, h, params, &cfg.registration, cfg.initial_prior)?;
                Ok(Reconstruction {
                    x: out.x,
                    motion: Some(out.motion),
                    log: out.log,
                    initial: Some((out.initial, out.initial_log)),
                })
            }
        },
        SolverKind::JointMotionTv => {
            let out = reconstruct_joint(y, h, params, &cfg.joint)?;
            Ok(Reconstruction {
                x: out.x,
                motion: Some(out.motion),
                log: out.log,
                initial: None,
            })
        }
    }
}

pub fn iters_csv(log: &[IterRecord]) -> String {
    let mut s = String::from("iter,l1_prior,data_residual_sq,r_pm,r_mx,r_ys,beta\n");
    for r in log {
        let beta = r.beta.map(|b| b.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.iter, r.l1_prior, r.data_residual_sq, r.r_pm, r.r_mx, r.r_ys, beta
        );
    }
    s
}

pub fn cmd_reconstruct(cfg: &RunConfig) -> Result<Reconstruction> {
    let problem = load_problem(cfg.input_dir())?;
    let params = cfg.admm.params(problem.auto_epsilon());
    let known = match (&cfg.motion, cfg.solver) {
        (Some(p), SolverKind::MotionTv) => Some(read_cmv(p)?),
        _ => None,
    };
    let rec = run_solver(cfg.solver, &problem, &params, cfg, known.as_ref())?;
    let d = rec.x.dims();
    write_csq(&cfg.out.join(X_HAT), d.nx, d.ny, d.nt, 1, rec.x.as_slice())?;
    if let Some(v) = &rec.motion {
        write_cmv(&cfg.out.join(V_HAT), v)?;
    }
    write_bytes(&cfg.out.join(ITERS), iters_csv(&rec.log).as_bytes())?;
    Ok(rec)
}

fn read_support(path: &Path) -> Result<Vec<Vec<bool>>> {
    let c = read_csq(path)?;
    Ok(c.data.chunks(c.frame_len()).map(|f| f.iter().map(|z| z.re > 0.5).collect()).collect())
}

pub fn cmd_evaluate(cfg: &RunConfig) -> Result<EvalReport> {
    let input = cfg.input_dir();
    let x = read_image(&input.join(X_HAT))?;
    let ref_path = cfg.evaluate.reference.clone().unwrap_or_else(|| input.join(X_TRUE));
    let reference = read_image(&ref_path)?;
    if reference.dims() != x.dims() {
        return Err(CliError::format(
            &ref_path,
            "n_x",
            format!("reference is {}, reconstruction is {}", reference.dims(), x.dims()),
        ));
    }
    let roi_path = input.join(ROI);
    let roi: Roi = if roi_path.exists() {
        read_json(&roi_path)?
    } else {
        Roi::full(x.dims())
    };
    let pixels: Vec<(usize, usize)> = if cfg.evaluate.pixels.is_empty() {
        vec![((roi.y0 + roi.y1) / 2, (roi.x0 + roi.x1) / 2)]
    } else {
        cfg.evaluate.pixels.iter().map(|p| (p[0], p[1])).collect()
    };
    let motion_files = [input.join(V_HAT), input.join(V_TRUE), input.join(SUPPORT)];
    let motion = if motion_files.iter().all(|p| p.exists()) {
        Some((read_cmv(&motion_files[0])?, read_cmv(&motion_files[1])?, read_support(&motion_files[2])?))
    } else {
        None
    };
    let report = evaluate(
        &x,
        &reference,
        roi,
        &pixels,
        motion.as_ref().map(|(a, b, s)| (a, b, s.as_slice())),
    )?;

    let mut csv = String::from("frame,rmse\n");
    for (t, r) in report.per_frame_rmse.iter().enumerate() {
        let _ = writeln!(csv, "{t},{r}");
    }
    let _ = writeln!(csv, "overall,{}", report.overall_rmse);
    write_bytes(&cfg.out.join(REPORT), csv.as_bytes())?;

    let nx = x.dims().nx;
    let mut tr = String::from("pixel,frame,magnitude\n");
    for p in &report.pixel_traces {
        for (t, m) in p.values.iter().enumerate() {
            let _ = writeln!(tr, "{},{t},{m}", p.y * nx + p.x);
        }
    }
    write_bytes(&cfg.out.join(TRACES), tr.as_bytes())?;
    write_json(&cfg.out.join(REPORT_JSON), &report)?;
    Ok(report)
}

/// One cell of the solver x rate sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub solver: SolverKind,
    pub rate: f64,
    pub overall_rmse: f64,
    pub epsilon: f64,
    pub final_data_residual_sq: f64,
    /// `r_pm` and `r_mx` at iteration 10 divided by their final values.
    pub r_pm_drop: Option<f64>,
    pub r_mx_drop: Option<f64>,
    pub motion_epe: Option<f64>,
    /// `||K_t(v) x||_1` and `||D_t x||_1` for motion solvers.
    pub l1_motion_residual: Option<f64>,
    pub l1_frame_difference: Option<f64>,
}

fn drops(log: &[IterRecord]) -> (Option<f64>, Option<f64>) {
    match (log.get(9), log.last()) {
        (Some(a), Some(b)) if log.len() > 10 => (Some(a.r_pm / b.r_pm), Some(a.r_mx / b.r_mx)),
        _ => (None, None),
    }
}

#[allow(clippy::too_many_arguments)]
fn make_row(
    solver: SolverKind,
    rate: f64,
    x: &ImageSequence,
    log: &[IterRecord],
    motion: Option<&MotionField>,
    truth: &Truth,
    eps: f64,
    periodic: bool,
) -> Result<ExperimentRow> {
    let ph = &truth.phantom;
    let (_, overall_rmse) = rmse_roi(x, &ph.x, ph.roi)?;
    let (r_pm_drop, r_mx_drop) = drops(log);
    let (mut epe, mut l1k, mut l1d) = (None, None, None);
    if let Some(v) = motion {
        let d = x.dims();
        epe = motioncs::eval::motion_endpoint_error(v, &ph.motion, &ph.moving_support).ok();
        let k = MotionMatrix::build(v, d, periodic)?;
        l1k = Some(l1_norm(&k.apply(x.as_slice())?));
        l1d = Some(l1_norm(&TemporalDifference::new(d, periodic)?.apply(x.as_slice())?));
    }
    Ok(ExperimentRow {
        solver,
        rate,
        overall_rmse,
        epsilon: eps,
        final_data_residual_sq: log.last().map(|r| r.data_residual_sq).unwrap_or(f64::NAN),
        r_pm_drop,
        r_mx_drop,
        motion_epe: epe,
        l1_motion_residual: l1k,
        l1_frame_difference: l1d,
    })
}

#[derive(Clone, Copy)]
enum Job {
    Fixed(SolverKind),
    /// Separate pipeline; also yields the TV row when the initial pass is TV.
    Separate { tv_row: bool },
    Joint,
}

/// Runs every requested solver at every rate on one phantom. Rows are
/// ordered by solver, then rate, independent of execution order.
pub fn run_experiment(cfg: &RunConfig) -> Result<Vec<ExperimentRow>> {
    let truth = make_truth(cfg)?;
    let d = truth.phantom.x.dims();
    let solvers = &cfg.experiment.solvers;
    let want = |s| solvers.contains(&s);
    let shared_tv = want(SolverKind::MotionTv) && cfg.initial_prior == InitialPrior::Tv && cfg.motion.is_none();
    let mut jobs = Vec::new();
    if want(SolverKind::Dft) {
        jobs.push(Job::Fixed(SolverKind::Dft));
    }
    if want(SolverKind::Tv) && !shared_tv {
        jobs.push(Job::Fixed(SolverKind::Tv));
    }
    if want(SolverKind::MotionTv) {
        jobs.push(Job::Separate {
            tv_row: want(SolverKind::Tv) && shared_tv,
        });
    }
    if want(SolverKind::JointMotionTv) {
        jobs.push(Job::Joint);
    }
    let known = cfg.motion.as_ref().map(|p| read_cmv(p)).transpose()?;

    let cells: Vec<(f64, Job)> = cfg
        .experiment
        .rates
        .iter()
        .flat_map(|&r| jobs.iter().map(move |&j| (r, j)))
        .collect();
    let results: Vec<Result<Vec<ExperimentRow>>> = cells
        .par_iter()
        .map(|&(rate, job)| {
            let spec = MaskSpec {
                rate,
                sigma_fraction: cfg.mask.sigma_fraction,
                seed: cfg.seed,
                always_sample_dc: cfg.mask.always_sample_dc,
            };
            let mask = generate_mask(&spec, d)?;
            let y = simulate_acquisition(&truth.phantom.x, &truth.coils, &mask, cfg.mask.noise_sigma, noise_seed(cfg.seed))?;
            let problem = Problem {
                h: MeasurementOperator::new(d, mask, truth.coils.clone())?,
                y: y.data,
                noise_sigma: cfg.mask.noise_sigma,
            };
            let eps = cfg.admm.epsilon.unwrap_or_else(|| problem.auto_epsilon());
            let params = cfg.admm.params(eps);
            let solver = match job {
                Job::Fixed(s) => s,
                Job::Separate { .. } => SolverKind::MotionTv,
                Job::Joint => SolverKind::JointMotionTv,
            };
            let rec = run_solver(solver, &problem, &params, cfg, known.as_ref())?;
            let mut rows = vec![make_row(solver, rate, &rec.x, &rec.log, rec.motion.as_ref(), &truth, eps, params.periodic)?];
            if let (Job::Separate { tv_row: true }, Some((x0, log0))) = (job, &rec.initial) {
                rows.push(make_row(SolverKind::Tv, rate, x0, log0, None, &truth, eps, params.periodic)?);
            }
            Ok(rows)
        })
        .collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    rows.sort_by(|a, b| a.solver.cmp(&b.solver).then(a.rate.total_cmp(&b.rate)));
    Ok(rows)
}

pub fn table_csv(rows: &[ExperimentRow]) -> String {
    let mut s = String::from("solver,R,overall_rmse\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{}", r.solver.name(), r.rate, r.overall_rmse);
    }
    s
}

pub fn cmd_experiment(cfg: &RunConfig) -> Result<Vec<ExperimentRow>> {
    let rows = run_experiment(cfg)?;
    write_bytes(&cfg.out.join(TABLE), table_csv(&rows).as_bytes())?;
    write_json(&cfg.out.join(EXPERIMENT_JSON), &rows)?;
    Ok(rows)
}

pub fn cmd_export_pgm(input: &Path, frame: usize, out: &Path) -> Result<()> {
    let x = read_image(input)?;
    let d = x.dims();
    if frame >= d.nt {
        return Err(CliError::Config(format!("frame {frame} out of range, sequence has {} frames", d.nt)));
    }
    write_bytes(out, &encode_pgm(d.nx, d.ny, &x.frame_magnitude(frame), x.max_magnitude()))
}

/// Default output path for `export-pgm`.
pub fn default_pgm_path(input: &Path, frame: usize) -> PathBuf {
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("frame");
    input.with_file_name(format!("{stem}_{frame:03}.pgm"))
}
