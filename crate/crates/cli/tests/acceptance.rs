//! Acceptance run. Prints one PASS/FAIL line per criterion.
//!
//! Criteria 5-7 use the 64x64x8 CI profile unless `MOTIONCS_ACCEPTANCE_FULL=1`
//! selects the 256x256x24, 9-coil phantom. The process exits non-zero on a
//! failed criterion only when `MOTIONCS_ACCEPTANCE_STRICT=1`.

use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use motioncs::datagen::{generate_mask, generate_phantom, MaskSpec, PhantomSpec};
use motioncs::fft::Fft2;
use motioncs::linop::{adjoint_mismatch, LinearOperator};
use motioncs::motion::MotionField;
use motioncs::operators::{MeasurementOperator, MotionMatrix, SamplingMask, TemporalDft, TemporalDifference};
use motioncs::solvers::{cg_solve, project_consistency, soft_threshold, AdmmParams};
use motioncs::vecops::{l1_norm, l2_norm, norm_sq};
use motioncs::{CoilSensitivities, Dims, C64};
use motioncs_cli::commands::{run_experiment, run_solver, ExperimentRow, Problem};
use motioncs_cli::config::{Profile, RunConfig, SolverKind};
use motioncs_cli::io::{read_cmv, read_csq, write_cmv, write_csq};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ADJOINT_TOL: f64 = 1e-10;
const UNITARY_TOL: f64 = 1e-12;
const ROW_SUM_TOL: f64 = 1e-12;
const PROJECTION_TOL: f64 = 1e-12;
const CG_TOL: f64 = 1e-6;
const SANITY_REL_ERR: f64 = 1e-3;
const SPARSITY_RATIO: f64 = 0.5;
const MIN_MOTION_PX: f64 = 2.0;
const JOINT_GAP: f64 = 1.15;
const EPE_LIMIT: f64 = 0.5;
const RESIDUAL_DROP: f64 = 10.0;
const EPS_SLACK: f64 = 1.05;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn report(n: usize, title: &str, elapsed: Duration, limit: Option<Duration>, o: Outcome) -> bool {
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let pass = o.pass && in_time;
    let budget = match limit {
        Some(l) => format!(" (limit {:.0}s)", l.as_secs_f64()),
        None => String::new(),
    };
    println!(
        "criterion {n} {title}: {} - {} [{:.1}s{budget}]",
        if pass { "PASS" } else { "FAIL" },
        o.detail,
        elapsed.as_secs_f64()
    );
    pass
}

fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect()
}

fn random_field(nx: usize, ny: usize, nj: usize, amp: f64, rng: &mut ChaCha8Rng) -> MotionField {
    let data = (0..nx * ny * nj)
        .map(|_| [amp * (rng.random::<f64>() - 0.5), amp * (rng.random::<f64>() - 0.5)])
        .collect();
    MotionField::new(nx, ny, nj, data).unwrap()
}

fn rel_dist(a: &[C64], b: &[C64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    d / l2_norm(b)
}

fn worst_adjoint(op: &dyn LinearOperator, rng: &mut ChaCha8Rng) -> f64 {
    (0..10)
        .map(|_| {
            let u = random_vec(op.domain_len(), rng);
            let w = random_vec(op.range_len(), rng);
            adjoint_mismatch(op, &u, &w).unwrap()
        })
        .fold(0.0, f64::max)
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let d = Dims::new(12, 10, 5).unwrap();
    let lines = (0..d.nt).map(|t| vec![5, t % 5, 6 + t % 4]).collect();
    let mask = SamplingMask::new(d.ny, 10.0 / 3.0, lines).unwrap();
    let coils = CoilSensitivities::new(d.nx, d.ny, 3, random_vec(3 * d.frame_len(), &mut rng)).unwrap();
    let h = MeasurementOperator::new(d, mask, coils).unwrap();
    let dt = TemporalDifference::new(d, true).unwrap();
    let dt_open = TemporalDifference::new(d, false).unwrap();
    let phi = TemporalDft::new(d);
    let v = random_field(d.nx, d.ny, d.nt, 6.0, &mut rng);
    let k = MotionMatrix::build(&v, d, true).unwrap();

    let adj = [
        ("H", worst_adjoint(&h, &mut rng)),
        ("D_t", worst_adjoint(&dt, &mut rng).max(worst_adjoint(&dt_open, &mut rng))),
        ("Phi_t", worst_adjoint(&phi, &mut rng)),
        ("K_t(v)", worst_adjoint(&k, &mut rng)),
    ];
    let adj_ok = adj.iter().all(|(_, e)| *e <= ADJOINT_TOL);

    let mut unit = 0.0f64;
    let fft = Fft2::new(d.nx, d.ny);
    for _ in 0..10 {
        let x = random_vec(d.len(), &mut rng);
        let px = phi.apply(&x).unwrap();
        unit = unit.max((l2_norm(&px) - l2_norm(&x)).abs() / l2_norm(&x));
        unit = unit.max(rel_dist(&phi.adjoint(&px).unwrap(), &x));
        let f = &x[..d.frame_len()];
        let fx = fft.forward(f).unwrap();
        unit = unit.max((l2_norm(&fx) - l2_norm(f)).abs() / l2_norm(f));
        unit = unit.max(rel_dist(&fft.inverse(&fx).unwrap(), f));
    }

    let mut row_dev = 0.0f64;
    for j in 0..k.pairs().len() {
        let b = k.block(j);
        for r in 0..b.n_rows() {
            row_dev = row_dev.max((b.row(r).map(|(_, w)| w).sum::<f64>() - 1.0).abs());
        }
    }

    let k0 = MotionMatrix::build(&MotionField::zeros(d.nx, d.ny, d.nt), d, true).unwrap();
    let x = random_vec(d.len(), &mut rng);
    let w = random_vec(dt.range_len(), &mut rng);
    let identical = k0.apply(&x).unwrap() == dt.apply(&x).unwrap() && k0.adjoint(&w).unwrap() == dt.adjoint(&w).unwrap();

    let adj_s: Vec<String> = adj.iter().map(|(n, e)| format!("{n} {e:.1e}")).collect();
    outcome(
        adj_ok && unit <= UNITARY_TOL && row_dev <= ROW_SUM_TOL && identical,
        format!(
            "adjoint [{}] unitarity {unit:.1e} row-sum dev {row_dev:.1e} K_t(0)==D_t {identical}",
            adj_s.join(", ")
        ),
    )
}

/// Gaussian elimination with partial pivoting on a dense complex system.
fn dense_solve(mut a: Vec<Vec<C64>>, mut b: Vec<C64>) -> Vec<C64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].norm().total_cmp(&a[j][c].norm())).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                let t = a[c][k];
                a[r][k] -= f * t;
            }
            let t = b[c];
            b[r] -= f * t;
        }
    }
    let mut x = vec![C64::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let s: C64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut soft_mismatch = 0usize;
    let u: Vec<C64> = (0..10_000)
        .map(|_| C64::new(4.0 * rng.random::<f64>() - 2.0, 4.0 * rng.random::<f64>() - 2.0))
        .collect();
    let tau = 0.8;
    for (a, s) in u.iter().zip(soft_threshold(&u, tau)) {
        let m = a.norm();
        let expect = if m > tau { (a * (m - tau)) / m } else { C64::new(0.0, 0.0) };
        if s != expect {
            soft_mismatch += 1;
        }
    }

    let mut proj_dev = 0.0f64;
    for i in 0..200 {
        let eps = 0.1 + rng.random::<f64>();
        let scale = if i % 2 == 0 { 0.2 } else { 5.0 };
        let r: Vec<C64> = random_vec(32, &mut rng).iter().map(|z| z * scale).collect();
        let s2 = norm_sq(&project_consistency(&r, eps));
        let dev = if s2 == 0.0 { 0.0 } else { (s2 - eps).abs() };
        proj_dev = proj_dev.max(dev);
        if norm_sq(&r) > eps && s2 == 0.0 {
            proj_dev = f64::INFINITY;
        }
    }

    let mut cg_err = 0.0f64;
    for n in [4, 16, 64] {
        let b_mat: Vec<Vec<C64>> = (0..n).map(|_| random_vec(n, &mut rng)).collect();
        // A = B'B + I
        let a: Vec<Vec<C64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let s: C64 = (0..n).map(|k| b_mat[k][i].conj() * b_mat[k][j]).sum();
                        if i == j { s + 1.0 } else { s }
                    })
                    .collect()
            })
            .collect();
        let rhs = random_vec(n, &mut rng);
        let direct = dense_solve(a.clone(), rhs.clone());
        let out = cg_solve(
            |v, o| {
                for (i, oi) in o.iter_mut().enumerate() {
                    *oi = a[i].iter().zip(v).map(|(x, y)| x * y).sum();
                }
            },
            &rhs,
            None,
            10 * n,
            1e-12,
        )
        .unwrap();
        cg_err = cg_err.max(rel_dist(&out.solution, &direct));
    }
    outcome(
        soft_mismatch == 0 && proj_dev <= PROJECTION_TOL && cg_err <= CG_TOL,
        format!("soft mismatches {soft_mismatch}/10000, |‖s‖²-ε| max {proj_dev:.1e}, cg vs dense {cg_err:.1e}"),
    )
}

fn criterion_3() -> Outcome {
    let spec = PhantomSpec::small_profile();
    let ph = generate_phantom(&spec, true).unwrap();
    let d = ph.x.dims();
    let h = MeasurementOperator::new(d, SamplingMask::full(d.ny, d.nt), CoilSensitivities::unit(d.nx, d.ny)).unwrap();
    let y = h.apply(ph.x.as_slice()).unwrap();
    let problem = Problem {
        h,
        y,
        noise_sigma: 0.0,
    };
    let params = AdmmParams {
        epsilon: 0.0,
        max_iters: 100,
        ..Default::default()
    };
    let cfg = RunConfig::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for s in SolverKind::ALL {
        match run_solver(s, &problem, &params, &cfg, None) {
            Ok(rec) => {
                let e = rel_dist(rec.x.as_slice(), ph.x.as_slice());
                pass &= e < SANITY_REL_ERR && rec.log.len() <= 100;
                parts.push(format!("{} {e:.1e}", s.name()));
            }
            Err(err) => {
                pass = false;
                parts.push(format!("{} error {err}", s.name()));
            }
        }
    }
    outcome(pass, format!("relative L2 error [{}]", parts.join(", ")))
}

fn criterion_4() -> Outcome {
    let spec = PhantomSpec::default_profile();
    let ph = generate_phantom(&spec, true).unwrap();
    let d = ph.x.dims();
    let k = MotionMatrix::build(&ph.motion, d, true).unwrap();
    let dt = TemporalDifference::new(d, true).unwrap();
    let lk = l1_norm(&k.apply(ph.x.as_slice()).unwrap());
    let ld = l1_norm(&dt.apply(ph.x.as_slice()).unwrap());
    let min_motion = (0..ph.motion.n_transitions())
        .map(|j| {
            let (v, s) = (ph.motion.transition(j), &ph.moving_support[j]);
            let (sum, n) = v
                .iter()
                .zip(s)
                .filter(|(_, &m)| m)
                .fold((0.0, 0usize), |(a, n), (d, _)| (a + d[0].hypot(d[1]), n + 1));
            sum / n as f64
        })
        .fold(f64::INFINITY, f64::min);
    let ratio = lk / ld;
    outcome(
        ratio <= SPARSITY_RATIO && min_motion >= MIN_MOTION_PX,
        format!("{d}: l1(Kx)/l1(Dx) = {ratio:.3}, smallest mean motion per transition {min_motion:.2} px"),
    )
}

fn row<'a>(rows: &'a [ExperimentRow], s: SolverKind, r: f64) -> &'a ExperimentRow {
    rows.iter().find(|x| x.solver == s && x.rate == r).expect("missing experiment cell")
}

fn criterion_5(rows: &[ExperimentRow], rates: &[f64]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for &r in rates {
        let g = |s| row(rows, s, r).overall_rmse;
        let (sep, tv, dft, joint) = (
            g(SolverKind::MotionTv),
            g(SolverKind::Tv),
            g(SolverKind::Dft),
            g(SolverKind::JointMotionTv),
        );
        let ok_order = sep < tv && tv < dft;
        let ok_joint = joint <= JOINT_GAP * sep;
        pass &= ok_order && ok_joint;
        parts.push(format!(
            "R={r}: sep {sep:.4} tv {tv:.4} dft {dft:.4} joint {joint:.4} ({}{})",
            if ok_order { "order ok" } else { "order FAIL" },
            if ok_joint { "" } else { ", joint gap FAIL" }
        ));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_6(rows: &[ExperimentRow]) -> Outcome {
    let sep = row(rows, SolverKind::MotionTv, 8.0);
    let joint = row(rows, SolverKind::JointMotionTv, 8.0);
    let epe = sep.motion_epe.unwrap_or(f64::INFINITY);
    let (lk, ld) = (
        joint.l1_motion_residual.unwrap_or(f64::INFINITY),
        joint.l1_frame_difference.unwrap_or(0.0),
    );
    outcome(
        epe < EPE_LIMIT && lk < ld,
        format!("separate EPE {epe:.3} px (limit {EPE_LIMIT}); joint l1(Kx)/l1(Dx) = {:.3}", lk / ld),
    )
}

fn criterion_7(rows: &[ExperimentRow]) -> Outcome {
    let mut worst_pm = f64::INFINITY;
    let mut worst_mx = f64::INFINITY;
    let mut worst_res = 0.0f64;
    for r in rows {
        worst_pm = worst_pm.min(r.r_pm_drop.unwrap_or(0.0));
        worst_mx = worst_mx.min(r.r_mx_drop.unwrap_or(0.0));
        worst_res = worst_res.max(r.final_data_residual_sq / r.epsilon);
    }
    outcome(
        worst_pm >= RESIDUAL_DROP && worst_mx >= RESIDUAL_DROP && worst_res <= EPS_SLACK,
        format!(
            "{} runs: min drop ‖p-Am‖ {worst_pm:.1}x, ‖m-x‖ {worst_mx:.1}x, max ‖y-Hx‖²/ε {worst_res:.4}",
            rows.len()
        ),
    )
}

fn run_cli(dir: &Path, args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_motioncs"))
        .args(args)
        .args(["--out", dir.to_str().unwrap(), "--input", dir.to_str().unwrap()])
        .args(["--seed", "11", "--iters", "20"])
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .status()
        .map(|s| s.success())
        .unwrap_or(false)
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect();
    files.sort();
    files
}

fn criterion_8() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for name in ["a", "b"] {
        let dir = tmp.path().join(name);
        let ok = ["phantom", "sample", "reconstruct", "evaluate"]
            .iter()
            .all(|c| run_cli(&dir, &[c, "--solver", "joint_motion_tv"]));
        runs.push((ok, dir_bytes(&dir)));
    }
    let deterministic = runs[0].0 && runs[1].0 && runs[0].1 == runs[1].1;
    let n_files = runs[0].1.len();

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let d = Dims::new(7, 5, 3).unwrap();
    let data: Vec<C64> = random_vec(d.len() * 2, &mut rng)
        .iter()
        .map(|z| C64::new(z.re as f32 as f64, z.im as f32 as f64))
        .collect();
    let p = tmp.path().join("rt.csq");
    write_csq(&p, d.nx, d.ny, d.nt, 2, &data).unwrap();
    let back = read_csq(&p).unwrap();
    let csq_ok = (back.nx, back.ny, back.nt, back.nc) == (7, 5, 3, 2) && back.data == data;
    let v = random_field(7, 5, 3, 4.0, &mut rng);
    let v32 = MotionField::new(
        7,
        5,
        3,
        v.as_slice().iter().map(|d| [d[0] as f32 as f64, d[1] as f32 as f64]).collect(),
    )
    .unwrap();
    let p = tmp.path().join("rt.cmv");
    write_cmv(&p, &v32).unwrap();
    let cmv_ok = read_cmv(&p).unwrap() == v32;

    // single free draw per frame: the line law is the Gaussian on non-DC lines
    let (ny, nt) = (64usize, 10_000usize);
    let spec = MaskSpec {
        rate: 32.0,
        sigma_fraction: 0.25,
        seed: 99,
        always_sample_dc: true,
    };
    let m = generate_mask(&spec, Dims::new(4, ny, nt).unwrap()).unwrap();
    let mut hist = vec![0usize; ny];
    for t in 0..nt {
        for &l in m.lines(t) {
            hist[l] += 1;
        }
    }
    let sigma = 0.25 * ny as f64;
    let dc = ny / 2;
    let w: Vec<f64> = (0..ny)
        .map(|l| if l == dc { 0.0 } else { (-((l as f64 - dc as f64).powi(2)) / (2.0 * sigma * sigma)).exp() })
        .collect();
    let z: f64 = w.iter().sum();
    let mut chi2 = 0.0;
    let mut max_z = 0.0f64;
    for l in (0..ny).filter(|&l| l != dc) {
        let p = w[l] / z;
        let e = nt as f64 * p;
        let sd = (nt as f64 * p * (1.0 - p)).sqrt();
        max_z = max_z.max((hist[l] as f64 - e).abs() / sd);
        chi2 += (hist[l] as f64 - e).powi(2) / e;
    }
    let df = (ny - 2) as f64;
    let chi_bound = df + 4.0 * (2.0 * df).sqrt();
    let mask_ok = hist[dc] == nt && chi2 < chi_bound;

    outcome(
        deterministic && csq_ok && cmv_ok && mask_ok,
        format!(
            "repeat run identical over {n_files} files {deterministic}, CSQ1 {csq_ok}, CMV1 {cmv_ok}, mask chi2 {chi2:.1} < {chi_bound:.1} {mask_ok} (max |z| {max_z:.2})"
        ),
    )
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t0 = Instant::now();
    let out = f();
    (out, t0.elapsed())
}

fn main() {
    // cargo passes harness flags such as --nocapture; a name filter that
    // does not match this target skips the run
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }
    let full = std::env::var("MOTIONCS_ACCEPTANCE_FULL").is_ok_and(|v| v == "1");
    let strict = std::env::var("MOTIONCS_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let secs = Duration::from_secs;
    let mut all = true;

    let (o, t) = timed(criterion_1);
    all &= report(1, "operator algebra", t, Some(secs(10)), o);
    let (o, t) = timed(criterion_2);
    all &= report(2, "solver kernels", t, Some(secs(10)), o);
    let (o, t) = timed(criterion_3);
    all &= report(3, "full-sampling sanity", t, Some(secs(120)), o);
    let (o, t) = timed(criterion_4);
    all &= report(4, "prior sparsity", t, Some(secs(30)), o);

    let mut cfg = RunConfig::default();
    let (profile, limit) = if full {
        cfg.phantom.profile = Profile::Default;
        ("256x256x24, 9 coils", secs(30 * 60))
    } else {
        ("CI 64x64x8", secs(3 * 60))
    };
    let rates = cfg.experiment.rates.clone();
    let (rows, t) = timed(|| run_experiment(&cfg));
    match rows {
        Ok(rows) => {
            all &= report(5, &format!("reconstruction ordering, {profile}"), t, Some(limit), criterion_5(&rows, &rates));
            all &= report(6, &format!("motion recovery, {profile}"), Duration::ZERO, None, criterion_6(&rows));
            all &= report(7, &format!("convergence, {profile}"), Duration::ZERO, None, criterion_7(&rows));
        }
        Err(e) => {
            for (n, title) in [(5, "reconstruction ordering"), (6, "motion recovery"), (7, "convergence")] {
                all &= report(n, title, t, None, outcome(false, format!("experiment failed: {e}")));
            }
        }
    }

    let (o, t) = timed(criterion_8);
    all &= report(8, "determinism and formats", t, None, o);

    println!("acceptance: {}", if all { "all criteria pass" } else { "some criteria FAIL" });
    if strict && !all {
        std::process::exit(1);
    }
}
