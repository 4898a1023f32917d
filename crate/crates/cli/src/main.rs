use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use motioncs_cli::commands;
use motioncs_cli::{CliError, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "motioncs", version, about = "Motion-compensated CS reconstruction of dynamic image sequences")]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write x_true.csq, v_true.cmv, coils.csq, roi.json and support.csq.
    Phantom,
    /// Undersample and add noise: y.csq and mask.json.
    Sample,
    /// Reconstruct: x_hat.csq, v_hat.cmv and iters.csv.
    Reconstruct,
    /// Compare x_hat.csq with the reference: report.csv and traces.csv.
    Evaluate,
    /// Sweep solvers and rates on one phantom: table.csv.
    Experiment,
    /// Write one frame of a CSQ1 image as a 16-bit PGM.
    ExportPgm {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        frame: usize,
        /// Output file; defaults to <file stem>_<frame>.pgm.
        #[arg(long = "pgm")]
        pgm: Option<PathBuf>,
    },
}

fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("MOTIONCS_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| CliError::Config(format!("MOTIONCS_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(CliError::Config("MOTIONCS_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    cli.overrides.apply(&mut cfg);
    match cli.command {
        Command::Phantom => commands::cmd_phantom(&cfg),
        Command::Sample => commands::cmd_sample(&cfg),
        Command::Reconstruct => {
            let rec = commands::cmd_reconstruct(&cfg)?;
            if let Some(last) = rec.log.last() {
                eprintln!(
                    "{}: {} iterations, ||y - Hx||^2 = {:.4e}",
                    cfg.solver.name(),
                    last.iter,
                    last.data_residual_sq
                );
            }
            Ok(())
        }
        Command::Evaluate => {
            let r = commands::cmd_evaluate(&cfg)?;
            eprintln!("overall ROI RMSE {:.6}", r.overall_rmse);
            Ok(())
        }
        Command::Experiment => {
            let rows = commands::cmd_experiment(&cfg)?;
            print!("{}", commands::table_csv(&rows));
            Ok(())
        }
        Command::ExportPgm { file, frame, pgm } => {
            let out = pgm.unwrap_or_else(|| commands::default_pgm_path(&file, frame));
            commands::cmd_export_pgm(&file, frame, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
