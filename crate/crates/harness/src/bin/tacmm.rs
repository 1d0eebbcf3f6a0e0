use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use tacmm::regressor::{model_io, RegressorModel};
use tacmm::strategies::{LiftMode, Strategy};
use tacmm::tactile::DomeGeometry;
use tacmm_harness::config::{ExperimentConfig, Sensing, SweepMode};
use tacmm_harness::criteria::{self, Check};
use tacmm_harness::training::{evaluate_fresh, train_and_evaluate};
use tacmm_harness::{report, run_lift_suite, run_pose_sweep, HarnessError, Result};

/// Tactile mobile manipulator experiments.
#[derive(Parser)]
#[command(name = "tacmm", version)]
struct Cli {
    /// Experiment config (JSON). Defaults to the checked-in calibrated config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Tactile,
    Vision,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the dataset, train the regressor, evaluate and save.
    Train {
        /// Output directory for model.txt and report.json.
        #[arg(long, default_value = "out/train")]
        out: PathBuf,
        /// Train on contact samples only.
        #[arg(long)]
        no_noncontact: bool,
    },
    /// Evaluate a saved model on a fresh test set.
    Eval {
        #[arg(long)]
        model: PathBuf,
    },
    /// Pose-adjustment sweep; writes a CSV.
    Sweep {
        #[arg(long, default_value = "out/sweep.csv")]
        out: PathBuf,
        /// Saved regressor; trained from the config when absent.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Exit with code 2 unless the sweep trend and ordering checks pass.
        #[arg(long)]
        assert: bool,
    },
    /// Cooperative lift suite; writes a CSV.
    Lift {
        #[arg(long, default_value = "out/lift.csv")]
        out: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        /// Run a single mode.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Exit with code 2 unless the lift ordering checks pass.
        #[arg(long)]
        assert: bool,
    },
    /// Tables and SVG plots from sweep or lift CSVs.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Directory for SVG plots.
        #[arg(long, default_value = "out/report")]
        out: PathBuf,
    },
}

enum Outcome {
    Done,
    AssertionFailed,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    std::fs::write(path, contents).map_err(io_err(path))
}

fn model_for(cfg: &ExperimentConfig, path: Option<&Path>) -> Result<Arc<RegressorModel>> {
    match path {
        Some(p) => Ok(Arc::new(model_io::load(p)?)),
        None => {
            eprintln!("training regressor (seed {})", cfg.seed);
            let (model, rep) = train_and_evaluate(&cfg.training, &cfg.world.dome, cfg.seed, true)?;
            eprintln!(
                "regressor: MAE {:.3} mm / {:.3} deg in {:.1} s",
                rep.eval.mae_depth, rep.eval.mae_angle, rep.seconds
            );
            Ok(Arc::new(model))
        }
    }
}

fn print_checks(checks: &[Check]) -> Outcome {
    for c in checks {
        println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if criteria::all_passed(checks) {
        Outcome::Done
    } else {
        Outcome::AssertionFailed
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::calibrated(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let dome: DomeGeometry = cfg.world.dome.clone();
    match cli.command {
        Command::Train { out, no_noncontact } => {
            let (model, rep) = train_and_evaluate(&cfg.training, &dome, cfg.seed, !no_noncontact)?;
            let json = serde_json::to_string_pretty(&rep).expect("report serializes");
            write(&out.join("model.txt"), &model_io::to_text(&model))?;
            write(&out.join("report.json"), &json)?;
            println!("{json}");
        }
        Command::Eval { model } => {
            let m = model_io::load(&model)?;
            let rep = evaluate_fresh(&m, &cfg.training, &dome, cfg.seed)?;
            println!("{}", serde_json::to_string_pretty(&rep).expect("report serializes"));
        }
        Command::Sweep { out, model, assert } => {
            let m = if cfg.sweep.modes.contains(&SweepMode::Regressor) {
                Some(model_for(&cfg, model.as_deref())?)
            } else {
                None
            };
            let rep = run_pose_sweep(&cfg, m)?;
            write(&out, &rep.to_csv())?;
            print!("{}", report::sweep_table(&rep));
            if assert {
                let mut checks = criteria::sweep_trend_checks(&rep, Strategy::MultiContact, 0.8, 5.0, 50.0);
                checks.extend(criteria::strategy_ordering_checks(&rep, 10.0));
                return Ok(print_checks(&checks));
            }
        }
        Command::Lift {
            out,
            trials,
            mode,
            model,
            assert,
        } => {
            if let Some(t) = trials {
                cfg.lift.trials = t;
            }
            if let Some(m) = mode {
                cfg.lift.modes = vec![match m {
                    ModeArg::Tactile => LiftMode::Tactile,
                    ModeArg::Vision => LiftMode::Vision,
                }];
            }
            cfg.validate()?;
            let needs_model = cfg.lift.sensing == Sensing::Regressor && cfg.lift.modes.contains(&LiftMode::Tactile);
            let m = if needs_model {
                Some(model_for(&cfg, model.as_deref())?)
            } else {
                None
            };
            let rep = run_lift_suite(&cfg, m)?;
            write(&out, &rep.to_csv())?;
            print!("{}", report::lift_table(&rep));
            if assert {
                let hardest = cfg.lift.heaviest_top().map(|s| s.name.clone()).unwrap_or_default();
                return Ok(print_checks(&criteria::lift_checks(&rep, 0.20, &hardest)));
            }
        }
        Command::Report { inputs, out } => {
            let texts = inputs
                .iter()
                .map(|p| Ok((p.display().to_string(), std::fs::read_to_string(p).map_err(io_err(p))?)))
                .collect::<Result<Vec<_>>>()?;
            let r = report::render(&texts)?;
            for (name, svg) in &r.plots {
                write(&out.join(name), svg)?;
            }
            print!("{}", r.text);
        }
    }
    Ok(Outcome::Done)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::AssertionFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
