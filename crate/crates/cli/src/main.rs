//! `noether` — learn, integrate and audit conservation-constrained
//! Lagrangian dynamics from the command line.
//!
//! Subcommands: `generate` (noisy training data), `train` (fit a model),
//! `simulate` (integrate a trained model and report charge drift),
//! `evaluate` (recompute reports from stored trajectories), `invariants`
//! (print a symmetry layer's feature layout).
//!
//! Exit codes: 0 ok, 1 usage/config error, 2 training failure,
//! 3 integration divergence (partial trajectory still written).

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::{ExperimentConfig, Precision, SYMMETRY_NAMES};
use noether::diagnostics::{
    conservation_report, trajectory_divergence, velocity_divergence, REPORT_MAX_POINTS,
};
use noether::dynamics::{acceleration, PhaseState};
use noether::error::Error;
use noether::integrator::{
    integrate, parse_trajectory_csv, trajectory_csv, IntegrateError, IntegrateOptions, Trajectory,
};
use noether::invariants::SymmetrySpec;
use noether::network::{fnv1a_hex, LagrangianModel};
use noether::real::BaseFloat;
use noether::seeds::{split_seed, stream};
use noether::systems::{default_initial_state, perturbed_state, sample_batch};
use noether::training::train_with_callback;

#[derive(Parser)]
#[command(name = "noether", version, about = "Lagrangian dynamics with built-in conservation laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a noisy training dataset and write it as CSV.
    Generate {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of samples.
        #[arg(long, default_value_t = 128)]
        count: usize,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a Lagrangian network on freshly sampled noisy batches.
    Train {
        #[command(flatten)]
        common: CommonArgs,
        /// Output model JSON path.
        #[arg(long)]
        out: PathBuf,
        /// Loss history CSV path (default: `loss.csv` next to the model).
        #[arg(long)]
        loss_out: Option<PathBuf>,
    },
    /// Integrate a trained model and write trajectory + conservation report.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Trained model JSON.
        #[arg(long)]
        model: PathBuf,
        /// Output directory.
        #[arg(long)]
        out_dir: PathBuf,
        /// Also integrate a twin with normally perturbed initial conditions
        /// and report the trajectory distance.
        #[arg(long)]
        perturb: bool,
    },
    /// Recompute a conservation report from a stored trajectory.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        /// Trained model JSON.
        #[arg(long)]
        model: PathBuf,
        /// Stored trajectory CSV.
        #[arg(long)]
        trajectory: PathBuf,
        /// Optional second trajectory; adds the dq/dqdot columns.
        #[arg(long)]
        trajectory_b: Option<PathBuf>,
        /// Output report CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the feature layout of a symmetry-enforcing layer.
    Invariants {
        /// One of: none, rotational, translational, roto-translational,
        /// kepler-rotational, schwarzschild-rotational.
        #[arg(long)]
        symmetry: String,
        /// Spatial dimension D.
        #[arg(long, default_value_t = 3)]
        spatial_dim: usize,
        /// Number of particles (1 or 2).
        #[arg(long, default_value_t = 1)]
        particles: usize,
    },
}

/// Config file plus flag overrides; flags win.
#[derive(Args)]
struct CommonArgs {
    /// Experiment config JSON (defaults to the Kepler reference setup).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Noise std σ for sampled data.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    steps_per_epoch: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    n_hidden: Option<usize>,
    /// Symmetry layer by name (see `invariants --help`).
    #[arg(long)]
    symmetry: Option<String>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Working precision: single or double.
    #[arg(long)]
    precision: Option<String>,
    #[arg(long)]
    perturbation_std: Option<f64>,
}

impl CommonArgs {
    fn load(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.sigma {
            cfg.train.noise_std = v;
        }
        if let Some(v) = self.epochs {
            cfg.train.epochs = v;
        }
        if let Some(v) = self.steps_per_epoch {
            cfg.train.steps_per_epoch = v;
        }
        if let Some(v) = self.batch_size {
            cfg.train.batch_size = v;
        }
        if let Some(v) = self.n_hidden {
            cfg.n_hidden = v;
        }
        if let Some(v) = &self.symmetry {
            cfg.symmetry = Some(v.clone());
        }
        if let Some(v) = self.t_final {
            cfg.integrate.t_final = Some(v);
        }
        if let Some(v) = self.dt {
            cfg.integrate.dt = v;
        }
        if let Some(v) = &self.precision {
            cfg.precision = match v.as_str() {
                "single" => Precision::Single,
                "double" => Precision::Double,
                other => {
                    return Err(Error::InvalidSpec(format!(
                        "precision must be 'single' or 'double', got '{other}'"
                    )))
                }
            };
        }
        if let Some(v) = self.perturbation_std {
            cfg.perturbation_std = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(e: impl std::fmt::Display) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
    fn training(e: impl std::fmt::Display) -> Self {
        Failure { code: 2, message: e.to_string() }
    }
    fn divergence(e: impl std::fmt::Display) -> Self {
        Failure { code: 3, message: e.to_string() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Training(_) => Failure::training(e),
            _ => Failure::usage(e),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version requests are normal output, not usage errors.
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate { common, count, out } => {
            let cfg = common.load().map_err(Failure::usage)?;
            match cfg.precision {
                Precision::Double => cmd_generate::<f64>(&cfg, count, &out),
                Precision::Single => cmd_generate::<f32>(&cfg, count, &out),
            }
        }
        Command::Train { common, out, loss_out } => {
            let cfg = common.load().map_err(Failure::usage)?;
            let loss_out = loss_out.unwrap_or_else(|| out.with_file_name("loss.csv"));
            match cfg.precision {
                Precision::Double => cmd_train::<f64>(&cfg, &out, &loss_out),
                Precision::Single => cmd_train::<f32>(&cfg, &out, &loss_out),
            }
        }
        Command::Simulate { common, model, out_dir, perturb } => {
            let cfg = common.load().map_err(Failure::usage)?;
            match cfg.precision {
                Precision::Double => cmd_simulate::<f64>(&cfg, &model, &out_dir, perturb),
                Precision::Single => cmd_simulate::<f32>(&cfg, &model, &out_dir, perturb),
            }
        }
        Command::Evaluate { common, model, trajectory, trajectory_b, out } => {
            let cfg = common.load().map_err(Failure::usage)?;
            match cfg.precision {
                Precision::Double => {
                    cmd_evaluate::<f64>(&cfg, &model, &trajectory, trajectory_b.as_deref(), &out)
                }
                Precision::Single => {
                    cmd_evaluate::<f32>(&cfg, &model, &trajectory, trajectory_b.as_deref(), &out)
                }
            }
        }
        Command::Invariants { symmetry, spatial_dim, particles } => {
            cmd_invariants(&symmetry, spatial_dim, particles)
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(Failure::usage)?;
        }
    }
    std::fs::write(path, contents).map_err(Failure::usage)?;
    Ok(())
}

fn cmd_generate<B: BaseFloat>(
    cfg: &ExperimentConfig,
    count: usize,
    out: &Path,
) -> Result<(), Failure> {
    let seed = split_seed(cfg.seed, stream::DATA);
    let batch = sample_batch::<B>(&cfg.system, seed, cfg.train.noise_std, count)?;
    write_file(out, &noether::systems::dataset_csv(&batch))?;
    println!("wrote {count} samples to {}", out.display());
    Ok(())
}

fn cmd_train<B: BaseFloat>(
    cfg: &ExperimentConfig,
    out: &Path,
    loss_out: &Path,
) -> Result<(), Failure> {
    let symmetry = cfg.symmetry_spec()?;
    let model = LagrangianModel::<B>::init(
        split_seed(cfg.seed, stream::INIT),
        symmetry,
        cfg.system.dim(),
        cfg.n_hidden,
    )?;
    let train_cfg = cfg.train_config();
    let every = cfg.train.checkpoint_every;
    let checkpoint_base = out.to_path_buf();
    let (trained, history) =
        train_with_callback(&model, &cfg.system, &train_cfg, |epoch, _, snapshot| {
            if every > 0 && (epoch + 1) % every == 0 {
                let stem = checkpoint_base
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "model".into());
                let path =
                    checkpoint_base.with_file_name(format!("{stem}.epoch{:05}.json", epoch + 1));
                let _ = snapshot.save(&path);
            }
        })?;
    write_file(out, &trained.to_json())?;
    write_file(loss_out, &history.csv())?;
    let meta = json!({
        "config": cfg,
        "epochs": history.epoch_mse.len(),
        "wall_seconds": history.wall_seconds,
        "final_mse": history.epoch_mse.last(),
    });
    write_file(
        &loss_out.with_extension("meta.json"),
        &serde_json::to_string_pretty(&meta).expect("meta serialization"),
    )?;
    match history.epoch_mse.last() {
        Some(mse) => println!(
            "trained {} epochs, final mse {mse:.3e}; model at {}",
            history.epoch_mse.len(),
            out.display()
        ),
        None => println!("0 epochs requested; wrote the initialized model to {}", out.display()),
    }
    Ok(())
}

struct SimPaths {
    trajectory: PathBuf,
    trajectory_meta: PathBuf,
    perturbed: PathBuf,
    perturbed_meta: PathBuf,
    report: PathBuf,
    report_meta: PathBuf,
}

impl SimPaths {
    fn new(dir: &Path) -> Self {
        SimPaths {
            trajectory: dir.join("trajectory.csv"),
            trajectory_meta: dir.join("trajectory.meta.json"),
            perturbed: dir.join("trajectory_perturbed.csv"),
            perturbed_meta: dir.join("trajectory_perturbed.meta.json"),
            report: dir.join("report.csv"),
            report_meta: dir.join("report.meta.json"),
        }
    }
}

fn cmd_simulate<B: BaseFloat>(
    cfg: &ExperimentConfig,
    model_path: &Path,
    out_dir: &Path,
    perturb: bool,
) -> Result<(), Failure> {
    let model = LagrangianModel::<B>::load(model_path)?;
    if model.input_dim != cfg.system.dim() {
        return Err(Failure::usage(format!(
            "model acts on d={}, system has d={}",
            model.input_dim,
            cfg.system.dim()
        )));
    }
    let model_hash = fnv1a_hex(model.to_json().as_bytes());
    let t_final = cfg.t_final();
    let dt = cfg.integrate.dt;
    let opts =
        IntegrateOptions { record_every: cfg.integrate.decimation, ..IntegrateOptions::default() };
    let paths = SimPaths::new(out_dir);
    let meta = |label: &str, rows: usize| {
        json!({
            "system": cfg.system,
            "model_hash": model_hash,
            "dt": dt,
            "t_final": t_final,
            "seed": cfg.seed,
            "decimation": cfg.integrate.decimation,
            "label": label,
            "rows": rows,
        })
    };

    let accel = |s: &PhaseState<B>| acceleration(&model, s);
    let initial = default_initial_state::<B>(&cfg.system, cfg.seed)?;
    let run = |start: &PhaseState<B>,
               csv_path: &Path,
               meta_path: &Path,
               label: &str|
     -> Result<Trajectory<B>, Failure> {
        match integrate(&accel, start, t_final, dt, opts) {
            Ok(traj) => {
                write_file(csv_path, &trajectory_csv(&traj))?;
                write_file(
                    meta_path,
                    &serde_json::to_string_pretty(&meta(label, traj.len())).expect("meta"),
                )?;
                Ok(traj)
            }
            Err(IntegrateError::Diverged(d)) => {
                write_file(csv_path, &trajectory_csv(&d.partial))?;
                let mut m = meta(label, d.partial.len());
                m["diverged_at_t"] = json!(d.time);
                write_file(meta_path, &serde_json::to_string_pretty(&m).expect("meta"))?;
                Err(Failure::divergence(format!(
                    "{label} trajectory diverged at t = {:.4} (partial written to {})",
                    d.time,
                    csv_path.display()
                )))
            }
            Err(IntegrateError::Eval(e)) => Err(Failure::usage(e)),
        }
    };

    let traj = run(&initial, &paths.trajectory, &paths.trajectory_meta, "primary")?;
    let mut report = conservation_report(&traj, &cfg.system, &model)?;

    if perturb {
        let twin_start = perturbed_state(&initial, cfg.perturbation_std, cfg.seed);
        let twin = run(&twin_start, &paths.perturbed, &paths.perturbed_meta, "perturbed")?;
        report.push_column("dq", trajectory_divergence(&traj, &twin)?);
        report.push_column("dqdot", velocity_divergence(&traj, &twin)?);
    }

    write_file(&paths.report, &report.csv(Some(REPORT_MAX_POINTS)))?;
    let mut report_meta = report.metadata.clone();
    report_meta["model_hash"] = json!(model_hash);
    report_meta["seed"] = json!(cfg.seed);
    write_file(&paths.report_meta, &serde_json::to_string_pretty(&report_meta).expect("meta"))?;
    println!(
        "integrated {} steps to T={t_final}; outputs in {}",
        traj.len() - 1,
        out_dir.display()
    );
    Ok(())
}

fn cmd_evaluate<B: BaseFloat>(
    cfg: &ExperimentConfig,
    model_path: &Path,
    traj_path: &Path,
    traj_b: Option<&Path>,
    out: &Path,
) -> Result<(), Failure> {
    let model = LagrangianModel::<B>::load(model_path)?;
    let text = std::fs::read_to_string(traj_path).map_err(Failure::usage)?;
    let traj = parse_trajectory_csv::<B>(&text)?;
    let mut report = conservation_report(&traj, &cfg.system, &model)?;
    if let Some(path_b) = traj_b {
        let text_b = std::fs::read_to_string(path_b).map_err(Failure::usage)?;
        let twin = parse_trajectory_csv::<B>(&text_b)?;
        report.push_column("dq", trajectory_divergence(&traj, &twin)?);
        report.push_column("dqdot", velocity_divergence(&traj, &twin)?);
    }
    write_file(out, &report.csv(Some(REPORT_MAX_POINTS)))?;
    let meta_path = out.with_extension("meta.json");
    write_file(&meta_path, &serde_json::to_string_pretty(&report.metadata).expect("meta"))?;
    println!("report written to {}", out.display());
    Ok(())
}

fn cmd_invariants(symmetry: &str, spatial_dim: usize, particles: usize) -> Result<(), Failure> {
    let spec = match symmetry {
        "kepler-rotational" => SymmetrySpec::KeplerRotational,
        "schwarzschild-rotational" => SymmetrySpec::SchwarzschildRotational,
        "none" => SymmetrySpec::None { dim: spatial_dim * particles },
        "rotational" | "translational" | "roto-translational" => {
            if particles == 1 && symmetry == "rotational" && spatial_dim == 3 {
                SymmetrySpec::KeplerRotational
            } else if particles != 2 {
                return Err(Failure::usage(format!(
                    "'{symmetry}' needs --particles 2 (got {particles})"
                )));
            } else {
                match symmetry {
                    "rotational" => SymmetrySpec::Rotational { spatial_dim },
                    "translational" => SymmetrySpec::Translational { spatial_dim },
                    _ => SymmetrySpec::RotoTranslational { spatial_dim },
                }
            }
        }
        other => {
            return Err(Failure::usage(format!(
                "unknown symmetry '{other}'; valid options: {}",
                SYMMETRY_NAMES.join(", ")
            )))
        }
    };
    spec.validate()?;
    let layout = spec.feature_layout();
    for descriptor in &layout {
        println!("{descriptor}");
    }
    println!("total {}", layout.len());
    Ok(())
}
