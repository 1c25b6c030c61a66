//! Experiment configuration: JSON file plus flag overrides (flags win).
//! Defaults reproduce the reference setup: 2500 epochs × 100 steps, batch
//! 128, cosine learning rate 1e-3 → 1e-5, noise std 1e-3, 128 hidden units,
//! RK4 with dt = 1e-2.

use serde::{Deserialize, Serialize};

use noether::error::{Error, Result};
use noether::invariants::SymmetrySpec;
use noether::systems::SystemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Single,
    Double,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainBlock {
    pub epochs: usize,
    pub steps_per_epoch: usize,
    pub batch_size: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub noise_std: f64,
    /// Write a checkpoint every K epochs (0 = only the final model).
    pub checkpoint_every: usize,
}

impl Default for TrainBlock {
    fn default() -> Self {
        TrainBlock {
            epochs: 2500,
            steps_per_epoch: 100,
            batch_size: 128,
            lr_start: 1e-3,
            lr_end: 1e-5,
            noise_std: 1e-3,
            checkpoint_every: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegrateBlock {
    /// Final time; `None` picks the per-system default (128 / 1000 / 8).
    pub t_final: Option<f64>,
    pub dt: f64,
    /// Record every k-th step in trajectory files.
    pub decimation: usize,
}

impl Default for IntegrateBlock {
    fn default() -> Self {
        IntegrateBlock { t_final: None, dt: 1e-2, decimation: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub system: SystemSpec,
    /// Symmetry kind by name; `None` = the system's constrained default.
    pub symmetry: Option<String>,
    pub n_hidden: usize,
    pub train: TrainBlock,
    pub integrate: IntegrateBlock,
    pub perturbation_std: f64,
    pub precision: Precision,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            system: SystemSpec::kepler_default(),
            symmetry: None,
            n_hidden: 128,
            train: TrainBlock::default(),
            integrate: IntegrateBlock::default(),
            perturbation_std: 1e-3,
            precision: Precision::Double,
            seed: 0,
        }
    }
}

pub const SYMMETRY_NAMES: &[&str] = &[
    "none",
    "rotational",
    "translational",
    "roto-translational",
    "kepler-rotational",
    "schwarzschild-rotational",
];

/// Resolve a symmetry name against a system's state layout. Plain
/// "rotational" means the single-particle layer for the one-particle systems.
pub fn resolve_symmetry(name: &str, system: &SystemSpec) -> Result<SymmetrySpec> {
    let spec = match (name, system) {
        ("none", _) => SymmetrySpec::None { dim: system.dim() },
        ("kepler-rotational", SystemSpec::Kepler { .. })
        | ("rotational", SystemSpec::Kepler { .. }) => SymmetrySpec::KeplerRotational,
        ("schwarzschild-rotational", SystemSpec::Schwarzschild { .. })
        | ("rotational", SystemSpec::Schwarzschild { .. }) => {
            SymmetrySpec::SchwarzschildRotational
        }
        ("rotational", SystemSpec::TwoParticle { spatial_dim, .. }) => {
            SymmetrySpec::Rotational { spatial_dim: *spatial_dim }
        }
        ("translational", SystemSpec::TwoParticle { spatial_dim, .. }) => {
            SymmetrySpec::Translational { spatial_dim: *spatial_dim }
        }
        ("roto-translational", SystemSpec::TwoParticle { spatial_dim, .. }) => {
            SymmetrySpec::RotoTranslational { spatial_dim: *spatial_dim }
        }
        _ => {
            return Err(Error::InvalidSpec(format!(
                "symmetry '{name}' does not fit this system; valid options: {}",
                SYMMETRY_NAMES.join(", ")
            )))
        }
    };
    if !system.supports_symmetry(&spec) {
        return Err(Error::InvalidSpec(format!(
            "symmetry '{name}' does not act on this system's state layout"
        )));
    }
    Ok(spec)
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: ExperimentConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        if let Some(name) = &self.symmetry {
            resolve_symmetry(name, &self.system)?;
        }
        if self.n_hidden == 0 {
            return Err(Error::InvalidSpec("n_hidden must be positive".into()));
        }
        if self.integrate.dt <= 0.0 || self.integrate.decimation == 0 {
            return Err(Error::InvalidSpec("need dt > 0 and decimation >= 1".into()));
        }
        if self.perturbation_std < 0.0 {
            return Err(Error::InvalidSpec("perturbation std must be non-negative".into()));
        }
        Ok(())
    }

    pub fn symmetry_spec(&self) -> Result<SymmetrySpec> {
        match &self.symmetry {
            Some(name) => resolve_symmetry(name, &self.system),
            None => Ok(self.system.default_symmetry()),
        }
    }

    /// Final integration time: explicit value or the per-system default.
    pub fn t_final(&self) -> f64 {
        self.integrate.t_final.unwrap_or(match self.system {
            SystemSpec::Kepler { .. } => 128.0,
            SystemSpec::Schwarzschild { .. } => 1000.0,
            SystemSpec::TwoParticle { .. } => 8.0,
        })
    }

    pub fn train_config(&self) -> noether::training::TrainConfig {
        noether::training::TrainConfig {
            epochs: self.train.epochs,
            steps_per_epoch: self.train.steps_per_epoch,
            batch_size: self.train.batch_size,
            lr_start: self.train.lr_start,
            lr_end: self.train.lr_end,
            noise_std: self.train.noise_std,
            seed: self.seed,
        }
    }
}
