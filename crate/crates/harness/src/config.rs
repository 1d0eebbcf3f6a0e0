//! Experiment configuration: one JSON document per experiment.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tacmm::grasp::BoxObject;
use tacmm::regressor::{DatasetProtocol, Hyper};
use tacmm::strategies::{LiftMode, Strategy};
use tacmm::world::{LiftScenario, WorldParams};

use crate::{HarnessError, Result};

/// The calibrated configuration used by the acceptance suite.
pub const DEFAULT_CONFIG_JSON: &str = include_str!("../configs/default.json");

/// Largest initial yaw any experiment may use, degrees.
pub const MAX_YAW: f64 = 25.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed; every trial seed is derived from it.
    pub seed: u64,
    pub world: WorldParams,
    pub training: TrainingConfig,
    pub sweep: SweepConfig,
    pub lift: LiftSuiteConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            world: WorldParams::default(),
            training: TrainingConfig::default(),
            sweep: SweepConfig::default(),
            lift: LiftSuiteConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub n_contact: usize,
    pub n_noncontact: usize,
    /// Pin feature noise, mm.
    pub noise_std: f64,
    pub train_fraction: f64,
    /// `hyper.seed` is ignored; initialisation draws from the master seed.
    pub hyper: Hyper,
    pub protocol: DatasetProtocol,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            n_contact: 5000,
            n_noncontact: 500,
            noise_std: 0.05,
            train_fraction: 0.75,
            hyper: Hyper::default(),
            protocol: DatasetProtocol::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    Bumper,
    Regressor,
    Vision,
}

impl SweepMode {
    pub const ALL: [SweepMode; 3] = [SweepMode::Bumper, SweepMode::Regressor, SweepMode::Vision];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepMode::Bumper => "bumper",
            SweepMode::Regressor => "regressor",
            SweepMode::Vision => "vision",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub object: BoxObject,
    /// Initial contact angles, degrees.
    pub angles: Vec<f64>,
    pub folds: usize,
    pub strategies: Vec<Strategy>,
    pub modes: Vec<SweepMode>,
    /// Pin feature noise in regressor mode, mm.
    pub sensor_noise: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            object: BoxObject::default(),
            angles: (-5..=5).map(|i| f64::from(i) * 5.0).collect(),
            folds: 5,
            strategies: Strategy::ALL.to_vec(),
            modes: SweepMode::ALL.to_vec(),
            sensor_noise: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sensing {
    Bumper,
    Regressor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LiftSuiteConfig {
    pub scenarios: Vec<LiftScenario>,
    pub trials: usize,
    pub modes: Vec<LiftMode>,
    /// How tactile-mode robots sense contact.
    pub sensing: Sensing,
    pub sensor_noise: f64,
}

impl Default for LiftSuiteConfig {
    fn default() -> Self {
        Self {
            scenarios: default_scenarios(),
            trials: 50,
            modes: vec![LiftMode::Tactile, LiftMode::Vision],
            sensing: Sensing::Regressor,
            sensor_noise: 0.05,
        }
    }
}

impl LiftSuiteConfig {
    /// The scenario with the largest pitching moment `mass * com_height`.
    pub fn heaviest_top(&self) -> Option<&LiftScenario> {
        self.scenarios
            .iter()
            .max_by(|a, b| (a.object.mass * a.object.com_height).total_cmp(&(b.object.mass * b.object.com_height)))
    }
}

/// Empty box; two stacked; 200 g at the bottom; 200 g on top; 500 g on top.
/// Heights include the payload. Payload CoMs sit at 5 mm (bottom), 40 mm
/// (200 g top, 20 mm tall) and 50 mm (500 g top, 40 mm tall) above the base.
pub fn default_scenarios() -> Vec<LiftScenario> {
    let b = BoxObject::default();
    let s = |name: &str, object: BoxObject| LiftScenario {
        name: name.to_string(),
        object,
    };
    vec![
        s("empty_box", b),
        s(
            "stacked_boxes",
            BoxObject {
                height: 60.0,
                mass: 0.4,
                com_height: 30.0,
                ..b
            },
        ),
        s(
            "weight_200g_bottom",
            BoxObject {
                mass: 0.4,
                com_height: 10.0,
                ..b
            },
        ),
        s(
            "weight_200g_top",
            BoxObject {
                height: 50.0,
                mass: 0.4,
                com_height: 27.5,
                ..b
            },
        ),
        s(
            "payload_500g_top",
            BoxObject {
                height: 70.0,
                mass: 0.7,
                com_height: 40.0,
                ..b
            },
        ),
    ]
}

fn invalid(msg: impl Into<String>) -> HarnessError {
    HarnessError::InvalidConfig(msg.into())
}

impl ExperimentConfig {
    /// Parses and validates; `origin` names the source in diagnostics.
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| HarnessError::ConfigParse {
            origin: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text, &path.display().to_string())
    }

    /// The checked-in calibrated configuration.
    pub fn calibrated() -> Self {
        Self::from_json(DEFAULT_CONFIG_JSON, "configs/default.json").expect("checked-in config is valid")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let w = &self.world;
        w.strategy.validate()?;
        let nonneg = [
            ("world.kinematic.k_trans", w.kinematic.k_trans),
            ("world.kinematic.k_rot", w.kinematic.k_rot),
            ("world.vision.sigma_pos", w.vision.sigma_pos),
            ("world.vision.sigma_ang", w.vision.sigma_ang),
            ("training.noise_std", self.training.noise_std),
            ("sweep.sensor_noise", self.sweep.sensor_noise),
            ("lift.sensor_noise", self.lift.sensor_noise),
        ];
        if let Some((name, v)) = nonneg.iter().find(|(_, v)| !(*v >= 0.0) || !v.is_finite()) {
            return Err(invalid(format!("{name} must be a finite value >= 0, got {v}")));
        }
        if !(0.0..=MAX_YAW).contains(&w.yaw_range) {
            return Err(invalid(format!("world.yaw_range must lie in [0, {MAX_YAW}]")));
        }
        if !(w.sensor_offset > 0.0) || !(w.start_distance > w.sensor_offset) || !(w.max_depth > 0.0) {
            return Err(invalid("world geometry must be positive with start_distance > sensor_offset"));
        }
        if w.tick_budget == 0 {
            return Err(invalid("world.tick_budget must be >= 1"));
        }
        let t = &self.training;
        if t.n_contact == 0 || !(t.train_fraction > 0.0 && t.train_fraction < 1.0) {
            return Err(invalid("training needs n_contact >= 1 and train_fraction in (0, 1)"));
        }
        let s = &self.sweep;
        if s.folds == 0 || s.angles.is_empty() || s.strategies.is_empty() || s.modes.is_empty() {
            return Err(invalid("sweep needs folds >= 1 and non-empty angles, strategies and modes"));
        }
        if let Some(a) = s.angles.iter().find(|a| !(a.abs() <= MAX_YAW)) {
            return Err(invalid(format!("sweep angle {a} outside [-{MAX_YAW}, {MAX_YAW}]")));
        }
        if !s.object.is_valid() {
            return Err(invalid("sweep.object is not a valid box"));
        }
        let l = &self.lift;
        if l.trials == 0 || l.scenarios.is_empty() || l.modes.is_empty() {
            return Err(invalid("lift needs trials >= 1 and non-empty scenarios and modes"));
        }
        for sc in &l.scenarios {
            if !sc.object.is_valid() {
                return Err(invalid(format!("scenario {} is not a valid box", sc.name)));
            }
        }
        let mut names: Vec<&str> = l.scenarios.iter().map(|s| s.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("scenario names must be unique"));
        }
        Ok(())
    }
}
