//! The cooperative lift suite: success rates per scenario and mode.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tacmm::grasp::FailureCause;
use tacmm::regressor::RegressorModel;
use tacmm::strategies::LiftMode;
use tacmm::world::{run_lift_trial, SensorMode, TrialResult};

use crate::config::{ExperimentConfig, Sensing};
use crate::csvio;
use crate::seeds::derive_seed;
use crate::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftRow {
    pub scenario: String,
    pub mode: String,
    pub seed: u64,
    pub success: bool,
    /// Empty on success.
    pub failure_cause: String,
    pub ticks: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRates {
    pub scenario: String,
    pub tactile: Option<f64>,
    pub vision: Option<f64>,
    pub trials: usize,
}

impl ScenarioRates {
    /// Tactile minus vision, when both were run.
    pub fn gap(&self) -> Option<f64> {
        Some(self.tactile? - self.vision?)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LiftSuiteReport {
    pub rows: Vec<LiftRow>,
}

impl LiftSuiteReport {
    /// Success rates per scenario in first-appearance order.
    pub fn rates(&self) -> Vec<ScenarioRates> {
        let mut names: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !names.contains(&r.scenario.as_str()) {
                names.push(&r.scenario);
            }
        }
        names
            .into_iter()
            .map(|name| {
                let rate = |mode: LiftMode| {
                    let rs: Vec<&LiftRow> = self
                        .rows
                        .iter()
                        .filter(|r| r.scenario == name && r.mode == mode.as_str())
                        .collect();
                    (!rs.is_empty()).then(|| rs.iter().filter(|r| r.success).count() as f64 / rs.len() as f64)
                };
                ScenarioRates {
                    scenario: name.to_string(),
                    tactile: rate(LiftMode::Tactile),
                    vision: rate(LiftMode::Vision),
                    trials: self.rows.iter().filter(|r| r.scenario == name).count(),
                }
            })
            .collect()
    }

    /// Mean of the per-scenario rates for each mode.
    pub fn aggregate(&self) -> (Option<f64>, Option<f64>) {
        let rates = self.rates();
        let mean = |xs: Vec<f64>| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
        (
            mean(rates.iter().filter_map(|r| r.tactile).collect()),
            mean(rates.iter().filter_map(|r| r.vision).collect()),
        )
    }

    pub fn to_csv(&self) -> String {
        csvio::write_rows(&self.rows)
    }

    pub fn from_csv(text: &str, origin: &str) -> Result<Self> {
        let rows: Vec<LiftRow> = csvio::read_rows(text, origin)?;
        for (i, r) in rows.iter().enumerate() {
            let bad = |message: String| HarnessError::Csv {
                origin: origin.to_string(),
                row: i as u64 + 1,
                message,
            };
            if LiftMode::parse(&r.mode).is_none() {
                return Err(bad(format!("unknown mode {:?}", r.mode)));
            }
            match (r.success, r.failure_cause.as_str()) {
                (true, "") => {}
                (false, cause) if FailureCause::parse(cause).is_some() => {}
                _ => return Err(bad(format!("inconsistent success/failure_cause {:?}", r.failure_cause))),
            }
        }
        Ok(Self { rows })
    }
}

/// Runs `trials` seeded trials per scenario and mode. Tactile mode with
/// regressor sensing needs `model`.
pub fn run_lift_suite(config: &ExperimentConfig, model: Option<Arc<RegressorModel>>) -> Result<LiftSuiteReport> {
    Ok(LiftSuiteReport {
        rows: run_lift_trials(config, model)?.into_iter().map(|(row, _)| row).collect(),
    })
}

/// Like [`run_lift_suite`] but keeps each trial's full result.
pub fn run_lift_trials(
    config: &ExperimentConfig,
    model: Option<Arc<RegressorModel>>,
) -> Result<Vec<(LiftRow, TrialResult)>> {
    let lc = &config.lift;
    let tactile_sensing = match lc.sensing {
        Sensing::Bumper => SensorMode::Bumper,
        Sensing::Regressor if lc.modes.contains(&LiftMode::Tactile) => SensorMode::Regressor {
            model: model.ok_or_else(|| HarnessError::Usage("tactile lifts with regressor sensing need a model".into()))?,
            noise_std: lc.sensor_noise,
        },
        Sensing::Regressor => SensorMode::Bumper,
    };
    let mut jobs = Vec::new();
    for scenario in &lc.scenarios {
        for &mode in &lc.modes {
            for trial in 0..lc.trials {
                jobs.push((scenario, mode, derive_seed(&scenario.name, mode.as_str(), trial as u64, config.seed)));
            }
        }
    }
    Ok(jobs
        .par_iter()
        .map(|&(scenario, mode, seed)| {
            let sensing = match mode {
                LiftMode::Tactile => &tactile_sensing,
                LiftMode::Vision => &SensorMode::Bumper,
            };
            let r = run_lift_trial(scenario, mode, sensing, &config.world, seed);
            let row = LiftRow {
                scenario: scenario.name.clone(),
                mode: mode.as_str().to_string(),
                seed,
                success: r.success,
                failure_cause: r.failure_cause.map_or(String::new(), |c| c.as_str().to_string()),
                ticks: r.ticks,
            };
            (row, r)
        })
        .collect())
}
