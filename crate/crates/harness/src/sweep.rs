//! The pose-adjustment sweep: final angle and distance errors per initial
//! angle, strategy and sensing mode.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tacmm::regressor::RegressorModel;
use tacmm::strategies::Strategy;
use tacmm::world::{run_pose_trial, PoseMode, SensorMode};

use crate::config::{ExperimentConfig, SweepMode};
use crate::csvio;
use crate::seeds::derive_seed;
use crate::{HarnessError, Result};

/// Strategy label of vision-mode rows, which run the open-loop plan.
pub const VISION_PLAN: &str = "vision_plan";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub initial_angle_deg: f64,
    pub strategy: String,
    pub mode: String,
    pub fold: usize,
    pub final_angle_err_deg: f64,
    pub distance_err_mm: f64,
    pub contacts_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub mode: String,
    pub strategy: String,
    pub initial_angle_deg: f64,
    pub mae_angle_deg: f64,
    pub mae_distance_mm: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

fn angle_key(a: f64) -> i64 {
    (a * 1000.0).round() as i64
}

impl SweepReport {
    pub fn folds(&self) -> usize {
        self.rows.iter().map(|r| r.fold + 1).max().unwrap_or(0)
    }

    /// Per (mode, strategy, angle) MAEs, sorted by mode, strategy, angle.
    pub fn cells(&self) -> Vec<SweepCell> {
        let mut groups: BTreeMap<(&str, &str, i64), Vec<&SweepRow>> = BTreeMap::new();
        for r in &self.rows {
            groups
                .entry((r.mode.as_str(), r.strategy.as_str(), angle_key(r.initial_angle_deg)))
                .or_default()
                .push(r);
        }
        groups
            .into_values()
            .map(|rs| {
                let n = rs.len() as f64;
                SweepCell {
                    mode: rs[0].mode.clone(),
                    strategy: rs[0].strategy.clone(),
                    initial_angle_deg: rs[0].initial_angle_deg,
                    mae_angle_deg: rs.iter().map(|r| r.final_angle_err_deg).sum::<f64>() / n,
                    mae_distance_mm: rs.iter().map(|r| r.distance_err_mm).sum::<f64>() / n,
                    trials: rs.len(),
                }
            })
            .collect()
    }

    /// Cells for one (mode, strategy) series, in angle order.
    pub fn series(&self, mode: &str, strategy: &str) -> Vec<SweepCell> {
        self.cells()
            .into_iter()
            .filter(|c| c.mode == mode && c.strategy == strategy)
            .collect()
    }

    /// Distinct (mode, strategy) pairs in sorted order.
    pub fn series_keys(&self) -> Vec<(String, String)> {
        let mut keys: Vec<(String, String)> = self.rows.iter().map(|r| (r.mode.clone(), r.strategy.clone())).collect();
        keys.sort();
        keys.dedup();
        keys
    }

    pub fn to_csv(&self) -> String {
        csvio::write_rows(&self.rows)
    }

    pub fn from_csv(text: &str, origin: &str) -> Result<Self> {
        let rows: Vec<SweepRow> = csvio::read_rows(text, origin)?;
        for (i, r) in rows.iter().enumerate() {
            let bad = |message: String| HarnessError::Csv {
                origin: origin.to_string(),
                row: i as u64 + 1,
                message,
            };
            if SweepMode::parse(&r.mode).is_none() {
                return Err(bad(format!("unknown mode {:?}", r.mode)));
            }
            if Strategy::parse(&r.strategy).is_none() && r.strategy != VISION_PLAN {
                return Err(bad(format!("unknown strategy {:?}", r.strategy)));
            }
            let values = [r.initial_angle_deg, r.final_angle_err_deg, r.distance_err_mm];
            if values.iter().any(|v| !v.is_finite()) || r.final_angle_err_deg < 0.0 || r.distance_err_mm < 0.0 {
                return Err(bad("errors must be finite and non-negative".into()));
            }
        }
        Ok(Self { rows })
    }
}

struct Job {
    mode: SweepMode,
    strategy: Option<Strategy>,
    angle: f64,
    fold: usize,
}

/// Runs every (mode, strategy, angle, fold) trial. Regressor mode needs
/// `model`. Vision mode ignores the strategy list and runs the plan once per
/// angle and fold.
pub fn run_pose_sweep(config: &ExperimentConfig, model: Option<Arc<RegressorModel>>) -> Result<SweepReport> {
    let sc = &config.sweep;
    let regressor = match (sc.modes.contains(&SweepMode::Regressor), model) {
        (true, None) => return Err(HarnessError::Usage("regressor sweep needs a trained model".into())),
        (_, m) => m,
    };
    let mut jobs = Vec::new();
    for &mode in &sc.modes {
        let strategies: Vec<Option<Strategy>> = match mode {
            SweepMode::Vision => vec![None],
            _ => sc.strategies.iter().copied().map(Some).collect(),
        };
        for strategy in strategies {
            for &angle in &sc.angles {
                for fold in 0..sc.folds {
                    jobs.push(Job {
                        mode,
                        strategy,
                        angle,
                        fold,
                    });
                }
            }
        }
    }
    let mut rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|j| {
            let label = j.strategy.map_or(VISION_PLAN, Strategy::as_str);
            let seed = derive_seed(&format!("sweep/{label}/{}", j.angle), j.mode.as_str(), j.fold as u64, config.seed);
            let pose_mode = match j.mode {
                SweepMode::Bumper => PoseMode::Tactile(SensorMode::Bumper),
                SweepMode::Regressor => PoseMode::Tactile(SensorMode::Regressor {
                    model: regressor.clone().expect("checked above"),
                    noise_std: sc.sensor_noise,
                }),
                SweepMode::Vision => PoseMode::Vision,
            };
            let strategy = j.strategy.unwrap_or(Strategy::MultiContact);
            let r = run_pose_trial(&sc.object, j.angle, strategy, &pose_mode, &config.world, seed);
            SweepRow {
                initial_angle_deg: j.angle,
                strategy: label.to_string(),
                mode: j.mode.as_str().to_string(),
                fold: j.fold,
                final_angle_err_deg: r.final_angle_err,
                distance_err_mm: r.distance_err,
                contacts_used: r.contacts_used,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        (a.mode.as_str(), a.strategy.as_str())
            .cmp(&(b.mode.as_str(), b.strategy.as_str()))
            .then(a.initial_angle_deg.total_cmp(&b.initial_angle_deg))
            .then(a.fold.cmp(&b.fold))
    });
    Ok(SweepReport { rows })
}
