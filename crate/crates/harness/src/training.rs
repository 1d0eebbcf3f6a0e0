//! Regressor training and evaluation on the synthetic protocol.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use tacmm::regressor::{evaluate, generate_dataset_with, split, train, EvalReport, Hyper, RegressorModel};
use tacmm::tactile::DomeGeometry;

use crate::config::TrainingConfig;
use crate::seeds::derive_seed;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    /// Whether non-contact samples were part of the dataset.
    pub with_noncontact: bool,
    pub n_train: usize,
    pub n_test: usize,
    pub eval: EvalReport,
    /// Wall time of generation, training and evaluation, seconds.
    pub seconds: f64,
}

/// Generates the dataset, splits it, trains and evaluates on the held-out
/// part. Deterministic in `(config, dome, master)`.
pub fn train_and_evaluate(
    config: &TrainingConfig,
    dome: &DomeGeometry,
    master: u64,
    with_noncontact: bool,
) -> Result<(RegressorModel, TrainingReport)> {
    let start = Instant::now();
    let n_noncontact = if with_noncontact { config.n_noncontact } else { 0 };
    let data = generate_dataset_with(
        config.n_contact,
        n_noncontact,
        dome,
        config.noise_std,
        derive_seed("training", "dataset", 0, master),
        &config.protocol,
    )?;
    let (train_set, test_set) = split(&data, config.train_fraction)?;
    let hyper = Hyper {
        seed: derive_seed("training", "init", 0, master),
        ..config.hyper.clone()
    };
    let model = train(&train_set, &hyper)?;
    let eval = evaluate(&model, &test_set)?;
    let report = TrainingReport {
        with_noncontact,
        n_train: train_set.samples.len(),
        n_test: test_set.samples.len(),
        eval,
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok((model, report))
}

/// Evaluates a saved model on a freshly generated test set that shares no
/// seed with training.
pub fn evaluate_fresh(
    model: &RegressorModel,
    config: &TrainingConfig,
    dome: &DomeGeometry,
    master: u64,
) -> Result<EvalReport> {
    let n_test = |n: usize| ((n as f64) * (1.0 - config.train_fraction)).round() as usize;
    let data = generate_dataset_with(
        n_test(config.n_contact).max(1),
        n_test(config.n_noncontact),
        dome,
        config.noise_std,
        derive_seed("evaluation", "dataset", 0, master),
        &config.protocol,
    )?;
    Ok(evaluate(model, &data)?)
}
