//! Contact depth/angle regression from pin features.

mod dataset;
mod eval;
pub mod model_io;
mod network;

pub use dataset::{generate_dataset, generate_dataset_with, split, Dataset, DatasetProtocol, Sample};
pub use eval::{
    evaluate, evaluate_with_threshold, is_contact, is_contact_at, BinStat, EvalReport, DEFAULT_CONTACT_THRESHOLD,
};
pub use network::{
    predict, train, train_with_report, Hyper, Network, Prediction, Predictor, RegressorModel, Standardizer,
    TrainReport, OUTPUTS,
};
