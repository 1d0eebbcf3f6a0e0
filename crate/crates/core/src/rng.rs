//! Seeded random streams.
//!
//! Every stochastic component draws from its own ChaCha stream so that adding
//! draws in one component never shifts the sequence seen by another.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SimRng = ChaCha8Rng;

/// Stream identifiers used inside a single trial.
pub mod streams {
    pub const ROBOT_BASE: u64 = 0x10;
    pub const SENSOR_BASE: u64 = 0x20;
    pub const VISION_BASE: u64 = 0x30;
    pub const SCENE: u64 = 0x40;
}

/// A ChaCha8 generator for `(seed, stream)`.
pub fn stream(seed: u64, stream_id: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, std: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    z * std
}
