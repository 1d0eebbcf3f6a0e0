//! Trial seeds.
//!
//! A trial seed is the first eight bytes (little-endian) of
//! `SHA-256(label ‖ 0x00 ‖ mode ‖ 0x00 ‖ trial as u64 LE ‖ master as u64 LE)`,
//! where `label` is the scenario name (or a sweep cell label). The scheme is
//! stable across runs, platforms and thread counts.

use sha2::{Digest, Sha256};

pub fn derive_seed(label: &str, mode: &str, trial: u64, master: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(label.as_bytes());
    h.update([0u8]);
    h.update(mode.as_bytes());
    h.update([0u8]);
    h.update(trial.to_le_bytes());
    h.update(master.to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}
