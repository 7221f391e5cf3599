//! Distributed collaborative user positioning for cell-free massive MIMO.
//!
//! The crate simulates a cell-free network of multi-antenna APs, extracts RSS
//! and beamspace (DFT) angular-power fingerprints from LS channel estimates,
//! and trains one actor-critic agent per AP in two stages: an RSS-driven
//! preliminary positioning stage and an AOA-driven angle correction stage.
//! A reference-grid fingerprint matcher serves as the conventional baseline.
//!
//! | module | role |
//! |---|---|
//! | [`sysmodel`] | layouts, multipath channels, pilots, LS estimation |
//! | [`fingerprint`] | RSS, angular power matrices, similarity coefficients |
//! | [`locate`] | RMSE, polar estimates, fusion, forward fingerprint model |
//! | [`approx`] | MLP actors/critics, reverse-mode gradients, Adam |
//! | [`marl`] | replay, centralized-critic training, evaluation |
//! | [`baseline`] | reference-grid fingerprint matching |
//! | [`harness`] | configuration, experiments, result files |
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod approx;
pub mod baseline;
pub mod error;
pub mod fingerprint;
pub mod harness;
pub mod locate;
pub mod marl;
pub mod sysmodel;

pub use error::{Error, Result};
pub use sysmodel::{Layout, Point, SystemConfig};

/// Deterministic generator used throughout the crate.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Builds the crate's generator from a seed.
pub fn seeded_rng(seed: u64) -> SimRng {
    use rand::SeedableRng;
    SimRng::seed_from_u64(seed)
}

/// Hex SHA-256 of a value's JSON encoding; stable across runs.
pub fn content_hash<T: serde::Serialize + ?Sized>(value: &T) -> String {
    use sha2::{Digest, Sha256};
    let json = serde_json::to_vec(value).expect("serializable");
    Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
}
