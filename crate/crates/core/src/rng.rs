//! Derivation of independent, reconstructible random streams.
//!
//! Every random decision in a run draws from a ChaCha8 stream whose key is the
//! SHA-256 of (run fingerprint, seed, component tag, step). Nothing reads OS
//! entropy or the clock, so any stream can be rebuilt after a restart.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Component tags used when deriving streams.
pub mod tag {
    pub const INITIAL: &str = "initial-selection";
    pub const TEACHER: &str = "teacher";
    pub const TEACHER_INIT: &str = "teacher-construction";
    pub const TRAINER: &str = "trainer";
}

pub fn derive_seed(fingerprint: &str, seed: u64, component: &str, step: u64) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(b"alsim-stream-v1\0");
    hasher.update((fingerprint.len() as u64).to_le_bytes());
    hasher.update(fingerprint.as_bytes());
    hasher.update(seed.to_le_bytes());
    hasher.update((component.len() as u64).to_le_bytes());
    hasher.update(component.as_bytes());
    hasher.update(step.to_le_bytes());
    hasher.finalize().into()
}

pub fn derive_rng(fingerprint: &str, seed: u64, component: &str, step: u64) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(derive_seed(fingerprint, seed, component, step))
}
