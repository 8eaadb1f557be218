//! Keyed random streams.
//!
//! A stream is identified by a master seed plus a path of integers. The RNG
//! seed is a SHA-256 digest of both, so sub-streams never depend on the order
//! in which other streams were consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedStream {
    master_seed: u64,
    path: Vec<u64>,
}

impl SeedStream {
    pub fn new(master_seed: u64) -> Self {
        Self {
            master_seed,
            path: Vec::new(),
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// Sub-stream with `index` appended to the path.
    pub fn derive(&self, index: u64) -> Self {
        let mut path = self.path.clone();
        path.push(index);
        Self {
            master_seed: self.master_seed,
            path,
        }
    }

    pub fn derive_path(&self, indices: &[u64]) -> Self {
        let mut path = self.path.clone();
        path.extend_from_slice(indices);
        Self {
            master_seed: self.master_seed,
            path,
        }
    }

    pub fn rng(&self) -> StreamRng {
        let mut hasher = Sha256::new();
        hasher.update(b"strands-seed-stream");
        hasher.update(self.master_seed.to_le_bytes());
        hasher.update((self.path.len() as u64).to_le_bytes());
        for part in &self.path {
            hasher.update(part.to_le_bytes());
        }
        let digest = hasher.finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest);
        ChaCha8Rng::from_seed(seed)
    }
}

/// Stable identifiers for the top-level stages that draw randomness.
pub mod stage {
    pub const CV_FOLDS: u64 = 1;
    pub const STEP0: u64 = 10;
    pub const STEP1: u64 = 11;
    pub const STEP2: u64 = 12;
    pub const RANDOM_CLUSTER: u64 = 13;
    pub const RLASSO_STEP1: u64 = 20;
    pub const RLASSO_STEP2: u64 = 21;
    pub const RLASSO_QSEARCH: u64 = 22;
    pub const SIM_DATA: u64 = 30;
    pub const SIM_METHOD: u64 = 31;
    pub const SIM_BOOTSTRAP_SE: u64 = 32;
    pub const SPLIT_EVAL: u64 = 40;
}
