//! Counter-style random streams: every (seed, experiment, trial, stage) tuple owns an
//! independent ChaCha8 stream, so results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Emission,
    Channel,
    Conversion,
    Interference,
    Detection,
    /// Whole-trial stream used by the post-selected engine.
    Trial,
}

impl Stage {
    fn tag(self) -> u64 {
        match self {
            Stage::Emission => 1,
            Stage::Channel => 2,
            Stage::Conversion => 3,
            Stage::Interference => 4,
            Stage::Detection => 5,
            Stage::Trial => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStreamSpec {
    pub master_seed: u64,
    pub experiment: u64,
    pub trial: u64,
    pub stage: Stage,
}

impl RngStreamSpec {
    pub fn new(master_seed: u64, experiment: u64, trial: u64, stage: Stage) -> Self {
        Self {
            master_seed,
            experiment,
            trial,
            stage,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        for (chunk, word) in key.chunks_exact_mut(8).zip([
            self.master_seed,
            self.experiment,
            self.trial,
            self.stage.tag(),
        ]) {
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}

/// Stable 64-bit identifier for a named experiment.
pub fn experiment_id(name: &str) -> u64 {
    let digest = Sha256::digest(name.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}
