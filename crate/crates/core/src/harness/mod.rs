//! Seeded random instances, the law driver, and the JSON wire format.
//!
//! Randomness comes from ChaCha20 (`rand_chacha::ChaCha20Rng`). Trial `t` of
//! a run with seed `s` uses `ChaCha20Rng::seed_from_u64(s)` switched to
//! stream `t`, so trials are independent and a run gives the same report
//! whether trials execute in parallel or in sequence. Gaussian samples use
//! `rand_distr::StandardNormal`.

mod generate;
mod laws;
pub mod wire;

pub use generate::{
    gaussian_matrix, gen_composable_pair, gen_hom, gen_state, haar_unitary, random_alphas,
    random_distribution, random_extension, random_spec, ComposablePair,
};
pub use laws::{run_laws, run_laws_sequential, LawOutcome, LawReport, Tolerance, LAWS};

#[cfg(feature = "rayon")]
pub use laws::run_laws_parallel;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Tolerances;

/// Size and sampling controls for the generators and the law driver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub max_blocks: usize,
    pub max_block_dim: usize,
    pub faithful_only: bool,
    pub trials: usize,
    pub tolerances: Tolerances,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            max_blocks: 3,
            max_block_dim: 3,
            faithful_only: true,
            trials: 200,
            tolerances: Tolerances::default(),
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_blocks < 1 {
            return Err(Error::InvalidConfig("max_blocks must be at least 1".into()));
        }
        if self.max_block_dim < 1 {
            return Err(Error::InvalidConfig("max_block_dim must be at least 1".into()));
        }
        if self.trials < 1 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// The RNG of trial `stream` for a run seeded with `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
