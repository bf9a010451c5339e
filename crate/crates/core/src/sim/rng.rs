use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Bits of the ChaCha stream id reserved for the walker index.
const WALKER_BITS: u32 = 20;
pub const MAX_WALKERS: usize = 1 << WALKER_BITS;

/// Independent, reproducible stream for walker `walker` in trial `trial`.
///
/// The key comes from the master seed and the 64-bit stream id from
/// `(trial, walker)`, so draws do not depend on scheduling order.
pub fn stream(master_seed: u64, trial: u64, walker: usize) -> Result<ChaCha8Rng> {
    if walker >= MAX_WALKERS {
        return Err(Error::param(format!("at most {MAX_WALKERS} walkers per trial")));
    }
    if trial >= 1 << (64 - WALKER_BITS) {
        return Err(Error::param("trial index too large"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((trial << WALKER_BITS) | walker as u64);
    Ok(rng)
}

/// One stream per walker.
pub fn streams(master_seed: u64, trial: u64, walkers: usize) -> Result<Vec<ChaCha8Rng>> {
    (0..walkers).map(|w| stream(master_seed, trial, w)).collect()
}
