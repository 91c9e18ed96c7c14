//! Per-trial random streams.
//!
//! Every trial owns a ChaCha8 stream keyed by `(master seed, point)` with the
//! trial index as stream number, so results never depend on which worker
//! thread ran the trial.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Generator for trial `trial` of experiment point `point`.
pub fn trial_rng(master: u64, point: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(master ^ splitmix64(point)));
    rng.set_stream(trial);
    rng
}
