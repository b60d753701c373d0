//! Deterministic random streams.
//!
//! Every random draw comes from a ChaCha8 stream selected by
//! `(seed, domain, group, index)`, so work can be split across threads in
//! any way without changing the samples.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent uses of one seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    /// Monte Carlo BER frames; group = SNR point, index = frame.
    Ber = 1,
    /// Training batches; index = epoch.
    TrainBatch = 2,
    /// Weight initialisation.
    TrainInit = 3,
    /// Held-out evaluation batches.
    Holdout = 4,
    /// Randomised pruning order.
    Prune = 5,
}

/// Generator for one `(domain, group, index)` substream of `seed`.
///
/// # Panics
/// If `group ≥ 2^24` or `index ≥ 2^32`.
pub fn stream(seed: u64, domain: Domain, group: u64, index: u64) -> ChaCha8Rng {
    assert!(group < 1 << 24, "stream group {group} out of range");
    assert!(index < 1 << 32, "stream index {index} out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << 56) | (group << 32) | index);
    rng
}
