//! Counter-derived random streams.
//!
//! Every stochastic quantity draws from its own ChaCha8 stream, keyed by the
//! master seed and a `(study, n index, replication)` counter, so results do
//! not depend on the order in which replications are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Study tags used as the top byte of the stream id.
pub mod tag {
    pub const THM1_I: u8 = 1;
    pub const THM1_II: u8 = 2;
    pub const COR11: u8 = 3;
    pub const CONCENTRATION: u8 = 4;
    pub const COVERING: u8 = 5;
    pub const POISSONIZE_G: u8 = 6;
    pub const POISSONIZE_P: u8 = 7;
    pub const POISSONIZED_GN: u8 = 8;
    pub const FREE: u8 = 9;
}

/// The stream for replication `rep` at the `n_idx`-th sample size of study `study`.
pub fn stream(master: u64, study: u8, n_idx: u32, rep: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((study as u64) << 56) | (((n_idx as u64) & 0x00ff_ffff) << 32) | rep as u64);
    rng
}
