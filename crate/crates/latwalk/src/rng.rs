//! Counter-derived random substreams. Emission `k` of a run with master seed
//! `s` always sees the same stream, whatever the execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream families, so that different consumers of one emission index never
/// share a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Emission = 0,
    BranchOne = 1,
    BranchTwo = 2,
    Replica = 3,
    Auxiliary = 4,
}

/// Generator for `(family, index)` under `seed`.
pub fn substream(seed: u64, family: Stream, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((family as u64) << 56) ^ index);
    rng
}
