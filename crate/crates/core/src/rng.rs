//! Deterministic RNG substreams.
//!
//! Every stochastic stage derives its generator from the experiment's
//! top-level seed plus a purpose tag and an item index. Distinct
//! (tag, index) pairs map to distinct ChaCha streams of the same key, so
//! parallel work items are reproducible regardless of scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// 64-bit FNV-1a over the tag bytes and the index.
fn stream_id(tag: &str, index: u64) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for b in tag.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(PRIME);
    }
    for b in index.to_le_bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(PRIME);
    }
    h
}

/// A generator for work item `index` of the stage named `tag`, derived from
/// the top-level `seed`.
pub fn substream(seed: u64, tag: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(tag, index));
    rng
}
