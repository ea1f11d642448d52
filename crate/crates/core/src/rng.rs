//! Seed streams. A master seed plus a block index gives an independent
//! ChaCha stream, so results never depend on how blocks are spread over
//! workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Split `total` items into blocks of at most `block` items; returns (start, len).
pub fn blocks(total: usize, block: usize) -> Vec<(usize, usize)> {
    let block = block.max(1);
    (0..total.div_ceil(block))
        .map(|b| {
            let start = b * block;
            (start, block.min(total - start))
        })
        .collect()
}
