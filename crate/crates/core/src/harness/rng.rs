//! Counter-based RNG streams: every (master seed, stream, counter) triple
//! deterministically keys an independent ChaCha stream, so parallel trials
//! cannot reorder randomness.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mix(mut x: u64) -> u64 {
    // splitmix64 finalizer
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Independent stream keyed by (master, stream id, counter).
pub fn stream_rng(master: u64, stream: u64, counter: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    let words = [
        mix(master),
        mix(master ^ mix(stream)),
        mix(stream ^ mix(counter)),
        mix(counter ^ mix(master).rotate_left(17)),
    ];
    for (i, w) in words.iter().enumerate() {
        seed[i * 8..(i + 1) * 8].copy_from_slice(&w.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
