//! Counter-keyed random streams: every (seed, indices...) tuple gets its own generator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A child seed for the tuple; `stream(derive(s, a), b)` differs from `stream(s, a ++ b)`.
pub fn derive(seed: u64, keys: &[u64]) -> u64 {
    let mut h = splitmix(seed);
    for &k in keys {
        h = splitmix(h ^ splitmix(k.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    h
}

pub fn stream(seed: u64, keys: &[u64]) -> ChaCha8Rng {
    let h = derive(seed, keys);
    let mut bytes = [0u8; 32];
    let mut s = h;
    for chunk in bytes.chunks_mut(8) {
        s = splitmix(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}
