//! Counter-keyed random streams.
//!
//! Every stream is a ChaCha8 generator whose seed is a hash of the master
//! seed and a small key (user, slot, partition, ...). Work can be split
//! across any number of threads without changing what each stream draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a 64-bit key from `master` and an ordered list of counters.
pub fn derive_key(master: u64, counters: &[u64]) -> u64 {
    counters
        .iter()
        .fold(splitmix64(master), |acc, &c| splitmix64(acc ^ splitmix64(c.wrapping_add(0x632B_E59B_D9B4_E019))))
}

pub fn keyed_rng(master: u64, counters: &[u64]) -> ChaCha8Rng {
    let key = derive_key(master, counters);
    let mut seed = [0u8; 32];
    let mut z = key;
    for chunk in seed.chunks_mut(8) {
        z = splitmix64(z);
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// A family of independent streams under one key, indexed by a 64-bit counter
/// (the ChaCha nonce). Opening a stream costs a copy, not a key derivation.
#[derive(Debug, Clone)]
pub struct KeyedStreams {
    base: ChaCha8Rng,
}

impl KeyedStreams {
    pub fn new(master: u64, counters: &[u64]) -> Self {
        Self { base: keyed_rng(master, counters) }
    }

    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(index);
        rng
    }
}
