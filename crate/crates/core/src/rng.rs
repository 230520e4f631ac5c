//! Deterministic random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha stream keyed by
//! the run seed plus a path of identifiers, so results never depend on how
//! work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream namespaces.
pub mod tag {
    pub const PLACEMENT: u64 = 1;
    pub const FADING: u64 = 2;
    pub const INTERFERER_GAIN: u64 = 3;
    pub const ARRIVALS: u64 = 4;
    pub const SERVICES: u64 = 5;
    pub const BLOCK_ARRIVALS: u64 = 6;
    pub const BLOCK_SERVICES: u64 = 7;
    pub const RELAY_LINK: u64 = 8;
    pub const REPLICATION: u64 = 9;
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Returns the generator for `seed` and the stream path `ids`.
pub fn stream(seed: u64, ids: &[u64]) -> ChaCha8Rng {
    let mut key = 0x5851_f42d_4c95_7f2d_u64;
    for &id in ids {
        key = splitmix(key ^ id);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(key);
    rng
}

/// A child seed for the stream path `ids`.
pub fn derive_seed(seed: u64, ids: &[u64]) -> u64 {
    use rand::RngCore;
    stream(seed, ids).next_u64()
}

/// Uniform draw on (0, 1].
pub fn open_unit<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}
