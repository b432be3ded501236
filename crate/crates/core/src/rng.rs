//! Named random sub-streams derived from one master seed.
//!
//! Each stream is a ChaCha8 generator keyed by `(master_seed, domain, a, b)`,
//! so e.g. the RNG of individual `slot` in generation `gen` never depends on
//! how many other individuals were drawn before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Init = 1,
    Breed = 2,
    Voronoi = 10,
    Walk = 11,
    Decorate = 12,
    Dog = 13,
    Scenario = 20,
}

pub fn stream(master_seed: u64, domain: Domain, a: u64, b: u64) -> StreamRng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    key[16..24].copy_from_slice(&a.to_le_bytes());
    key[24..32].copy_from_slice(&b.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}
