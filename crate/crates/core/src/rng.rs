//! Deterministic RNG streams.
//!
//! Every stochastic component draws from a ChaCha8 stream whose 64-bit seed
//! is derived from a master seed, a domain tag and an index. ChaCha8 is
//! counter-based and platform-independent, and the derivation below is a
//! fixed SplitMix64 mix, so a run is reproducible from its master seed alone
//! and sub-solves (tiles, restarts, replicas) get independent streams that do
//! not depend on scheduling order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Domain tags keep unrelated streams apart even for equal indices.
pub mod domain {
    pub const TILE: u64 = 0x7469_6c65; // "tile"
    pub const SUPERPIXEL: u64 = 0x7370_7820; // "spx "
    pub const RESTART: u64 = 0x7273_7472; // "rstr"
    pub const REPLICA: u64 = 0x7265_706c; // "repl"
    pub const SWAP: u64 = 0x7377_6170; // "swap"
    pub const SYNTH: u64 = 0x7379_6e74; // "synt"
    pub const NOISE: u64 = 0x6e6f_6973; // "nois"
    pub const IMAGE: u64 = 0x696d_6167; // "imag"
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive an independent 64-bit seed from `(master, domain, index)`.
pub fn derive_seed(master: u64, domain: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(domain)) ^ index)
}

/// The crate-wide generator, seeded from a derived 64-bit seed.
pub fn stream(master: u64, domain: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, domain, index))
}
