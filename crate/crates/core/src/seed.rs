//! Counter-based seed derivation.
//!
//! Every random stream is keyed by `(master seed, stream tag, index)` so a
//! trial's draws do not depend on which worker ran it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a master seed with a stream tag and a counter.
pub fn derive(master: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(stream)) ^ index)
}

pub fn rng(master: u64, stream: u64, index: u64) -> Rng {
    Rng::seed_from_u64(derive(master, stream, index))
}

/// FNV-1a, used to key streams by sample id.
pub fn hash_str(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub(crate) mod streams {
    pub const KMEANS: u64 = 1;
    pub const NOISE: u64 = 2;
    pub const GRID: u64 = 3;
    pub const TAIL: u64 = 4;
    pub const MGF: u64 = 5;
    pub const MULTINOMIAL: u64 = 6;
    pub const LEMMA: u64 = 7;
    pub const EXP_MIX: u64 = 8;
    pub const COVERAGE: u64 = 9;
    pub const ORACLE: u64 = 10;
    pub const SUBSAMPLE: u64 = 11;
}
