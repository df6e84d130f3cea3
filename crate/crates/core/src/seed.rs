//! Deterministic seed derivation and the 40-bit wire seed.
//!
//! Every random decision in an experiment is keyed by
//! `(master seed, client index, purpose)`, so a run is reproducible no matter
//! how clients are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// The splitmix64 finalizer. A bijection on `u64` with full avalanche.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SeedPurpose {
    BinHash,
    SignHash,
    Noise,
    /// Dataset synthesis and sampling; disjoint from all mechanism purposes.
    Dataset,
}

impl SeedPurpose {
    fn tag(self) -> u64 {
        match self {
            SeedPurpose::BinHash => 0x6269_6e5f_6861_7368,
            SeedPurpose::SignHash => 0x7369_676e_5f68_7368,
            SeedPurpose::Noise => 0x6e6f_6973_655f_5f5f,
            SeedPurpose::Dataset => 0x6461_7461_7365_7421,
        }
    }
}

/// Derives the seed used by `client_index` for `purpose`.
///
/// For a fixed master seed and purpose the map from client index to seed is a
/// bijection, so two clients never share a seed.
pub fn derive_client_seed(master_seed: u64, client_index: u64, purpose: SeedPurpose) -> u64 {
    let stream = mix64(mix64(master_seed ^ purpose.tag()).wrapping_add(GOLDEN));
    mix64(stream ^ client_index)
}

/// Derives a sub-seed from a parent seed and a label; used to split one seed
/// into independent streams (per run, per cell, per bucket).
pub fn derive_subseed(parent: u64, label: u64) -> u64 {
    mix64(mix64(parent).wrapping_add(label.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Random stream for one call site.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A hash-function seed as carried on the wire: 40 bits, 5 bytes little-endian.
///
/// Wider seeds are truncated to their low 40 bits; the truncated value is then
/// expanded to 64-bit generator state, so the wire seed alone determines the
/// hash function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct WireSeed(u64);

impl WireSeed {
    pub const BITS: u32 = 40;
    pub const BYTES: usize = 5;
    const MASK: u64 = (1 << Self::BITS) - 1;

    pub fn new(seed: u64) -> Self {
        WireSeed(seed & Self::MASK)
    }

    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R) -> Self {
        Self::new(rng.next_u64())
    }

    pub fn value(self) -> u64 {
        self.0
    }

    /// 64-bit generator state for a hash family identified by `domain`.
    pub fn expand(self, domain: u64) -> u64 {
        mix64(mix64(self.0 ^ domain).wrapping_add(GOLDEN))
    }

    pub fn to_le_bytes(self) -> [u8; 5] {
        let b = self.0.to_le_bytes();
        [b[0], b[1], b[2], b[3], b[4]]
    }

    pub fn from_le_bytes(bytes: [u8; 5]) -> Self {
        let mut b = [0u8; 8];
        b[..5].copy_from_slice(&bytes);
        WireSeed(u64::from_le_bytes(b))
    }
}
