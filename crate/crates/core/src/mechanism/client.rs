use rand::Rng;

use crate::budget::NoiseMode;
use crate::error::{Error, Result};
use crate::hashing::{BinHash, SignHash};
use crate::laplace::laplace_sample;
use crate::mechanism::params::MechanismParams;
use crate::seed::{derive_client_seed, SeedPurpose, WireSeed};
use crate::vector::SparseVector;

/// The two hash seeds a client picks and transmits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HashSeeds {
    pub bin: WireSeed,
    pub sign: WireSeed,
}

impl HashSeeds {
    pub fn derive(master_seed: u64, client_index: u64) -> Self {
        HashSeeds {
            bin: WireSeed::new(derive_client_seed(master_seed, client_index, SeedPurpose::BinHash)),
            sign: WireSeed::new(derive_client_seed(master_seed, client_index, SeedPurpose::SignHash)),
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        HashSeeds {
            bin: WireSeed::random(rng),
            sign: WireSeed::random(rng),
        }
    }

    pub fn hashes(&self, d: usize, b: usize) -> Result<(BinHash, SignHash)> {
        Ok((BinHash::new(self.bin, d, b)?, SignHash::new(self.sign, d)?))
    }
}

/// What the server receives from one client: both hash seeds and the `b`
/// noisy bin values.
#[derive(Clone, Debug, PartialEq)]
pub struct ClientReport {
    pub seed_h: WireSeed,
    pub seed_s: WireSeed,
    /// Integral when `discretized` is set.
    pub bin_values: Vec<f64>,
    pub discretized: bool,
}

impl ClientReport {
    pub fn bins(&self) -> usize {
        self.bin_values.len()
    }

    pub fn seeds(&self) -> HashSeeds {
        HashSeeds {
            bin: self.seed_h,
            sign: self.seed_s,
        }
    }
}

/// Signed bin sums `B_j = sum_{l : h(l) = j} s(l) v_l`, before clipping.
pub fn raw_bins(v: &SparseVector, params: &MechanismParams, seeds: HashSeeds) -> Result<Vec<f64>> {
    if v.dim() != params.d() {
        return Err(Error::param(format!(
            "vector dimension {} does not match d = {}",
            v.dim(),
            params.d()
        )));
    }
    if v.nnz() > params.k() {
        return Err(Error::param(format!(
            "vector has {} non-zeros, more than k = {}",
            v.nnz(),
            params.k()
        )));
    }
    let (h, s) = seeds.hashes(params.d(), params.bins())?;
    let mut bins = vec![0.0; params.bins()];
    for &(l, value) in v.entries() {
        bins[h.bin_unchecked(l)] += s.sign_unchecked(l) as f64 * value;
    }
    Ok(bins)
}

/// Raw bins clipped to `[-η, η]` when the parameters carry a clip range.
pub fn clipped_bins(v: &SparseVector, params: &MechanismParams, seeds: HashSeeds) -> Result<Vec<f64>> {
    let mut bins = raw_bins(v, params, seeds)?;
    if let Some(eta) = params.clip_range() {
        for b in &mut bins {
            *b = b.clamp(-eta, eta);
        }
    }
    Ok(bins)
}

/// Client side: fold, clip, then add Laplace(Δ/ε) to every bin.
pub fn client_encode<R: Rng + ?Sized>(
    v: &SparseVector,
    params: &MechanismParams,
    seeds: HashSeeds,
    rng: &mut R,
) -> Result<ClientReport> {
    let mut bins = clipped_bins(v, params, seeds)?;
    if params.noise() == NoiseMode::Enabled {
        let scale = params.laplace_scale();
        for b in &mut bins {
            *b += laplace_sample(scale, rng)?;
        }
    }
    Ok(ClientReport {
        seed_h: seeds.bin,
        seed_s: seeds.sign,
        bin_values: bins,
        discretized: false,
    })
}
