//! Binary-vector warmup: a one-item frequency oracle (binary local hashing)
//! and the bucket-splitting multi-item randomizer built on top of it.

use rand::Rng;
use rayon::prelude::*;

use crate::budget::NoiseMode;
use crate::error::{Error, Result};
use crate::hashing::{BinHash, BitHash};
use crate::seed::WireSeed;
use crate::vector::SparseVector;

/// One-item report: the seed of the client's binary hash and one
/// randomized bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlhReport {
    pub seed: WireSeed,
    pub bit: u8,
}

impl BlhReport {
    /// Seed plus one byte for the bit.
    pub const WIRE_BYTES: usize = WireSeed::BYTES + 1;
}

/// Binary local hashing with randomized response at budget ε.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Blh {
    epsilon: f64,
    noise: NoiseMode,
}

impl Blh {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::param(format!("epsilon must be finite and >= 0, got {epsilon}")));
        }
        Ok(Blh {
            epsilon,
            noise: NoiseMode::Enabled,
        })
    }

    pub fn without_noise(self) -> Self {
        Blh {
            noise: NoiseMode::Disabled,
            ..self
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `1 / (1 + e^ε)`, or 0 with noise disabled.
    pub fn flip_probability(&self) -> f64 {
        match self.noise {
            NoiseMode::Enabled => 1.0 / (1.0 + self.epsilon.exp()),
            NoiseMode::Disabled => 0.0,
        }
    }

    /// `(e^ε + 1) / (e^ε - 1)`, or 1 with noise disabled.
    pub fn debias_factor(&self) -> Result<f64> {
        match self.noise {
            NoiseMode::Disabled => Ok(1.0),
            NoiseMode::Enabled if self.epsilon > 0.0 => {
                let e = self.epsilon.exp();
                Ok((e + 1.0) / (e - 1.0))
            }
            NoiseMode::Enabled => Err(Error::param("cannot debias reports made at epsilon = 0")),
        }
    }

    fn flip<R: Rng + ?Sized>(&self, bit: u8, rng: &mut R) -> u8 {
        if self.noise == NoiseMode::Enabled && rng.random_bool(self.flip_probability()) {
            bit ^ 1
        } else {
            bit
        }
    }

    /// Reports the hash bit of `item`, flipped with probability `1/(1+e^ε)`.
    pub fn encode<R: Rng + ?Sized>(&self, item: usize, seed: WireSeed, rng: &mut R) -> BlhReport {
        let bit = BitHash::new(seed).bit_of(item);
        BlhReport {
            seed,
            bit: self.flip(bit, rng),
        }
    }

    /// Value-carrying variant for `value` in `[-1, 1]`: the hash bit is read
    /// as a sign `σ`, `σ·value` is rounded to ±1 without bias, and the result
    /// goes through the same randomized response. For `value = 1` this is
    /// exactly [`Blh::encode`], and the usual aggregate then estimates the
    /// mean value instead of the frequency.
    pub fn encode_value<R: Rng + ?Sized>(
        &self,
        item: usize,
        value: f64,
        seed: WireSeed,
        rng: &mut R,
    ) -> Result<BlhReport> {
        if !(-1.0..=1.0).contains(&value) {
            return Err(Error::param(format!("value {value} outside [-1, 1]")));
        }
        let bit = BitHash::new(seed).bit_of(item);
        let signed = if bit == 1 { value } else { -value };
        let rounded = if signed == 1.0 {
            1
        } else if signed == -1.0 {
            0
        } else {
            rng.random_bool((1.0 + signed) / 2.0) as u8
        };
        Ok(BlhReport {
            seed,
            bit: self.flip(rounded, rng),
        })
    }

    /// `(2t/n - 1)(e^ε + 1)/(e^ε - 1)`, `t` counting reports whose bit equals
    /// the reporter's hash bit of `item`.
    pub fn aggregate(&self, reports: &[BlhReport], item: usize) -> Result<f64> {
        self.aggregate_iter(reports.iter(), item)
    }

    pub fn aggregate_iter<'a>(&self, reports: impl Iterator<Item = &'a BlhReport>, item: usize) -> Result<f64> {
        let factor = self.debias_factor()?;
        let (mut n, mut t) = (0u64, 0u64);
        for r in reports {
            n += 1;
            t += (BitHash::new(r.seed).bit_of(item) == r.bit) as u64;
        }
        if n == 0 {
            return Err(Error::param("no reports to aggregate"));
        }
        Ok((2.0 * t as f64 / n as f64 - 1.0) * factor)
    }
}

/// The multi-item report: the bucket hash seed and one one-item report per
/// bucket.
#[derive(Clone, Debug, PartialEq)]
pub struct BucketedReport {
    pub bucket_seed: WireSeed,
    pub buckets: Vec<BlhReport>,
}

impl BucketedReport {
    pub fn wire_bytes(&self) -> usize {
        WireSeed::BYTES + self.buckets.len() * BlhReport::WIRE_BYTES
    }
}

/// Hash-and-split frequency estimation over `[d]` with `k` buckets. Item `d`
/// is the dummy that zeroed-out buckets report.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bucketed {
    d: usize,
    k: usize,
    oracle: Blh,
}

impl Bucketed {
    pub fn new(d: usize, k: usize, epsilon: f64) -> Result<Self> {
        if d == 0 || k == 0 || k > d {
            return Err(Error::param(format!("need 1 <= k <= d, got k={k}, d={d}")));
        }
        Ok(Bucketed {
            d,
            k,
            oracle: Blh::new(epsilon)?,
        })
    }

    pub fn without_noise(self) -> Self {
        Bucketed {
            oracle: self.oracle.without_noise(),
            ..self
        }
    }

    pub fn dummy_item(&self) -> usize {
        self.d
    }

    pub fn oracle(&self) -> Blh {
        self.oracle
    }

    /// `(1 - 1/k)^(k-1)`: chance that an item of a client holding exactly `k`
    /// items is alone in its bucket.
    pub fn survival_probability(&self) -> f64 {
        (1.0 - 1.0 / self.k as f64).powi(self.k as i32 - 1)
    }

    pub fn bucket_hash(&self, seed: WireSeed) -> BinHash {
        BinHash::new(seed, self.d, self.k).expect("d and k validated at construction")
    }

    /// What each bucket encodes: its item if exactly one item hashed there,
    /// otherwise the dummy.
    pub fn bucket_contents(&self, v: &SparseVector, bucket_seed: WireSeed) -> Result<Vec<(usize, f64)>> {
        if v.dim() != self.d || v.nnz() > self.k {
            return Err(Error::param("input does not fit the bucketed domain"));
        }
        let h = self.bucket_hash(bucket_seed);
        let mut counts = vec![0usize; self.k];
        let mut holder = vec![(self.d, 1.0); self.k];
        for &(item, value) in v.entries() {
            let j = h.bin_unchecked(item);
            counts[j] += 1;
            holder[j] = (item, value);
        }
        Ok(counts
            .iter()
            .zip(holder)
            .map(|(&c, h)| if c == 1 { h } else { (self.d, 1.0) })
            .collect())
    }

    /// Client side. Bucket BLH seeds and flips come from `rng`; binary inputs
    /// reproduce the plain one-item oracle, other values ride along through
    /// [`Blh::encode_value`].
    pub fn encode<R: Rng + ?Sized>(
        &self,
        v: &SparseVector,
        bucket_seed: WireSeed,
        rng: &mut R,
    ) -> Result<BucketedReport> {
        let contents = self.bucket_contents(v, bucket_seed)?;
        let buckets = contents
            .into_iter()
            .map(|(item, value)| {
                let seed = WireSeed::random(rng);
                self.oracle.encode_value(item, value, seed, rng)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BucketedReport { bucket_seed, buckets })
    }

    pub fn encode_items<R: Rng + ?Sized>(
        &self,
        items: &[usize],
        bucket_seed: WireSeed,
        rng: &mut R,
    ) -> Result<BucketedReport> {
        self.encode(&SparseVector::from_items(self.d, self.k, items)?, bucket_seed, rng)
    }

    /// Runs the one-item aggregate over each client's bucket for `x`, then
    /// divides by the survival probability.
    pub fn aggregate(&self, reports: &[BucketedReport], x: usize) -> Result<f64> {
        if x >= self.d {
            return Err(Error::param(format!("item {x} outside [0, {})", self.d)));
        }
        if reports.iter().any(|r| r.buckets.len() != self.k) {
            return Err(Error::param("report bucket count differs from k"));
        }
        let picked = reports.iter().map(|r| &r.buckets[self.bucket_hash(r.bucket_seed).bin_unchecked(x)]);
        Ok(self.oracle.aggregate_iter(picked, x)? / self.survival_probability())
    }

    pub fn aggregate_many(&self, reports: &[BucketedReport], probes: &[usize]) -> Result<Vec<f64>> {
        probes.par_iter().map(|&x| self.aggregate(reports, x)).collect()
    }
}
