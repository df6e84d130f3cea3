//! Strawman mechanisms: k-fold repetition of the one-item oracle, sampling
//! one of k slots, and naive per-coordinate Laplace perturbation.

use rand::Rng;
use rayon::prelude::*;

use crate::budget::{NoiseMode, PrivacyBudget};
use crate::error::{Error, Result};
use crate::laplace::laplace_sample;
use crate::numeric::pairwise_sum_by;
use crate::seed::WireSeed;
use crate::vector::SparseVector;
use crate::warmup::{Blh, BlhReport};

fn check_fit(v: &SparseVector, d: usize, k: usize) -> Result<()> {
    if v.dim() != d || v.nnz() > k {
        return Err(Error::param(format!(
            "input (dim {}, nnz {}) does not fit d = {d}, k = {k}",
            v.dim(),
            v.nnz()
        )));
    }
    Ok(())
}

/// Every client acts as `k` virtual clients, one per item (padding with the
/// dummy item `d`), each reporting at the full budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KFold {
    d: usize,
    k: usize,
    oracle: Blh,
}

impl KFold {
    pub fn new(d: usize, k: usize, epsilon: f64) -> Result<Self> {
        if k == 0 || d == 0 {
            return Err(Error::param("k and d must be positive"));
        }
        Ok(KFold {
            d,
            k,
            oracle: Blh::new(epsilon)?,
        })
    }

    pub fn without_noise(self) -> Self {
        KFold {
            oracle: self.oracle.without_noise(),
            ..self
        }
    }

    pub fn oracle(&self) -> Blh {
        self.oracle
    }

    /// `k` reports per client. Non-binary values ride along through
    /// [`Blh::encode_value`].
    pub fn encode<R: Rng + ?Sized>(&self, v: &SparseVector, rng: &mut R) -> Result<Vec<BlhReport>> {
        check_fit(v, self.d, self.k)?;
        let mut out = Vec::with_capacity(self.k);
        for &(item, value) in v.entries() {
            let seed = WireSeed::random(rng);
            out.push(self.oracle.encode_value(item, value, seed, rng)?);
        }
        while out.len() < self.k {
            let seed = WireSeed::random(rng);
            out.push(self.oracle.encode(self.d, seed, rng));
        }
        Ok(out)
    }

    /// One-item aggregate over all `k·n` reports, times `k`.
    pub fn aggregate(&self, reports: &[Vec<BlhReport>], x: usize) -> Result<f64> {
        if x >= self.d {
            return Err(Error::param(format!("item {x} outside [0, {})", self.d)));
        }
        Ok(self.k as f64 * self.oracle.aggregate_iter(reports.iter().flatten(), x)?)
    }

    pub fn aggregate_many(&self, reports: &[Vec<BlhReport>], probes: &[usize]) -> Result<Vec<f64>> {
        probes.par_iter().map(|&x| self.aggregate(reports, x)).collect()
    }

    pub fn wire_bytes(&self) -> usize {
        self.k * BlhReport::WIRE_BYTES
    }
}

/// How the sampling baseline carries a real value alongside the item.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SamplingValue {
    /// `value_share·ε` randomizes the value to `±c`, the rest reports the
    /// item.
    Split { value_share: f64 },
    /// The whole budget goes through the value-carrying one-item oracle.
    Joint,
}

impl Default for SamplingValue {
    fn default() -> Self {
        SamplingValue::Split { value_share: 0.5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplingReport {
    pub item: BlhReport,
    /// `±c` under [`SamplingValue::Split`], 1 under [`SamplingValue::Joint`].
    pub value: f64,
}

/// Pads to `k` slots, samples one uniformly, reports only that slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sampling {
    d: usize,
    k: usize,
    item_oracle: Blh,
    value_epsilon: Option<f64>,
    noise: NoiseMode,
}

impl Sampling {
    pub fn new(d: usize, k: usize, epsilon: f64, value: SamplingValue) -> Result<Self> {
        if k == 0 || d == 0 {
            return Err(Error::param("k and d must be positive"));
        }
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::param(format!("epsilon must be finite and positive, got {epsilon}")));
        }
        let (item_eps, value_epsilon) = match value {
            SamplingValue::Joint => (epsilon, None),
            SamplingValue::Split { value_share } => {
                if !(value_share > 0.0 && value_share < 1.0) {
                    return Err(Error::param(format!("value share must lie in (0, 1), got {value_share}")));
                }
                (epsilon * (1.0 - value_share), Some(epsilon * value_share))
            }
        };
        Ok(Sampling {
            d,
            k,
            item_oracle: Blh::new(item_eps)?,
            value_epsilon,
            noise: NoiseMode::Enabled,
        })
    }

    pub fn without_noise(self) -> Self {
        Sampling {
            item_oracle: self.item_oracle.without_noise(),
            noise: NoiseMode::Disabled,
            ..self
        }
    }

    /// The sampled `(item, value)`, or `None` for a filler slot.
    pub fn sample_slot<R: Rng + ?Sized>(&self, v: &SparseVector, rng: &mut R) -> Result<Option<(usize, f64)>> {
        check_fit(v, self.d, self.k)?;
        let slot = rng.random_range(0..self.k);
        Ok(v.entries().get(slot).copied())
    }

    pub fn encode<R: Rng + ?Sized>(&self, v: &SparseVector, rng: &mut R) -> Result<SamplingReport> {
        let (item, value) = self.sample_slot(v, rng)?.unwrap_or((self.d, 0.0));
        let seed = WireSeed::random(rng);
        match self.value_epsilon {
            None => Ok(SamplingReport {
                item: self.item_oracle.encode_value(item, value, seed, rng)?,
                value: 1.0,
            }),
            Some(eps) => {
                let item = self.item_oracle.encode(item, seed, rng);
                let value = match self.noise {
                    NoiseMode::Enabled => sign_randomize(value, eps, rng)?,
                    NoiseMode::Disabled => value,
                };
                Ok(SamplingReport { item, value })
            }
        }
    }

    /// `(k/n) sum_i (2·[bit matches] - 1)·c·value_i`.
    pub fn aggregate(&self, reports: &[SamplingReport], x: usize) -> Result<f64> {
        if x >= self.d {
            return Err(Error::param(format!("item {x} outside [0, {})", self.d)));
        }
        if reports.is_empty() {
            return Err(Error::param("no reports to aggregate"));
        }
        let c = self.item_oracle.debias_factor()?;
        let sum = pairwise_sum_by(reports.len(), &|i| {
            let r = &reports[i];
            let hit = crate::hashing::BitHash::new(r.item.seed).bit_of(x) == r.item.bit;
            if hit {
                r.value
            } else {
                -r.value
            }
        });
        Ok(self.k as f64 * c * sum / reports.len() as f64)
    }

    pub fn aggregate_many(&self, reports: &[SamplingReport], probes: &[usize]) -> Result<Vec<f64>> {
        probes.par_iter().map(|&x| self.aggregate(reports, x)).collect()
    }

    /// One report plus, under a split budget, one byte for the value sign.
    pub fn wire_bytes(&self) -> usize {
        BlhReport::WIRE_BYTES + self.value_epsilon.map_or(0, |_| 1)
    }
}

/// Unbiased `±c` randomizer for `x` in `[-1, 1]` at budget `epsilon`, with
/// `c = (e^ε + 1)/(e^ε - 1)`.
pub fn sign_randomize<R: Rng + ?Sized>(x: f64, epsilon: f64, rng: &mut R) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::param(format!("value {x} outside [-1, 1]")));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::param(format!("epsilon must be finite and positive, got {epsilon}")));
    }
    let e = epsilon.exp();
    let c = (e + 1.0) / (e - 1.0);
    let p_plus = (x * (e - 1.0) + e + 1.0) / (2.0 * (e + 1.0));
    Ok(if rng.random_bool(p_plus) { c } else { -c })
}

/// Laplace noise of scale `L/ε` on all `d` coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Naive {
    d: usize,
    scale: f64,
    noise: NoiseMode,
}

impl Naive {
    pub fn new(d: usize, budget: PrivacyBudget) -> Result<Self> {
        if d == 0 {
            return Err(Error::param("d must be positive"));
        }
        Ok(Naive {
            d,
            scale: budget.neighbor_distance() / budget.epsilon(),
            noise: NoiseMode::Enabled,
        })
    }

    pub fn without_noise(self) -> Self {
        Naive {
            noise: NoiseMode::Disabled,
            ..self
        }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn encode<R: Rng + ?Sized>(&self, v: &SparseVector, rng: &mut R) -> Result<Vec<f64>> {
        if v.dim() != self.d {
            return Err(Error::param(format!("vector dimension {} does not match d = {}", v.dim(), self.d)));
        }
        let mut out = v.to_dense();
        self.add_noise(&mut out, rng)?;
        Ok(out)
    }

    /// The noisy report restricted to `coords`. Each coordinate's noise is
    /// independent, so this has the same distribution as the matching
    /// entries of [`Naive::encode`].
    pub fn encode_coords<R: Rng + ?Sized>(&self, v: &SparseVector, coords: &[usize], rng: &mut R) -> Result<Vec<f64>> {
        if v.dim() != self.d {
            return Err(Error::param(format!("vector dimension {} does not match d = {}", v.dim(), self.d)));
        }
        if let Some(&x) = coords.iter().find(|&&x| x >= self.d) {
            return Err(Error::param(format!("coordinate {x} outside [0, {})", self.d)));
        }
        let mut out: Vec<f64> = coords.iter().map(|&x| v.get(x)).collect();
        self.add_noise(&mut out, rng)?;
        Ok(out)
    }

    fn add_noise<R: Rng + ?Sized>(&self, out: &mut [f64], rng: &mut R) -> Result<()> {
        if self.noise == NoiseMode::Enabled {
            for x in out.iter_mut() {
                *x += laplace_sample(self.scale, rng)?;
            }
        }
        Ok(())
    }

    /// Coordinate-wise mean.
    pub fn aggregate(&self, reports: &[Vec<f64>]) -> Result<Vec<f64>> {
        if reports.is_empty() {
            return Err(Error::param("no reports to aggregate"));
        }
        if reports.iter().any(|r| r.len() != self.d) {
            return Err(Error::param("report length differs from d"));
        }
        let n = reports.len() as f64;
        Ok((0..self.d)
            .into_par_iter()
            .map(|j| pairwise_sum_by(reports.len(), &|i| reports[i][j]) / n)
            .collect())
    }

    pub fn wire_bytes(&self) -> usize {
        4 * self.d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashing::BitHash;
    use crate::seed::rng_from_seed;

    #[test]
    fn kfold_single_slot_matches_blh() {
        let kf = KFold::new(10, 1, 1.0).unwrap();
        let v = SparseVector::from_items(10, 1, &[4]).unwrap();
        let (mut a, mut b) = (rng_from_seed(5), rng_from_seed(5));
        let reports = kf.encode(&v, &mut a).unwrap();
        let seed = WireSeed::random(&mut b);
        assert_eq!(reports, vec![kf.oracle().encode(4, seed, &mut b)]);
    }

    #[test]
    fn kfold_pads_with_dummies() {
        let kf = KFold::new(10, 3, 1.0).unwrap().without_noise();
        let mut rng = rng_from_seed(1);
        let reports = kf.encode(&SparseVector::empty(10, 3).unwrap(), &mut rng).unwrap();
        assert_eq!(reports.len(), 3);
        for r in &reports {
            assert_eq!(r.bit, BitHash::new(r.seed).bit_of(10));
        }
    }

    #[test]
    fn kfold_recovers_half_frequency() {
        let (d, k, n) = (50, 4, 20_000);
        let kf = KFold::new(d, k, 1.0).unwrap();
        let mut rng = rng_from_seed(2);
        let reports: Vec<_> = (0..n)
            .map(|i| {
                let items: Vec<usize> = if i % 2 == 0 { vec![7, 8] } else { vec![9] };
                kf.encode(&SparseVector::from_items(d, k, &items).unwrap(), &mut rng).unwrap()
            })
            .collect();
        let c = kf.oracle().debias_factor().unwrap();
        // Per-client term variance is at most k^2 * k * c^2.
        let sd = ((k * k * k) as f64 * c * c / n as f64).sqrt();
        assert!((kf.aggregate(&reports, 7).unwrap() - 0.5).abs() < 3.0 * sd);
        assert!(kf.aggregate(&reports, 30).unwrap().abs() < 3.0 * sd);
    }

    #[test]
    fn sampling_slot_rules() {
        let s = Sampling::new(10, 1, 1.0, SamplingValue::default()).unwrap();
        let mut rng = rng_from_seed(3);
        let v = SparseVector::new(10, 1, [(2, 0.5)]).unwrap();
        for _ in 0..50 {
            assert_eq!(s.sample_slot(&v, &mut rng).unwrap(), Some((2, 0.5)));
        }
        let s = Sampling::new(10, 4, 1.0, SamplingValue::default()).unwrap();
        let empty = SparseVector::empty(10, 4).unwrap();
        for _ in 0..50 {
            assert_eq!(s.sample_slot(&empty, &mut rng).unwrap(), None);
        }
    }

    #[test]
    fn sampling_frequency_within_three_sigma() {
        let (d, k, n) = (40, 4, 10_000);
        for mode in [SamplingValue::default(), SamplingValue::Joint] {
            let s = Sampling::new(d, k, 1.0, mode).unwrap();
            let mut rng = rng_from_seed(4);
            let reports: Vec<_> = (0..n)
                .map(|_| s.encode(&SparseVector::from_items(d, k, &[1, 2, 3]).unwrap(), &mut rng).unwrap())
                .collect();
            let c1 = s.item_oracle.debias_factor().unwrap();
            let c2 = s.value_epsilon.map_or(1.0, |e| (e.exp() + 1.0) / (e.exp() - 1.0));
            let sd = (k as f64) * c1 * c2 / (n as f64).sqrt();
            assert!((s.aggregate(&reports, 2).unwrap() - 1.0).abs() < 3.0 * sd);
            assert!(s.aggregate(&reports, 20).unwrap().abs() < 3.0 * sd);
        }
    }

    #[test]
    fn sampling_noiseless_single_slot_is_exact() {
        let s = Sampling::new(10, 1, 1.0, SamplingValue::default()).unwrap().without_noise();
        let mut rng = rng_from_seed(6);
        let reports: Vec<_> = (0..8)
            .map(|_| s.encode(&SparseVector::new(10, 1, [(3, -0.25)]).unwrap(), &mut rng).unwrap())
            .collect();
        assert_eq!(s.aggregate(&reports, 3).unwrap(), -0.25);
    }

    #[test]
    fn sign_randomizer_mean() {
        let mut rng = rng_from_seed(7);
        let n = 200_000;
        let mean = (0..n).map(|_| sign_randomize(0.3, 0.5, &mut rng).unwrap()).sum::<f64>() / n as f64;
        let c = (0.5f64.exp() + 1.0) / (0.5f64.exp() - 1.0);
        assert!((mean - 0.3).abs() < 3.0 * c / (n as f64).sqrt());
        assert!(sign_randomize(1.2, 0.5, &mut rng).is_err());
    }

    #[test]
    fn naive_noise_off_and_std() {
        let budget = PrivacyBudget::event_level(1.0, 4).unwrap();
        let v = SparseVector::new(5, 4, [(1, 0.5), (4, -1.0)]).unwrap();
        let off = Naive::new(5, budget).unwrap().without_noise();
        let mut rng = rng_from_seed(8);
        assert_eq!(off.encode(&v, &mut rng).unwrap(), v.to_dense());
        assert_eq!(off.aggregate(&[v.to_dense()]).unwrap(), v.to_dense());

        let on = Naive::new(1, budget).unwrap();
        let zero = SparseVector::empty(1, 1).unwrap();
        let draws: Vec<f64> = (0..100_000).map(|_| on.encode(&zero, &mut rng).unwrap()[0]).collect();
        let var = draws.iter().map(|x| x * x).sum::<f64>() / draws.len() as f64;
        let expect = 2f64.sqrt() * 2.0;
        assert!((var.sqrt() / expect - 1.0).abs() < 0.02);
        assert_eq!(on.wire_bytes(), 4);
    }
}
