//! Empirical and analytic privacy checks for the binned Laplace randomizer.

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::laplace::laplace_log_density;
use crate::mechanism::client::{clipped_bins, HashSeeds};
use crate::mechanism::params::{squeeze_threshold, MechanismParams};
use crate::vector::SparseVector;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensitivityAudit {
    /// Largest `sum_j |B_j - B'_j|` seen over all trials.
    pub max_l1: f64,
    /// Fraction of trials whose difference exceeded `threshold`.
    pub tail_rate: f64,
    /// `3 sqrt(b L ln(2b/δ))`; infinite when `δ = 0`.
    pub threshold: f64,
    pub trials: usize,
}

/// L1 distance between the post-clip bins of `v` and `v_prime` under the
/// same hash seeds.
pub fn bin_difference(
    v: &SparseVector,
    v_prime: &SparseVector,
    params: &MechanismParams,
    seeds: HashSeeds,
) -> Result<f64> {
    let a = clipped_bins(v, params, seeds)?;
    let b = clipped_bins(v_prime, params, seeds)?;
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum())
}

/// Draws `trials` independent hash-seed pairs and measures how far the bins
/// of two L-neighbors move apart.
pub fn sensitivity_audit<R: Rng + ?Sized>(
    v: &SparseVector,
    v_prime: &SparseVector,
    params: &MechanismParams,
    trials: usize,
    rng: &mut R,
) -> Result<SensitivityAudit> {
    if trials == 0 {
        return Err(Error::param("audit needs at least one trial"));
    }
    let l = params.budget().neighbor_distance();
    let dist = v.l1_distance(v_prime)?;
    if dist > l * (1.0 + 1e-12) {
        return Err(Error::param(format!(
            "inputs are {dist} apart in L1, more than L = {l}"
        )));
    }
    let threshold = squeeze_threshold(params.bins(), l, params.budget().delta());
    let mut max_l1 = 0.0f64;
    let mut exceed = 0usize;
    for _ in 0..trials {
        let diff = bin_difference(v, v_prime, params, HashSeeds::random(rng))?;
        max_l1 = max_l1.max(diff);
        if diff > threshold {
            exceed += 1;
        }
    }
    Ok(SensitivityAudit {
        max_l1,
        tail_rate: exceed as f64 / trials as f64,
        threshold,
        trials,
    })
}

/// `(ε/Δ) sum_j |B_j - B'_j|`, the privacy loss bound for a pair of bin vectors.
pub fn density_ratio_bound(bins: &[f64], bins_prime: &[f64], noise_magnitude: f64, epsilon: f64) -> f64 {
    let l1: f64 = bins.iter().zip(bins_prime).map(|(a, b)| (a - b).abs()).sum();
    epsilon / noise_magnitude * l1
}

/// Evaluates the joint Laplace(Δ/ε) output densities centered at `bins` and
/// `bins_prime` at every probe point and returns the largest absolute log
/// ratio.
pub fn density_ratio_check(
    bins: &[f64],
    bins_prime: &[f64],
    noise_magnitude: f64,
    epsilon: f64,
    probes: &[Vec<f64>],
) -> Result<f64> {
    if bins.len() != bins_prime.len() {
        return Err(Error::param("bin vectors differ in length"));
    }
    if !(noise_magnitude > 0.0) || !(epsilon > 0.0) {
        return Err(Error::param("noise magnitude and epsilon must be positive"));
    }
    let scale = noise_magnitude / epsilon;
    let mut worst = 0.0f64;
    for y in probes {
        if y.len() != bins.len() {
            return Err(Error::param("probe point has the wrong dimension"));
        }
        let log_ratio: f64 = y
            .iter()
            .zip(bins.iter().zip(bins_prime))
            .map(|(&yj, (&a, &b))| laplace_log_density(yj, a, scale) - laplace_log_density(yj, b, scale))
            .sum();
        worst = worst.max(log_ratio.abs());
    }
    Ok(worst)
}

/// A random pair of k-sparse vectors in `[-1, 1]^d` at L1 distance at most
/// `l`. Half the time one coordinate also moves to a fresh position, so
/// supports differ.
pub fn random_neighbor_pair<R: Rng + ?Sized>(
    d: usize,
    k: usize,
    l: f64,
    rng: &mut R,
) -> Result<(SparseVector, SparseVector)> {
    if k == 0 || k > d || !(l > 0.0) {
        return Err(Error::param(format!("need 1 <= k <= d and L > 0, got k={k}, d={d}, L={l}")));
    }
    let coords = index::sample(rng, d, k).into_vec();
    let v: Vec<(usize, f64)> = coords.iter().map(|&j| (j, rng.random_range(-1.0..=1.0))).collect();
    let mut w = v.clone();
    let mut budget = l;
    let mut moved = None;
    if d > k && rng.random_bool(0.5) {
        let slot = rng.random_range(0..k);
        let old = v[slot].1.abs();
        if old <= budget {
            let fresh = loop {
                let j = rng.random_range(0..d);
                if !coords.contains(&j) {
                    break j;
                }
            };
            let c = rng.random_range(-1.0..=1.0) * (budget - old).min(1.0);
            w[slot] = (fresh, c);
            budget -= old + c.abs();
            moved = Some(slot);
        }
    }
    let targets: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let shift: f64 = (0..k).filter(|&i| Some(i) != moved).map(|i| (targets[i] - w[i].1).abs()).sum();
    // A hair under the budget so rounding cannot push the pair past L.
    let t = if shift > budget { budget.max(0.0) / shift * (1.0 - 1e-12) } else { 1.0 };
    for i in (0..k).filter(|&i| Some(i) != moved) {
        w[i].1 += t * (targets[i] - w[i].1);
        w[i].1 = w[i].1.clamp(-1.0, 1.0);
    }
    Ok((SparseVector::new(d, k, v)?, SparseVector::new(d, k, w)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::PrivacyBudget;
    use crate::seed::rng_from_seed;

    #[test]
    fn identical_inputs_have_zero_difference() {
        let budget = PrivacyBudget::event_level(1.0, 8).unwrap();
        let p = MechanismParams::custom(4, None, 2.0, budget, 8, 50, 10, 0.05).unwrap();
        let v = SparseVector::new(50, 8, [(1, 0.5), (9, -1.0), (30, 0.25)]).unwrap();
        let a = sensitivity_audit(&v, &v, &p, 500, &mut rng_from_seed(0)).unwrap();
        assert_eq!(a.max_l1, 0.0);
        assert_eq!(a.tail_rate, 0.0);
    }

    #[test]
    fn event_level_pair_bounded_by_two() {
        let budget = PrivacyBudget::event_level(1.0, 8).unwrap();
        let p = MechanismParams::custom(4, None, 2.0, budget, 8, 50, 10, 0.05).unwrap();
        let v = SparseVector::new(50, 8, [(1, 1.0), (9, -1.0)]).unwrap();
        let w = SparseVector::new(50, 8, [(1, -1.0), (9, -1.0)]).unwrap();
        let a = sensitivity_audit(&v, &w, &p, 2000, &mut rng_from_seed(1)).unwrap();
        assert!(a.max_l1 <= 2.0);
        assert_eq!(a.max_l1, 2.0);
    }

    #[test]
    fn rejects_far_pairs() {
        let budget = PrivacyBudget::event_level(1.0, 8).unwrap();
        let p = MechanismParams::custom(4, None, 2.0, budget, 8, 50, 10, 0.05).unwrap();
        let v = SparseVector::new(50, 8, [(1, 1.0)]).unwrap();
        let w = SparseVector::new(50, 8, [(2, 1.0), (1, -0.5)]).unwrap();
        assert!(sensitivity_audit(&v, &w, &p, 10, &mut rng_from_seed(1)).is_err());
        assert!(sensitivity_audit(&v, &v, &p, 0, &mut rng_from_seed(1)).is_err());
    }

    #[test]
    fn density_ratio_examples() {
        assert_eq!(density_ratio_check(&[1.0, 2.0], &[1.0, 2.0], 2.0, 1.0, &[vec![0.0, 5.0]]).unwrap(), 0.0);
        let probes: Vec<Vec<f64>> = (-40..=40).map(|i| vec![i as f64 * 0.1]).collect();
        let r = density_ratio_check(&[1.0], &[0.0], 2.0, 1.0, &probes).unwrap();
        assert!(r <= 0.5 + 1e-12);
        assert!((r - 0.5).abs() < 1e-12, "attained outside [0, 1]");
        assert!(density_ratio_check(&[1.0], &[0.0, 1.0], 2.0, 1.0, &probes).is_err());
        assert!(density_ratio_check(&[1.0], &[0.0], 2.0, 1.0, &[vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn density_ratio_within_bound_for_random_pairs() {
        let mut rng = rng_from_seed(17);
        for _ in 0..200 {
            let b = rng.random_range(1..8);
            let bins: Vec<f64> = (0..b).map(|_| rng.random_range(-5.0..5.0)).collect();
            let other: Vec<f64> = (0..b).map(|_| rng.random_range(-5.0..5.0)).collect();
            let probes: Vec<Vec<f64>> = (0..50)
                .map(|_| (0..b).map(|_| rng.random_range(-20.0..20.0)).collect())
                .collect();
            let got = density_ratio_check(&bins, &other, 3.0, 0.7, &probes).unwrap();
            assert!(got <= density_ratio_bound(&bins, &other, 3.0, 0.7) + 1e-9);
        }
    }

    #[test]
    fn neighbor_pairs_stay_within_distance() {
        let mut rng = rng_from_seed(5);
        let mut moved = 0;
        for &(k, l) in &[(8usize, 2.0), (8, 0.3), (16, 5.0), (4, 8.0)] {
            for _ in 0..500 {
                let (v, w) = random_neighbor_pair(40, k, l, &mut rng).unwrap();
                assert!(v.l1_distance(&w).unwrap() <= l);
                assert!(v.nnz() <= k && w.nnz() <= k);
                moved += (v.items().collect::<Vec<_>>() != w.items().collect::<Vec<_>>()) as usize;
            }
        }
        assert!(moved > 100);
        assert!(random_neighbor_pair(4, 5, 2.0, &mut rng).is_err());
    }
}
