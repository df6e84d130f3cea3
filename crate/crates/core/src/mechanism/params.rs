//! Bin count, clipping range and noise magnitude for each privacy regime.
//!
//! | regime     | bins                          | clip | noise magnitude          |
//! |------------|-------------------------------|------|--------------------------|
//! | `BoundedL` | `eps^2 k / L^2`               | none | `L`                      |
//! | `Squeezed` | `sqrt(eps^2 k / (L ln(1/δ)))` | none | `3 sqrt(b L ln(2b/δ))`   |
//! | `Clipped`  | 1                             | `η = sqrt(2k ln(4n/β))` | `2η`  |
//!
//! Event-level privacy is `BoundedL` with `L = 2`; user-level is `Clipped`.
//! All logarithms are natural.

use std::fmt;

use crate::budget::{NoiseMode, PrivacyBudget};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Noise calibrated to the deterministic L1 bound `L` on bin differences.
    BoundedL,
    /// Noise calibrated to the high-probability squeezed bound; (ε, δ)-LDP.
    Squeezed,
    /// Single clipped bin; pure ε-LDP for arbitrary neighbors.
    Clipped,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::BoundedL => "bounded-l",
            Regime::Squeezed => "squeezed",
            Regime::Clipped => "clipped",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MechanismParams {
    bins: usize,
    clip_range: Option<f64>,
    noise_magnitude: f64,
    budget: PrivacyBudget,
    k: usize,
    d: usize,
    n: usize,
    beta: f64,
    regime: Regime,
    noise: NoiseMode,
}

/// Tail threshold `3 sqrt(b L ln(2b/δ))` on the L1 bin difference of
/// L-neighbors. Infinite when `δ = 0`.
pub fn squeeze_threshold(bins: usize, neighbor_distance: f64, delta: f64) -> f64 {
    if delta <= 0.0 {
        return f64::INFINITY;
    }
    let b = bins as f64;
    3.0 * (b * neighbor_distance * (2.0 * b / delta).ln()).sqrt()
}

/// Whether `L / b >= ln(2b/δ)`, the precondition of the squeezed bound.
pub fn squeeze_condition_holds(bins: usize, neighbor_distance: f64, delta: f64) -> bool {
    delta > 0.0 && neighbor_distance / bins as f64 >= (2.0 * bins as f64 / delta).ln()
}

/// Clipping range for the pure user-level regime, `sqrt(2k ln(4n/β))`.
pub fn user_level_clip_range(k: usize, n: usize, beta: f64) -> f64 {
    (2.0 * k as f64 * (4.0 * n as f64 / beta).ln()).sqrt()
}

fn round_bins(raw: f64, k: usize) -> usize {
    let r = raw.round();
    if r.is_nan() || r < 1.0 {
        1
    } else {
        (r as usize).min(k)
    }
}

fn check_common(k: usize, d: usize, n: usize, beta: f64) -> Result<()> {
    if k == 0 || d == 0 || n == 0 {
        return Err(Error::param("k, d and n must be positive"));
    }
    if k > d {
        return Err(Error::param(format!("sparsity {k} exceeds dimension {d}")));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::param(format!("beta must be in (0, 1), got {beta}")));
    }
    Ok(())
}

impl MechanismParams {
    /// Parameters for a specific regime, without comparing alternatives.
    pub fn for_regime(
        regime: Regime,
        k: usize,
        d: usize,
        n: usize,
        budget: PrivacyBudget,
        beta: f64,
    ) -> Result<Self> {
        check_common(k, d, n, beta)?;
        let eps = budget.epsilon();
        let l = budget.neighbor_distance();
        let delta = budget.delta();
        let base = MechanismParams {
            bins: 1,
            clip_range: None,
            noise_magnitude: l,
            budget,
            k,
            d,
            n,
            beta,
            regime,
            noise: NoiseMode::Enabled,
        };
        match regime {
            Regime::BoundedL => {
                let bins = round_bins(eps * eps * k as f64 / (l * l), k);
                let mut noise_magnitude = l;
                if squeeze_condition_holds(bins, l, delta) {
                    noise_magnitude = noise_magnitude.min(squeeze_threshold(bins, l, delta));
                }
                Ok(MechanismParams {
                    bins,
                    noise_magnitude,
                    ..base
                })
            }
            Regime::Squeezed => {
                if delta <= 0.0 {
                    return Err(Error::UnsatisfiableRegime(format!(
                        "squeezed noise at L={l} needs delta > 0; supply delta or use user-level"
                    )));
                }
                let mut bins = round_bins((eps * eps * k as f64 / (l * (1.0 / delta).ln())).sqrt(), k);
                while bins > 1 && !squeeze_condition_holds(bins, l, delta) {
                    bins -= 1;
                }
                if !squeeze_condition_holds(bins, l, delta) {
                    return Err(Error::UnsatisfiableRegime(format!(
                        "L/b >= ln(2b/delta) fails even at b=1 (L={l}, delta={delta})"
                    )));
                }
                Ok(MechanismParams {
                    bins,
                    noise_magnitude: squeeze_threshold(bins, l, delta),
                    ..base
                })
            }
            Regime::Clipped => {
                let eta = user_level_clip_range(k, n, beta);
                Ok(MechanismParams {
                    bins: 1,
                    clip_range: Some(eta),
                    noise_magnitude: 2.0 * eta,
                    budget: budget.with_delta(0.0),
                    ..base
                })
            }
        }
    }

    /// Explicit parameters, for audits and experiments outside the regime
    /// table. Privacy is the caller's responsibility.
    #[allow(clippy::too_many_arguments)]
    pub fn custom(
        bins: usize,
        clip_range: Option<f64>,
        noise_magnitude: f64,
        budget: PrivacyBudget,
        k: usize,
        d: usize,
        n: usize,
        beta: f64,
    ) -> Result<Self> {
        check_common(k, d, n, beta)?;
        if bins == 0 || bins > k {
            return Err(Error::param(format!("bins must be in [1, {k}], got {bins}")));
        }
        if !(noise_magnitude > 0.0) || !noise_magnitude.is_finite() {
            return Err(Error::param("noise magnitude must be positive"));
        }
        if let Some(eta) = clip_range {
            if !(eta > 0.0) || !eta.is_finite() {
                return Err(Error::param("clip range must be positive and finite"));
            }
        }
        let regime = match clip_range {
            Some(_) => Regime::Clipped,
            None => Regime::BoundedL,
        };
        Ok(MechanismParams {
            bins,
            clip_range,
            noise_magnitude,
            budget,
            k,
            d,
            n,
            beta,
            regime,
            noise: NoiseMode::Enabled,
        })
    }

    /// Same parameters with noise switched off (test mode).
    pub fn without_noise(self) -> Self {
        MechanismParams {
            noise: NoiseMode::Disabled,
            ..self
        }
    }

    pub fn with_clip_range(self, eta: f64) -> Self {
        MechanismParams {
            clip_range: Some(eta),
            ..self
        }
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn clip_range(&self) -> Option<f64> {
        self.clip_range
    }

    /// Δ; the Laplace scale is `Δ / ε`.
    pub fn noise_magnitude(&self) -> f64 {
        self.noise_magnitude
    }

    pub fn laplace_scale(&self) -> f64 {
        self.noise_magnitude / self.budget.epsilon()
    }

    pub fn budget(&self) -> PrivacyBudget {
        self.budget
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn noise(&self) -> NoiseMode {
        self.noise
    }

    /// Error shape `sqrt(k/b) + Δ/ε`, up to the common `sqrt(log(d/β)/n)`.
    pub fn predicted_error(&self) -> f64 {
        (self.k as f64 / self.bins as f64).sqrt() + self.laplace_scale()
    }
}

/// Chooses `(b, η, Δ)` for the budget.
///
/// User-level budgets (`L = 2k`) pick the better of the clipped regime and
/// plain `Δ = L` noise, which only wins for small `k`. Otherwise the
/// admissible candidates are `BoundedL` (when `L <= k^(1/3)`, or for the
/// event-level `L = 2`) and `Squeezed` (when `L > k^(1/3)` and `δ > 0`); if
/// either exists the clipped regime joins the comparison and the smallest
/// predicted error wins, ties going to the earlier (purer) regime.
pub fn select_params(
    k: usize,
    d: usize,
    n: usize,
    budget: PrivacyBudget,
    beta: f64,
) -> Result<MechanismParams> {
    check_common(k, d, n, beta)?;
    let chosen = if budget.is_user_level(k) {
        // Unclipped noise at Δ = L = 2k is still pure ε-DP and wins for small k.
        let unclipped = MechanismParams::for_regime(Regime::BoundedL, k, d, n, budget.with_delta(0.0), beta)?;
        let clipped = MechanismParams::for_regime(Regime::Clipped, k, d, n, budget, beta)?;
        if clipped.predicted_error() < unclipped.predicted_error() {
            clipped
        } else {
            unclipped
        }
    } else {
        let l = budget.neighbor_distance();
        let cube_root = (k as f64).cbrt();
        let mut candidates = Vec::new();
        let mut reasons = Vec::new();
        if l <= cube_root || l == 2.0 {
            candidates.push(MechanismParams::for_regime(Regime::BoundedL, k, d, n, budget, beta)?);
        } else {
            match MechanismParams::for_regime(Regime::Squeezed, k, d, n, budget, beta) {
                Ok(p) => candidates.push(p),
                Err(Error::UnsatisfiableRegime(why)) => reasons.push(why),
                Err(e) => return Err(e),
            }
        }
        if candidates.is_empty() {
            return Err(Error::UnsatisfiableRegime(format!(
                "L={l} exceeds k^(1/3)={cube_root:.3} and no approximate-DP regime applies ({})",
                reasons.join("; ")
            )));
        }
        candidates.push(MechanismParams::for_regime(Regime::Clipped, k, d, n, budget, beta)?);
        let mut best = candidates[0];
        for c in &candidates[1..] {
            if c.predicted_error() < best.predicted_error() {
                best = *c;
            }
        }
        best
    };
    let lhs = (n * k) as f64 / chosen.bins as f64;
    let rhs = (5.0 * d as f64 / beta).ln();
    if lhs < rhs {
        log::warn!("nk/b = {lhs:.2} < ln(5d/beta) = {rhs:.2}; the utility bound does not apply");
    }
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget(eps: f64, delta: f64, l: f64, k: usize) -> PrivacyBudget {
        PrivacyBudget::new(eps, delta, l, k).unwrap()
    }

    #[test]
    fn event_level_row() {
        let p = select_params(64, 1000, 100_000, budget(1.0, 0.0, 2.0, 64), 0.05).unwrap();
        assert_eq!(p.bins(), 16);
        assert_eq!(p.noise_magnitude(), 2.0);
        assert_eq!(p.clip_range(), None);
        assert_eq!(p.regime(), Regime::BoundedL);
    }

    #[test]
    fn event_level_small_k_still_bounded() {
        // k^(1/3) < 2 here; the event-level row applies regardless.
        let p = select_params(4, 512, 10_000, budget(1.0, 0.0, 2.0, 4), 0.05).unwrap();
        assert_eq!((p.bins(), p.regime()), (1, Regime::BoundedL));
    }

    #[test]
    fn user_level_row() {
        let p = select_params(64, 1000, 100_000, budget(1.0, 0.0, 128.0, 64), 0.05).unwrap();
        let eta = (128.0f64 * (8.0e6f64).ln()).sqrt();
        assert_eq!(p.bins(), 1);
        assert!((p.clip_range().unwrap() - eta).abs() < 1e-12);
        assert!((eta - 45.11).abs() < 0.01);
        assert!((p.noise_magnitude() - 90.22).abs() < 0.02);
        assert_eq!(p.budget().delta(), 0.0);
    }

    #[test]
    fn small_user_level_k_skips_clipping() {
        // k = 1: L = 2 is both event- and user-level; 2η ≈ 10.4 loses to Δ = 2.
        let p = select_params(1, 100, 100_000, budget(1.0, 0.0, 2.0, 1), 0.05).unwrap();
        assert_eq!((p.regime(), p.noise_magnitude(), p.clip_range()), (Regime::BoundedL, 2.0, None));
        // k = 16, n = 1e4: 2η = 2 sqrt(32 ln 8e5) ≈ 41.7 > L = 32.
        let p = select_params(16, 100, 10_000, budget(1.0, 0.05, 32.0, 16), 0.05).unwrap();
        assert_eq!((p.regime(), p.noise_magnitude(), p.bins()), (Regime::BoundedL, 32.0, 1));
        assert_eq!(p.budget().delta(), 0.0);
    }

    #[test]
    fn small_bins_clamped_to_one() {
        let p = select_params(8, 100, 1000, budget(0.5, 0.0, 2.0, 8), 0.05).unwrap();
        assert_eq!(p.bins(), 1);
        assert_eq!(p.regime(), Regime::BoundedL);
    }

    #[test]
    fn large_l_without_delta_is_unsatisfiable() {
        let err = select_params(64, 1000, 1000, budget(1.0, 0.0, 16.0, 64), 0.05).unwrap_err();
        assert!(matches!(err, Error::UnsatisfiableRegime(_)));
    }

    #[test]
    fn squeezed_regime_respects_condition() {
        let p = select_params(1024, 4096, 100_000, budget(4.0, 1e-3, 64.0, 1024), 0.05).unwrap();
        assert_eq!(p.regime(), Regime::Squeezed);
        let l = 64.0;
        assert!(squeeze_condition_holds(p.bins(), l, 1e-3));
        assert!(!squeeze_condition_holds(p.bins() + 1, l, 1e-3) || p.bins() == 1024);
        let expected = 3.0 * (p.bins() as f64 * l * (2.0 * p.bins() as f64 / 1e-3).ln()).sqrt();
        assert!((p.noise_magnitude() - expected).abs() < 1e-9);
    }

    #[test]
    fn squeezed_loses_to_clipping_when_worse() {
        // For L close to 2k the clipped regime has the smaller predicted error.
        let p = select_params(8, 100, 2000, budget(1.0, 0.05, 15.0, 8), 0.05).unwrap();
        let sq = MechanismParams::for_regime(Regime::Squeezed, 8, 100, 2000, budget(1.0, 0.05, 15.0, 8), 0.05);
        let cl = MechanismParams::for_regime(Regime::Clipped, 8, 100, 2000, budget(1.0, 0.05, 15.0, 8), 0.05).unwrap();
        let best = match sq {
            Ok(sq) if sq.predicted_error() <= cl.predicted_error() => sq.regime(),
            _ => Regime::Clipped,
        };
        assert_eq!(p.regime(), best);
    }

    #[test]
    fn squeezed_needs_delta() {
        let r = MechanismParams::for_regime(Regime::Squeezed, 64, 100, 100, budget(1.0, 0.0, 16.0, 64), 0.05);
        assert!(matches!(r, Err(Error::UnsatisfiableRegime(_))));
    }

    #[test]
    fn bins_stay_in_range() {
        for k in [1usize, 2, 3, 7, 64, 1000] {
            for eps in [0.1, 1.0, 8.0] {
                let p = select_params(k, 1000, 1000, budget(eps, 0.0, 2.0, k.max(1)), 0.05);
                if let Ok(p) = p {
                    assert!((1..=k).contains(&p.bins()));
                    assert!(p.noise_magnitude() > 0.0);
                    assert_eq!(p.clip_range().is_some(), p.regime() == Regime::Clipped);
                }
            }
        }
    }

    #[test]
    fn custom_validates() {
        let b = budget(1.0, 0.0, 2.0, 8);
        assert!(MechanismParams::custom(0, None, 2.0, b, 8, 100, 10, 0.05).is_err());
        assert!(MechanismParams::custom(9, None, 2.0, b, 8, 100, 10, 0.05).is_err());
        assert!(MechanismParams::custom(2, None, 0.0, b, 8, 100, 10, 0.05).is_err());
        assert!(MechanismParams::custom(2, Some(-1.0), 2.0, b, 8, 100, 10, 0.05).is_err());
        assert!(MechanismParams::custom(2, None, 2.0, b, 8, 100, 10, 0.05).is_ok());
    }
}
