use crate::error::{Error, Result};

/// Privacy budget under L-neighboring LDP: two inputs are neighbors when their
/// L1 distance is at most `neighbor_distance`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrivacyBudget {
    epsilon: f64,
    delta: f64,
    neighbor_distance: f64,
}

impl PrivacyBudget {
    /// `k` is the sparsity the budget will be used with; it bounds `L` by `2k`.
    pub fn new(epsilon: f64, delta: f64, neighbor_distance: f64, k: usize) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::param(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::param(format!("delta must be in [0, 1), got {delta}")));
        }
        let max_l = 2.0 * k as f64;
        if !(neighbor_distance > 0.0) || neighbor_distance > max_l {
            return Err(Error::param(format!(
                "neighbor distance must be in (0, {max_l}], got {neighbor_distance}"
            )));
        }
        Ok(PrivacyBudget {
            epsilon,
            delta,
            neighbor_distance,
        })
    }

    /// Event-level: neighbors differ in one coordinate (L = 2).
    pub fn event_level(epsilon: f64, k: usize) -> Result<Self> {
        Self::new(epsilon, 0.0, 2.0, k)
    }

    /// User-level: neighbors may differ in the whole vector (L = 2k).
    pub fn user_level(epsilon: f64, k: usize) -> Result<Self> {
        Self::new(epsilon, 0.0, 2.0 * k as f64, k)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn neighbor_distance(&self) -> f64 {
        self.neighbor_distance
    }

    pub fn is_user_level(&self, k: usize) -> bool {
        self.neighbor_distance == 2.0 * k as f64
    }

    pub(crate) fn with_delta(self, delta: f64) -> Self {
        PrivacyBudget { delta, ..self }
    }
}

/// Whether randomizers add their noise. `Disabled` is a test sentinel; it
/// never enters privacy arithmetic.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NoiseMode {
    #[default]
    Enabled,
    Disabled,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates() {
        assert!(PrivacyBudget::new(0.0, 0.0, 2.0, 4).is_err());
        assert!(PrivacyBudget::new(1.0, 1.0, 2.0, 4).is_err());
        assert!(PrivacyBudget::new(1.0, -0.1, 2.0, 4).is_err());
        assert!(PrivacyBudget::new(1.0, 0.0, 0.0, 4).is_err());
        assert!(PrivacyBudget::new(1.0, 0.0, 8.5, 4).is_err());
        assert!(PrivacyBudget::new(1.0, 0.0, 8.0, 4).is_ok());
    }

    #[test]
    fn levels() {
        let e = PrivacyBudget::event_level(1.0, 8).unwrap();
        assert_eq!(e.neighbor_distance(), 2.0);
        assert!(!e.is_user_level(8));
        let u = PrivacyBudget::user_level(1.0, 8).unwrap();
        assert_eq!(u.neighbor_distance(), 16.0);
        assert!(u.is_user_level(8));
    }
}
