//! Empirical checks of the privacy argument: bin sensitivity of random
//! neighbors and the output density ratio.
//!
//! cargo run --release --example privacy_audit

use rand::Rng;
use sparse_ldp::mechanism::{
    clipped_bins, density_ratio_check, random_neighbor_pair, sensitivity_audit, squeeze_threshold, MechanismParams,
};
use sparse_ldp::seed::rng_from_seed;
use sparse_ldp::{select_params, HashSeeds, PrivacyBudget};

fn main() -> sparse_ldp::Result<()> {
    let (k, d, n) = (64, 1000, 10_000);
    let mut rng = rng_from_seed(3);

    for (name, budget) in [
        ("event", PrivacyBudget::event_level(1.0, k)?),
        ("L=16, delta=0.05", PrivacyBudget::new(1.0, 0.05, 16.0, k)?),
        ("user", PrivacyBudget::user_level(1.0, k)?),
    ] {
        let params = select_params(k, d, n, budget, 0.05)?;
        let l = budget.neighbor_distance();
        let mut worst: f64 = 0.0;
        let mut ratio: f64 = 0.0;
        for _ in 0..200 {
            let (v, w) = random_neighbor_pair(d, k, l, &mut rng)?;
            worst = worst.max(sensitivity_audit(&v, &w, &params, 50, &mut rng)?.max_l1);
            let seeds = HashSeeds::random(&mut rng);
            let (a, b) = (clipped_bins(&v, &params, seeds)?, clipped_bins(&w, &params, seeds)?);
            let probes: Vec<Vec<f64>> = (0..5)
                .map(|_| a.iter().map(|x| x + rng.random_range(-4.0..4.0) * params.laplace_scale()).collect())
                .collect();
            ratio = ratio.max(density_ratio_check(&a, &b, params.noise_magnitude(), 1.0, &probes)?);
        }
        println!(
            "{name:<17} {:<9} max bin L1 diff {worst:6.3} (L = {l}), max log ratio {ratio:.3}",
            params.regime().to_string()
        );
    }

    // The squeeze bound is loose at small b: the tail event never happens.
    let budget = PrivacyBudget::new(1.0, 0.05, 16.0, k)?;
    let t = squeeze_threshold(4, 16.0, 0.05);
    let params = MechanismParams::custom(4, None, t, budget, k, d, n, 0.05)?;
    let (v, w) = random_neighbor_pair(d, k, 16.0, &mut rng)?;
    let audit = sensitivity_audit(&v, &w, &params, 10_000, &mut rng)?;
    println!("b = 4: threshold {t:.2}, tail rate {:.4}, max diff {:.3}", audit.tail_rate, audit.max_l1);
    Ok(())
}
