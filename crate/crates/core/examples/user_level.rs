//! User-level privacy: the whole vector may change. Shows how the chosen
//! regime and noise grow with k.
//!
//! cargo run --release --example user_level

use sparse_ldp::bench::{run_experiment, ExperimentConfig, Level, MechanismKind};
use sparse_ldp::{select_params, PrivacyBudget};

fn main() -> sparse_ldp::Result<()> {
    let (n, d) = (10_000, 512);
    println!("{:>4} {:>10} {:>5} {:>10} {:>9}", "k", "regime", "b", "clip", "noise");
    for k in [1, 4, 16, 64, 256] {
        let p = select_params(k, d, n, PrivacyBudget::user_level(1.0, k)?, 0.05)?;
        let clip = p.clip_range().map_or("-".to_string(), |e| format!("{e:.2}"));
        println!("{k:>4} {:>10} {:>5} {clip:>10} {:>9.2}", p.regime().to_string(), p.bins(), p.laplace_scale());
    }

    let cfg = ExperimentConfig {
        runs: 3,
        mechanisms: vec![MechanismKind::Ours],
        levels: vec![Level::User],
        n: vec![n],
        d: vec![d],
        k: vec![16, 64, 256],
        probe: "all".into(),
        ..ExperimentConfig::default()
    };
    for row in run_experiment(&cfg)? {
        println!("k = {:>3}: L-inf {:.3}, mse {:.4}", row.k, row.linf, row.mse);
    }
    Ok(())
}
