//! The main mechanism against k-fold repetition, sampling and naive
//! per-coordinate noise, at both privacy levels.
//!
//! cargo run --release --example baselines

use sparse_ldp::bench::{run_experiment, ExperimentConfig, Level, MechanismKind};

fn main() -> sparse_ldp::Result<()> {
    let cfg = ExperimentConfig {
        runs: 3,
        mechanisms: vec![
            MechanismKind::Ours,
            MechanismKind::KFold,
            MechanismKind::Sampling,
            MechanismKind::Naive,
            MechanismKind::Bucketed,
        ],
        levels: vec![Level::Event, Level::User],
        n: vec![10_000],
        d: vec![2_000],
        k: vec![64],
        ..ExperimentConfig::default()
    };
    println!("{:<9} {:<6} {:>9} {:>10} {:>10}  note", "mechanism", "level", "L-inf", "bytes", "wire");
    for r in run_experiment(&cfg)? {
        if r.is_ok() {
            println!(
                "{:<9} {:<6} {:>9.4} {:>10} {:>10}  {}",
                r.mechanism, r.regime, r.linf, r.bytes_per_client, r.wire_bytes_per_client, r.note
            );
        } else {
            println!("{:<9} {:<6} {:>9}  {}", r.mechanism, r.regime, "n/a", r.note);
        }
    }
    Ok(())
}
