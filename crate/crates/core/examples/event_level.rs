//! Event-level mean estimation on synthetic Zipf data.
//!
//! cargo run --release --example event_level

use sparse_ldp::bench::{gen_synthetic, linf_error, ProbePolicy, Synthetic};
use sparse_ldp::seed::{derive_client_seed, rng_from_seed, SeedPurpose};
use sparse_ldp::{client_encode, select_params, server_estimate_many, HashSeeds, PrivacyBudget};

fn main() -> sparse_ldp::Result<()> {
    let (n, d, k) = (20_000, 2_000, 64);
    let data = gen_synthetic(n, d, k, Synthetic::default(), 7)?;

    let budget = PrivacyBudget::event_level(1.0, k)?;
    let params = select_params(k, d, n, budget, 0.05)?;
    println!(
        "regime {}, b = {}, Laplace scale {:.3}",
        params.regime(),
        params.bins(),
        params.laplace_scale()
    );

    let master = 2024;
    let reports = data
        .vectors()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut rng = rng_from_seed(derive_client_seed(master, i as u64, SeedPurpose::Noise));
            client_encode(v, &params, HashSeeds::derive(master, i as u64), &mut rng)
        })
        .collect::<sparse_ldp::Result<Vec<_>>>()?;

    let truth = data.mean();
    let probes = ProbePolicy::Top(10).select(&truth);
    let est = server_estimate_many(&reports, &probes, &params)?;
    for (&x, e) in probes.iter().zip(&est) {
        println!("coord {x:>4}  true {:+.4}  est {e:+.4}", truth[x]);
    }
    let t: Vec<f64> = probes.iter().map(|&x| truth[x]).collect();
    println!("L-inf error over these probes: {:.4}", linf_error(&t, &est)?);
    Ok(())
}
