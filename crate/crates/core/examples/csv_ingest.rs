//! Ratings from a user,item,value CSV, normalized to [-1, 1] and estimated
//! at user level.
//!
//! cargo run --example csv_ingest [ratings.csv]

use std::io::Write;

use sparse_ldp::bench::{ingest_csv, ProbePolicy};
use sparse_ldp::seed::rng_from_seed;
use sparse_ldp::{client_encode, select_params, server_estimate_many, HashSeeds, PrivacyBudget};

fn main() -> sparse_ldp::Result<()> {
    let mut tmp = None;
    let path = match std::env::args().nth(1) {
        Some(p) => p.into(),
        None => {
            // 3000 users rating 40 items on a 1-5 scale.
            let mut f = tempfile_in_target()?;
            writeln!(f.1, "user_id,item_id,value")?;
            for u in 0..3000u64 {
                for j in 0..(u % 7 + 1) {
                    let item = (u * 31 + j * j * 7) % 40;
                    writeln!(f.1, "u{u},item{item},{}", 1 + (u + item) % 5)?;
                }
            }
            tmp = Some(f.0.clone());
            f.0
        }
    };
    let k = 4;
    let data = ingest_csv(&path, k, (1.0, 5.0), 11)?;
    println!("{} users, {} items, at most {} ratings each", data.n(), data.d(), data.k());

    let params = select_params(data.k(), data.d(), data.n(), PrivacyBudget::user_level(1.0, data.k())?, 0.05)?;
    let mut rng = rng_from_seed(12);
    let reports = data
        .vectors()
        .iter()
        .map(|v| client_encode(v, &params, HashSeeds::random(&mut rng), &mut rng))
        .collect::<sparse_ldp::Result<Vec<_>>>()?;
    let truth = data.mean();
    let probes = ProbePolicy::Top(5).select(&truth);
    for (&x, e) in probes.iter().zip(server_estimate_many(&reports, &probes, &params)?) {
        println!("item {x:>2}: true {:+.3}  est {e:+.3}", truth[x]);
    }
    if let Some(p) = tmp {
        std::fs::remove_file(p)?;
    }
    Ok(())
}

fn tempfile_in_target() -> std::io::Result<(std::path::PathBuf, std::fs::File)> {
    let path = std::env::temp_dir().join(format!("sparse-ldp-ratings-{}.csv", std::process::id()));
    let f = std::fs::File::create(&path)?;
    Ok((path, f))
}
