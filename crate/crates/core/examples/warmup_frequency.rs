//! Item frequencies from binary vectors: the one-item hashing oracle and the
//! bucketed multi-item randomizer.
//!
//! cargo run --release --example warmup_frequency

use sparse_ldp::bench::{gen_synthetic, Synthetic};
use sparse_ldp::seed::rng_from_seed;
use sparse_ldp::warmup::{Blh, Bucketed};
use sparse_ldp::{SparseVector, WireSeed};

fn main() -> sparse_ldp::Result<()> {
    let (n, d, k, eps) = (50_000, 200, 8, 1.0);
    let mut rng = rng_from_seed(1);

    // One item per client.
    let oracle = Blh::new(eps)?;
    let items: Vec<usize> = (0..n).map(|i| (i * i) % 17).collect();
    let reports: Vec<_> = items.iter().map(|&x| oracle.encode(x, WireSeed::random(&mut rng), &mut rng)).collect();
    println!("one item per client, flip probability {:.3}", oracle.flip_probability());
    for x in [0, 1, 4, 5] {
        let truth = items.iter().filter(|&&i| i == x).count() as f64 / n as f64;
        println!("  item {x}: true {truth:.4}  est {:.4}", oracle.aggregate(&reports, x)?);
    }

    // k items per client: hash them into k buckets, keep lone items.
    let data = gen_synthetic(n, d, k, Synthetic::default(), 2)?;
    let sets: Vec<SparseVector> = data
        .vectors()
        .iter()
        .map(|v| SparseVector::from_items(d, k, &v.items().collect::<Vec<_>>()))
        .collect::<sparse_ldp::Result<_>>()?;
    let bucketed = Bucketed::new(d, k, eps)?;
    println!("{k} items per client, survival probability {:.4}", bucketed.survival_probability());
    let reports = sets
        .iter()
        .map(|v| bucketed.encode(v, WireSeed::random(&mut rng), &mut rng))
        .collect::<sparse_ldp::Result<Vec<_>>>()?;
    for x in [0, 1, 10, 100] {
        let truth = sets.iter().filter(|v| v.get(x) != 0.0).count() as f64 / n as f64;
        println!("  item {x:>3}: true {truth:.4}  est {:.4}", bucketed.aggregate(&reports, x)?);
    }
    println!("report size {} bytes", reports[0].wire_bytes());
    Ok(())
}
