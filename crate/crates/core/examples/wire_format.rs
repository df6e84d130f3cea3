//! What a client actually sends, with and without integer discretization.
//!
//! cargo run --example wire_format

use sparse_ldp::seed::rng_from_seed;
use sparse_ldp::transport::{comm_cost, deserialize, discretize, serialize, transmit_bound, Accounting};
use sparse_ldp::{client_encode, select_params, HashSeeds, PrivacyBudget, SparseVector};

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect::<Vec<_>>().join(" ")
}

fn main() -> sparse_ldp::Result<()> {
    let (k, d, n) = (16, 1000, 10_000);
    let params = select_params(k, d, n, PrivacyBudget::event_level(1.0, k)?, 0.05)?;
    let v = SparseVector::new(d, k, [(3, 0.8), (41, -0.5), (977, 1.0)])?;
    let mut rng = rng_from_seed(5);
    let report = client_encode(&v, &params, HashSeeds::random(&mut rng), &mut rng)?;

    let bytes = serialize(&report)?;
    println!("float report, b = {}: {} bytes", report.bins(), bytes.len());
    println!("  {}", hex(&bytes));
    assert_eq!(serialize(&deserialize(&bytes)?)?, bytes);

    println!("transmit bound U = {:.2}", transmit_bound(&params));
    let rounded = discretize(&report, &params, &mut rng)?;
    let bytes = serialize(&rounded)?;
    println!("discretized values {:?}", rounded.bin_values);
    println!("  {}", hex(&bytes));

    println!(
        "cost: wire {} bytes, single-seed {} bytes",
        comm_cost(&report, Accounting::Wire)?,
        comm_cost(&report, Accounting::SingleSeed)?
    );
    Ok(())
}
