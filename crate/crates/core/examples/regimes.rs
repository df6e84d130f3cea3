//! The parameter table across neighbor distances L, with and without delta.
//!
//! cargo run --example regimes

use sparse_ldp::{select_params, Error, PrivacyBudget};

fn main() -> sparse_ldp::Result<()> {
    let (k, d, n) = (512, 10_000, 100_000);
    for delta in [0.0, 1e-6] {
        println!("delta = {delta}");
        for l in [1.0, 2.0, 8.0, 32.0, 128.0, 1024.0] {
            let budget = PrivacyBudget::new(1.0, delta, l, k)?;
            match select_params(k, d, n, budget, 0.05) {
                Ok(p) => println!(
                    "  L = {l:>6}: {:<9} b = {:>3}  delta' = {}  noise magnitude {:.2}",
                    p.regime().to_string(),
                    p.bins(),
                    p.budget().delta(),
                    p.noise_magnitude()
                ),
                Err(Error::UnsatisfiableRegime(why)) => println!("  L = {l:>6}: unsatisfiable ({why})"),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(())
}
