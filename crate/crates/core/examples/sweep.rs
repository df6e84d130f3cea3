//! Runs a TOML sweep and prints the metrics CSV.
//!
//! cargo run --release --example sweep -- configs/quick.toml

use sparse_ldp::bench::{run_experiment, to_csv_string, ExperimentConfig};

fn main() -> sparse_ldp::Result<()> {
    env_logger::init();
    let cfg = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::load(path.as_ref())?,
        None => ExperimentConfig::from_toml(include_str!("../configs/quick.toml"))?,
    };
    print!("{}", to_csv_string(&run_experiment(&cfg)?)?);
    Ok(())
}
