use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sparse_ldp::bench::{append_metrics, gen_synthetic, ingest_csv, run_experiment, to_csv_string, ExperimentConfig};
use sparse_ldp::bench::{Level, Synthetic};
use sparse_ldp::mechanism::{clipped_bins, density_ratio_check, random_neighbor_pair, select_params, sensitivity_audit};
use sparse_ldp::seed::rng_from_seed;
use sparse_ldp::{HashSeeds, Result};

#[derive(Parser)]
#[command(version, about = "Private mean estimation for sparse vectors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic Zipf dataset.
    Gen {
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        d: usize,
        #[arg(long, default_value_t = 64)]
        k: usize,
        #[arg(long, default_value_t = 1.4)]
        zipf_s: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 0.3)]
        sigma: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Convert a user_id,item_id,value CSV into a dataset file.
    Ingest {
        csv: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, allow_hyphen_values = true, default_value_t = -1.0)]
        lo: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        hi: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Run the sweep described by a TOML config.
    Run {
        config: PathBuf,
        /// Metrics CSV to append to; printed to stdout when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        /// Clip and round bin values to integers before transmission.
        #[arg(long)]
        discretize: bool,
    },
    /// Empirical sensitivity and density-ratio checks on random neighbors.
    Audit {
        #[arg(long, default_value_t = 64)]
        k: usize,
        #[arg(long, default_value_t = 1000)]
        d: usize,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        /// `event`, `user` or `L=<value>`.
        #[arg(long, default_value = "event")]
        level: Level,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, default_value_t = 0.05)]
        beta: f64,
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Gen { n, d, k, zipf_s, mu, sigma, seed, out } => {
            let ds = gen_synthetic(n, d, k, Synthetic { zipf_s, mu, sigma }, seed)?;
            ds.write(&out)?;
            eprintln!("wrote {} clients to {}", ds.n(), out.display());
        }
        Command::Ingest { csv, k, lo, hi, seed, out } => {
            let ds = ingest_csv(&csv, k, (lo, hi), seed)?;
            ds.write(&out)?;
            eprintln!("wrote {} clients over {} items to {}", ds.n(), ds.d(), out.display());
        }
        Command::Run { config, out, threads, discretize } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            cfg.threads = threads.unwrap_or(cfg.threads);
            cfg.discretize |= discretize;
            let rows = run_experiment(&cfg)?;
            match out {
                Some(path) => append_metrics(&path, &rows)?,
                None => print!("{}", to_csv_string(&rows)?),
            }
        }
        Command::Audit { k, d, n, level, epsilon, delta, beta, pairs, trials, seed } => {
            let budget = level.budget(epsilon, delta, k)?;
            let params = select_params(k, d, n, budget, beta)?;
            let l = budget.neighbor_distance();
            let mut rng = rng_from_seed(seed);
            let (mut max_l1, mut worst_tail, mut worst_ratio) = (0.0f64, 0.0f64, 0.0f64);
            for _ in 0..pairs {
                let (v, w) = random_neighbor_pair(d, k, l, &mut rng)?;
                let audit = sensitivity_audit(&v, &w, &params, trials, &mut rng)?;
                max_l1 = max_l1.max(audit.max_l1);
                worst_tail = worst_tail.max(audit.tail_rate);
                let seeds = HashSeeds::random(&mut rng);
                let (a, b) = (clipped_bins(&v, &params, seeds)?, clipped_bins(&w, &params, seeds)?);
                let probes: Vec<Vec<f64>> = (0..8)
                    .map(|_| a.iter().map(|x| x + rand::Rng::random_range(&mut rng, -3.0..3.0) * params.laplace_scale()).collect())
                    .collect();
                let ratio = density_ratio_check(&a, &b, params.noise_magnitude(), epsilon, &probes)?;
                worst_ratio = worst_ratio.max(ratio);
            }
            println!("regime        {}", params.regime());
            println!("bins          {}", params.bins());
            println!("noise scale   {:.6}", params.laplace_scale());
            println!("max L1 diff   {max_l1:.6} (L = {l})");
            println!("tail rate     {worst_tail:.6} (delta = {})", budget.delta());
            println!("log ratio     {worst_ratio:.6} (epsilon = {epsilon})");
        }
    }
    Ok(())
}
