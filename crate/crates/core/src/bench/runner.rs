//! Runs a configured sweep and produces one averaged metrics row per cell.

use std::time::Instant;

use rayon::prelude::*;

use crate::baselines::{KFold, Naive, Sampling, SamplingValue};
use crate::bench::config::{ExperimentConfig, Level, MechanismKind};
use crate::bench::dataset::{gen_synthetic, Dataset, Synthetic};
use crate::bench::metrics::{linf_error, mse, MetricsRow, METRICS_SCHEMA};
use crate::error::{Error, Result};
use crate::mechanism::{client_encode, select_params, server_estimate_many, HashSeeds};
use crate::seed::{derive_client_seed, derive_subseed, rng_from_seed, SeedPurpose, WireSeed};
use crate::transport::{comm_cost_for_bins, deserialize, serialize_with, Accounting};
use crate::warmup::Bucketed;

const DATASET_LABEL: u64 = 0x4441_5441;
const NAIVE_CHUNK: usize = 512;

/// One repetition's probe estimates plus what the cell row reports.
#[derive(Clone, Debug, PartialEq)]
pub struct Trial {
    pub estimates: Vec<f64>,
    pub bins: Option<usize>,
    pub bytes_per_client: f64,
    pub wire_bytes_per_client: f64,
    pub note: String,
}

/// Where one cell's randomness and inputs come from.
pub struct Cell<'a> {
    pub mechanism: MechanismKind,
    pub level: Level,
    pub epsilon: f64,
    pub delta: f64,
    pub dataset: &'a Dataset,
    pub probes: &'a [usize],
}

pub fn dataset_seed(cfg: &ExperimentConfig, n: usize, d: usize, k: usize) -> u64 {
    let base = cfg.dataset_seed.unwrap_or_else(|| derive_subseed(cfg.master_seed, DATASET_LABEL));
    [n, d, k].iter().fold(base, |s, &x| derive_subseed(s, x as u64))
}

fn cell_seed(cfg: &ExperimentConfig, cell: &Cell) -> u64 {
    let ds = cell.dataset;
    [
        cell.mechanism.tag(),
        cell.level.tag(),
        cell.epsilon.to_bits(),
        cell.delta.to_bits(),
        ds.n() as u64,
        ds.d() as u64,
        ds.k() as u64,
    ]
    .iter()
    .fold(cfg.master_seed, |s, &x| derive_subseed(s, x))
}

fn client_rng(run_seed: u64, i: usize) -> rand_chacha::ChaCha8Rng {
    rng_from_seed(derive_client_seed(run_seed, i as u64, SeedPurpose::Noise))
}

/// Encodes every client of the cell with randomness keyed by `run_seed`
/// and estimates the probe coordinates.
pub fn run_trial(cfg: &ExperimentConfig, cell: &Cell, run_seed: u64) -> Result<Trial> {
    let ds = cell.dataset;
    let (n, d, k) = (ds.n(), ds.d(), ds.k());
    let clients = ds.vectors();
    let not_applicable = |what: &str| Err(Error::param(format!("{} runs only at {what} level", cell.mechanism.name())));
    match cell.mechanism {
        MechanismKind::Ours => {
            let budget = cell.level.budget(cell.epsilon, cell.delta, k)?;
            let params = select_params(k, d, n, budget, cfg.beta)?;
            let discretize = cfg.discretize.then_some(&params);
            let wire = (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut rng = client_rng(run_seed, i);
                    let report = client_encode(&clients[i], &params, HashSeeds::derive(run_seed, i as u64), &mut rng)?;
                    serialize_with(&report, discretize, &mut rng)
                })
                .collect::<Result<Vec<_>>>()?;
            let reports = wire.iter().map(|b| deserialize(b)).collect::<Result<Vec<_>>>()?;
            let mut note = params.regime().to_string();
            if cfg.discretize {
                note.push_str(", discretized");
            }
            Ok(Trial {
                estimates: server_estimate_many(&reports, cell.probes, &params)?,
                bins: Some(params.bins()),
                bytes_per_client: comm_cost_for_bins(params.bins(), Accounting::SingleSeed)? as f64,
                wire_bytes_per_client: wire[0].len() as f64,
                note,
            })
        }
        MechanismKind::KFold => {
            if cell.level != Level::Event {
                return not_applicable("event");
            }
            let kf = KFold::new(d, k, cell.epsilon)?;
            let reports = (0..n)
                .into_par_iter()
                .map(|i| kf.encode(&clients[i], &mut client_rng(run_seed, i)))
                .collect::<Result<Vec<_>>>()?;
            let bytes = kf.wire_bytes() as f64;
            Ok(Trial {
                estimates: kf.aggregate_many(&reports, cell.probes)?,
                bins: None,
                bytes_per_client: bytes,
                wire_bytes_per_client: bytes,
                note: pure_note(cell.delta, String::new()),
            })
        }
        MechanismKind::Sampling => {
            if cell.level != Level::User {
                return not_applicable("user");
            }
            let share = cfg.sampling_value_share;
            let s = Sampling::new(d, k, cell.epsilon, SamplingValue::Split { value_share: share })?;
            let reports = (0..n)
                .into_par_iter()
                .map(|i| s.encode(&clients[i], &mut client_rng(run_seed, i)))
                .collect::<Result<Vec<_>>>()?;
            let bytes = s.wire_bytes() as f64;
            Ok(Trial {
                estimates: s.aggregate_many(&reports, cell.probes)?,
                bins: None,
                bytes_per_client: bytes,
                wire_bytes_per_client: bytes,
                note: pure_note(cell.delta, format!("value share {share}")),
            })
        }
        MechanismKind::Naive => {
            let naive = Naive::new(d, cell.level.budget(cell.epsilon, 0.0, k)?)?;
            let probes = cell.probes;
            // Noise on unprobed coordinates never reaches a metric, so only
            // probed coordinates are drawn.
            let chunk_sums = (0..n.div_ceil(NAIVE_CHUNK))
                .into_par_iter()
                .map(|c| {
                    let mut acc = vec![0.0; probes.len()];
                    for i in c * NAIVE_CHUNK..((c + 1) * NAIVE_CHUNK).min(n) {
                        let report = naive.encode_coords(&clients[i], probes, &mut client_rng(run_seed, i))?;
                        acc.iter_mut().zip(report).for_each(|(a, r)| *a += r);
                    }
                    Ok(acc)
                })
                .collect::<Result<Vec<_>>>()?;
            let mut estimates = vec![0.0; probes.len()];
            for sums in &chunk_sums {
                estimates.iter_mut().zip(sums).for_each(|(e, s)| *e += s);
            }
            estimates.iter_mut().for_each(|e| *e /= n as f64);
            let bytes = naive.wire_bytes() as f64;
            Ok(Trial {
                estimates,
                bins: None,
                bytes_per_client: bytes,
                wire_bytes_per_client: bytes,
                note: pure_note(cell.delta, String::new()),
            })
        }
        MechanismKind::Bucketed => {
            if cell.level != Level::Event {
                return not_applicable("event");
            }
            let b = Bucketed::new(d, k, cell.epsilon)?;
            let reports = (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut rng = client_rng(run_seed, i);
                    let seed = WireSeed::random(&mut rng);
                    b.encode(&clients[i], seed, &mut rng)
                })
                .collect::<Result<Vec<_>>>()?;
            let bytes = reports[0].wire_bytes() as f64;
            Ok(Trial {
                estimates: b.aggregate_many(&reports, cell.probes)?,
                bins: Some(k),
                bytes_per_client: bytes,
                wire_bytes_per_client: bytes,
                note: pure_note(cell.delta, String::new()),
            })
        }
    }
}

fn pure_note(delta: f64, note: String) -> String {
    if delta > 0.0 {
        let sep = if note.is_empty() { "" } else { ", " };
        format!("{note}{sep}pure epsilon, delta unused")
    } else {
        note
    }
}

/// Averages `cfg.runs` trials of one cell into a row. Any error becomes a
/// failed row carrying the reason.
pub fn run_cell(cfg: &ExperimentConfig, cell: &Cell, truth: &[f64]) -> MetricsRow {
    let ds = cell.dataset;
    let mut row = MetricsRow {
        schema: METRICS_SCHEMA,
        mechanism: cell.mechanism.name().into(),
        regime: cell.level.to_string(),
        k: ds.k(),
        d: ds.d(),
        n: ds.n(),
        epsilon: cell.epsilon,
        delta: cell.delta,
        beta: cfg.beta,
        bins: None,
        linf: 0.0,
        mse: 0.0,
        bytes_per_client: 0.0,
        wire_bytes_per_client: 0.0,
        wall_ms: 0.0,
        runs: cfg.runs,
        master_seed: cfg.master_seed,
        status: "ok".into(),
        note: String::new(),
    };
    let seed = cell_seed(cfg, cell);
    let start = Instant::now();
    let mut outcome = Ok(());
    for r in 0..cfg.runs {
        let trial = run_trial(cfg, cell, derive_subseed(seed, r as u64)).and_then(|t| {
            let linf = linf_error(truth, &t.estimates)?;
            let mse = mse(truth, &t.estimates)?;
            Ok((t, linf, mse))
        });
        match trial {
            Ok((t, linf, mse)) => {
                row.linf += linf / cfg.runs as f64;
                row.mse += mse / cfg.runs as f64;
                row.bins = t.bins;
                row.bytes_per_client = t.bytes_per_client;
                row.wire_bytes_per_client = t.wire_bytes_per_client;
                row.note = t.note;
            }
            Err(e) => {
                outcome = Err(e);
                break;
            }
        }
    }
    if let Err(e) = outcome {
        log::warn!("{} / {}: {e}", row.mechanism, row.regime);
        row.linf = 0.0;
        row.mse = 0.0;
        row.status = "failed".into();
        row.note = e.to_string();
    }
    if cfg.timing {
        row.wall_ms = start.elapsed().as_secs_f64() * 1e3 / cfg.runs as f64;
    }
    row
}

fn datasets(cfg: &ExperimentConfig) -> Vec<Result<Dataset>> {
    if let Some(path) = &cfg.dataset {
        return vec![Dataset::read(path)];
    }
    let spec = Synthetic {
        zipf_s: cfg.zipf_s,
        mu: cfg.mu,
        sigma: cfg.sigma,
    };
    let mut out = Vec::new();
    for &n in &cfg.n {
        for &d in &cfg.d {
            for &k in &cfg.k {
                out.push(gen_synthetic(n, d, k, spec, dataset_seed(cfg, n, d, k)));
            }
        }
    }
    out
}

fn run_all(cfg: &ExperimentConfig) -> Result<Vec<MetricsRow>> {
    cfg.validate()?;
    let policy = cfg.probe_policy()?;
    let mut rows = Vec::new();
    for ds in datasets(cfg) {
        let ds = ds?;
        let mean = ds.mean();
        let probes = policy.select(&mean);
        let truth: Vec<f64> = probes.iter().map(|&x| mean[x]).collect();
        for &level in &cfg.levels {
            for &epsilon in &cfg.epsilon {
                for &delta in &cfg.delta {
                    for &mechanism in &cfg.mechanisms {
                        let cell = Cell {
                            mechanism,
                            level,
                            epsilon,
                            delta,
                            dataset: &ds,
                            probes: &probes,
                        };
                        rows.push(run_cell(cfg, &cell, &truth));
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// Runs the whole sweep on `cfg.threads` worker threads (all cores when 0).
/// Rows come out in sweep order and, with timing off, are identical for any
/// thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<MetricsRow>> {
    if cfg.threads == 0 {
        return run_all(cfg);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?
        .install(|| run_all(cfg))
}
