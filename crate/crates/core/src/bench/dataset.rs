//! Client datasets: synthetic Zipf data, CSV ingestion and a plain-text file
//! format.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal, Zipf};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::laplace::open_unit;
use crate::seed::{derive_client_seed, rng_from_seed, SeedPurpose};
use crate::vector::SparseVector;

/// Generator knobs for synthetic data.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Synthetic {
    pub zipf_s: f64,
    pub mu: f64,
    pub sigma: f64,
}

impl Default for Synthetic {
    fn default() -> Self {
        Synthetic {
            zipf_s: 1.4,
            mu: 1.0,
            sigma: 0.3,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Synthetic { spec: Synthetic, seed: u64 },
    Csv { path: PathBuf },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Synthetic { spec, seed } => write!(
                f,
                "synthetic zipf_s={} mu={} sigma={} seed={seed}",
                spec.zipf_s, spec.mu, spec.sigma
            ),
            Provenance::Csv { path } => write!(f, "csv path={}", path.display()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    d: usize,
    k: usize,
    vectors: Vec<SparseVector>,
    provenance: Provenance,
}

impl Dataset {
    pub fn new(d: usize, k: usize, vectors: Vec<SparseVector>, provenance: Provenance) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::param("a dataset needs at least one client"));
        }
        if let Some(i) = vectors.iter().position(|v| v.dim() != d || v.nnz() > k) {
            return Err(Error::param(format!("client {i} does not fit d = {d}, k = {k}")));
        }
        Ok(Dataset {
            d,
            k,
            vectors,
            provenance,
        })
    }

    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn vectors(&self) -> &[SparseVector] {
        &self.vectors
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// The population mean, accumulated client by client.
    pub fn mean(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.d];
        for v in &self.vectors {
            for &(j, x) in v.entries() {
                acc[j] += x;
            }
        }
        let n = self.n() as f64;
        acc.iter_mut().for_each(|x| *x /= n);
        acc
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "# sparse-ldp dataset v1 n={} d={} k={}", self.n(), self.d, self.k)?;
        writeln!(w, "# provenance: {}", self.provenance)?;
        for v in &self.vectors {
            let line: Vec<String> = v.entries().iter().map(|(j, x)| format!("{j}:{x}")).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::DatasetFormat(format!("{}:{line}: {msg}", path.display()));
        let mut lines = BufReader::new(File::open(path)?).lines();
        let header = lines.next().transpose()?.ok_or_else(|| bad(1, "empty file"))?;
        let fields: HashMap<&str, usize> = header
            .strip_prefix("# sparse-ldp dataset v1 ")
            .ok_or_else(|| bad(1, "not a v1 dataset header"))?
            .split_whitespace()
            .map(|kv| {
                let (key, value) = kv.split_once('=').ok_or_else(|| bad(1, "bad header field"))?;
                Ok((key, value.parse().map_err(|_| bad(1, "bad header number"))?))
            })
            .collect::<Result<_>>()?;
        let get = |key| fields.get(key).copied().ok_or_else(|| bad(1, "header misses n, d or k"));
        let (n, d, k) = (get("n")?, get("d")?, get("k")?);
        let prov_line = lines.next().transpose()?.ok_or_else(|| bad(2, "missing provenance"))?;
        let provenance = parse_provenance(
            prov_line
                .strip_prefix("# provenance: ")
                .ok_or_else(|| bad(2, "missing provenance"))?,
        )
        .ok_or_else(|| bad(2, "unreadable provenance"))?;
        let mut vectors = Vec::with_capacity(n);
        for (i, line) in lines.enumerate() {
            let line = line?;
            let entries = line
                .split_whitespace()
                .map(|tok| {
                    let (j, x) = tok.split_once(':').ok_or_else(|| bad(i + 3, "expected index:value"))?;
                    let j = j.parse::<usize>().map_err(|_| bad(i + 3, "bad index"))?;
                    let x = x.parse::<f64>().map_err(|_| bad(i + 3, "bad value"))?;
                    Ok((j, x))
                })
                .collect::<Result<Vec<_>>>()?;
            vectors.push(SparseVector::new(d, k, entries).map_err(|e| bad(i + 3, &e.to_string()))?);
        }
        if vectors.len() != n {
            return Err(bad(vectors.len() + 2, &format!("header says {n} clients, found {}", vectors.len())));
        }
        Dataset::new(d, k, vectors, provenance)
    }
}

fn parse_provenance(s: &str) -> Option<Provenance> {
    if let Some(path) = s.strip_prefix("csv path=") {
        return Some(Provenance::Csv { path: path.into() });
    }
    let rest = s.strip_prefix("synthetic ")?;
    let kv: HashMap<&str, &str> = rest.split_whitespace().filter_map(|t| t.split_once('=')).collect();
    Some(Provenance::Synthetic {
        spec: Synthetic {
            zipf_s: kv.get("zipf_s")?.parse().ok()?,
            mu: kv.get("mu")?.parse().ok()?,
            sigma: kv.get("sigma")?.parse().ok()?,
        },
        seed: kv.get("seed")?.parse().ok()?,
    })
}

/// `k` distinct coordinates with probability proportional to `(rank)^(-s)`,
/// coordinate 0 being rank 1.
pub fn zipf_without_replacement<R: Rng + ?Sized>(d: usize, k: usize, s: f64, rng: &mut R) -> Result<Vec<usize>> {
    if k > d {
        return Err(Error::param(format!("cannot pick k = {k} distinct coordinates out of d = {d}")));
    }
    if k == d {
        return Ok((0..d).collect());
    }
    if 2 * k <= d {
        let zipf = Zipf::new(d as f64, s).map_err(|e| Error::param(format!("zipf: {e}")))?;
        let mut taken = vec![false; d];
        let mut out = Vec::with_capacity(k);
        while out.len() < k {
            let j = zipf.sample(rng) as usize - 1;
            if !taken[j] {
                taken[j] = true;
                out.push(j);
            }
        }
        return Ok(out);
    }
    // Exponential-key weighted sampling: the k smallest E_j / w_j.
    let mut keys: Vec<(f64, usize)> = (0..d)
        .map(|j| (-open_unit(rng).ln() * ((j + 1) as f64).powf(s), j))
        .collect();
    keys.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0));
    keys.truncate(k);
    keys.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(keys.into_iter().map(|(_, j)| j).collect())
}

/// `n` clients, each with `k` Zipf-distributed coordinates holding
/// `Normal(mu, sigma)` values clipped to `[-1, 1]`.
pub fn gen_synthetic(n: usize, d: usize, k: usize, spec: Synthetic, master_seed: u64) -> Result<Dataset> {
    if n == 0 || k == 0 || k > d {
        return Err(Error::param(format!("need n >= 1 and 1 <= k <= d, got n={n}, k={k}, d={d}")));
    }
    if !(spec.zipf_s > 1.0) {
        return Err(Error::param(format!("zipf exponent must exceed 1, got {}", spec.zipf_s)));
    }
    let normal = Normal::new(spec.mu, spec.sigma).map_err(|e| Error::param(format!("normal: {e}")))?;
    let vectors = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(derive_client_seed(master_seed, i as u64, SeedPurpose::Dataset));
            let coords = zipf_without_replacement(d, k, spec.zipf_s, &mut rng)?;
            let entries: Vec<(usize, f64)> = coords
                .into_iter()
                .map(|j| (j, normal.sample(&mut rng).clamp(-1.0, 1.0)))
                .collect();
            SparseVector::new(d, k, entries)
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(
        d,
        k,
        vectors,
        Provenance::Synthetic {
            spec,
            seed: master_seed,
        },
    )
}

/// Reads `user_id,item_id,value` rows (an optional header row is skipped).
/// Ids become dense indices in order of first appearance, values map
/// affinely from `range` onto `[-1, 1]` (zeros are dropped), a repeated `(user, item)` pair keeps
/// its first row, and users with more than `k` records keep a seeded uniform
/// subset of `k`.
pub fn ingest_csv(path: &Path, k: usize, range: (f64, f64), seed: u64) -> Result<Dataset> {
    let (lo, hi) = range;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::param(format!("value range ({lo}, {hi}) is empty or not finite")));
    }
    if k == 0 {
        return Err(Error::param("k must be positive"));
    }
    let csv_err = |line: u64, message: String| Error::Csv {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(0, e.to_string()))?;

    let mut users: HashMap<String, usize> = HashMap::new();
    let mut items: HashMap<String, usize> = HashMap::new();
    let mut records: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    for (row, result) in reader.records().enumerate() {
        let record = result.map_err(|e| csv_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(row as u64 + 1, |p| p.line());
        if record.len() != 3 {
            return Err(csv_err(line, format!("expected 3 fields, found {}", record.len())));
        }
        let value: f64 = match record[2].parse() {
            Ok(v) => v,
            Err(_) if row == 0 => continue,
            Err(_) => return Err(csv_err(line, format!("value {:?} is not a number", &record[2]))),
        };
        if !value.is_finite() || value < lo || value > hi {
            return Err(csv_err(line, format!("value {value} outside [{lo}, {hi}]")));
        }
        let next_user = users.len();
        let u = *users.entry(record[0].to_string()).or_insert(next_user);
        let next_item = items.len();
        let it = *items.entry(record[1].to_string()).or_insert(next_item);
        if u == records.len() {
            records.push(Vec::new());
        }
        let normalized = 2.0 * (value - lo) / (hi - lo) - 1.0;
        if seen.insert((u, it)) && normalized != 0.0 {
            records[u].push((it, normalized));
        }
    }
    if records.is_empty() {
        return Err(csv_err(0, "no data rows".into()));
    }
    let d = items.len();
    let k = k.min(d);
    let vectors = records
        .into_iter()
        .enumerate()
        .map(|(u, mut recs)| {
            if recs.len() > k {
                let mut rng = rng_from_seed(derive_client_seed(seed, u as u64, SeedPurpose::Dataset));
                let mut keep = index::sample(&mut rng, recs.len(), k).into_vec();
                keep.sort_unstable();
                recs = keep.into_iter().map(|i| recs[i]).collect();
            }
            SparseVector::new(d, k, recs)
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(d, k, vectors, Provenance::Csv { path: path.to_path_buf() })
}
