use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hashing::{BinHash, SignHash};
use crate::mechanism::client::ClientReport;
use crate::mechanism::params::MechanismParams;
use crate::numeric::pairwise_sum_by;

/// Hash functions rebuilt from every report's seeds, ready for repeated
/// per-coordinate queries.
pub struct DecodedReports<'a> {
    reports: &'a [ClientReport],
    hashes: Vec<(BinHash, SignHash)>,
    d: usize,
}

impl<'a> DecodedReports<'a> {
    pub fn new(reports: &'a [ClientReport], params: &MechanismParams) -> Result<Self> {
        if reports.is_empty() {
            return Err(Error::param("no reports to aggregate"));
        }
        let hashes = reports
            .iter()
            .map(|r| {
                if r.bins() != params.bins() {
                    return Err(Error::param(format!(
                        "report carries {} bins, parameters say {}",
                        r.bins(),
                        params.bins()
                    )));
                }
                r.seeds().hashes(params.d(), params.bins())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DecodedReports {
            reports,
            hashes,
            d: params.d(),
        })
    }

    /// `(1/n) sum_i s_i(x) B_{i, h_i(x)}`.
    pub fn estimate(&self, x: usize) -> Result<f64> {
        if x >= self.d {
            return Err(Error::param(format!("coordinate {x} outside [0, {})", self.d)));
        }
        let total = pairwise_sum_by(self.reports.len(), &|i| {
            let (h, s) = &self.hashes[i];
            s.sign_unchecked(x) as f64 * self.reports[i].bin_values[h.bin_unchecked(x)]
        });
        Ok(total / self.reports.len() as f64)
    }
}

/// Server-side estimate of the mean of coordinate `x`.
pub fn server_estimate(reports: &[ClientReport], x: usize, params: &MechanismParams) -> Result<f64> {
    DecodedReports::new(reports, params)?.estimate(x)
}

/// Estimates for each probe, in probe order. Probes are evaluated in
/// parallel; each probe's sum has a fixed association order.
pub fn server_estimate_many(
    reports: &[ClientReport],
    probes: &[usize],
    params: &MechanismParams,
) -> Result<Vec<f64>> {
    let decoded = DecodedReports::new(reports, params)?;
    probes.par_iter().map(|&x| decoded.estimate(x)).collect()
}
