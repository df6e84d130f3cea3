//! Local differential privacy for k-sparse vectors.
//!
//! Each client holds a vector in `[-1, 1]^d` with at most `k` non-zeros. The
//! main mechanism folds it into `b` signed hash bins, adds Laplace noise and
//! ships the bins with two short hash seeds; the server unfolds every report
//! to estimate any coordinate of the population mean.

pub mod baselines;
pub mod bench;
pub mod budget;
pub mod error;
pub mod hashing;
pub mod laplace;
pub mod mechanism;
pub(crate) mod numeric;
pub mod seed;
pub mod transport;
pub mod vector;
pub mod warmup;

pub use budget::{NoiseMode, PrivacyBudget};
pub use error::{Error, Result};
pub use mechanism::{
    client_encode, select_params, server_estimate, server_estimate_many, ClientReport, DecodedReports, HashSeeds,
    MechanismParams, Regime,
};
pub use seed::WireSeed;
pub use vector::SparseVector;
