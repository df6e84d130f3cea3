//! Sparse vector mean estimation: hash each coordinate into one of `b` bins
//! with a random sign, add Laplace noise per bin, and unfold on the server.

mod audit;
mod client;
mod params;
mod server;

pub use audit::{
    bin_difference, density_ratio_bound, density_ratio_check, random_neighbor_pair, sensitivity_audit, SensitivityAudit,
};
pub use client::{client_encode, clipped_bins, raw_bins, ClientReport, HashSeeds};
pub use params::{
    select_params, squeeze_condition_holds, squeeze_threshold, user_level_clip_range, MechanismParams, Regime,
};
pub use server::{server_estimate, server_estimate_many, DecodedReports};
