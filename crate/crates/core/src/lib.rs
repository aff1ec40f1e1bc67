//! Biodistance analysis for binary non-metric traits.
//!
//! The pipeline: trait counts are variance-stabilized with the Anscombe
//! transform, compared pairwise through the Mean Measure of Divergence (MMD)
//! and its standardized form, and optionally re-weighted by a parametric
//! bootstrap of the per-trait standard deviations. Diagnostics quantify how
//! close the bootstrapped distance matrix is to a rescaling of the plain one
//! (when it is, distance rank order - and any UPGMA dendrogram built on it -
//! is stable); a simulation module generates artificial datasets for
//! calibration experiments.
//!
//! All stochastic work flows through substreams derived from a master seed,
//! so results are reproducible bit-for-bit at any level of parallelism.

pub mod biodistance;
pub mod bootstrap;
pub mod cluster;
pub mod diagnostics;
mod error;
pub mod simulate;
pub mod special;
pub mod stochastic;
pub mod trait_data;
pub mod transform;

pub use biodistance::{
    chi2_pair, distance_matrix, mmd_pair, mmd_sigma_pair, st_mmd_pair, DistanceMatrix, MatrixKind,
    PairTest, Standardization,
};
pub use bootstrap::{
    bootstrap_distance_matrix, bootstrap_sd, bootstrap_table, resampled_sd, BootstrapConfig,
    BootstrapReport, SmallNPolicy,
};
pub use cluster::{topology_equal, upgma, Dendrogram, Merge};
pub use diagnostics::{
    information_fraction, information_fraction_normalized, representativeness_report,
    rescale_stats, scaling_fit, DiagnosticThresholds, RepresentativenessReport, RescaleStats,
    ScalingFit, Verdict,
};
pub use error::{Error, Result};
pub use simulate::{end_to_end_study, generate, SimConfig, StudyReport};
pub use stochastic::{derive_stream, GaussianSource, RandomStream, StreamPurpose};
pub use trait_data::{
    aggregate, parse_individuals, IndividualRecord, IndividualTable, TraitCounts, TraitValue,
};
pub use transform::{anscombe_theta, trait_sigma, transform_counts, SigmaKind, ThetaTable};
