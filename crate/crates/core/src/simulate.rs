//! Artificial population generator with size and measurement thresholds, for
//! representativeness experiments.
//!
//! Each population draws its size uniformly from [lambda1, max_size]; each
//! trait then draws its measured count from [min(lambda2, size), size] and a
//! uniform presence count. High thresholds produce well-measured data, both
//! thresholds at 2 produce the sparse badly-represented regime.

use crate::biodistance::{distance_matrix, Standardization};
use crate::bootstrap::{bootstrap_table, BootstrapConfig};
use crate::cluster::{topology_equal, upgma};
use crate::diagnostics::{rescale_stats, RescaleStats};
use crate::error::{Error, Result};
use crate::stochastic::{derive_stream, StreamPurpose};
use crate::trait_data::TraitCounts;
use crate::transform::transform_counts;

/// Generator parameters. `lambda1` bounds the population sizes from below,
/// `lambda2` the per-trait measured counts (clamped to the population size
/// for small populations).
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub n_populations: usize,
    pub n_traits: usize,
    pub max_size: u32,
    pub lambda1: u32,
    pub lambda2: u32,
    pub master_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_populations: 10,
            n_traits: 13,
            max_size: 100,
            lambda1: 50,
            lambda2: 45,
            master_seed: 42,
        }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if self.n_populations < 2 {
            return Err(Error::Domain(format!(
                "at least 2 populations are required, got {}",
                self.n_populations
            )));
        }
        if self.n_traits == 0 {
            return Err(Error::Domain("at least 1 trait is required".into()));
        }
        if self.lambda1 == 0 || self.lambda2 == 0 {
            return Err(Error::Domain("thresholds must be positive".into()));
        }
        if self.lambda1 > self.max_size || self.lambda2 > self.max_size {
            return Err(Error::Domain(format!(
                "thresholds ({}, {}) must not exceed max_size {}",
                self.lambda1, self.lambda2, self.max_size
            )));
        }
        Ok(())
    }
}

/// Generates a synthetic dataset. Deterministic in the config: population
/// sizes come from per-population streams, the per-trait (measured, present)
/// pairs from per-trait streams, so the output is reproducible at any level
/// of parallelism.
pub fn generate(config: &SimConfig) -> Result<TraitCounts> {
    config.validate()?;
    let p = config.n_populations;
    let m = config.n_traits;
    let mut pop_size = Vec::with_capacity(p);
    let mut n = vec![vec![0u32; m]; p];
    let mut k = vec![vec![0u32; m]; p];
    for pi in 0..p {
        let mut pop_stream = derive_stream(config.master_seed, pi, None, StreamPurpose::Simulate);
        let size = pop_stream.next_int_inclusive(config.lambda1, config.max_size);
        pop_size.push(size);
        for ti in 0..m {
            let mut cell_stream =
                derive_stream(config.master_seed, pi, Some(ti), StreamPurpose::Simulate);
            let measured = cell_stream.next_int_inclusive(config.lambda2.min(size), size);
            let present = cell_stream.next_int_inclusive(0, measured);
            n[pi][ti] = measured;
            k[pi][ti] = present;
        }
    }
    TraitCounts::new(
        (0..p).map(|i| format!("P{}", i + 1)).collect(),
        (0..m).map(|i| format!("T{}", i + 1)).collect(),
        n,
        k,
        pop_size,
    )
}

/// Outcome of one generate-and-compare experiment.
#[derive(Debug, Clone)]
pub struct StudyReport {
    pub rescale: RescaleStats,
    /// Whether the plain and bootstrapped dendrograms have the same topology.
    pub topology_preserved: bool,
}

/// Generates a dataset, computes the plain and bootstrapped standardized
/// matrices, and compares them: rescaling statistics plus a same/different
/// topology verdict.
pub fn end_to_end_study(sim: &SimConfig, boot: &BootstrapConfig) -> Result<StudyReport> {
    let counts = generate(sim)?;
    let table = transform_counts(&counts);
    let plain = distance_matrix(&table, Standardization::Standardized);
    let (boot_table, _) = bootstrap_table(&table, boot)?;
    let booted = distance_matrix(&boot_table, Standardization::Standardized);
    let rescale = rescale_stats(&plain, &booted)?;
    let topology_preserved = topology_equal(&upgma(&plain)?, &upgma(&booted)?)?;
    Ok(StudyReport {
        rescale,
        topology_preserved,
    })
}
