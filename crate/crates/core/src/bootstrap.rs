//! Parametric bootstrap of the per-trait standard deviations.
//!
//! Each (population, trait) cell resamples its analytic sigma: n deviates
//! from N(0, sigma) give one sample standard deviation; repeating that B
//! times and taking the standard deviation of those B values yields the
//! bootstrapped sigma. For well-measured traits the bootstrapped value is an
//! order 1/sqrt(n) fraction of the analytic one, which is what rescales the
//! distances of poorly measured populations upward relative to the rest.
//!
//! Every cell draws from its own derived stream in a fixed order (all n
//! samples of a replicate, then the next replicate), so parallel and serial
//! runs produce bitwise-identical tables.

use rayon::prelude::*;

use crate::biodistance::{distance_matrix, DistanceMatrix, Standardization};
use crate::error::{Error, Result};
use crate::stochastic::{derive_stream, GaussianSource, StreamPurpose};
use crate::trait_data::TraitCounts;
use crate::transform::{transform_counts, SigmaKind, ThetaTable};

/// What to do with cells where n < 2 (the resampling sd divides by n - 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SmallNPolicy {
    /// Abort, naming the offending cells.
    Error,
    /// Keep the analytic sigma for those cells and flag them in the report.
    #[default]
    SkipTrait,
}

/// Bootstrap parameters. The defaults (500 iterations) are enough in
/// practice; results do not change significantly for larger B.
#[derive(Debug, Clone)]
pub struct BootstrapConfig {
    pub iterations: u32,
    pub master_seed: u64,
    pub small_n_policy: SmallNPolicy,
    /// Retain the per-cell resampled-sd sets in the report (B doubles per
    /// cell, so this is off by default).
    pub keep_replicates: bool,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            iterations: 500,
            master_seed: 42,
            small_n_policy: SmallNPolicy::default(),
            keep_replicates: false,
        }
    }
}

impl BootstrapConfig {
    fn validate(&self) -> Result<()> {
        // the spread over replicates divides by B - 1
        if self.iterations < 2 {
            return Err(Error::Domain(format!(
                "bootstrap needs at least 2 iterations, got {}",
                self.iterations
            )));
        }
        Ok(())
    }
}

/// Per-run bootstrap outputs beyond the table itself.
#[derive(Debug, Clone)]
pub struct BootstrapReport {
    /// Final per-cell sigmas: bootstrapped, or analytic where a cell was
    /// skipped under [`SmallNPolicy::SkipTrait`].
    pub sigma: Vec<Vec<f64>>,
    /// (population index, trait index) cells where the small-n policy fired.
    pub flagged_cells: Vec<(usize, usize)>,
    /// Per-cell resampled-sd sets, retained on request; indexed
    /// `[population][trait][replicate]`, empty for skipped cells.
    pub replicate_sets: Option<Vec<Vec<Vec<f64>>>>,
}

/// One resampled standard deviation: the sample sd (divisor n - 1) of n
/// draws from N(0, sigma) about their own mean.
pub fn resampled_sd<S: GaussianSource + ?Sized>(sigma: f64, n: u32, src: &mut S) -> Result<f64> {
    let mut draws = Vec::new();
    resampled_sd_into(sigma, n, src, &mut draws)
}

fn resampled_sd_into<S: GaussianSource + ?Sized>(
    sigma: f64,
    n: u32,
    src: &mut S,
    draws: &mut Vec<f64>,
) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "resampling needs n >= 2 (the sample sd divides by n - 1), got n={n}"
        )));
    }
    draws.clear();
    draws.extend((0..n).map(|_| src.next_gaussian(0.0, sigma)));
    Ok(sample_sd(draws))
}

/// The full set of B resampled sds for one cell, in replicate order.
pub fn resampled_sd_set<S: GaussianSource + ?Sized>(
    sigma: f64,
    n: u32,
    iterations: u32,
    src: &mut S,
) -> Result<Vec<f64>> {
    if iterations < 2 {
        return Err(Error::Domain(format!(
            "bootstrap needs at least 2 iterations, got {iterations}"
        )));
    }
    let mut draws = Vec::with_capacity(n as usize);
    (0..iterations)
        .map(|_| resampled_sd_into(sigma, n, src, &mut draws))
        .collect()
}

/// Bootstrapped sigma for one cell: the sample sd (divisor B - 1) of the
/// resampled-sd set.
pub fn bootstrap_sd<S: GaussianSource + ?Sized>(
    sigma: f64,
    n: u32,
    iterations: u32,
    src: &mut S,
) -> Result<f64> {
    let set = resampled_sd_set(sigma, n, iterations, src)?;
    Ok(sample_sd(&set))
}

// Two-pass sample standard deviation, divisor len - 1.
fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ssd = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (ssd / (n - 1.0)).sqrt()
}

enum CellOutcome {
    Bootstrapped(f64, Option<Vec<f64>>),
    Skipped,
}

/// Replaces every analytic sigma in the table by its bootstrapped value.
/// Theta values and measured counts are copied unchanged.
pub fn bootstrap_table(
    table: &ThetaTable,
    config: &BootstrapConfig,
) -> Result<(ThetaTable, BootstrapReport)> {
    config.validate()?;
    if table.sigma_kind() != SigmaKind::Analytic {
        return Err(Error::Mismatch(
            "bootstrap input must carry analytic sigmas".into(),
        ));
    }
    let p = table.n_populations();
    let m = table.n_traits();

    let small_cells: Vec<(usize, usize)> = (0..p)
        .flat_map(|pi| (0..m).map(move |ti| (pi, ti)))
        .filter(|&(pi, ti)| table.measured(pi, ti) < 2)
        .collect();
    if config.small_n_policy == SmallNPolicy::Error && !small_cells.is_empty() {
        let names: Vec<String> = small_cells
            .iter()
            .map(|&(pi, ti)| {
                format!(
                    "({}, {}): n={}",
                    table.populations()[pi],
                    table.traits()[ti],
                    table.measured(pi, ti)
                )
            })
            .collect();
        return Err(Error::Domain(format!(
            "cells with n < 2 cannot be bootstrapped: {}",
            names.join(", ")
        )));
    }

    // cells are independent; each derives its own stream, so the parallel
    // result is identical to the serial one
    let outcomes: Vec<CellOutcome> = (0..p * m)
        .into_par_iter()
        .map(|idx| {
            let (pi, ti) = (idx / m, idx % m);
            let n = table.measured(pi, ti);
            if n < 2 {
                return Ok(CellOutcome::Skipped);
            }
            let mut stream =
                derive_stream(config.master_seed, pi, Some(ti), StreamPurpose::Bootstrap);
            let set = resampled_sd_set(table.sigma(pi, ti), n, config.iterations, &mut stream)?;
            let sd = sample_sd(&set);
            let kept = config.keep_replicates.then_some(set);
            Ok(CellOutcome::Bootstrapped(sd, kept))
        })
        .collect::<Result<_>>()?;

    let mut sigma = vec![vec![0.0; m]; p];
    let mut replicate_sets = config.keep_replicates.then(|| vec![vec![Vec::new(); m]; p]);
    for (idx, outcome) in outcomes.into_iter().enumerate() {
        let (pi, ti) = (idx / m, idx % m);
        match outcome {
            CellOutcome::Bootstrapped(sd, kept) => {
                sigma[pi][ti] = sd;
                if let (Some(sets), Some(set)) = (replicate_sets.as_mut(), kept) {
                    sets[pi][ti] = set;
                }
            }
            CellOutcome::Skipped => sigma[pi][ti] = table.sigma(pi, ti),
        }
    }

    let report = BootstrapReport {
        sigma: sigma.clone(),
        flagged_cells: small_cells,
        replicate_sets,
    };
    let boot_table = ThetaTable::from_parts(
        table.populations().to_vec(),
        table.traits().to_vec(),
        table.theta_matrix().to_vec(),
        sigma,
        table.n_matrix().to_vec(),
        SigmaKind::Bootstrapped,
    )?;
    Ok((boot_table, report))
}

/// Full pipeline from counts to the standardized bootstrapped matrix.
pub fn bootstrap_distance_matrix(
    counts: &TraitCounts,
    config: &BootstrapConfig,
) -> Result<(DistanceMatrix, BootstrapReport)> {
    let table = transform_counts(counts);
    let (boot_table, report) = bootstrap_table(&table, config)?;
    Ok((
        distance_matrix(&boot_table, Standardization::Standardized),
        report,
    ))
}
