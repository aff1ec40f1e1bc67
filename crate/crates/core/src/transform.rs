//! Anscombe variance-stabilizing transform and the null-hypothesis standard
//! deviation of each transformed trait frequency.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::trait_data::TraitCounts;

/// Which standard deviations a [`ThetaTable`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaKind {
    /// 1/sqrt(n + 1/2), the closed form under the null hypothesis.
    Analytic,
    /// Estimated by the parametric bootstrap.
    Bootstrapped,
}

/// Anscombe transform of a presence count:
/// `asin(1 - 2(k + 3/8)/(n + 3/4))`, in radians.
///
/// The argument lies strictly inside (-1, 1) for every `0 <= k <= n`
/// (including `n = 0`), so the result is finite and inside (-pi/2, pi/2).
pub fn anscombe_theta(k: u32, n: u32) -> Result<f64> {
    if k > n {
        return Err(Error::Domain(format!(
            "presence count k={k} exceeds measured count n={n}"
        )));
    }
    Ok(anscombe_unchecked(f64::from(k), f64::from(n)))
}

fn anscombe_unchecked(k: f64, n: f64) -> f64 {
    (1.0 - 2.0 * (k + 0.375) / (n + 0.75)).asin()
}

/// Null-hypothesis standard deviation of the transformed value:
/// `1/sqrt(n + 1/2)`. Strictly decreasing in `n`; `n = 0` gives sqrt(2).
pub fn trait_sigma(n: u32) -> f64 {
    1.0 / (f64::from(n) + 0.5).sqrt()
}

/// Transformed trait frequencies with their standard deviations.
///
/// Rows are populations, columns traits, in the order of the source
/// [`TraitCounts`]. The measured counts ride along because the chi-square
/// test and the bootstrap both need them. Immutable once constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaTable {
    populations: Vec<String>,
    traits: Vec<String>,
    theta: Vec<Vec<f64>>,
    sigma: Vec<Vec<f64>>,
    n: Vec<Vec<u32>>,
    sigma_kind: SigmaKind,
}

impl ThetaTable {
    /// Builds a table from raw parts, validating value ranges and, for
    /// analytic tables, that every sigma equals `trait_sigma(n)` exactly.
    pub fn from_parts(
        populations: Vec<String>,
        traits: Vec<String>,
        theta: Vec<Vec<f64>>,
        sigma: Vec<Vec<f64>>,
        n: Vec<Vec<u32>>,
        sigma_kind: SigmaKind,
    ) -> Result<Self> {
        let p = populations.len();
        let m = traits.len();
        if p == 0 || m == 0 {
            return Err(Error::InvalidData(
                "theta table needs at least one population and one trait".into(),
            ));
        }
        if theta.len() != p || sigma.len() != p || n.len() != p {
            return Err(Error::InvalidData(format!(
                "matrix shape does not match {p} populations"
            )));
        }
        for pi in 0..p {
            if theta[pi].len() != m || sigma[pi].len() != m || n[pi].len() != m {
                return Err(Error::InvalidData(format!(
                    "matrix shape does not match {m} traits"
                )));
            }
            for ti in 0..m {
                let th = theta[pi][ti];
                if !(th.is_finite() && th.abs() < FRAC_PI_2) {
                    return Err(Error::InvalidData(format!(
                        "theta out of (-pi/2, pi/2) at ({}, {}): {th}",
                        populations[pi], traits[ti]
                    )));
                }
                let sg = sigma[pi][ti];
                if !(sg.is_finite() && sg > 0.0) {
                    return Err(Error::InvalidData(format!(
                        "sigma must be positive at ({}, {}): {sg}",
                        populations[pi], traits[ti]
                    )));
                }
                if sigma_kind == SigmaKind::Analytic && sg != trait_sigma(n[pi][ti]) {
                    return Err(Error::InvalidData(format!(
                        "analytic sigma must equal 1/sqrt(n + 1/2) at ({}, {})",
                        populations[pi], traits[ti]
                    )));
                }
            }
        }
        Ok(Self {
            populations,
            traits,
            theta,
            sigma,
            n,
            sigma_kind,
        })
    }

    pub fn n_populations(&self) -> usize {
        self.populations.len()
    }

    pub fn n_traits(&self) -> usize {
        self.traits.len()
    }

    pub fn populations(&self) -> &[String] {
        &self.populations
    }

    pub fn traits(&self) -> &[String] {
        &self.traits
    }

    pub fn population_index(&self, label: &str) -> Option<usize> {
        self.populations.iter().position(|l| l == label)
    }

    pub fn sigma_kind(&self) -> SigmaKind {
        self.sigma_kind
    }

    pub fn theta(&self, p: usize, t: usize) -> f64 {
        self.theta[p][t]
    }

    pub fn sigma(&self, p: usize, t: usize) -> f64 {
        self.sigma[p][t]
    }

    pub fn measured(&self, p: usize, t: usize) -> u32 {
        self.n[p][t]
    }

    /// Borrowed view of one population's row, as consumed by the pairwise
    /// distance operations.
    pub fn row(&self, p: usize) -> PopulationRow<'_> {
        PopulationRow {
            theta: &self.theta[p],
            sigma: &self.sigma[p],
            n: &self.n[p],
            sigma_kind: self.sigma_kind,
        }
    }

    pub(crate) fn theta_matrix(&self) -> &[Vec<f64>] {
        &self.theta
    }

    pub(crate) fn n_matrix(&self) -> &[Vec<u32>] {
        &self.n
    }

    /// Debugging dump: `population,trait,n,theta,sigma` at six decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("population,trait,n,theta,sigma\n");
        for (pi, pop) in self.populations.iter().enumerate() {
            for (ti, trait_label) in self.traits.iter().enumerate() {
                writeln!(
                    out,
                    "{pop},{trait_label},{},{:.6},{:.6}",
                    self.n[pi][ti], self.theta[pi][ti], self.sigma[pi][ti]
                )
                .expect("writing to string cannot fail");
            }
        }
        out
    }
}

/// One population's transformed values, borrowed from a [`ThetaTable`].
#[derive(Debug, Clone, Copy)]
pub struct PopulationRow<'a> {
    theta: &'a [f64],
    sigma: &'a [f64],
    n: &'a [u32],
    sigma_kind: SigmaKind,
}

impl PopulationRow<'_> {
    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn theta(&self, t: usize) -> f64 {
        self.theta[t]
    }

    pub fn sigma(&self, t: usize) -> f64 {
        self.sigma[t]
    }

    pub fn measured(&self, t: usize) -> u32 {
        self.n[t]
    }

    pub fn sigma_kind(&self) -> SigmaKind {
        self.sigma_kind
    }

    /// Sampling-variance term for trait `t` as it enters the divergence sums:
    /// the exact `1/(n + 1/2)` for analytic rows, the squared bootstrapped
    /// sigma otherwise.
    pub(crate) fn variance_term(&self, t: usize) -> f64 {
        match self.sigma_kind {
            SigmaKind::Analytic => 1.0 / (f64::from(self.n[t]) + 0.5),
            SigmaKind::Bootstrapped => self.sigma[t] * self.sigma[t],
        }
    }
}

/// Applies the transform elementwise; the result carries analytic sigmas.
pub fn transform_counts(counts: &TraitCounts) -> ThetaTable {
    let p = counts.n_populations();
    let m = counts.n_traits();
    let mut theta = vec![vec![0.0; m]; p];
    let mut sigma = vec![vec![0.0; m]; p];
    let mut n = vec![vec![0u32; m]; p];
    for pi in 0..p {
        for ti in 0..m {
            let nv = counts.measured(pi, ti);
            let kv = counts.present(pi, ti);
            theta[pi][ti] = anscombe_unchecked(f64::from(kv), f64::from(nv));
            sigma[pi][ti] = trait_sigma(nv);
            n[pi][ti] = nv;
        }
    }
    ThetaTable::from_parts(
        counts.populations().to_vec(),
        counts.traits().to_vec(),
        theta,
        sigma,
        n,
        SigmaKind::Analytic,
    )
    .expect("TraitCounts invariants guarantee a valid table")
}
