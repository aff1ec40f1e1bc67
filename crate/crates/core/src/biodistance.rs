//! Mean Measure of Divergence: raw and standardized pairwise biodistances,
//! chi-square significance, and distance-matrix assembly.
//!
//! For populations a, b over M traits, with theta the transformed frequencies
//! and v the per-trait sampling-variance terms (analytic `1/(n + 1/2)` or
//! squared bootstrapped sigma):
//!
//! ```text
//! MMD(a, b)   = (1/M) sum_i [ (theta_ai - theta_bi)^2 - v_ai - v_bi ]
//! sigma(a, b) = sqrt( (2/M^2) sum_i (v_ai + v_bi)^2 )
//! stMMD(a, b) = MMD / sigma, clamped at zero
//! ```
//!
//! The raw MMD is an unbiased estimator and may come out negative; a value at
//! or below zero means the populations are indistinguishable at the sample
//! sizes involved, which is why the standardized matrix clamps.

use std::fmt;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::special::chi_square_sf;
use crate::transform::{PopulationRow, SigmaKind, ThetaTable};

/// Which statistic a [`DistanceMatrix`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    RawMmd,
    StMmd,
    RawMmdBoot,
    StMmdBoot,
}

/// Raw versus standardized matrix assembly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Standardization {
    /// Unscaled MMD; negative entries are preserved for diagnostics.
    Raw,
    /// MMD over its null standard deviation, clamped at zero.
    Standardized,
}

/// Symmetric population-by-population distance matrix with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    labels: Vec<String>,
    values: Vec<Vec<f64>>,
    kind: MatrixKind,
}

impl DistanceMatrix {
    /// Builds a matrix from raw values, validating squareness, exact symmetry
    /// and a zero diagonal.
    pub fn from_values(
        labels: Vec<String>,
        values: Vec<Vec<f64>>,
        kind: MatrixKind,
    ) -> Result<Self> {
        let p = labels.len();
        if values.len() != p || values.iter().any(|row| row.len() != p) {
            return Err(Error::InvalidData(format!(
                "distance matrix must be {p}x{p} to match the labels"
            )));
        }
        for i in 0..p {
            if values[i][i] != 0.0 {
                return Err(Error::InvalidData(format!(
                    "diagonal entry for '{}' is {}, expected 0",
                    labels[i], values[i][i]
                )));
            }
            for j in 0..i {
                if values[i][j] != values[j][i] {
                    return Err(Error::InvalidData(format!(
                        "asymmetric entries for ('{}', '{}')",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        Ok(Self {
            labels,
            values,
            kind,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Upper-triangle pairs (i, j, value) with i < j, in row-major order.
    pub fn upper_triangle(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let p = self.len();
        (0..p).flat_map(move |i| ((i + 1)..p).map(move |j| (i, j, self.values[i][j])))
    }

    /// Serializes as CSV: a header row `,label1,...`, then one row per
    /// population at the given number of decimals.
    pub fn to_csv(&self, precision: usize) -> String {
        let mut out = String::from(",");
        out.push_str(&self.labels.join(","));
        out.push('\n');
        for (i, label) in self.labels.iter().enumerate() {
            out.push_str(label);
            for v in &self.values[i] {
                write!(out, ",{v:.precision$}").expect("writing to string cannot fail");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the CSV form produced by [`to_csv`](Self::to_csv).
    pub fn from_csv(text: &str, kind: MatrixKind) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::Parse {
            row: 1,
            column: 1,
            message: "empty input".into(),
        })?;
        let head_fields: Vec<&str> = header.split(',').collect();
        if head_fields.len() < 2 || !head_fields[0].is_empty() {
            return Err(Error::Parse {
                row: 1,
                column: 1,
                message: "expected a matrix header ',label1,...'".into(),
            });
        }
        let labels: Vec<String> = head_fields[1..].iter().map(|s| s.to_string()).collect();
        let p = labels.len();

        let mut values = Vec::with_capacity(p);
        for (idx, line) in lines {
            let row = idx + 1;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != p + 1 {
                return Err(Error::Parse {
                    row,
                    column: fields.len().min(p + 1) + 1,
                    message: format!("expected {} fields, found {}", p + 1, fields.len()),
                });
            }
            let i = values.len();
            if i >= p {
                return Err(Error::InvalidData(format!(
                    "matrix has more rows than the {p} header labels"
                )));
            }
            if fields[0] != labels[i] {
                return Err(Error::Parse {
                    row,
                    column: 1,
                    message: format!(
                        "row label '{}' does not match header label '{}'",
                        fields[0], labels[i]
                    ),
                });
            }
            let mut row_values = Vec::with_capacity(p);
            for (ci, field) in fields[1..].iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| Error::Parse {
                    row,
                    column: ci + 2,
                    message: format!("invalid number '{field}'"),
                })?;
                row_values.push(v);
            }
            values.push(row_values);
        }
        if values.len() != p {
            return Err(Error::InvalidData(format!(
                "matrix has {} rows but {p} header labels",
                values.len()
            )));
        }
        Self::from_values(labels, values, kind)
    }
}

fn check_pair(a: &PopulationRow<'_>, b: &PopulationRow<'_>) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Mismatch(format!(
            "trait counts differ between rows: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.sigma_kind() != b.sigma_kind() {
        return Err(Error::Mismatch(
            "rows carry different sigma kinds (analytic vs bootstrapped)".into(),
        ));
    }
    Ok(())
}

/// Raw MMD between two populations. Unbiased under the null hypothesis, so
/// it can be negative; clamping is applied only at standardization.
pub fn mmd_pair(a: &PopulationRow<'_>, b: &PopulationRow<'_>) -> Result<f64> {
    check_pair(a, b)?;
    let m = a.len() as f64;
    let mut sum = 0.0;
    for i in 0..a.len() {
        let d = a.theta(i) - b.theta(i);
        sum += d * d - a.variance_term(i) - b.variance_term(i);
    }
    Ok(sum / m)
}

/// Null-hypothesis standard deviation of the MMD between two populations.
pub fn mmd_sigma_pair(a: &PopulationRow<'_>, b: &PopulationRow<'_>) -> Result<f64> {
    check_pair(a, b)?;
    let m = a.len() as f64;
    let mut sum = 0.0;
    for i in 0..a.len() {
        let v = a.variance_term(i) + b.variance_term(i);
        sum += v * v;
    }
    Ok((2.0 / (m * m) * sum).sqrt())
}

/// Standardized MMD: `max(0, MMD / sigma)`. Approximately standard normal
/// under the null hypothesis, so values above 2 are significant at better
/// than the 5 % level.
pub fn st_mmd_pair(a: &PopulationRow<'_>, b: &PopulationRow<'_>) -> Result<f64> {
    let mmd = mmd_pair(a, b)?;
    let sigma = mmd_sigma_pair(a, b)?;
    Ok((mmd / sigma).max(0.0))
}

/// Result of the pairwise chi-square significance test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairTest {
    pub chi2: f64,
    pub dof: usize,
    pub p_value: f64,
}

impl fmt::Display for PairTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chi2={:.4} dof={}", self.chi2, self.dof)?;
        // double precision cannot represent meaningfully smaller tails
        if self.p_value < 1e-300 {
            write!(f, " p<1e-300")
        } else {
            write!(f, " p={:.4e}", self.p_value)
        }
    }
}

/// Chi-square test of the null hypothesis that two populations share trait
/// frequencies: `chi2 = sum_i d_i^2 / (1/(n_ai + 1/2) + 1/(n_bi + 1/2))`
/// with M degrees of freedom. Defined only for analytic rows; there is no
/// established bootstrapped variant, so bootstrapped rows are refused.
pub fn chi2_pair(a: &PopulationRow<'_>, b: &PopulationRow<'_>) -> Result<PairTest> {
    check_pair(a, b)?;
    if a.sigma_kind() != SigmaKind::Analytic {
        return Err(Error::Domain(
            "the chi-square test is defined for analytic sigmas only; \
             rerun against the untransformed (non-bootstrapped) table"
                .into(),
        ));
    }
    let mut chi2 = 0.0;
    for i in 0..a.len() {
        let d = a.theta(i) - b.theta(i);
        chi2 += d * d / (a.variance_term(i) + b.variance_term(i));
    }
    let dof = a.len();
    Ok(PairTest {
        chi2,
        dof,
        p_value: chi_square_sf(chi2, dof),
    })
}

/// Assembles the full symmetric matrix over all population pairs.
///
/// Standardized matrices clamp negative values to zero (indistinguishable
/// populations); raw matrices preserve them. The matrix kind records both the
/// standardization and whether the sigmas were bootstrapped.
pub fn distance_matrix(table: &ThetaTable, standardization: Standardization) -> DistanceMatrix {
    let p = table.n_populations();
    let mut values = vec![vec![0.0; p]; p];
    #[allow(clippy::needless_range_loop)] // (i, j) writes both triangles
    for i in 0..p {
        for j in (i + 1)..p {
            let a = table.row(i);
            let b = table.row(j);
            let v = match standardization {
                Standardization::Raw => mmd_pair(&a, &b),
                Standardization::Standardized => st_mmd_pair(&a, &b),
            }
            .expect("rows of one table are always compatible");
            values[i][j] = v;
            values[j][i] = v;
        }
    }
    let kind = match (standardization, table.sigma_kind()) {
        (Standardization::Raw, SigmaKind::Analytic) => MatrixKind::RawMmd,
        (Standardization::Standardized, SigmaKind::Analytic) => MatrixKind::StMmd,
        (Standardization::Raw, SigmaKind::Bootstrapped) => MatrixKind::RawMmdBoot,
        (Standardization::Standardized, SigmaKind::Bootstrapped) => MatrixKind::StMmdBoot,
    };
    DistanceMatrix {
        labels: table.populations().to_vec(),
        values,
        kind,
    }
}
