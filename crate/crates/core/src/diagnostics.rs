//! Representativeness diagnostics: per-population information fractions, the
//! rescaling statistics between plain and bootstrapped distance matrices, and
//! the log-log scaling fit of the bootstrapped sigma against sample size.
//!
//! The rescaling idea: when every population is well represented, the
//! bootstrapped matrix is close to a scalar multiple of the plain one, so the
//! entrywise quotients plain/boot concentrate around a single value and their
//! relative spread (in percent) stays small. A spread beyond about 10 %
//! signals that distance rank order may have changed, i.e. that at least one
//! population lacks statistical representativeness.

use std::fmt;

use crate::biodistance::DistanceMatrix;
use crate::error::{Error, Result};
use crate::trait_data::TraitCounts;

/// Statistics of the entrywise quotients plain/boot over all pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescaleStats {
    /// Mean quotient (the inverse of the effective rescale factor).
    pub lambda_inv_mean: f64,
    /// Sample standard deviation of the quotients (divisor n_pairs - 1).
    pub spread: f64,
    /// 100 * spread / lambda_inv_mean.
    pub relative_error_pct: f64,
    /// Number of distinct pairs, P(P - 1)/2.
    pub n_pairs: usize,
}

/// Power-law fit `s = a / n^beta` obtained on log-log axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub prefactor_a: f64,
    pub exponent_beta: f64,
    /// Pearson correlation of the log-log points; negative for a decay.
    pub correlation_r: f64,
}

/// Information carried by one population across all traits: the mean number
/// of measured traits per individual, `(1/pop_size) * sum_i n_i`. Ranges
/// from 0 to the trait count M; a fully measured population scores M.
pub fn information_fraction(counts: &TraitCounts, pop: usize) -> Result<f64> {
    let size = counts.pop_size(pop);
    if size == 0 {
        return Err(Error::Domain(format!(
            "population '{}' has size 0",
            counts.populations()[pop]
        )));
    }
    let total: u64 = counts.measured_row(pop).iter().map(|&n| u64::from(n)).sum();
    Ok(total as f64 / f64::from(size))
}

/// Information fraction normalized to [0, 1] by the trait count; this is the
/// reported form, where values below 0.5 flag poor representativeness.
pub fn information_fraction_normalized(counts: &TraitCounts, pop: usize) -> Result<f64> {
    Ok(information_fraction(counts, pop)? / counts.n_traits() as f64)
}

/// Computes the rescaling statistics between a plain and a bootstrapped
/// matrix. The bootstrapped matrix sits in the denominator of each quotient
/// and must have strictly positive off-diagonal entries; plain entries may be
/// zero (clamped pairs) and then contribute a zero quotient.
pub fn rescale_stats(plain: &DistanceMatrix, boot: &DistanceMatrix) -> Result<RescaleStats> {
    if plain.labels() != boot.labels() {
        return Err(Error::Mismatch(
            "plain and bootstrapped matrices carry different labels".into(),
        ));
    }
    let mut quotients = Vec::with_capacity(plain.len() * (plain.len() - 1) / 2);
    for (i, j, boot_v) in boot.upper_triangle() {
        if boot_v == 0.0 {
            return Err(Error::Domain(format!(
                "bootstrapped distance is zero for pair ('{}', '{}')",
                boot.labels()[i],
                boot.labels()[j]
            )));
        }
        quotients.push(plain.value(i, j) / boot_v);
    }
    let n_pairs = quotients.len();
    if n_pairs == 0 {
        return Err(Error::Domain("no population pairs to compare".into()));
    }
    let mean = quotients.iter().sum::<f64>() / n_pairs as f64;
    if mean == 0.0 {
        return Err(Error::Domain(
            "all plain distances are zero; the relative error is undefined".into(),
        ));
    }
    // a single pair has no measurable spread
    let spread = if n_pairs == 1 {
        0.0
    } else {
        let ssd = quotients
            .iter()
            .map(|q| (q - mean) * (q - mean))
            .sum::<f64>();
        (ssd / (n_pairs - 1) as f64).sqrt()
    };
    Ok(RescaleStats {
        lambda_inv_mean: mean,
        spread,
        relative_error_pct: 100.0 * spread / mean,
        n_pairs,
    })
}

/// Ordinary least squares of log(s) on log(n); the negated slope is the
/// decay exponent and the exponentiated intercept the prefactor.
pub fn scaling_fit(points: &[(u32, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::Domain(format!(
            "scaling fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(n, s)| n == 0 || s <= 0.0) {
        return Err(Error::Domain(
            "scaling fit requires positive sample sizes and values".into(),
        ));
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| f64::from(n).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, s)| s.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::Domain(
            "scaling fit needs at least two distinct sample sizes".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let correlation_r = if syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    };
    Ok(ScalingFit {
        prefactor_a: intercept.exp(),
        exponent_beta: -slope,
        correlation_r,
    })
}

/// Warning thresholds for the representativeness report. All three come from
/// practical guidance rather than hard theory, so they are configurable.
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticThresholds {
    /// Relative error (percent) above which bootstrapping is advisable.
    pub max_relative_error_pct: f64,
    /// Normalized information fraction below which a population is flagged.
    pub min_information_fraction: f64,
    /// Population size below which a population is flagged.
    pub min_pop_size: u32,
}

impl Default for DiagnosticThresholds {
    fn default() -> Self {
        Self {
            max_relative_error_pct: 10.0,
            min_information_fraction: 0.5,
            min_pop_size: 10,
        }
    }
}

/// Per-population line of the report.
#[derive(Debug, Clone)]
pub struct PopulationDiagnostic {
    pub label: String,
    pub pop_size: u32,
    /// Literal information fraction, in [0, M].
    pub information_fraction: f64,
    /// Normalized to [0, 1]; the reported value.
    pub information_fraction_normalized: f64,
    pub low_information: bool,
    pub small_sample: bool,
}

/// Overall verdict of the rescaling comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Rank order preserved; bootstrap optional.
    BootstrapOptional,
    /// Rank order may have changed; bootstrap advisable.
    BootstrapAdvisable,
}

/// Representativeness report across populations plus the rescaling verdict.
#[derive(Debug, Clone)]
pub struct RepresentativenessReport {
    pub populations: Vec<PopulationDiagnostic>,
    pub rescale: RescaleStats,
    pub verdict: Verdict,
    pub thresholds: DiagnosticThresholds,
}

/// Builds the full report from counts and a plain/bootstrapped matrix pair.
pub fn representativeness_report(
    counts: &TraitCounts,
    plain: &DistanceMatrix,
    boot: &DistanceMatrix,
    thresholds: DiagnosticThresholds,
) -> Result<RepresentativenessReport> {
    if counts.populations() != plain.labels() {
        return Err(Error::Mismatch(
            "counts and matrices carry different population labels".into(),
        ));
    }
    let rescale = rescale_stats(plain, boot)?;
    let mut populations = Vec::with_capacity(counts.n_populations());
    for (pi, label) in counts.populations().iter().enumerate() {
        let literal = information_fraction(counts, pi)?;
        let normalized = literal / counts.n_traits() as f64;
        populations.push(PopulationDiagnostic {
            label: label.clone(),
            pop_size: counts.pop_size(pi),
            information_fraction: literal,
            information_fraction_normalized: normalized,
            low_information: normalized < thresholds.min_information_fraction,
            small_sample: counts.pop_size(pi) < thresholds.min_pop_size,
        });
    }
    let verdict = if rescale.relative_error_pct <= thresholds.max_relative_error_pct {
        Verdict::BootstrapOptional
    } else {
        Verdict::BootstrapAdvisable
    };
    Ok(RepresentativenessReport {
        populations,
        rescale,
        verdict,
        thresholds,
    })
}

impl fmt::Display for RepresentativenessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .populations
            .iter()
            .map(|p| p.label.len())
            .max()
            .unwrap_or(0)
            .max("population".len());
        writeln!(f, "{:<width$}  size  information  flags", "population")?;
        for p in &self.populations {
            let mut flags = Vec::new();
            if p.low_information {
                flags.push("low-information");
            }
            if p.small_sample {
                flags.push("small-sample");
            }
            writeln!(
                f,
                "{:<width$}  {:>4}  {:>11.2}  {}",
                p.label,
                p.pop_size,
                p.information_fraction_normalized,
                flags.join(",")
            )?;
        }
        writeln!(f)?;
        writeln!(
            f,
            "pairs={} lambda_inv_mean={:.6} spread={:.6} E_pct={:.4}",
            self.rescale.n_pairs,
            self.rescale.lambda_inv_mean,
            self.rescale.spread,
            self.rescale.relative_error_pct
        )?;
        match self.verdict {
            Verdict::BootstrapOptional => writeln!(
                f,
                "E_pct <= {:.2}: rank order preserved; bootstrap optional",
                self.thresholds.max_relative_error_pct
            ),
            Verdict::BootstrapAdvisable => writeln!(
                f,
                "E_pct > {:.2}: bootstrap advisable",
                self.thresholds.max_relative_error_pct
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biodistance::MatrixKind;

    fn matrix(values: Vec<Vec<f64>>) -> DistanceMatrix {
        let labels = (0..values.len()).map(|i| format!("P{}", i + 1)).collect();
        DistanceMatrix::from_values(labels, values, MatrixKind::StMmd).unwrap()
    }

    #[test]
    fn perfect_rescaling_has_zero_relative_error() {
        let plain = matrix(vec![
            vec![0.0, 2.0, 4.0],
            vec![2.0, 0.0, 6.0],
            vec![4.0, 6.0, 0.0],
        ]);
        let boot = matrix(vec![
            vec![0.0, 6.0, 12.0],
            vec![6.0, 0.0, 18.0],
            vec![12.0, 18.0, 0.0],
        ]);
        let stats = rescale_stats(&plain, &boot).unwrap();
        assert_eq!(stats.n_pairs, 3);
        assert!((stats.lambda_inv_mean - 1.0 / 3.0).abs() < 1e-12);
        assert!(stats.spread.abs() < 1e-12);
        assert!(stats.relative_error_pct.abs() < 1e-9);
    }

    #[test]
    fn zero_boot_entry_is_an_error_naming_the_pair() {
        let plain = matrix(vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let boot = matrix(vec![vec![0.0, 0.0], vec![0.0, 0.0]]);
        let err = rescale_stats(&plain, &boot).unwrap_err();
        assert!(err.to_string().contains("('P1', 'P2')"), "{err}");
    }

    #[test]
    fn zero_plain_entries_contribute_zero_quotients() {
        let plain = matrix(vec![
            vec![0.0, 0.0, 4.0],
            vec![0.0, 0.0, 4.0],
            vec![4.0, 4.0, 0.0],
        ]);
        let boot = matrix(vec![
            vec![0.0, 2.0, 8.0],
            vec![2.0, 0.0, 8.0],
            vec![8.0, 8.0, 0.0],
        ]);
        let stats = rescale_stats(&plain, &boot).unwrap();
        let expected_mean = (0.0 + 0.5 + 0.5) / 3.0;
        assert!((stats.lambda_inv_mean - expected_mean).abs() < 1e-12);
    }

    #[test]
    fn single_pair_has_no_spread() {
        let plain = matrix(vec![vec![0.0, 3.0], vec![3.0, 0.0]]);
        let boot = matrix(vec![vec![0.0, 9.0], vec![9.0, 0.0]]);
        let stats = rescale_stats(&plain, &boot).unwrap();
        assert_eq!(stats.n_pairs, 1);
        assert_eq!(stats.spread, 0.0);
        assert_eq!(stats.relative_error_pct, 0.0);
    }

    #[test]
    fn information_fraction_saturates_at_trait_count() {
        let counts = TraitCounts::new(
            vec!["A".into(), "B".into()],
            (0..13).map(|i| format!("t{i}")).collect(),
            vec![vec![20; 13], vec![10; 13]],
            vec![vec![5; 13], vec![0; 13]],
            vec![20, 20],
        )
        .unwrap();
        assert!((information_fraction(&counts, 0).unwrap() - 13.0).abs() < 1e-12);
        assert!((information_fraction_normalized(&counts, 0).unwrap() - 1.0).abs() < 1e-12);
        assert!((information_fraction_normalized(&counts, 1).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn three_collinear_points_fit_exactly() {
        // 0.4 / n through (10, 0.04), (100, 0.004), (1000, 0.0004)
        let fit = scaling_fit(&[(10, 0.04), (100, 0.004), (1000, 0.0004)]).unwrap();
        assert!((fit.exponent_beta - 1.0).abs() < 1e-12, "{fit:?}");
        assert!((fit.prefactor_a - 0.4).abs() < 1e-12, "{fit:?}");
        assert!((fit.correlation_r + 1.0).abs() < 1e-12, "{fit:?}");
    }

    #[test]
    fn fit_rejects_degenerate_inputs() {
        assert!(scaling_fit(&[(10, 0.1), (20, 0.2)]).is_err());
        assert!(scaling_fit(&[(10, 0.1), (20, 0.0), (30, 0.2)]).is_err());
        assert!(scaling_fit(&[(10, 0.1), (10, 0.2), (10, 0.3)]).is_err());
    }

    #[test]
    fn report_flags_and_verdict() {
        let counts = TraitCounts::new(
            vec!["Big".into(), "Sparse".into(), "Tiny".into()],
            vec!["t1".into(), "t2".into()],
            vec![vec![50, 50], vec![10, 8], vec![4, 5]],
            vec![vec![10, 30], vec![2, 1], vec![0, 2]],
            vec![50, 60, 5],
        )
        .unwrap();
        let labels: Vec<String> = vec!["Big".into(), "Sparse".into(), "Tiny".into()];
        let plain = DistanceMatrix::from_values(
            labels.clone(),
            vec![
                vec![0.0, 1.0, 2.0],
                vec![1.0, 0.0, 3.0],
                vec![2.0, 3.0, 0.0],
            ],
            MatrixKind::StMmd,
        )
        .unwrap();
        let boot = DistanceMatrix::from_values(
            labels,
            vec![
                vec![0.0, 10.0, 4.0],
                vec![10.0, 0.0, 6.0],
                vec![4.0, 6.0, 0.0],
            ],
            MatrixKind::StMmdBoot,
        )
        .unwrap();
        let report =
            representativeness_report(&counts, &plain, &boot, DiagnosticThresholds::default())
                .unwrap();
        assert!(!report.populations[0].low_information);
        assert!(report.populations[1].low_information);
        assert!(report.populations[2].small_sample);
        assert_eq!(report.verdict, Verdict::BootstrapAdvisable);
        let text = report.to_string();
        assert!(text.contains("bootstrap advisable"), "{text}");
        assert!(text.contains("low-information"), "{text}");
    }
}
