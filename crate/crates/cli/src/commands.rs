use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use mmd_core::{
    aggregate, bootstrap_table, chi2_pair, derive_stream, distance_matrix, parse_individuals,
    representativeness_report, scaling_fit, trait_sigma, transform_counts, upgma, BootstrapConfig,
    BootstrapReport, DiagnosticThresholds, DistanceMatrix, MatrixKind, SimConfig, Standardization,
    StreamPurpose, ThetaTable, TraitCounts, Verdict,
};

use crate::manifest::RunManifest;
use crate::{Command, MatrixKindArg};

pub fn run(command: Command, manifest: bool) -> Result<()> {
    match command {
        Command::Ingest { individuals, out } => ingest(&individuals, &out, manifest),
        Command::Transform { counts, out } => transform(&counts, &out, manifest),
        Command::Distances {
            counts,
            out,
            kind,
            precision,
        } => distances(&counts, &out, kind, precision, manifest),
        Command::Chi2 { counts, pair } => chi2(&counts, &pair, manifest),
        Command::Bootstrap {
            counts,
            iterations,
            seed,
            out,
            raw,
            keep_replicates,
            precision,
        } => bootstrap(
            &counts,
            iterations,
            seed,
            &out,
            raw,
            keep_replicates.as_deref(),
            precision,
            manifest,
        ),
        Command::Diagnose {
            counts,
            matrix_plain,
            matrix_boot,
            e_threshold,
            t_threshold,
        } => diagnose(
            &counts,
            &matrix_plain,
            &matrix_boot,
            e_threshold,
            t_threshold,
            manifest,
        ),
        Command::Cluster { matrix, out } => cluster(&matrix, &out, manifest),
        Command::Simulate {
            populations,
            traits,
            max_size,
            lambda1,
            lambda2,
            seed,
            out,
        } => simulate(
            populations,
            traits,
            max_size,
            lambda1,
            lambda2,
            seed,
            &out,
            manifest,
        ),
        Command::Study {
            populations,
            traits,
            max_size,
            lambda1,
            lambda2,
            iterations,
            seed,
            replicates,
        } => study(
            populations,
            traits,
            max_size,
            lambda1,
            lambda2,
            iterations,
            seed,
            replicates,
            manifest,
        ),
        Command::ScalingStudy {
            n_min,
            n_max,
            steps,
            iterations,
            seed,
            out,
        } => scaling_study(n_min, n_max, steps, iterations, seed, &out, manifest),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_counts(path: &Path) -> Result<TraitCounts> {
    TraitCounts::from_csv(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_matrix(path: &Path, kind: MatrixKind) -> Result<DistanceMatrix> {
    DistanceMatrix::from_csv(&read_text(path)?, kind)
        .with_context(|| format!("parsing {}", path.display()))
}

// Cells that were never measured enter the formulas with theta = 0 and the
// maximal sigma; worth a note on stderr whenever they are present.
fn warn_unmeasured_cells(counts: &TraitCounts) {
    for p in 0..counts.n_populations() {
        for t in 0..counts.n_traits() {
            if counts.measured(p, t) == 0 {
                eprintln!(
                    "warning: ({}, {}) was never measured; it enters the formulas with n=0",
                    counts.populations()[p],
                    counts.traits()[t]
                );
            }
        }
    }
}

fn warn_flagged_cells(counts: &TraitCounts, report: &BootstrapReport) {
    for &(p, t) in &report.flagged_cells {
        eprintln!(
            "warning: kept analytic sigma for ({}, {}): n={} is too small to resample",
            counts.populations()[p],
            counts.traits()[t],
            counts.measured(p, t)
        );
    }
}

fn ingest(individuals: &Path, out: &Path, manifest: bool) -> Result<()> {
    let table = parse_individuals(&read_text(individuals)?)
        .with_context(|| format!("parsing {}", individuals.display()))?;
    let counts = aggregate(&table)?;
    write_text(out, &counts.to_csv())?;
    RunManifest::new("ingest")
        .input(individuals)
        .param("out", out.display())
        .emit(manifest);
    Ok(())
}

fn transform(counts_path: &Path, out: &Path, manifest: bool) -> Result<()> {
    let counts = load_counts(counts_path)?;
    warn_unmeasured_cells(&counts);
    write_text(out, &transform_counts(&counts).to_csv())?;
    RunManifest::new("transform")
        .input(counts_path)
        .param("out", out.display())
        .emit(manifest);
    Ok(())
}

fn distances(
    counts_path: &Path,
    out: &Path,
    kind: MatrixKindArg,
    precision: u8,
    manifest: bool,
) -> Result<()> {
    let counts = load_counts(counts_path)?;
    warn_unmeasured_cells(&counts);
    let standardization = match kind {
        MatrixKindArg::St => Standardization::Standardized,
        MatrixKindArg::Raw => Standardization::Raw,
    };
    let matrix = distance_matrix(&transform_counts(&counts), standardization);
    write_text(out, &matrix.to_csv(precision as usize))?;
    RunManifest::new("distances")
        .input(counts_path)
        .param("kind", format!("{kind:?}").to_lowercase())
        .param("precision", precision)
        .param("out", out.display())
        .emit(manifest);
    Ok(())
}

fn chi2(counts_path: &Path, pair: &str, manifest: bool) -> Result<()> {
    let counts = load_counts(counts_path)?;
    let (left, right) = pair
        .split_once(',')
        .context("--pair expects two population labels separated by a comma")?;
    let table = transform_counts(&counts);
    let index_of = |label: &str| -> Result<usize> {
        table.population_index(label).with_context(|| {
            format!(
                "population '{label}' not found; available: {}",
                table.populations().join(", ")
            )
        })
    };
    let a = index_of(left)?;
    let b = index_of(right)?;
    let test = chi2_pair(&table.row(a), &table.row(b))?;
    println!("{test}");
    RunManifest::new("chi2")
        .input(counts_path)
        .param("pair", pair)
        .emit(manifest);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn bootstrap(
    counts_path: &Path,
    iterations: u32,
    seed: u64,
    out: &Path,
    raw: bool,
    keep_replicates: Option<&Path>,
    precision: u8,
    manifest: bool,
) -> Result<()> {
    let counts = load_counts(counts_path)?;
    warn_unmeasured_cells(&counts);
    let config = BootstrapConfig {
        iterations,
        master_seed: seed,
        keep_replicates: keep_replicates.is_some(),
        ..BootstrapConfig::default()
    };
    let table = transform_counts(&counts);
    let (boot_table, report) = bootstrap_table(&table, &config)?;
    warn_flagged_cells(&counts, &report);
    let standardization = if raw {
        Standardization::Raw
    } else {
        Standardization::Standardized
    };
    let matrix = distance_matrix(&boot_table, standardization);
    write_text(out, &matrix.to_csv(precision as usize))?;
    if let Some(dir) = keep_replicates {
        dump_replicates(dir, &counts, &report)?;
    }
    RunManifest::new("bootstrap")
        .input(counts_path)
        .seed(seed)
        .param("iterations", iterations)
        .param("raw", raw)
        .param("precision", precision)
        .param("out", out.display())
        .emit(manifest);
    Ok(())
}

fn dump_replicates(dir: &Path, counts: &TraitCounts, report: &BootstrapReport) -> Result<()> {
    let sets = report
        .replicate_sets
        .as_ref()
        .expect("keep_replicates was requested");
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (pop_label, row) in counts.populations().iter().zip(sets) {
        for (trait_label, set) in counts.traits().iter().zip(row) {
            if set.is_empty() {
                continue;
            }
            let name = format!("{}__{}.csv", sanitize(pop_label), sanitize(trait_label));
            let mut text = String::from("sigma_star\n");
            for value in set {
                writeln!(text, "{value}").expect("writing to string cannot fail");
            }
            write_text(&dir.join(name), &text)?;
        }
    }
    Ok(())
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn diagnose(
    counts_path: &Path,
    plain_path: &Path,
    boot_path: &Path,
    e_threshold: f64,
    t_threshold: f64,
    manifest: bool,
) -> Result<()> {
    let counts = load_counts(counts_path)?;
    let plain = load_matrix(plain_path, MatrixKind::StMmd)?;
    let boot = load_matrix(boot_path, MatrixKind::StMmdBoot)?;
    let thresholds = DiagnosticThresholds {
        max_relative_error_pct: e_threshold,
        min_information_fraction: t_threshold,
        ..DiagnosticThresholds::default()
    };
    let report = representativeness_report(&counts, &plain, &boot, thresholds)?;
    println!("{report}");
    println!("E_pct={:.4}", report.rescale.relative_error_pct);
    println!("lambda_inv_mean={:.6}", report.rescale.lambda_inv_mean);
    println!("spread={:.6}", report.rescale.spread);
    println!("n_pairs={}", report.rescale.n_pairs);
    let verdict = match report.verdict {
        Verdict::BootstrapOptional => "bootstrap_optional",
        Verdict::BootstrapAdvisable => "bootstrap_advisable",
    };
    println!("verdict={verdict}");
    RunManifest::new("diagnose")
        .input(counts_path)
        .input(plain_path)
        .input(boot_path)
        .param("e_threshold", e_threshold)
        .param("t_threshold", t_threshold)
        .emit(manifest);
    Ok(())
}

fn cluster(matrix_path: &Path, out: &Path, manifest: bool) -> Result<()> {
    let matrix = load_matrix(matrix_path, MatrixKind::StMmd)?;
    let tree = upgma(&matrix)?;
    write_text(out, &format!("{}\n", tree.to_newick()))?;
    print!("{}", tree.to_text());
    RunManifest::new("cluster")
        .input(matrix_path)
        .param("out", out.display())
        .emit(manifest);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    populations: usize,
    traits: usize,
    max_size: u32,
    lambda1: u32,
    lambda2: u32,
    seed: u64,
    out: &Path,
    manifest: bool,
) -> Result<()> {
    let config = SimConfig {
        n_populations: populations,
        n_traits: traits,
        max_size,
        lambda1,
        lambda2,
        master_seed: seed,
    };
    let counts = mmd_core::generate(&config)?;
    write_text(out, &counts.to_csv())?;
    RunManifest::new("simulate")
        .seed(seed)
        .param("populations", populations)
        .param("traits", traits)
        .param("max_size", max_size)
        .param("lambda1", lambda1)
        .param("lambda2", lambda2)
        .param("out", out.display())
        .emit(manifest);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn study(
    populations: usize,
    traits: usize,
    max_size: u32,
    lambda1: u32,
    lambda2: u32,
    iterations: u32,
    seed: u64,
    replicates: u32,
    manifest: bool,
) -> Result<()> {
    if replicates == 0 {
        bail!("--replicates must be at least 1");
    }
    let mut errors = Vec::new();
    let mut preserved = 0u32;
    for j in 0..u64::from(replicates) {
        let replicate_seed = seed + j;
        let sim = SimConfig {
            n_populations: populations,
            n_traits: traits,
            max_size,
            lambda1,
            lambda2,
            master_seed: replicate_seed,
        };
        let boot = BootstrapConfig {
            iterations,
            master_seed: replicate_seed,
            ..BootstrapConfig::default()
        };
        match mmd_core::end_to_end_study(&sim, &boot) {
            Ok(report) => {
                let topology = if report.topology_preserved {
                    preserved += 1;
                    "same"
                } else {
                    "different"
                };
                println!(
                    "replicate={j} E_pct={:.4} topology={topology}",
                    report.rescale.relative_error_pct
                );
                errors.push(report.rescale.relative_error_pct);
            }
            Err(err) => println!("replicate={j} error={err}"),
        }
    }
    if errors.is_empty() {
        bail!("every replicate failed");
    }
    errors.sort_by(|a, b| a.total_cmp(b));
    let median = if errors.len() % 2 == 1 {
        errors[errors.len() / 2]
    } else {
        (errors[errors.len() / 2 - 1] + errors[errors.len() / 2]) / 2.0
    };
    println!(
        "replicates={} median_E_pct={median:.4} topology_preserved={preserved}/{}",
        errors.len(),
        replicates
    );
    RunManifest::new("study")
        .seed(seed)
        .param("populations", populations)
        .param("traits", traits)
        .param("max_size", max_size)
        .param("lambda1", lambda1)
        .param("lambda2", lambda2)
        .param("iterations", iterations)
        .param("replicates", replicates)
        .emit(manifest);
    Ok(())
}

fn scaling_study(
    n_min: u32,
    n_max: u32,
    steps: u32,
    iterations: u32,
    seed: u64,
    out: &Path,
    manifest: bool,
) -> Result<()> {
    if n_min < 2 || n_min > n_max {
        bail!("need 2 <= n-min <= n-max, got [{n_min}, {n_max}]");
    }
    let sizes = log_spaced(n_min, n_max, steps);
    let points: Vec<(u32, f64, f64)> = sizes
        .iter()
        .enumerate()
        .map(|(idx, &n)| {
            let sigma = trait_sigma(n);
            let mut stream = derive_stream(seed, idx, None, StreamPurpose::ScalingStudy);
            let boot = mmd_core::bootstrap_sd(sigma, n, iterations, &mut stream)
                .expect("n >= 2 and iterations checked above");
            (n, sigma, boot)
        })
        .collect();
    let fit_input: Vec<(u32, f64)> = points.iter().map(|&(n, _, s)| (n, s)).collect();
    let fit = scaling_fit(&fit_input)?;

    let mut text = String::from("# n sigma frak_s fit\n");
    for (n, sigma, boot) in &points {
        let fitted = fit.prefactor_a / f64::from(*n).powf(fit.exponent_beta);
        writeln!(text, "{n} {sigma:.6e} {boot:.6e} {fitted:.6e}")
            .expect("writing to string cannot fail");
    }
    write_text(out, &text)?;
    println!(
        "points={} A={:.6} beta={:.6} r={:.6}",
        points.len(),
        fit.prefactor_a,
        fit.exponent_beta,
        fit.correlation_r
    );
    RunManifest::new("scaling-study")
        .seed(seed)
        .param("n_min", n_min)
        .param("n_max", n_max)
        .param("steps", steps)
        .param("iterations", iterations)
        .param("out", out.display())
        .emit(manifest);
    Ok(())
}

// Log-spaced integer grid, deduplicated while preserving order.
fn log_spaced(lo: u32, hi: u32, steps: u32) -> Vec<u32> {
    if steps <= 1 || lo == hi {
        return vec![lo];
    }
    let (ln_lo, ln_hi) = (f64::from(lo).ln(), f64::from(hi).ln());
    let mut out = Vec::with_capacity(steps as usize);
    for i in 0..steps {
        let t = f64::from(i) / f64::from(steps - 1);
        let n = (ln_lo + t * (ln_hi - ln_lo)).exp().round() as u32;
        let n = n.clamp(lo, hi);
        if out.last() != Some(&n) {
            out.push(n);
        }
    }
    out
}
