//! End-to-end behavior of the bootstrap pipeline: determinism across worker
//! counts, the shrinkage and scaling laws of the bootstrapped sigmas, and the
//! generate-compare study loop.

use mmd_core::{
    aggregate, bootstrap_distance_matrix, bootstrap_sd, bootstrap_table, derive_stream,
    distance_matrix, end_to_end_study, parse_individuals, rescale_stats, scaling_fit,
    topology_equal, trait_sigma, transform_counts, upgma, BootstrapConfig, SimConfig,
    Standardization, StreamPurpose, TraitCounts,
};

fn fixture(name: &str) -> String {
    let path = format!("{}/../../testdata/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("cannot read {path}: {e}"))
}

#[test]
fn ingest_and_count_level_paths_agree_byte_for_byte() {
    let individuals = parse_individuals(&fixture("xico_individuals.csv")).unwrap();
    let counts = aggregate(&individuals).unwrap();
    let exported = counts.to_csv();
    let reparsed = TraitCounts::from_csv(&exported).unwrap();
    assert_eq!(reparsed, counts);
    assert_eq!(reparsed.to_csv(), exported);
}

#[test]
fn bootstrap_is_identical_across_worker_counts() {
    let counts = TraitCounts::from_csv(&fixture("artificial_good_counts.csv")).unwrap();
    let config = BootstrapConfig {
        iterations: 120,
        master_seed: 31,
        ..BootstrapConfig::default()
    };
    let run_with = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| bootstrap_distance_matrix(&counts, &config).unwrap().0)
    };
    let serial = run_with(1);
    let parallel = run_with(8);
    assert_eq!(serial, parallel);
    assert_eq!(serial.to_csv(12), parallel.to_csv(12));
}

#[test]
fn bootstrapped_sigmas_shrink_on_every_cell() {
    // random tables over a spread of sample sizes; B = 500 throughout
    let mut failures = Vec::new();
    for table_seed in 0..100u64 {
        let mut picker = derive_stream(table_seed, 0, None, StreamPurpose::Calibration);
        for cell in 0..6u32 {
            let n = picker.next_int_inclusive(2, 300);
            let sigma = trait_sigma(n);
            let mut stream =
                derive_stream(table_seed, cell as usize, Some(0), StreamPurpose::Bootstrap);
            let boot = bootstrap_sd(sigma, n, 500, &mut stream).unwrap();
            if boot >= sigma {
                failures.push((table_seed, n, sigma, boot));
            }
        }
    }
    assert!(failures.is_empty(), "non-shrinking cells: {failures:?}");
}

#[test]
fn bootstrapped_sigma_follows_an_inverse_power_law() {
    let ns = [10u32, 16, 27, 44, 72, 118, 193, 316, 517, 846, 1000];
    let points: Vec<(u32, f64)> = ns
        .iter()
        .enumerate()
        .map(|(idx, &n)| {
            let mut stream = derive_stream(4242, idx, None, StreamPurpose::ScalingStudy);
            (
                n,
                bootstrap_sd(trait_sigma(n), n, 500, &mut stream).unwrap(),
            )
        })
        .collect();
    let fit = scaling_fit(&points).unwrap();
    assert!(
        (0.9..=1.1).contains(&fit.exponent_beta),
        "beta = {}",
        fit.exponent_beta
    );
    assert!(fit.correlation_r < -0.99, "r = {}", fit.correlation_r);

    // order of magnitude of the prefactor, on a loose band
    for (n, s) in points {
        if (50..=500).contains(&n) {
            let ratio = s * f64::from(n) / 0.39;
            assert!((0.5..=2.0).contains(&ratio), "n={n}: ratio {ratio}");
        }
    }
}

#[test]
fn well_measured_data_bootstrap_is_almost_a_rescaling() {
    let counts = TraitCounts::from_csv(&fixture("artificial_good_counts.csv")).unwrap();
    let plain = distance_matrix(&transform_counts(&counts), Standardization::Standardized);
    let (boot, report) = bootstrap_distance_matrix(&counts, &BootstrapConfig::default()).unwrap();
    assert!(report.flagged_cells.is_empty());

    // bootstrapped distances sit three orders of magnitude above the plain ones
    let max_boot = boot
        .upper_triangle()
        .map(|(_, _, v)| v)
        .fold(0.0f64, f64::max);
    assert!(max_boot > 1000.0, "max bootstrapped distance {max_boot}");

    let stats = rescale_stats(&plain, &boot).unwrap();
    assert!(
        stats.relative_error_pct < 10.0,
        "E = {}",
        stats.relative_error_pct
    );
}

#[test]
fn bootstrap_topology_is_stable_across_seeds_on_well_measured_data() {
    let counts = TraitCounts::from_csv(&fixture("artificial_good_counts.csv")).unwrap();
    let plain = distance_matrix(&transform_counts(&counts), Standardization::Standardized);
    let plain_tree = upgma(&plain).unwrap();
    let mut matching = 0;
    let mut previous: Option<mmd_core::DistanceMatrix> = None;
    for seed in 1..=10u64 {
        let config = BootstrapConfig {
            master_seed: seed,
            ..BootstrapConfig::default()
        };
        let (matrix, _) = bootstrap_distance_matrix(&counts, &config).unwrap();
        if let Some(prev) = &previous {
            assert_ne!(
                prev, &matrix,
                "different seeds must give different matrices"
            );
        }
        if topology_equal(&plain_tree, &upgma(&matrix).unwrap()).unwrap() {
            matching += 1;
        }
        previous = Some(matrix);
    }
    // this dataset carries one near-tie merge, so the occasional seed flips
    // it; stability means almost all seeds agree with the plain dendrogram
    assert!(
        matching >= 8,
        "only {matching} of 10 seeds kept the topology"
    );
}

#[test]
fn study_medians_separate_good_from_bad_regimes() {
    let run = |lambda1: u32, lambda2: u32| {
        let mut errors = Vec::new();
        let mut preserved = 0usize;
        for seed in 0..50u64 {
            let sim = SimConfig {
                lambda1,
                lambda2,
                master_seed: seed,
                ..SimConfig::default()
            };
            let boot = BootstrapConfig {
                master_seed: seed,
                ..BootstrapConfig::default()
            };
            let report = end_to_end_study(&sim, &boot).unwrap();
            errors.push(report.rescale.relative_error_pct);
            preserved += usize::from(report.topology_preserved);
        }
        errors.sort_by(|a, b| a.total_cmp(b));
        let median = (errors[24] + errors[25]) / 2.0;
        (median, preserved)
    };

    let (median_good, preserved_good) = run(50, 45);
    let (median_bad, preserved_bad) = run(2, 2);
    assert!(median_good <= 10.0, "good median E = {median_good}");
    assert!(median_bad > 10.0, "bad median E = {median_bad}");
    // topology survives far more often in the well-measured regime; exact
    // partition equality is fragile on near-tie data, so majorities are not
    // guaranteed for either side
    assert!(preserved_good >= 15, "good preserved {preserved_good}/50");
    assert!(preserved_bad <= 10, "bad preserved {preserved_bad}/50");
    assert!(preserved_good > preserved_bad);
}

#[test]
fn bootstrap_keeps_thetas_and_replaces_sigmas() {
    let counts = TraitCounts::from_csv(&fixture("mexico_counts.csv")).unwrap();
    let table = transform_counts(&counts);
    let (boot, report) = bootstrap_table(&table, &BootstrapConfig::default()).unwrap();
    assert!(report.flagged_cells.is_empty(), "all cells have n >= 2");
    for p in 0..table.n_populations() {
        for t in 0..table.n_traits() {
            assert_eq!(boot.theta(p, t), table.theta(p, t));
            assert!(boot.sigma(p, t) < table.sigma(p, t));
        }
    }
}
