//! Golden-file tests against the reference datasets in testdata/: two
//! artificial ten-population datasets (well and poorly measured) and the
//! seven-population Basin of Mexico dataset, each with its plain and
//! bootstrapped standardized distance matrix.

use mmd_core::{
    aggregate, chi2_pair, distance_matrix, information_fraction_normalized, parse_individuals,
    rescale_stats, topology_equal, transform_counts, upgma, DistanceMatrix, MatrixKind,
    Standardization, TraitCounts,
};

fn fixture(name: &str) -> String {
    let path = format!("{}/../../testdata/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("cannot read {path}: {e}"))
}

fn counts(name: &str) -> TraitCounts {
    TraitCounts::from_csv(&fixture(name)).expect("fixture counts parse")
}

fn matrix(name: &str, kind: MatrixKind) -> DistanceMatrix {
    DistanceMatrix::from_csv(&fixture(name), kind).expect("fixture matrix parse")
}

fn assert_matrix_close(computed: &DistanceMatrix, reference: &DistanceMatrix, tol: f64) {
    assert_eq!(computed.labels(), reference.labels());
    for i in 0..reference.len() {
        for j in 0..reference.len() {
            let (got, want) = (computed.value(i, j), reference.value(i, j));
            assert!(
                (got - want).abs() <= tol,
                "entry ({}, {}): computed {got} vs reference {want}",
                reference.labels()[i],
                reference.labels()[j],
            );
        }
    }
}

#[test]
fn fixture_counts_have_expected_shape() {
    let good = counts("artificial_good_counts.csv");
    assert_eq!(good.n_populations(), 10);
    assert_eq!(good.n_traits(), 13);
    let sizes: Vec<u32> = (0..10).map(|p| good.pop_size(p)).collect();
    assert_eq!(sizes, vec![93, 76, 68, 58, 64, 64, 93, 62, 72, 85]);

    let mexico = counts("mexico_counts.csv");
    assert_eq!(mexico.n_populations(), 7);
    let sizes: Vec<u32> = (0..7).map(|p| mexico.pop_size(p)).collect();
    assert_eq!(sizes, vec![78, 66, 5, 23, 118, 15, 28]);
    assert_eq!(mexico.traits()[0], "MetopicSuture");
}

#[test]
fn good_counts_reproduce_reference_distances() {
    let computed = distance_matrix(
        &transform_counts(&counts("artificial_good_counts.csv")),
        Standardization::Standardized,
    );
    let reference = matrix("artificial_good_stmmd.csv", MatrixKind::StMmd);
    assert_matrix_close(&computed, &reference, 0.01);
    // spot value straight from the table
    assert!((computed.value(0, 1) - 64.36).abs() <= 0.01);
}

#[test]
fn poor_counts_reproduce_reference_distances() {
    let computed = distance_matrix(
        &transform_counts(&counts("artificial_poor_counts.csv")),
        Standardization::Standardized,
    );
    let reference = matrix("artificial_poor_stmmd.csv", MatrixKind::StMmd);
    assert_matrix_close(&computed, &reference, 0.01);
    assert!(
        (computed.value(3, 4) - 31.05).abs() <= 0.01,
        "largest entry"
    );
    // the (P3, P6) pair is clamped to zero in the reference
    assert_eq!(computed.value(2, 5), 0.0);
}

#[test]
fn mexico_counts_reproduce_reference_distances() {
    let computed = distance_matrix(
        &transform_counts(&counts("mexico_counts.csv")),
        Standardization::Standardized,
    );
    let reference = matrix("mexico_stmmd.csv", MatrixKind::StMmd);
    assert_matrix_close(&computed, &reference, 0.01);
    assert!((computed.value(0, 1) - 28.84).abs() <= 0.01);
    // Epiclassic vs Postclassic Xico is indistinguishable without bootstrap
    assert_eq!(computed.value(2, 6), 0.0);
}

#[test]
fn two_decimal_output_is_byte_identical_to_the_reference() {
    let computed = distance_matrix(
        &transform_counts(&counts("mexico_counts.csv")),
        Standardization::Standardized,
    );
    assert_eq!(computed.to_csv(2), fixture("mexico_stmmd.csv"));
}

#[test]
fn information_fractions_match_reference_tables() {
    let cases: [(&str, &[f64]); 3] = [
        (
            "artificial_good_counts.csv",
            &[0.78, 0.82, 0.83, 0.91, 0.88, 0.86, 0.74, 0.86, 0.87, 0.69],
        ),
        (
            "artificial_poor_counts.csv",
            &[0.35, 0.62, 0.69, 0.48, 0.51, 0.71, 0.39, 0.54, 0.58, 0.61],
        ),
        (
            "mexico_counts.csv",
            &[0.93, 0.31, 0.92, 0.95, 0.82, 0.71, 0.88],
        ),
    ];
    for (name, expected) in cases {
        let data = counts(name);
        for (pi, want) in expected.iter().enumerate() {
            let got = information_fraction_normalized(&data, pi).unwrap();
            assert!(
                (got - want).abs() <= 0.005,
                "{name} population {}: {got} vs {want}",
                data.populations()[pi],
            );
        }
    }
}

#[test]
fn rescaling_errors_match_reference_matrices() {
    let cases = [
        (
            "artificial_good_stmmd.csv",
            "artificial_good_stmmd_boot.csv",
            5.9881,
            0.1,
        ),
        (
            "artificial_poor_stmmd.csv",
            "artificial_poor_stmmd_boot.csv",
            39.26,
            0.5,
        ),
        ("mexico_stmmd.csv", "mexico_stmmd_boot.csv", 95.29, 1.0),
    ];
    for (plain_name, boot_name, expected, tol) in cases {
        let plain = matrix(plain_name, MatrixKind::StMmd);
        let boot = matrix(boot_name, MatrixKind::StMmdBoot);
        let stats = rescale_stats(&plain, &boot).unwrap();
        assert!(
            (stats.relative_error_pct - expected).abs() <= tol,
            "{plain_name}: E = {} vs {expected}",
            stats.relative_error_pct,
        );
    }
}

#[test]
fn chi_square_for_the_xico_pair_follows_the_analytic_formula() {
    let table = transform_counts(&counts("mexico_counts.csv"));
    let a = table.population_index("Epiclassic Xico").unwrap();
    let b = table.population_index("Postclassic Xico").unwrap();
    let test = chi2_pair(&table.row(a), &table.row(b)).unwrap();
    assert_eq!(test.dof, 13);
    // frozen from an independent high-precision evaluation of the formula
    assert!(
        (test.chi2 - 11.546543711471445).abs() < 1e-9,
        "{}",
        test.chi2
    );
    assert!(
        (test.p_value - 0.5651306506966333).abs() < 1e-9,
        "{}",
        test.p_value
    );
}

#[test]
fn bootstrapping_rescales_but_preserves_good_data_topology() {
    let plain = matrix("artificial_good_stmmd.csv", MatrixKind::StMmd);
    let boot = matrix("artificial_good_stmmd_boot.csv", MatrixKind::StMmdBoot);
    assert!(topology_equal(&upgma(&plain).unwrap(), &upgma(&boot).unwrap()).unwrap());
}

#[test]
fn bootstrapping_reorders_poor_data_topology() {
    let plain = matrix("artificial_poor_stmmd.csv", MatrixKind::StMmd);
    let boot = matrix("artificial_poor_stmmd_boot.csv", MatrixKind::StMmdBoot);
    assert!(!topology_equal(&upgma(&plain).unwrap(), &upgma(&boot).unwrap()).unwrap());
}

#[test]
fn individual_records_aggregate_to_the_reference_counts() {
    let table = parse_individuals(&fixture("xico_individuals.csv")).unwrap();
    let aggregated = aggregate(&table).unwrap();
    let mexico = counts("mexico_counts.csv");

    assert_eq!(
        aggregated.populations(),
        ["Epiclassic Xico", "Postclassic Xico"]
    );
    assert_eq!(aggregated.pop_size(0), 5);
    assert_eq!(aggregated.pop_size(1), 28);
    let epi = mexico.population_index("Epiclassic Xico").unwrap();
    let post = mexico.population_index("Postclassic Xico").unwrap();
    for ti in 0..13 {
        assert_eq!(aggregated.measured(0, ti), mexico.measured(epi, ti));
        assert_eq!(aggregated.present(0, ti), mexico.present(epi, ti));
        assert_eq!(aggregated.measured(1, ti), mexico.measured(post, ti));
        assert_eq!(aggregated.present(1, ti), mexico.present(post, ti));
    }
    // expected rows, written out once for the record
    let n_row: Vec<u32> = (0..13).map(|ti| aggregated.measured(0, ti)).collect();
    let k_row: Vec<u32> = (0..13).map(|ti| aggregated.present(0, ti)).collect();
    assert_eq!(n_row, vec![5, 5, 5, 5, 5, 5, 4, 4, 3, 4, 5, 5, 5]);
    assert_eq!(k_row, vec![0, 5, 4, 0, 2, 5, 3, 0, 2, 2, 4, 1, 1]);
}
