use std::sync::OnceLock;

use qaoa_transfer::centers::{classify_optima, CenterCounts, CenterSet, RatioBasis, DEFAULT_RADIUS};
use qaoa_transfer::experiments::ensemble::{analyze, generate_ensemble, EnsembleAnalysis, EnsembleSpec};
use qaoa_transfer::graph::catalog;
use qaoa_transfer::metrics::{metric_stats, transfer_map, SimilarityStats};
use qaoa_transfer::optimizer::OptimizerConfig;

struct Fixture {
    analysis: EnsembleAnalysis,
    stats: SimilarityStats,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let cfg = OptimizerConfig::default();
        let analysis = analyze(generate_ensemble(&EnsembleSpec::default()).unwrap(), &cfg).unwrap();
        let (map, _) = transfer_map(&catalog(6, false), &cfg).unwrap();
        let records = analysis.similarity_records(&map, &CenterSet::bundled(), RatioBasis::QaoaOptimum).unwrap();
        assert_eq!(records.len(), 110 * 110);
        let stats = metric_stats(&records).unwrap();
        Fixture { analysis, stats }
    })
}

#[test]
fn ensemble_has_eleven_parity_levels() {
    let a = &fixture().analysis;
    assert_eq!(a.len(), 110);
    let heat = a.heatmap(11);
    assert_eq!(heat.len(), 11);
    assert!(heat.iter().all(|row| row.len() == 11 && row.iter().all(|v| v.is_finite())));
}

#[test]
fn subgraph_similarity_underestimates() {
    let e = fixture().stats.ss.mean_signed_error;
    assert!((e + 0.05).abs() <= 0.03, "mean signed error {e}");
}

#[test]
fn center_similarity_tracks_transferability() {
    let sps = fixture().stats.sps;
    assert!((sps.pearson - 0.77).abs() <= 0.1, "Pearson {}", sps.pearson);
    assert!((sps.mse - 0.0037).abs() <= 0.002, "MSE {}", sps.mse);
}

#[test]
fn pure_odd_graphs_avoid_even_centers() {
    let a = &fixture().analysis;
    let centers = CenterSet::bundled();
    let mut total = CenterCounts::default();
    for k in a.in_parity_range(0.0, 0.0) {
        total.add(&classify_optima(&a.optima[k], &centers, DEFAULT_RADIUS));
    }
    assert_eq!(total.total(), 200);
    assert!(total.even_favored() <= 10, "{total:?}");
    assert!(total.universal() + total.odd_favored() >= 180, "{total:?}");
}

#[test]
fn pure_even_graphs_avoid_odd_centers() {
    let a = &fixture().analysis;
    let centers = CenterSet::bundled();
    let mut total = CenterCounts::default();
    for k in a.in_parity_range(1.0, 1.0) {
        total.add(&classify_optima(&a.optima[k], &centers, DEFAULT_RADIUS));
    }
    assert!(total.odd_favored() <= 10, "{total:?}");
}

#[test]
fn mixed_parity_donors_transfer_at_least_as_well_on_average() {
    let a = &fixture().analysis;
    let n = a.len();
    let grand = (0..n).flat_map(|d| (0..n).map(move |x| (d, x))).filter(|(d, x)| d != x).map(|(d, x)| a.transfer.get(d, x)).sum::<f64>()
        / (n * (n - 1)) as f64;
    let mixed = a.in_parity_range(0.3, 0.7);
    let mixed_mean = mixed
        .iter()
        .flat_map(|&d| (0..n).filter(move |&x| x != d).map(move |x| (d, x)))
        .map(|(d, x)| a.transfer.get(d, x))
        .sum::<f64>()
        / (mixed.len() * (n - 1)) as f64;
    assert!(mixed_mean >= grand, "mixed donors {mixed_mean}, all donors {grand}");
}
