//! How well the subgraph (SS), parity (PS) and center-distribution (SPS)
//! similarities predict the true transferability on a 110-graph ensemble.
//!
//! cargo run --release --example similarity_compare

use qaoa_transfer::centers::{CenterSet, RatioBasis};
use qaoa_transfer::experiments::ensemble::{analyze, generate_ensemble, EnsembleSpec};
use qaoa_transfer::graph::catalog;
use qaoa_transfer::metrics::{metric_stats, transfer_map};
use qaoa_transfer::optimizer::OptimizerConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = OptimizerConfig::default();
    let analysis = analyze(generate_ensemble(&EnsembleSpec::default())?, &cfg)?;
    let (map, _) = transfer_map(&catalog(6, false), &cfg)?;
    let centers = CenterSet::bundled();
    for basis in [RatioBasis::QaoaOptimum, RatioBasis::MaxCut] {
        let records = analysis.similarity_records(&map, &centers, basis)?;
        let s = metric_stats(&records)?;
        println!("{basis:?} ratios over {} pairs", records.len());
        for (name, m) in [("SS", s.ss), ("PS", s.ps), ("SPS", s.sps)] {
            println!("  {name:>3}: MSE {:.4}  Pearson {:.4}  mean error {:+.4}", m.mse, m.pearson, m.mean_signed_error);
        }
    }
    Ok(())
}
