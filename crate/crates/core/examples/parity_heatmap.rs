//! Mean transferability between parity levels of a 110-graph, 20-node
//! ensemble, printed as an 11x11 grid.
//!
//! cargo run --release --example parity_heatmap

use qaoa_transfer::experiments::ensemble::{analyze, generate_ensemble, EnsembleSpec};
use qaoa_transfer::optimizer::OptimizerConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = EnsembleSpec::default();
    let analysis = analyze(generate_ensemble(&spec)?, &OptimizerConfig::default())?;
    println!("donor parity down, acceptor parity across");
    for row in analysis.heatmap(spec.parity_levels) {
        println!("{}", row.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(" "));
    }
    let blocks = analysis.parity_block_gap(0.2)?;
    println!("min T {:.4}", analysis.min_coefficient());
    println!("same parity {:.4}, cross parity {:.4}", blocks.same().unwrap(), blocks.cross().unwrap());
    Ok(())
}
