//! Transfers every optimum of 100 generated donors (6 to 20 nodes) to one
//! 64-node acceptor and summarizes the ratio distribution per donor size.
//!
//! cargo run --release --example ensemble_transfer

use std::collections::BTreeMap;

use qaoa_transfer::experiments::commands::ensemble_transfer_rows;
use qaoa_transfer::experiments::ExperimentConfig;
use qaoa_transfer::generate::generate_graph;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::default();
    let acceptor = generate_graph(64, 64, 6, 3)?;
    let (rows, native, _) = ensemble_transfer_rows(&cfg, &acceptor)?;
    println!("acceptor native best {:.4}, {} transferred points", native.energy, rows.len());
    let mut by_size: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in &rows {
        by_size.entry(r.donor_nodes).or_default().push(r.energy_ratio);
    }
    for (n, ratios) in by_size {
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
        println!("donor size {n:2}: mean {mean:.4}, max {max:.4}");
    }
    Ok(())
}
