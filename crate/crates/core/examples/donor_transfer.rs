//! Reuses the optimized angles of a 6-node donor on a 64-node acceptor of
//! the same parity and reports the loss against optimizing the acceptor.
//!
//! cargo run --release --example donor_transfer

use qaoa_transfer::experiments::commands::donor_acceptor_transfer;
use qaoa_transfer::generate::generate_graph;
use qaoa_transfer::graph::parity;
use qaoa_transfer::optimizer::OptimizerConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = OptimizerConfig::default();
    for (label, donor_even, acceptor_even) in [("odd", 0, 0), ("even", 6, 64), ("odd->even", 0, 64)] {
        let donor = generate_graph(6, donor_even, 5, 11)?;
        let acceptor = generate_graph(64, acceptor_even, 6, 12)?;
        let r = donor_acceptor_transfer(&donor, &acceptor, &cfg)?;
        println!(
            "{label:>9}: donor parity {:.2}, acceptor parity {:.2}, native {:.4}, transferred {:.4}, reduction {:.2}%, T {:.4}",
            parity(&donor),
            parity(&acceptor),
            r.acceptor_best.energy,
            r.transferred_energy,
            100.0 * r.relative_reduction,
            r.record.coefficient,
        );
    }
    Ok(())
}
