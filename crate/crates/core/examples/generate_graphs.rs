//! Random graphs with an exact number of even-degree nodes, and their
//! lightcone censuses.
//!
//! cargo run --release --example generate_graphs

use qaoa_transfer::generate::generate_graph;
use qaoa_transfer::graph::{census, parity};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for even in [0, 6, 10, 14, 20] {
        let g = generate_graph(20, even, 6, 42)?;
        let c = census(&g);
        println!(
            "even nodes {even:2}: parity {:.2}, {} edges, {} lightcone classes",
            parity(&g),
            g.edge_count(),
            c.distinct()
        );
        for (class, n) in c.iter().take(4) {
            println!("    {class} x{n}");
        }
    }
    match generate_graph(20, 1, 6, 0) {
        Ok(_) => unreachable!(),
        Err(e) => println!("odd target: {e}"),
    }
    Ok(())
}
