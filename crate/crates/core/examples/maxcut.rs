//! Exact and heuristic maximum cuts, and the depth-1 approximation ratio.
//!
//! cargo run --release --example maxcut

use qaoa_transfer::energy::Objective;
use qaoa_transfer::generate::{generate_graph, random_regular};
use qaoa_transfer::maxcut::{approximation_ratio, solve_exact, solve_heuristic};
use qaoa_transfer::optimizer::{optimize, OptimizerConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graphs = [
        ("3-regular, 16 nodes", random_regular(16, 3, 1)?),
        ("random, 20 nodes", generate_graph(20, 10, 6, 2)?),
        ("random, 30 nodes", generate_graph(30, 14, 5, 3)?),
    ];
    for (label, g) in &graphs {
        let exact = solve_exact(g)?;
        let heuristic = solve_heuristic(g, 0, 100);
        let qaoa = optimize(label.to_string(), &Objective::from_graph(g), &OptimizerConfig::default())?;
        let ar = approximation_ratio(qaoa.best().energy, &exact)?;
        println!(
            "{label}: |E| {}, exact {}, heuristic {}, depth-1 energy {:.4}, ratio {:.4}",
            g.edge_count(),
            exact.value,
            heuristic.value,
            qaoa.best().energy,
            ar.ratio
        );
        println!("  witness {}", exact.assignment_string());
    }
    Ok(())
}
