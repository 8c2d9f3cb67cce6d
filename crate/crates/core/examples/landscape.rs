//! Energy landscape of one lightcone class on a 64x64 grid, with its local
//! maxima and the best point found by multistart ascent.
//!
//! cargo run --release --example landscape -- "(3,3,0)"

use qaoa_transfer::energy::{landscape, Objective, Subject};
use qaoa_transfer::graph::LightconeClass;
use qaoa_transfer::optimizer::{optimize, OptimizerConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let label = std::env::args().nth(1).unwrap_or_else(|| "(3,3,0)".into());
    let class: LightconeClass = label.parse()?;
    let land = landscape(&Subject::Class(class), 64, 64);
    println!("{class}: {} nodes in its lightcone", class.node_count());
    println!("grid max {:.6}, min {:.6}", land.max(), land.min());
    for p in land.local_maxima() {
        println!("  local max near {p}");
    }
    let set = optimize(label, &Objective::from_class(class), &OptimizerConfig::default())?;
    let best = set.best();
    println!("multistart best {:.6} at {}", best.energy, best.params());
    Ok(())
}
