//! Dense simulation of a small graph: the lightcone sum against the full
//! statevector, and sampled cuts from the optimized state.
//!
//! cargo run --release --example statevector

use std::collections::BTreeMap;

use qaoa_transfer::energy::{graph_energy, Objective};
use qaoa_transfer::generate::generate_graph;
use qaoa_transfer::optimizer::{optimize, OptimizerConfig};
use qaoa_transfer::simulator::{sample_cut, Simulator};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = generate_graph(12, 6, 4, 5)?;
    let set = optimize("g12", &Objective::from_graph(&g), &OptimizerConfig::default())?;
    let p = set.best().params();
    let sim = Simulator::new();
    println!("lightcone sum {:.12}", graph_energy(&g, p));
    println!("statevector   {:.12}", sim.energy(&g, p)?);
    let state = sim.prepare_state(&g, p)?;
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    let mut best = (0, String::new());
    for b in sample_cut(&state, 2000, 9) {
        let assignment: Vec<bool> = b.to_string().chars().map(|c| c == '1').collect();
        let cut = g.cut_value(&assignment);
        *counts.entry(cut).or_default() += 1;
        if cut > best.0 {
            best = (cut, b.to_string());
        }
    }
    println!("sampled cut histogram {counts:?}");
    println!("best sample {} cuts {}", best.1, best.0);
    Ok(())
}
