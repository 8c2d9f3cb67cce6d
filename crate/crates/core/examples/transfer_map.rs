//! Class-to-class transferability over the degree-6 lightcone catalog.
//!
//! cargo run --release --example transfer_map [-- out.csv]

use qaoa_transfer::graph::catalog;
use qaoa_transfer::metrics::transfer_map;
use qaoa_transfer::optimizer::OptimizerConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let classes = catalog(6, false);
    let (map, _) = transfer_map(&classes, &OptimizerConfig::default())?;
    let idx = |pred: fn(&qaoa_transfer::graph::LightconeClass) -> bool| -> Vec<usize> {
        (0..map.len()).filter(|&k| pred(&map.classes[k])).collect()
    };
    let (odd, even) = (idx(|c| c.is_odd()), idx(|c| c.is_even()));
    let m = &map.matrix;
    println!("{} classes", map.len());
    println!("odd->odd   {:.4}", m.block_mean(&odd, &odd).unwrap());
    println!("even->even {:.4}", m.block_mean(&even, &even).unwrap());
    println!("odd->even  {:.4}", m.block_mean(&odd, &even).unwrap());
    println!("even->odd  {:.4}", m.block_mean(&even, &odd).unwrap());
    let (gap, d, a) = m.max_asymmetry();
    println!("largest asymmetry {gap:.4} between {} and {}", map.classes[d], map.classes[a]);
    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, map.to_csv())?;
        println!("wrote {path}");
    }
    Ok(())
}
