//! Recomputes the six parameter-space centers from a fresh 110-graph ensemble.
//!
//! cargo run --release --example calibrate_centers [-- out.json]

use qaoa_transfer::experiments::ensemble::reference_calibration;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let centers = reference_calibration()?;
    print!("{centers}");
    if let Some(path) = std::env::args().nth(1) {
        centers.write(&path)?;
        println!("wrote {path}");
    }
    Ok(())
}
