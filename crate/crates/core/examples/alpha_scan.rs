//! f(α) = E_B/k over α ∈ (0.01, 20], its maximum, and the published value.

use qet::audit::{scan_alpha, AlphaGrid, AlphaScanResult, PUBLISHED_F_MAX};

pub fn run_example() -> qet::Result<AlphaScanResult> {
    let scan = scan_alpha(&AlphaGrid::default())?;
    for (a, f) in scan.grid.iter().zip(&scan.values).step_by(500) {
        println!("{a:>8.4}  {f:.8}");
    }
    println!("max f = {:.11} at alpha = {:.6}", scan.max_value, scan.argmax_alpha);
    println!("published: about {PUBLISHED_F_MAX}");
    println!("f < 1 everywhere: {}", scan.all_below_one());
    Ok(scan)
}

#[allow(dead_code)]
fn main() -> qet::Result<()> {
    run_example().map(|_| ())
}
