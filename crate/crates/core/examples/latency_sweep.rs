//! E_B and E_B·t_c as the classical message takes longer, Bob re-optimising
//! at every latency.

use qet::audit::scan_alpha;
use qet::audit::AlphaGrid;
use qet::locc::{sweep_latency, traces_to_csv, Policy, ProtocolTrace};
use qet::ModelParams;

pub fn run_example() -> qet::Result<Vec<ProtocolTrace>> {
    let alpha = scan_alpha(&AlphaGrid::with_points(1000))?.argmax_alpha;
    let p = ModelParams::from_alpha(alpha, 1.0)?;
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
    let traces = sweep_latency(&p, &grid, Policy::Optimize)?;
    print!("{}", traces_to_csv(&traces));
    Ok(traces)
}

#[allow(dead_code)]
fn main() -> qet::Result<()> {
    run_example().map(|_| ())
}
