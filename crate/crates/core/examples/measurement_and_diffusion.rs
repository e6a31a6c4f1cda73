//! Alice measures σ_A^x, injecting E_A; the energy then spreads to site B
//! under H_tot.

use std::f64::consts::PI;

use qet::linalg::expectation;
use qet::model::{build_hamiltonians, e_a_closed, ground_state_closed_form, hb_expected};
use qet::protocol::{average_expectation, evolve_branches, infused_energy, measure_alice};
use qet::ModelParams;

/// Largest gap between simulated and closed-form `⟨H_B(t)⟩` over one period.
pub fn run_example() -> qet::Result<f64> {
    let p = ModelParams::new(1.0, 1.0)?;
    let hs = build_hamiltonians(&p);
    let branches = measure_alice(&ground_state_closed_form(&p))?;
    for b in &branches {
        println!(
            "mu = {}: p = {}, <sigma_A^z> = {:.6}",
            b.mu,
            b.probability,
            expectation(&b.state, &qet::linalg::pauli::on_a(&qet::linalg::pauli::z()))?
        );
    }
    println!("E_A simulated {} closed {}", infused_energy(&branches, &hs)?, e_a_closed(&p));

    let mut worst: f64 = 0.0;
    println!("t,hb_simulated,hb_closed");
    for i in 0..=16 {
        let t = i as f64 * PI / (8.0 * p.k());
        let sim = average_expectation(&evolve_branches(&branches, &hs, t)?, &hs.h_b)?;
        let closed = hb_expected(&p, t)?;
        worst = worst.max((sim - closed).abs());
        println!("{t:.4},{sim:.10},{closed:.10}");
    }
    Ok(worst)
}

#[allow(dead_code)]
fn main() -> qet::Result<()> {
    run_example().map(|_| ())
}
