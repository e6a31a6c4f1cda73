//! Bob's conditioned rotation at zero latency: the one-angle family against
//! its closed form, and an unrestricted SU(2) search per outcome.

use qet::model::{build_hamiltonians, e_b_closed, ground_state_closed_form, optimal_family_angle};
use qet::protocol::{compare_modes, measure_alice, OptimizerConfig};
use qet::ModelParams;

/// `(alpha, closed form, family optimum, full optimum)` rows.
pub fn run_example() -> qet::Result<Vec<(f64, f64, f64, f64)>> {
    let mut rows = Vec::new();
    println!("alpha,e_b_closed,family,full,theta_closed");
    for alpha in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let p = ModelParams::from_alpha(alpha, 1.0)?;
        let hs = build_hamiltonians(&p);
        let branches = measure_alice(&ground_state_closed_form(&p))?;
        let cmp = compare_modes(&branches, &hs, &OptimizerConfig::default())?;
        let row = (
            alpha,
            e_b_closed(&p),
            cmp.family.extracted_energy,
            cmp.full.extracted_energy,
        );
        println!(
            "{},{:.10},{:.10},{:.10},{:.6}",
            row.0,
            row.1,
            row.2,
            row.3,
            optimal_family_angle(&p)
        );
        if cmp.full_exceeds_family() {
            println!("  full SU(2) beats the family by {:.3e}", cmp.excess);
        }
        rows.push(row);
    }
    Ok(rows)
}

#[allow(dead_code)]
fn main() -> qet::Result<()> {
    run_example().map(|_| ())
}
