//! Without Alice's outcome Bob gets nothing: the ground state is passive, and
//! a rotation that ignores μ cannot lower the energy of the measured state.

use qet::linalg::{kron, su2, axis_from_angles};
use qet::model::{build_hamiltonians, ground_state_closed_form};
use qet::protocol::{measure_alice, optimize_bob, unitary_extraction, OptimizerConfig, SearchMode};
use qet::ModelParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `(best outcome-independent extraction, best random-unitary extraction)`.
pub fn run_example() -> qet::Result<(f64, f64)> {
    let p = ModelParams::new(2.0, 1.0)?;
    let hs = build_hamiltonians(&p);
    let ground = ground_state_closed_form(&p);
    let branches = measure_alice(&ground)?;

    let blind = optimize_bob(&branches, &hs, &OptimizerConfig::default(), SearchMode::OutcomeIndependent)?;
    println!("outcome-independent optimum: {:.3e}", blind.extracted_energy);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..200 {
        let mut local = || -> qet::Result<_> {
            let axis = axis_from_angles(rng.gen_range(0.0..std::f64::consts::PI), rng.gen_range(0.0..6.3));
            su2(rng.gen_range(-3.2..3.2), axis)
        };
        let u = kron(&local()?, &local()?);
        best = best.max(unitary_extraction(&ground.state, &u, &hs)?);
    }
    println!("best of 200 random local unitaries on the ground state: {best:.3e}");
    Ok((blind.extracted_energy, best))
}

#[allow(dead_code)]
fn main() -> qet::Result<()> {
    run_example().map(|_| ())
}
