//! Build the two-qubit Hamiltonians, diagonalise `H_tot` and compare the
//! ground state with its closed form.

use qet::linalg::expectation;
use qet::model::{build_hamiltonians, ground_state_closed_form, ground_state_numeric};
use qet::ModelParams;

pub fn run_example() -> qet::Result<(f64, f64)> {
    let p = ModelParams::new(3.0, 4.0)?;
    let hs = build_hamiltonians(&p);
    let (numeric, spectrum) = ground_state_numeric(&hs)?;
    let closed = ground_state_closed_form(&p);

    println!("spectrum (numeric):     {:?}", spectrum.eigenvalues);
    println!("spectrum (closed form): {:?}", p.spectrum_closed_form());
    println!("ground energy {:.3e}", numeric.energy);
    for (name, op) in [("H_A", &hs.h_a), ("H_B", &hs.h_b), ("V", &hs.v)] {
        println!("<g|{name}|g> = {:.3e}", expectation(&closed.state, op)?);
    }
    let fidelity = closed.state.fidelity(&numeric.state);
    println!("fidelity closed vs numeric = {fidelity}");
    Ok((numeric.energy, fidelity))
}

#[allow(dead_code)]
fn main() -> qet::Result<()> {
    run_example().map(|_| ())
}
