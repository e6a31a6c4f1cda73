//! One protocol round as an event log: measure, send, deliver, extract.

use qet::locc::{run_once, Policy, ProtocolTrace};
use qet::ModelParams;

pub fn run_example() -> qet::Result<ProtocolTrace> {
    let p = ModelParams::new(3.0, 4.0)?;
    let trace = run_once(&p, 0.05, Policy::Optimize)?;
    for e in &trace.events {
        println!("t={:<6} {:?} {:?} {:?}", e.time, e.actor, e.action, e.mu);
    }
    println!(
        "E_A = {:.10}, E_B = {:.10}, E_B*t_c = {:.3e}, {}",
        trace.e_a,
        trace.e_b_extracted,
        trace.uncertainty_product,
        trace.verdict.as_str()
    );
    println!("recomputed E_B = {:.10}", trace.recompute_extraction()?);
    println!("digest {}", trace.digest());
    Ok(trace)
}

#[allow(dead_code)]
fn main() -> qet::Result<()> {
    run_example().map(|_| ())
}
