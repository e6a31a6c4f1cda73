//! Energy-time audit of the two-qubit protocol for a few delivery times.

use qet::audit::{audit_minimal, AuditReport};
use qet::ModelParams;

pub fn run_example() -> qet::Result<Vec<AuditReport>> {
    let p = ModelParams::from_alpha(2.0, 1.0)?;
    let mut reports = Vec::new();
    for t in [0.25, 1.0, 100.0] {
        let r = audit_minimal(&p, t)?;
        println!("{}", r.to_json());
        reports.push(r);
    }
    Ok(reports)
}

#[allow(dead_code)]
fn main() -> qet::Result<()> {
    run_example().map(|_| ())
}
