//! Trapped-ion output E_out = γ E_in exp(−ζ E_in/ν) sin²2φ, its maximiser,
//! and the audit at phonon-scale input.

use qet::audit::{audit_ion, ion_maximize, AuditReport, IonParams};

pub fn run_example() -> qet::Result<(AuditReport, AuditReport)> {
    let ip = IonParams::illustrative();
    let opt = ion_maximize(&ip)?;
    println!(
        "maximiser {:.12} (nu/zeta = {}), E_out max {:.10}",
        opt.e_in_star, opt.stationary_e_in, opt.e_out_max
    );
    let typical = audit_ion(&ip, 1.0 / ip.nu())?;
    println!("{}", typical.to_json());

    let weak = audit_ion(&IonParams::new(1.0, 0.1, 1.0, std::f64::consts::FRAC_PI_4)?, 1.0)?;
    println!("{}", weak.to_json());
    if let Some(ion) = &weak.ion {
        for flag in &ion.flags {
            println!("flag: {}", flag.describe());
        }
    }
    Ok((typical, weak))
}

#[allow(dead_code)]
fn main() -> qet::Result<()> {
    run_example().map(|_| ())
}
