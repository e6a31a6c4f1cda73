//! Numerical tolerances shared by every module, in one record.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Structural checks: Hermiticity, unit norm, SU(2) axis length,
    /// eigen-residuals (scaled by `max(1, ‖H‖_max)`).
    pub structural: f64,
    /// Identities that hold after a chain of floating-point operations
    /// (zero ground energy, propagator unitarity, infused energy).
    pub derived: f64,
    /// Simulated vs closed-form diffusion curve.
    pub diffusion: f64,
    /// Maximum tolerated imaginary part of an expectation value.
    pub imaginary_residue: f64,
    /// Largest extracted energy treated as "no extraction".
    pub passivity: f64,
    /// Relative agreement between optimiser and closed-form extraction.
    pub optimizer_relative: f64,
    /// Jacobi sweeps before the eigensolver gives up.
    pub jacobi_max_sweeps: usize,
}

pub const TOLERANCES: Tolerances = Tolerances {
    structural: 1e-12,
    derived: 1e-10,
    diffusion: 1e-8,
    imaginary_residue: 1e-12,
    passivity: 1e-9,
    optimizer_relative: 1e-6,
    jacobi_max_sweeps: 64,
};

/// Energy-time product at or above which a value counts as observable (ħ = 1).
pub const OBSERVABILITY_THRESHOLD: f64 = 1.0;
