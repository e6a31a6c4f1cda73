//! The minimal QET model: two qubits with local fields `h` and an `xx`
//! coupling `2k`, shifted so that the ground energy and each term's ground
//! expectation vanish.
//!
//! `H_A = h σ_A^z + h²/√(h²+k²)`, `H_B = h σ_B^z + h²/√(h²+k²)`,
//! `V = 2k σ_A^x σ_B^x + 2k²/√(h²+k²)`, `H_tot = H_A + H_B + V`.

use serde::{Deserialize, Serialize};

use crate::error::{QetError, Result};
use crate::linalg::{hermitian_eig, kron, pauli, Mat4, Spectrum, StateVector, C64};
use crate::tolerances::TOLERANCES;

/// The two positive energy constants of the model (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    h: f64,
    k: f64,
}

impl ModelParams {
    pub fn new(h: f64, k: f64) -> Result<Self> {
        for (name, v) in [("h", h), ("k", k)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(QetError::invalid(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(ModelParams { h, k })
    }

    /// `h = α k`.
    pub fn from_alpha(alpha: f64, k: f64) -> Result<Self> {
        Self::new(alpha * k, k)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn alpha(&self) -> f64 {
        self.h / self.k
    }

    /// `√(h² + k²)`.
    pub fn gap_scale(&self) -> f64 {
        self.h.hypot(self.k)
    }

    /// Time for the diffusion curve `⟨H_B(t)⟩` to repeat, `π/(2k)`.
    pub fn diffusion_period(&self) -> f64 {
        std::f64::consts::PI / (2.0 * self.k)
    }

    /// Closed-form spectrum of `H_tot`, ascending.
    pub fn spectrum_closed_form(&self) -> [f64; 4] {
        let e = self.gap_scale();
        let mut s = [0.0, 2.0 * e - 2.0 * self.k, 2.0 * e + 2.0 * self.k, 4.0 * e];
        s.sort_by(f64::total_cmp);
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianSet {
    pub h_a: Mat4,
    pub h_b: Mat4,
    pub v: Mat4,
    pub h_tot: Mat4,
}

impl HamiltonianSet {
    /// `H_B + V`, the part of `H_tot` that a unitary on B can change.
    pub fn site_b_and_coupling(&self) -> Mat4 {
        self.h_b + self.v
    }
}

pub fn build_hamiltonians(p: &ModelParams) -> HamiltonianSet {
    let (h, k) = (p.h, p.k);
    let e = p.gap_scale();
    let id = Mat4::identity();
    let h_a = pauli::on_a(&pauli::z()).scale_real(h) + id.scale_real(h * h / e);
    let h_b = pauli::on_b(&pauli::z()).scale_real(h) + id.scale_real(h * h / e);
    let v = kron(&pauli::x(), &pauli::x()).scale_real(2.0 * k) + id.scale_real(2.0 * k * k / e);
    HamiltonianSet {
        h_a,
        h_b,
        v,
        h_tot: h_a + h_b + v,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundState {
    pub state: StateVector,
    pub energy: f64,
}

/// Amplitudes `√((1−x)/2)` on `|++⟩` and `−√((1+x)/2)` on `|−−⟩` with
/// `x = h/√(h²+k²)`.
pub fn ground_state_closed_form(p: &ModelParams) -> GroundState {
    let x = p.h / p.gap_scale();
    let a = ((1.0 - x) / 2.0).sqrt();
    let b = -((1.0 + x) / 2.0).sqrt();
    GroundState {
        state: StateVector::new([
            C64::new(a, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(b, 0.0),
        ]),
        energy: 0.0,
    }
}

/// Ground state from diagonalising `H_tot`.
pub fn ground_state_numeric(hs: &HamiltonianSet) -> Result<(GroundState, Spectrum<4>)> {
    let spectrum = hermitian_eig(&hs.h_tot)?;
    if spectrum.eigenvalues[1] - spectrum.eigenvalues[0] <= TOLERANCES.derived {
        return Err(QetError::numeric("ground state of H_tot is degenerate"));
    }
    let g = GroundState {
        state: *spectrum.ground_vector(),
        energy: spectrum.ground_energy(),
    };
    Ok((g, spectrum))
}

/// Average energy put in by Alice's measurement, `h²/√(h²+k²)`.
pub fn e_a_closed(p: &ModelParams) -> f64 {
    p.h * p.h / p.gap_scale()
}

/// Average `⟨H_B(t)⟩` after Alice's measurement at `t = 0`.
pub fn hb_expected(p: &ModelParams, t: f64) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(QetError::invalid(format!("time must be non-negative, got {t}")));
    }
    Ok(p.h * p.h / (2.0 * p.gap_scale()) * (1.0 - (4.0 * p.k * t).cos()))
}

/// Energy Bob extracts with the optimal conditioned operation right after
/// the measurement.
pub fn e_b_closed(p: &ModelParams) -> f64 {
    let (h2, k2) = (p.h * p.h, p.k * p.k);
    let s = h2 + 2.0 * k2;
    let ratio = h2 * k2 / (s * s);
    // √(1+r) − 1 = r / (√(1+r) + 1), exact for small r.
    s / p.gap_scale() * (ratio / ((1.0 + ratio).sqrt() + 1.0))
}

/// Rotation angle of the optimal `cos θ + i(−1)^μ sin θ σ_B^y` family member
/// at zero latency.
pub fn optimal_family_angle(p: &ModelParams) -> f64 {
    -0.5 * (p.h * p.k).atan2(p.h * p.h + 2.0 * p.k * p.k)
}
