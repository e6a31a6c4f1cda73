//! One QET round by exhaustive branch enumeration.
//!
//! Alice measures `σ_A^x` on the ground state, each outcome branch evolves
//! under `H_tot` for the classical-communication delay, and Bob applies a
//! unitary on site B chosen by the outcome. The energy Bob extracts is the
//! probability-weighted drop of `⟨H_tot⟩` caused by his unitary.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QetError, Result};
use crate::linalg::{axis_from_angles, expectation, pauli, su2, Mat2, Mat4, StateVector};
use crate::model::{GroundState, HamiltonianSet};
use crate::optimize::{grid_then_golden, nelder_mead_max, NelderMeadConfig};
use crate::tolerances::TOLERANCES;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeBranch {
    pub mu: u8,
    pub probability: f64,
    /// Normalised post-measurement state.
    pub state: StateVector,
}

/// Both outcome branches, indexed by `mu`.
pub type BranchPair = [OutcomeBranch; 2];

/// `P_A(μ) = ½(1 + (−1)^μ σ_A^x)`.
pub fn projector(mu: u8) -> Mat4 {
    let sign = if mu == 0 { 1.0 } else { -1.0 };
    (Mat4::identity() + pauli::on_a(&pauli::x()).scale_real(sign)).scale_real(0.5)
}

pub fn measure_alice(g: &GroundState) -> Result<BranchPair> {
    measure_site_a(&g.state)
}

/// Projective `σ_A^x` measurement of an arbitrary unit state.
pub fn measure_site_a(state: &StateVector) -> Result<BranchPair> {
    let branch = |mu: u8| -> Result<OutcomeBranch> {
        let projected = projector(mu).apply(state);
        let probability = projected.norm_sqr();
        if probability <= TOLERANCES.structural {
            return Err(QetError::DegenerateBranch { mu });
        }
        Ok(OutcomeBranch {
            mu,
            probability,
            state: projected.normalized()?,
        })
    };
    Ok([branch(0)?, branch(1)?])
}

/// `Σ_μ p(μ)·⟨ψ_μ|op|ψ_μ⟩`.
pub fn average_expectation(branches: &BranchPair, op: &Mat4) -> Result<f64> {
    branches.iter().try_fold(0.0, |acc, b| {
        Ok(acc + b.probability * expectation(&b.state, op)?)
    })
}

/// Energy added by the measurement; the ground energy is zero.
pub fn infused_energy(branches: &BranchPair, hs: &HamiltonianSet) -> Result<f64> {
    average_expectation(branches, &hs.h_tot)
}

pub fn evolve_branches(branches: &BranchPair, hs: &HamiltonianSet, t: f64) -> Result<BranchPair> {
    if !t.is_finite() || t < 0.0 {
        return Err(QetError::invalid(format!(
            "evolution time must be non-negative, got {t}"
        )));
    }
    let u = crate::linalg::evolve_operator(&hs.h_tot, t)?;
    Ok(apply_to_branches(branches, &u))
}

/// Apply the same two-qubit operator to every branch state.
pub fn apply_to_branches(branches: &BranchPair, op: &Mat4) -> BranchPair {
    branches.map(|b| OutcomeBranch {
        state: op.apply(&b.state),
        ..b
    })
}

/// One SU(2) element `cos θ + i sin θ (n̂·σ⃗)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalRotation {
    pub theta: f64,
    pub axis: [f64; 3],
}

impl LocalRotation {
    pub fn identity() -> Self {
        LocalRotation {
            theta: 0.0,
            axis: [0.0, 0.0, 1.0],
        }
    }

    /// From `[θ, polar, azimuth]`.
    pub fn from_params(params: &[f64]) -> Self {
        LocalRotation {
            theta: params[0],
            axis: axis_from_angles(params[1], params[2]),
        }
    }

    pub fn unitary(&self) -> Result<Mat2> {
        su2(self.theta, self.axis)
    }
}

/// Bob's outcome-conditioned operation on site B.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BobControl {
    /// `U_B(μ) = cos θ·I + i(−1)^μ sin θ·σ_B^y`.
    Family { theta: f64 },
    /// Independent SU(2) element per outcome, indexed by `mu`.
    Full { rotations: [LocalRotation; 2] },
}

impl BobControl {
    pub fn identity() -> Self {
        BobControl::Family { theta: 0.0 }
    }

    /// The same rotation whatever the outcome.
    pub fn outcome_independent(rotation: LocalRotation) -> Self {
        BobControl::Full {
            rotations: [rotation, rotation],
        }
    }

    pub fn unitary(&self, mu: u8) -> Result<Mat2> {
        if mu > 1 {
            return Err(QetError::invalid(format!("outcome must be 0 or 1, got {mu}")));
        }
        match self {
            BobControl::Family { theta } => {
                let signed = if mu == 0 { *theta } else { -*theta };
                su2(signed, [0.0, 1.0, 0.0])
            }
            BobControl::Full { rotations } => rotations[mu as usize].unitary(),
        }
    }
}

pub fn apply_bob(branches: &BranchPair, control: &BobControl) -> Result<BranchPair> {
    let mut out = *branches;
    for b in out.iter_mut() {
        let u = pauli::on_b(&control.unitary(b.mu)?);
        b.state = u.apply(&b.state);
    }
    Ok(out)
}

/// Per-branch drop `⟨H_tot⟩_before − ⟨H_tot⟩_after`, unweighted.
pub fn branch_extraction(
    before: &BranchPair,
    after: &BranchPair,
    hs: &HamiltonianSet,
) -> Result<[f64; 2]> {
    let mut drops = [0.0; 2];
    for (i, (b, a)) in before.iter().zip(after.iter()).enumerate() {
        if b.mu != a.mu || b.probability != a.probability {
            return Err(QetError::invalid(
                "branches before and after Bob's operation do not correspond",
            ));
        }
        drops[i] = expectation(&b.state, &hs.h_tot)? - expectation(&a.state, &hs.h_tot)?;
    }
    Ok(drops)
}

/// Probability-weighted energy drop; positive means energy left through B.
pub fn extracted_energy(
    before: &BranchPair,
    after: &BranchPair,
    hs: &HamiltonianSet,
) -> Result<f64> {
    let drops = branch_extraction(before, after, hs)?;
    Ok(before
        .iter()
        .zip(drops.iter())
        .map(|(b, d)| b.probability * d)
        .sum())
}

/// Energy extracted from an unmeasured state by a global unitary.
pub fn unitary_extraction(state: &StateVector, u: &Mat4, hs: &HamiltonianSet) -> Result<f64> {
    Ok(expectation(state, &hs.h_tot)? - expectation(&u.apply(state), &hs.h_tot)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub coarse_grid_points: usize,
    pub refine_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            coarse_grid_points: 64,
            refine_tolerance: 1e-10,
            max_iterations: 4000,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.coarse_grid_points < 32 {
            return Err(QetError::invalid("coarse_grid_points must be at least 32"));
        }
        if !(self.refine_tolerance > 0.0) || !self.refine_tolerance.is_finite() {
            return Err(QetError::invalid("refine_tolerance must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(QetError::invalid("max_iterations must be positive"));
        }
        Ok(())
    }

    fn nelder_mead(&self) -> NelderMeadConfig {
        NelderMeadConfig {
            value_tolerance: self.refine_tolerance,
            size_tolerance: 1e-5,
            max_iterations: self.max_iterations,
        }
    }
}

/// Which operations Bob may choose from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// One angle, `σ_B^y` rotations with outcome-dependent sign.
    Family,
    /// Independent SU(2) element per outcome.
    Full,
    /// One SU(2) element used for both outcomes (no classical information).
    OutcomeIndependent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractionResult {
    pub extracted_energy: f64,
    pub control: BobControl,
    /// Unweighted energy drop in each branch.
    pub per_branch_energy: [f64; 2],
}

impl ExtractionResult {
    fn evaluate(branches: &BranchPair, hs: &HamiltonianSet, control: BobControl) -> Result<Self> {
        let after = apply_bob(branches, &control)?;
        let per_branch_energy = branch_extraction(branches, &after, hs)?;
        let extracted_energy = branches
            .iter()
            .zip(per_branch_energy.iter())
            .map(|(b, d)| b.probability * d)
            .sum();
        Ok(ExtractionResult {
            extracted_energy,
            control,
            per_branch_energy,
        })
    }
}

/// Energy drop in one branch caused by the rotation `r` on site B.
fn branch_drop(branch: &OutcomeBranch, hs: &HamiltonianSet, r: &LocalRotation) -> f64 {
    // Axes built from angles are unit length; only NaN parameters fail here.
    let Ok(u) = r.unitary() else {
        return f64::NEG_INFINITY;
    };
    let after = pauli::on_b(&u).apply(&branch.state);
    real_expectation(&branch.state, &hs.h_tot) - real_expectation(&after, &hs.h_tot)
}

// Hot path of the searches; Hermiticity of H_tot is established at construction.
fn real_expectation(state: &StateVector, op: &Mat4) -> f64 {
    state.inner(&op.apply(state)).re
}

/// Deterministic start list for the three-parameter searches:
/// `[θ, polar, azimuth]`.
fn rotation_starts() -> Vec<[f64; 3]> {
    let axes = [
        [FRAC_PI_2, 0.0],       // x
        [FRAC_PI_2, FRAC_PI_2], // y
        [0.3, 0.0],             // near z, away from the polar singularity
    ];
    let mut starts = vec![[0.0, FRAC_PI_2, FRAC_PI_2]];
    for theta in [FRAC_PI_4 / 2.0, -FRAC_PI_4 / 2.0, 3.0 * FRAC_PI_4 / 2.0, -3.0 * FRAC_PI_4 / 2.0] {
        for [polar, azimuth] in axes {
            starts.push([theta, polar, azimuth]);
        }
    }
    starts
}

/// Best extracting operation for Bob on fixed branch states.
pub fn optimize_bob(
    branches: &BranchPair,
    hs: &HamiltonianSet,
    cfg: &OptimizerConfig,
    mode: SearchMode,
) -> Result<ExtractionResult> {
    cfg.validate()?;
    match mode {
        SearchMode::Family => optimize_family(branches, hs, cfg),
        SearchMode::Full => optimize_full(branches, hs, cfg),
        SearchMode::OutcomeIndependent => optimize_outcome_independent(branches, hs, cfg),
    }
}

fn optimize_family(
    branches: &BranchPair,
    hs: &HamiltonianSet,
    cfg: &OptimizerConfig,
) -> Result<ExtractionResult> {
    let mut objective = |theta: f64| {
        branches
            .iter()
            .map(|b| {
                let signed = if b.mu == 0 { theta } else { -theta };
                let r = LocalRotation {
                    theta: signed,
                    axis: [0.0, 1.0, 0.0],
                };
                b.probability * branch_drop(b, hs, &r)
            })
            .sum::<f64>()
    };
    let peak = grid_then_golden(
        &mut objective,
        -FRAC_PI_2,
        FRAC_PI_2,
        cfg.coarse_grid_points,
        cfg.refine_tolerance,
        cfg.max_iterations,
    )?;
    ExtractionResult::evaluate(branches, hs, BobControl::Family { theta: peak.x })
}

fn optimize_full(
    branches: &BranchPair,
    hs: &HamiltonianSet,
    cfg: &OptimizerConfig,
) -> Result<ExtractionResult> {
    // Branches decouple, so each outcome gets its own search. The family
    // optimum seeds both so the full search can only improve on it.
    let family = optimize_family(branches, hs, cfg)?;
    let BobControl::Family { theta: family_theta } = family.control else {
        unreachable!("family search returns a family control");
    };
    let nm = cfg.nelder_mead();
    let mut rotations = [LocalRotation::identity(); 2];
    for b in branches {
        let signed = if b.mu == 0 { family_theta } else { -family_theta };
        let mut starts = vec![[signed, FRAC_PI_2, FRAC_PI_2]];
        starts.extend(rotation_starts());
        let mut objective = |x: &[f64]| branch_drop(b, hs, &LocalRotation::from_params(x));
        let mut best: Option<(Vec<f64>, f64)> = None;
        for start in &starts {
            let peak = nelder_mead_max(&mut objective, start, 0.2, &nm)?;
            if best.as_ref().is_none_or(|(_, v)| peak.value > *v) {
                best = Some((peak.x, peak.value));
            }
        }
        let (x, _) = best.expect("start list is non-empty");
        rotations[b.mu as usize] = LocalRotation::from_params(&x);
    }
    ExtractionResult::evaluate(branches, hs, BobControl::Full { rotations })
}

fn optimize_outcome_independent(
    branches: &BranchPair,
    hs: &HamiltonianSet,
    cfg: &OptimizerConfig,
) -> Result<ExtractionResult> {
    let nm = cfg.nelder_mead();
    let mut objective = |x: &[f64]| {
        let r = LocalRotation::from_params(x);
        branches
            .iter()
            .map(|b| b.probability * branch_drop(b, hs, &r))
            .sum::<f64>()
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in rotation_starts() {
        let peak = nelder_mead_max(&mut objective, &start, 0.2, &nm)?;
        if best.as_ref().is_none_or(|(_, v)| peak.value > *v) {
            best = Some((peak.x, peak.value));
        }
    }
    let (x, _) = best.expect("start list is non-empty");
    ExtractionResult::evaluate(
        branches,
        hs,
        BobControl::outcome_independent(LocalRotation::from_params(&x)),
    )
}

/// Family and full-SU(2) optima side by side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeComparison {
    pub family: ExtractionResult,
    pub full: ExtractionResult,
    /// `full − family`; positive values above the passivity tolerance mean
    /// the rotation family is not optimal for these branches.
    pub excess: f64,
}

impl ModeComparison {
    pub fn full_exceeds_family(&self) -> bool {
        self.excess > TOLERANCES.passivity
    }
}

pub fn compare_modes(
    branches: &BranchPair,
    hs: &HamiltonianSet,
    cfg: &OptimizerConfig,
) -> Result<ModeComparison> {
    let family = optimize_bob(branches, hs, cfg, SearchMode::Family)?;
    let full = optimize_bob(branches, hs, cfg, SearchMode::Full)?;
    Ok(ModeComparison {
        family,
        full,
        excess: full.extracted_energy - family.extracted_energy,
    })
}

/// Draw one outcome from the branch distribution. Demonstration output only;
/// every energy in this crate comes from exhaustive enumeration.
pub fn sample_outcome(branches: &BranchPair, seed: u64) -> u8 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: f64 = rng.gen();
    if u < branches[0].probability {
        0
    } else {
        1
    }
}
