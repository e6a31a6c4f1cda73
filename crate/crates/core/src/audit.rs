//! Energy-time uncertainty audits.
//!
//! An energy `E` delivered within a time `t` is only resolvable when
//! `E·t ≥ 1` (ħ = 1). The audits here apply that threshold to the minimal
//! model's extracted energy and to the trapped-ion output formula
//! `E_out = γ_N E_in exp(−ζ_N E_in/ν) sin²(2φ)`.

use std::f64::consts::{E, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::error::{QetError, Result};
use crate::export::round_sig;
use crate::model::{e_b_closed, ModelParams};
use crate::optimize::{bisect_peak, golden_section_max};
use crate::tolerances::OBSERVABILITY_THRESHOLD;

/// Published reading of the maximum of `f(α)` from its plot.
pub const PUBLISHED_F_MAX: f64 = 0.13;

/// Relative tolerance for the bracketed ion maximiser against `ν/ζ_N`.
pub const ION_MAXIMIZER_RELATIVE: f64 = 1e-8;

/// `H_A` normalisation used throughout.
pub const HA_NORMALIZATION_NOTE: &str =
    "H_A = h*sigma_A^z + h^2/sqrt(h^2+k^2); the printed sigma_B^z in H_A is read as sigma_A^z";

/// Dimensionless extracted energy `E_B/k` with `h = αk`.
pub fn f_alpha(alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(QetError::invalid(format!("alpha must be positive, got {alpha}")));
    }
    let a2 = alpha * alpha;
    let s = a2 + 2.0;
    let r = a2 / (s * s);
    // √(1+r) − 1 written without cancellation.
    Ok(s / (a2 + 1.0).sqrt() * (r / ((1.0 + r).sqrt() + 1.0)))
}

/// Uniform grid `α_i = lower + i·(upper − lower)/points`, `i = 1..=points`,
/// so the lower end is excluded and the upper end included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaGrid {
    pub lower_exclusive: f64,
    pub upper: f64,
    pub points: usize,
}

impl Default for AlphaGrid {
    fn default() -> Self {
        AlphaGrid {
            lower_exclusive: 0.01,
            upper: 20.0,
            points: 10_000,
        }
    }
}

impl AlphaGrid {
    pub fn with_points(points: usize) -> Self {
        AlphaGrid {
            points,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lower_exclusive >= 0.0) || !(self.upper > self.lower_exclusive) || !self.upper.is_finite() {
            return Err(QetError::invalid(format!(
                "alpha grid needs 0 <= lower < upper, got ({}, {}]",
                self.lower_exclusive, self.upper
            )));
        }
        if self.points < 2 {
            return Err(QetError::invalid("alpha grid needs at least 2 points"));
        }
        Ok(())
    }

    /// Whether the grid covers `(0.01, 20]` with at least 1000 points.
    pub fn is_reference_coverage(&self) -> bool {
        self.lower_exclusive <= 0.01 && self.upper >= 20.0 && self.points >= 1000
    }

    pub fn values(&self) -> Vec<f64> {
        let width = self.upper - self.lower_exclusive;
        (1..=self.points)
            .map(|i| {
                if i == self.points {
                    self.upper
                } else {
                    self.lower_exclusive + width * i as f64 / self.points as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaScanResult {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Refined maximiser.
    pub argmax_alpha: f64,
    /// `f(argmax_alpha)`.
    pub max_value: f64,
    /// Index of the best raw grid point.
    pub grid_argmax: usize,
}

impl AlphaScanResult {
    /// `computed − published` maximum.
    pub fn deviation_from_published(&self) -> f64 {
        self.max_value - PUBLISHED_F_MAX
    }

    pub fn all_below_one(&self) -> bool {
        self.values.iter().all(|&v| v < 1.0)
    }
}

/// Tabulate `f` on the grid and refine the maximum around the best point.
pub fn scan_alpha(grid: &AlphaGrid) -> Result<AlphaScanResult> {
    grid.validate()?;
    let alphas = grid.values();
    let values = alphas.iter().map(|&a| f_alpha(a)).collect::<Result<Vec<_>>>()?;
    let best = crate::optimize::argmax(values.iter().copied());

    let lo = if best == 0 { alphas[0] } else { alphas[best - 1] };
    let hi = alphas[(best + 1).min(alphas.len() - 1)];
    let mut f = |a: f64| f_alpha(a).unwrap_or(f64::NEG_INFINITY);
    let (argmax_alpha, max_value) = if lo < hi {
        let coarse = golden_section_max(&mut f, lo, hi, 1e-6 * hi, 500)?;
        let width = (hi - lo) * 1e-3;
        let a = (coarse.x - width).max(lo);
        let b = (coarse.x + width).min(hi);
        let fine = bisect_peak(&mut f, a, b, 1e-13, 500)?;
        if fine.value >= values[best] {
            (fine.x, fine.value)
        } else {
            (alphas[best], values[best])
        }
    } else {
        (alphas[best], values[best])
    };

    Ok(AlphaScanResult {
        grid: alphas,
        values,
        argmax_alpha,
        max_value,
        grid_argmax: best,
    })
}

/// `E·t` in units of ħ.
pub fn uncertainty_product(energy: f64, time: f64) -> Result<f64> {
    if !energy.is_finite() || energy < 0.0 {
        return Err(QetError::invalid(format!("energy must be non-negative, got {energy}")));
    }
    if !time.is_finite() || time < 0.0 {
        return Err(QetError::invalid(format!("time must be non-negative, got {time}")));
    }
    Ok(energy * time)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    Minimal,
    TrappedIon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Observable,
    Unobservable,
}

impl Verdict {
    pub fn from_product(product: f64) -> Self {
        if product >= OBSERVABILITY_THRESHOLD {
            Verdict::Observable
        } else {
            Verdict::Unobservable
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Observable => "observable",
            Verdict::Unobservable => "unobservable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub protocol: Protocol,
    pub energy: f64,
    pub time: f64,
    pub product: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    pub notes: Vec<String>,
    /// Trapped-ion details; `None` for the minimal model.
    pub ion: Option<IonAudit>,
}

#[derive(Serialize)]
struct AuditJson<'a> {
    protocol: Protocol,
    energy: f64,
    time: f64,
    product: f64,
    threshold: f64,
    verdict: Verdict,
    notes: &'a [String],
}

impl AuditReport {
    fn new(protocol: Protocol, energy: f64, time: f64, notes: Vec<String>, ion: Option<IonAudit>) -> Result<Self> {
        let product = uncertainty_product(energy, time)?;
        Ok(AuditReport {
            protocol,
            energy,
            time,
            product,
            threshold: OBSERVABILITY_THRESHOLD,
            verdict: Verdict::from_product(product),
            notes,
            ion,
        })
    }

    /// One-line JSON object, numbers rounded to 12 significant digits.
    pub fn to_json(&self) -> String {
        let json = AuditJson {
            protocol: self.protocol,
            energy: round_sig(self.energy),
            time: round_sig(self.time),
            product: round_sig(self.product),
            threshold: self.threshold,
            verdict: self.verdict,
            notes: &self.notes,
        };
        serde_json::to_string(&json).expect("audit report serialises")
    }
}

/// Audit the optimal zero-latency extraction `E_B` against a delivery time `t`.
pub fn audit_minimal(p: &ModelParams, time: f64) -> Result<AuditReport> {
    let energy = e_b_closed(p);
    let tk = time * p.k();
    let f = f_alpha(p.alpha())?;
    let mut notes = vec![
        HA_NORMALIZATION_NOTE.to_string(),
        format!(
            "alpha = h/k = {}; E_B/k = f(alpha) = {}",
            crate::export::fmt_sig(p.alpha()),
            crate::export::fmt_sig(f)
        ),
    ];
    if tk < 1.0 {
        notes.push(format!(
            "t*k = {} < 1: inside the teleportation regime t << 1/k",
            crate::export::fmt_sig(tk)
        ));
    } else {
        notes.push(format!(
            "t*k = {} >= 1: outside the teleportation regime t << 1/k; energy can arrive by ordinary diffusion",
            crate::export::fmt_sig(tk)
        ));
    }
    AuditReport::new(Protocol::Minimal, energy, time, notes, None)
}

/// Trapped-ion protocol constants. `γ_N` and `ζ_N` are free inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IonParams {
    gamma_n: f64,
    zeta_n: f64,
    nu: f64,
    phi: f64,
}

impl IonParams {
    pub fn new(gamma_n: f64, zeta_n: f64, nu: f64, phi: f64) -> Result<Self> {
        if !(gamma_n > 0.0 && gamma_n <= 1.0) {
            return Err(QetError::invalid(format!("gamma_N must lie in (0, 1], got {gamma_n}")));
        }
        if !(zeta_n > 0.0) || !zeta_n.is_finite() {
            return Err(QetError::invalid(format!("zeta_N must be positive, got {zeta_n}")));
        }
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(QetError::invalid(format!("nu must be positive, got {nu}")));
        }
        if !phi.is_finite() {
            return Err(QetError::invalid("phi must be finite"));
        }
        Ok(IonParams {
            gamma_n,
            zeta_n,
            nu,
            phi,
        })
    }

    /// Demonstration values `γ = 0.5, ζ = 2, ν = 1, φ = π/4`. Illustrative only.
    pub fn illustrative() -> Self {
        IonParams {
            gamma_n: 0.5,
            zeta_n: 2.0,
            nu: 1.0,
            phi: FRAC_PI_4,
        }
    }

    pub fn gamma_n(&self) -> f64 {
        self.gamma_n
    }
    pub fn zeta_n(&self) -> f64 {
        self.zeta_n
    }
    pub fn nu(&self) -> f64 {
        self.nu
    }
    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Same constants with `sin²(2φ) = 1`.
    pub fn with_optimal_phase(&self) -> Self {
        IonParams {
            phi: FRAC_PI_4,
            ..*self
        }
    }

    fn phase_factor(&self) -> f64 {
        let s = (2.0 * self.phi).sin();
        s * s
    }
}

pub fn ion_output(ip: &IonParams, e_in: f64) -> Result<f64> {
    if !e_in.is_finite() || e_in < 0.0 {
        return Err(QetError::invalid(format!("E_in must be non-negative, got {e_in}")));
    }
    Ok(ip.gamma_n * e_in * (-ip.zeta_n * e_in / ip.nu).exp() * ip.phase_factor())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IonOptimum {
    /// Maximiser from the bracketed search.
    pub e_in_star: f64,
    pub e_out_max: f64,
    /// Stationary point `ν/ζ_N`.
    pub stationary_e_in: f64,
    /// `γ_N (ν/ζ_N) e⁻¹`.
    pub stationary_e_out: f64,
    /// Output at phonon-scale input, `γ_N ν e^{−ζ_N}`.
    pub phonon_scale_output: f64,
}

impl IonOptimum {
    pub fn maximizer_relative_error(&self) -> f64 {
        (self.e_in_star - self.stationary_e_in).abs() / self.stationary_e_in
    }
}

/// Maximise `E_out` over `E_in` at `sin²(2φ) = 1`.
pub fn ion_maximize(ip: &IonParams) -> Result<IonOptimum> {
    let ip = ip.with_optimal_phase();
    let mut f = |e: f64| ion_output(&ip, e).unwrap_or(f64::NEG_INFINITY);

    // Bracket: double the upper end until the output starts to fall.
    let mut hi = ip.nu;
    let mut guard = 0;
    while f(2.0 * hi) > f(hi) {
        hi *= 2.0;
        guard += 1;
        if guard > 2000 {
            return Err(QetError::numeric("could not bracket the ion output maximum"));
        }
    }
    let hi = 2.0 * hi;
    let coarse = golden_section_max(&mut f, 0.0, hi, 1e-6 * hi, 1000)?;
    let width = 1e-3 * hi;
    let peak = bisect_peak(
        &mut f,
        (coarse.x - width).max(0.0),
        coarse.x + width,
        1e-13,
        1000,
    )?;

    let stationary_e_in = ip.nu / ip.zeta_n;
    let optimum = IonOptimum {
        e_in_star: peak.x,
        e_out_max: peak.value,
        stationary_e_in,
        stationary_e_out: ip.gamma_n * stationary_e_in / E,
        phonon_scale_output: ion_output(&ip, ip.nu)?,
    };
    if optimum.maximizer_relative_error() > ION_MAXIMIZER_RELATIVE {
        return Err(QetError::numeric(format!(
            "bracketed maximiser {} disagrees with nu/zeta = {}",
            optimum.e_in_star, stationary_e_in
        )));
    }
    Ok(optimum)
}

/// Conditions under which the phonon-scale bound chain does not hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IonRegimeFlag {
    /// `ζ_N < 1`.
    ZetaBelowOne,
    /// Unconstrained maximum exceeds `ν e^{−ζ_N}`.
    MaximumExceedsPhononBound,
    /// Unconstrained maximum times `t` reaches the threshold.
    MaximumObservable,
    /// `t > 1/ν`, beyond the phonon transport time.
    TimeBeyondPhononPeriod,
}

impl IonRegimeFlag {
    pub fn describe(&self) -> &'static str {
        match self {
            IonRegimeFlag::ZetaBelowOne => "zeta_N < 1: the bound E_out < nu*exp(-zeta_N) is not implied",
            IonRegimeFlag::MaximumExceedsPhononBound => {
                "unconstrained maximum of E_out exceeds nu*exp(-zeta_N)"
            }
            IonRegimeFlag::MaximumObservable => {
                "unconstrained maximum of E_out times t reaches the threshold 1"
            }
            IonRegimeFlag::TimeBeyondPhononPeriod => "t > 1/nu: beyond the phonon transport time",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IonAudit {
    pub params: IonParams,
    /// `E_out` at `E_in = ν` with the given phase.
    pub phonon_scale_output: f64,
    /// `ν e^{−ζ_N}`.
    pub phonon_bound: f64,
    pub optimum: IonOptimum,
    pub unconstrained_product: f64,
    pub flags: Vec<IonRegimeFlag>,
}

impl IonAudit {
    pub fn flagged(&self) -> bool {
        !self.flags.is_empty()
    }
}

/// Audit the phonon-scale output against a delivery time `t`, alongside the
/// unconstrained maximum and any regime in which the bound chain breaks.
pub fn audit_ion(ip: &IonParams, time: f64) -> Result<AuditReport> {
    let energy = ion_output(ip, ip.nu)?;
    let optimum = ion_maximize(ip)?;
    let unconstrained = optimum.e_out_max * ip.phase_factor();
    let phonon_bound = ip.nu * (-ip.zeta_n).exp();
    let unconstrained_product = uncertainty_product(unconstrained, time)?;

    let mut flags = Vec::new();
    if ip.zeta_n < 1.0 {
        flags.push(IonRegimeFlag::ZetaBelowOne);
    }
    if unconstrained > phonon_bound {
        flags.push(IonRegimeFlag::MaximumExceedsPhononBound);
    }
    if unconstrained_product >= OBSERVABILITY_THRESHOLD {
        flags.push(IonRegimeFlag::MaximumObservable);
    }
    if time * ip.nu > 1.0 {
        flags.push(IonRegimeFlag::TimeBeyondPhononPeriod);
    }

    let fmt = crate::export::fmt_sig;
    let mut notes = vec![
        "gamma_N and zeta_N are free inputs, not derived from ion-crystal parameters".to_string(),
        format!(
            "E_out at phonon-scale input E_in = nu: {}; bound nu*exp(-zeta_N) = {}",
            fmt(energy),
            fmt(phonon_bound)
        ),
        format!(
            "unconstrained maximum at E_in = nu/zeta_N = {}: E_out = {}, product = {}",
            fmt(optimum.e_in_star),
            fmt(unconstrained),
            fmt(unconstrained_product)
        ),
    ];
    notes.extend(flags.iter().map(|f| format!("flag: {}", f.describe())));

    let ion = IonAudit {
        params: *ip,
        phonon_scale_output: energy,
        phonon_bound,
        optimum,
        unconstrained_product,
        flags,
    };
    AuditReport::new(Protocol::TrappedIon, energy, time, notes, Some(ion))
}
