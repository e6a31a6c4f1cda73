//! Deterministic derivative-free maximisers.
//!
//! All routines maximise. There is no randomness: identical inputs give
//! bit-identical outputs.

use crate::error::{QetError, Result};

/// Result of a one-dimensional search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak1d {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Result of a multi-dimensional search.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakNd {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Evenly spaced samples on `[lo, hi]`, both ends included. Returns the index
/// of the best sample and all `(x, f(x))` pairs.
pub fn grid_scan(
    f: &mut impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<(usize, Vec<(f64, f64)>)> {
    if points < 2 || !(lo < hi) {
        return Err(QetError::invalid(format!(
            "grid needs lo < hi and at least 2 points (got [{lo}, {hi}], {points})"
        )));
    }
    let step = (hi - lo) / (points - 1) as f64;
    let samples: Vec<(f64, f64)> = (0..points)
        .map(|i| {
            let x = if i + 1 == points { hi } else { lo + step * i as f64 };
            (x, f(x))
        })
        .collect();
    let best = argmax(samples.iter().map(|s| s.1));
    Ok((best, samples))
}

/// Index of the first maximum; NaN never wins.
pub fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    best
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`,
/// stopping when the bracket is narrower than `tol`.
pub fn golden_section_max(
    f: &mut impl FnMut(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iterations: usize,
) -> Result<Peak1d> {
    if !(tol > 0.0) || !(lo <= hi) {
        return Err(QetError::invalid("golden section needs lo <= hi and tol > 0"));
    }
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut evaluations = 2;
    let mut iterations = 0;
    while hi - lo > tol {
        if iterations == max_iterations {
            let (x, value) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
            return Err(QetError::BudgetExhausted {
                iterations,
                best_value: value,
                best_point: vec![x],
            });
        }
        iterations += 1;
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        evaluations += 1;
        // Bracket stops shrinking once it reaches the floating-point spacing.
        if x1 >= x2 {
            break;
        }
    }
    let (x, value) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    Ok(Peak1d {
        x,
        value,
        evaluations,
    })
}

/// Coarse grid over `[lo, hi]` followed by golden-section refinement inside
/// the cells adjacent to the best grid point.
pub fn grid_then_golden(
    f: &mut impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    points: usize,
    tol: f64,
    max_iterations: usize,
) -> Result<Peak1d> {
    let (best, samples) = grid_scan(f, lo, hi, points)?;
    let a = samples[best.saturating_sub(1)].0;
    let b = samples[(best + 1).min(samples.len() - 1)].0;
    let mut peak = golden_section_max(f, a, b, tol, max_iterations)?;
    peak.evaluations += samples.len();
    // The grid point may still be better if the refinement bracket was not unimodal.
    if samples[best].1 > peak.value {
        peak.x = samples[best].0;
        peak.value = samples[best].1;
    }
    Ok(peak)
}

/// Locate the peak of a smooth unimodal `f` inside `[lo, hi]` by bisecting on
/// the sign of the symmetric difference `f(m+δ) − f(m−δ)`.
///
/// Golden-section search cannot resolve a maximiser much below `√ε` relative
/// because `f` is flat there; the symmetric difference of a locally quadratic
/// `f` keeps the sign of `x* − m` far closer to the peak.
pub fn bisect_peak(
    f: &mut impl FnMut(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
    max_iterations: usize,
) -> Result<Peak1d> {
    if !(lo < hi) || !(rel_tol > 0.0) {
        return Err(QetError::invalid("peak bisection needs lo < hi and rel_tol > 0"));
    }
    let scale = lo.abs().max(hi.abs());
    // Balances the cubic bias of the difference (∝ δ²) against rounding (∝ ε/δ).
    let delta = 4e-6 * scale;
    let mut evaluations = 0;
    let mut iterations = 0;
    while hi - lo > rel_tol * scale {
        if iterations == max_iterations {
            let m = 0.5 * (lo + hi);
            return Err(QetError::BudgetExhausted {
                iterations,
                best_value: f(m),
                best_point: vec![m],
            });
        }
        iterations += 1;
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            break;
        }
        let rising = f(m + delta) - f(m - delta);
        evaluations += 2;
        if rising > 0.0 {
            lo = m;
        } else if rising < 0.0 {
            hi = m;
        } else {
            lo = m;
            hi = m;
        }
    }
    let x = 0.5 * (lo + hi);
    Ok(Peak1d {
        x,
        value: f(x),
        evaluations: evaluations + 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadConfig {
    /// Stop once the simplex's spread in value is at most this.
    pub value_tolerance: f64,
    /// ... and its largest vertex distance from the best is at most this.
    pub size_tolerance: f64,
    pub max_iterations: usize,
}

/// Nelder–Mead maximisation from an axis-aligned initial simplex with edge
/// `step`. The starting point is a vertex, so the result is never worse than
/// `f(start)`.
pub fn nelder_mead_max(
    f: &mut impl FnMut(&[f64]) -> f64,
    start: &[f64],
    step: f64,
    cfg: &NelderMeadConfig,
) -> Result<PeakNd> {
    let n = start.len();
    if n == 0 {
        return Err(QetError::invalid("Nelder-Mead needs at least one parameter"));
    }
    // Minimise g = −f internally.
    let mut g = |x: &[f64]| -f(x);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), g(start)));
    for i in 0..n {
        let mut x = start.to_vec();
        x[i] += step;
        let v = g(&x);
        simplex.push((x, v));
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut iterations = 0;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        let size = simplex[1..]
            .iter()
            .map(|(x, _)| distance(x, &simplex[0].0))
            .fold(0.0, f64::max);
        if spread <= cfg.value_tolerance && size <= cfg.size_tolerance {
            break;
        }
        if iterations == cfg.max_iterations {
            return Err(QetError::BudgetExhausted {
                iterations,
                best_value: -simplex[0].1,
                best_point: simplex[0].0.clone(),
            });
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let toward = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(worst.0.iter())
                .map(|(c, w)| c + coef * (w - c))
                .collect()
        };

        let reflected = toward(-alpha);
        let fr = g(&reflected);
        if fr < simplex[0].1 {
            let expanded = toward(-gamma);
            let fe = g(&expanded);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst.1 {
            let x = toward(-rho);
            let v = g(&x);
            (x, v)
        } else {
            let x = toward(rho);
            let v = g(&x);
            (x, v)
        };
        if fc < worst.1.min(fr) {
            simplex[n] = (contracted, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = best
                .iter()
                .zip(vertex.0.iter())
                .map(|(b, v)| b + sigma * (v - b))
                .collect();
            let v = g(&x);
            *vertex = (x, v);
        }
    }
    let (x, v) = simplex.swap_remove(0);
    Ok(PeakNd {
        x,
        value: -v,
        iterations,
    })
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
