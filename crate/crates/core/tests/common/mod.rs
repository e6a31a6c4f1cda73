//! Independent reference computations for the integration tests. Nothing
//! here calls into the crate's linear algebra or optimisers.

#![allow(dead_code)]

use num_complex::Complex64 as C;

pub type M4 = [[C; 4]; 4];
pub type V4 = [C; 4];

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

pub fn zero() -> M4 {
    [[c(0.0); 4]; 4]
}

pub fn eye() -> M4 {
    let mut m = zero();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = c(1.0);
    }
    m
}

pub fn mul(a: &M4, b: &M4) -> M4 {
    let mut m = zero();
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                m[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    m
}

pub fn apply(a: &M4, v: &V4) -> V4 {
    let mut out = [c(0.0); 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i] += a[i][j] * v[j];
        }
    }
    out
}

pub fn expval(v: &V4, a: &M4) -> f64 {
    let av = apply(a, v);
    v.iter().zip(av.iter()).map(|(x, y)| x.conj() * y).sum::<C>().re
}

/// Two-site operator from 2×2 factors, basis index `2a + b`.
pub fn kron2(a: [[C; 2]; 2], b: [[C; 2]; 2]) -> M4 {
    let mut m = zero();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    m
}

pub const I2: [[C; 2]; 2] = [[C::new(1.0, 0.0), C::new(0.0, 0.0)], [C::new(0.0, 0.0), C::new(1.0, 0.0)]];
pub const SX: [[C; 2]; 2] = [[C::new(0.0, 0.0), C::new(1.0, 0.0)], [C::new(1.0, 0.0), C::new(0.0, 0.0)]];
pub const SY: [[C; 2]; 2] = [[C::new(0.0, 0.0), C::new(0.0, -1.0)], [C::new(0.0, 1.0), C::new(0.0, 0.0)]];
pub const SZ: [[C; 2]; 2] = [[C::new(1.0, 0.0), C::new(0.0, 0.0)], [C::new(0.0, 0.0), C::new(-1.0, 0.0)]];

pub fn lin(terms: &[(f64, M4)]) -> M4 {
    let mut m = zero();
    for (w, t) in terms {
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] += t[i][j] * *w;
            }
        }
    }
    m
}

pub struct Model {
    pub h: f64,
    pub k: f64,
    pub h_a: M4,
    pub h_b: M4,
    pub v: M4,
    pub h_tot: M4,
}

pub fn model(h: f64, k: f64) -> Model {
    let e = (h * h + k * k).sqrt();
    let id = eye();
    let h_a = lin(&[(h, kron2(SZ, I2)), (h * h / e, id)]);
    let h_b = lin(&[(h, kron2(I2, SZ)), (h * h / e, id)]);
    let v = lin(&[(2.0 * k, kron2(SX, SX)), (2.0 * k * k / e, id)]);
    let h_tot = lin(&[(1.0, h_a), (1.0, h_b), (1.0, v)]);
    Model { h, k, h_a, h_b, v, h_tot }
}

/// Ground state from the textbook formula, amplitudes on |++⟩ and |−−⟩.
pub fn ground(h: f64, k: f64) -> V4 {
    let x = h / (h * h + k * k).sqrt();
    [c(((1.0 - x) / 2.0).sqrt()), c(0.0), c(0.0), c(-((1.0 + x) / 2.0).sqrt())]
}

/// `exp(−i H t)` by scaled Taylor series and repeated squaring.
pub fn propagator(hm: &M4, t: f64) -> M4 {
    let norm: f64 = hm.iter().flatten().map(|z| z.norm()).sum::<f64>() * t.abs();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let mut x = zero();
    for i in 0..4 {
        for j in 0..4 {
            x[i][j] = hm[i][j] * C::new(0.0, -t * scale);
        }
    }
    let mut sum = eye();
    let mut term = eye();
    for n in 1..30 {
        term = mul(&term, &x);
        for row in term.iter_mut() {
            for z in row.iter_mut() {
                *z /= n as f64;
            }
        }
        for i in 0..4 {
            for j in 0..4 {
                sum[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        sum = mul(&sum, &sum);
    }
    sum
}

/// Normalised post-measurement states for μ = 0, 1, each with probability ½.
pub fn measured(g: &V4) -> [V4; 2] {
    let mut out = [[c(0.0); 4]; 2];
    for (mu, o) in out.iter_mut().enumerate() {
        let sign = if mu == 0 { 1.0 } else { -1.0 };
        let proj = lin(&[(0.5, eye()), (0.5 * sign, kron2(SX, I2))]);
        let v = apply(&proj, g);
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for i in 0..4 {
            o[i] = v[i] / n;
        }
    }
    out
}

/// `cos θ I + i s sin θ σ^y` acting on site B.
pub fn bob_rotation(theta: f64, sign: f64) -> M4 {
    let mut u = [[c(0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            u[i][j] = I2[i][j] * theta.cos() + SY[i][j] * C::new(0.0, sign * theta.sin());
        }
    }
    kron2(I2, u)
}

/// Family extraction for angle θ after latency `t`.
pub fn family_extraction(m: &Model, t: f64, theta: f64) -> f64 {
    let u = propagator(&m.h_tot, t);
    let branches = measured(&ground(m.h, m.k));
    let mut total = 0.0;
    for (mu, b) in branches.iter().enumerate() {
        let s = apply(&u, b);
        let sign = if mu == 0 { 1.0 } else { -1.0 };
        let after = apply(&bob_rotation(theta, sign), &s);
        total += 0.5 * (expval(&s, &m.h_tot) - expval(&after, &m.h_tot));
    }
    total
}

/// Best family extraction by dense scan plus ternary refinement.
pub fn best_family_extraction(m: &Model, t: f64) -> f64 {
    let u = propagator(&m.h_tot, t);
    let branches: Vec<V4> = measured(&ground(m.h, m.k)).iter().map(|b| apply(&u, b)).collect();
    let before: f64 = branches.iter().map(|s| 0.5 * expval(s, &m.h_tot)).sum();
    let value = |theta: f64| {
        let mut after = 0.0;
        for (mu, s) in branches.iter().enumerate() {
            let sign = if mu == 0 { 1.0 } else { -1.0 };
            after += 0.5 * expval(&apply(&bob_rotation(theta, sign), s), &m.h_tot);
        }
        before - after
    };
    let n = 4000;
    let (lo, hi) = (-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2);
    let step = (hi - lo) / n as f64;
    let best = (0..=n)
        .map(|i| lo + step * i as f64)
        .max_by(|a, b| value(*a).total_cmp(&value(*b)))
        .unwrap();
    let (mut a, mut b) = (best - step, best + step);
    for _ in 0..200 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if value(m1) < value(m2) {
            a = m1;
        } else {
            b = m2;
        }
    }
    value(0.5 * (a + b))
}

/// Published closed form for the extracted energy, substituted directly.
pub fn e_b_reference(h: f64, k: f64) -> f64 {
    let s = h * h + 2.0 * k * k;
    s / (h * h + k * k).sqrt() * ((1.0 + h * h * k * k / (s * s)).sqrt() - 1.0)
}

/// Published `f(α)`, substituted directly.
pub fn f_reference(alpha: f64) -> f64 {
    let s = alpha * alpha + 2.0;
    s / (alpha * alpha + 1.0).sqrt() * ((1.0 + alpha * alpha / (s * s)).sqrt() - 1.0)
}

/// Deterministic points in `[lo, hi]²`.
pub fn sample_params(n: usize, lo: f64, hi: f64, seed: u64) -> Vec<(f64, f64)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (rng.gen_range(lo..=hi), rng.gen_range(lo..=hi))).collect()
}

/// CLI fixtures: file name under `tests/golden` and the arguments that
/// produce it.
pub const GOLDEN: &[(&str, &[&str])] = &[
    ("model_h3_k4.txt", &["model", "--h", "3", "--k", "4"]),
    ("scan_alpha_100.csv", &["scan-alpha", "--points", "100"]),
    ("audit_minimal_alpha2_t0.25.json", &["audit", "minimal", "--alpha", "2", "--time", "0.25"]),
    ("audit_ion_g0.5_z2_n1_t1.json", &["audit", "ion", "--gamma", "0.5", "--zeta", "2", "--nu", "1", "--time", "1"]),
    ("run_h3_k4_t0.csv", &["run", "--h", "3", "--k", "4", "--latency", "0"]),
    ("sweep_alpha2.csv", &["sweep", "--alpha", "2", "--latencies", "0:1:0.1"]),
];

pub fn golden_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// Run the `qet` binary, returning exit code and stdout bytes.
pub fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_qet"))
        .args(args)
        .output()
        .expect("qet binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}
