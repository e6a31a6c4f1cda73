//! Dense complex linear algebra for the two-qubit problem.
//!
//! Everything here is fixed-size: single-qubit operators are [`Mat2`], two-qubit
//! operators are [`Mat4`]. Two-qubit kets use the ordering `index = 2·a + b`
//! where `a`, `b` are the site-A and site-B labels and `+ ↦ 0`, `− ↦ 1`, with
//! `|+⟩`, `|−⟩` the `σ^z = ±1` eigenstates.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{QetError, Result};
use crate::tolerances::TOLERANCES;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Square complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix<const N: usize> {
    entries: [[C64; N]; N],
}

pub type Mat2 = Matrix<2>;
pub type Mat4 = Matrix<4>;

/// Column of complex amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ket<const N: usize> {
    amps: [C64; N],
}

/// Two-qubit state in the `|s_A s_B⟩` basis.
pub type StateVector = Ket<4>;

/// Ascending real spectrum with orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<const N: usize> {
    pub eigenvalues: [f64; N],
    pub eigenvectors: [Ket<N>; N],
}

impl<const N: usize> Matrix<N> {
    pub fn zeros() -> Self {
        Matrix {
            entries: [[ZERO; N]; N],
        }
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.entries[i][i] = ONE;
        }
        m
    }

    pub fn from_rows(entries: [[C64; N]; N]) -> Self {
        Matrix { entries }
    }

    /// Like [`Matrix::from_rows`] but rejects NaN/Inf entries.
    pub fn try_from_rows(entries: [[C64; N]; N]) -> Result<Self> {
        let m = Matrix { entries };
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_real_rows(rows: [[f64; N]; N]) -> Self {
        let mut m = Self::zeros();
        for (i, row) in rows.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                m.entries[i][j] = C64::new(x, 0.0);
            }
        }
        m
    }

    pub fn diagonal(values: [f64; N]) -> Self {
        let mut m = Self::zeros();
        for (i, &x) in values.iter().enumerate() {
            m.entries[i][i] = C64::new(x, 0.0);
        }
        m
    }

    /// Outer product `|u⟩⟨v|`.
    pub fn outer(u: &Ket<N>, v: &Ket<N>) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.entries[i][j] = u.amps[i] * v.amps[j].conj();
            }
        }
        m
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row][col]
    }

    pub fn rows(&self) -> &[[C64; N]; N] {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.entries[i][j] = self.entries[j][i].conj();
            }
        }
        m
    }

    pub fn scale(&self, factor: C64) -> Self {
        let mut m = *self;
        for row in m.entries.iter_mut() {
            for x in row.iter_mut() {
                *x *= factor;
            }
        }
        m
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    /// Largest entry modulus, `‖M‖_max`.
    pub fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(|x| x.norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().flatten().all(|x| x.is_finite())
    }

    fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(QetError::invalid("matrix has non-finite entries"))
        }
    }

    /// Largest entrywise deviation from `M = M†`.
    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// Hermitian within `tol · max(1, ‖M‖_max)` entrywise.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_finite() && self.hermiticity_error() <= tol * self.max_abs().max(1.0)
    }

    /// Largest entrywise deviation of `M·M†` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        (*self * self.adjoint()).max_abs_diff(&Self::identity())
    }

    pub fn trace(&self) -> C64 {
        (0..N).map(|i| self.entries[i][i]).sum()
    }

    pub fn apply(&self, ket: &Ket<N>) -> Ket<N> {
        let mut out = [ZERO; N];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..N).map(|j| self.entries[i][j] * ket.amps[j]).sum();
        }
        Ket { amps: out }
    }
}

impl<const N: usize> Default for Matrix<N> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const N: usize> Add for Matrix<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..N {
            for j in 0..N {
                self.entries[i][j] += rhs.entries[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Sub for Matrix<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..N {
            for j in 0..N {
                self.entries[i][j] -= rhs.entries[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Neg for Matrix<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale_real(-1.0)
    }
}

impl<const N: usize> Mul for Matrix<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.entries[i][j] = (0..N).map(|l| self.entries[i][l] * rhs.entries[l][j]).sum();
            }
        }
        m
    }
}

impl<const N: usize> Mul<Ket<N>> for Matrix<N> {
    type Output = Ket<N>;
    fn mul(self, rhs: Ket<N>) -> Ket<N> {
        self.apply(&rhs)
    }
}

impl<const N: usize> Ket<N> {
    pub fn new(amps: [C64; N]) -> Self {
        Ket { amps }
    }

    pub fn from_real(amps: [f64; N]) -> Self {
        Ket {
            amps: amps.map(|x| C64::new(x, 0.0)),
        }
    }

    /// Computational basis vector `e_index`.
    pub fn basis(index: usize) -> Self {
        let mut amps = [ZERO; N];
        amps[index] = ONE;
        Ket { amps }
    }

    pub fn amplitudes(&self) -> &[C64; N] {
        &self.amps
    }

    pub fn amp(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|⟨self|other⟩|²` for unit vectors.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Ket {
            amps: self.amps.map(|a| a * factor),
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(QetError::numeric("cannot normalise a zero or non-finite vector"));
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }

    pub fn is_finite(&self) -> bool {
        self.amps.iter().all(|a| a.is_finite())
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl<const N: usize> Add for Ket<N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut amps = self.amps;
        for (a, b) in amps.iter_mut().zip(rhs.amps.iter()) {
            *a += b;
        }
        Ket { amps }
    }
}

impl<const N: usize> Sub for Ket<N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut amps = self.amps;
        for (a, b) in amps.iter_mut().zip(rhs.amps.iter()) {
            *a -= b;
        }
        Ket { amps }
    }
}

/// Kronecker product with the site-A factor on the left.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut m = Mat4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m.entries[2 * i + k][2 * j + l] = a.entries[i][j] * b.entries[k][l];
                }
            }
        }
    }
    m
}

pub mod pauli {
    use super::{kron, Mat2, Mat4, C64};

    pub fn identity() -> Mat2 {
        Mat2::identity()
    }

    pub fn x() -> Mat2 {
        Mat2::from_real_rows([[0.0, 1.0], [1.0, 0.0]])
    }

    pub fn y() -> Mat2 {
        Mat2::from_rows([
            [C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
            [C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
        ])
    }

    pub fn z() -> Mat2 {
        Mat2::diagonal([1.0, -1.0])
    }

    /// `op ⊗ I`.
    pub fn on_a(op: &Mat2) -> Mat4 {
        kron(op, &identity())
    }

    /// `I ⊗ op`.
    pub fn on_b(op: &Mat2) -> Mat4 {
        kron(&identity(), op)
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Eigenvalues come back ascending. Inside a degenerate cluster the vectors are
/// re-orthonormalised by Gram–Schmidt in index order, and every vector has its
/// largest-modulus component made real and positive.
pub fn hermitian_eig<const N: usize>(m: &Matrix<N>) -> Result<Spectrum<N>> {
    let tol = TOLERANCES;
    m.check_finite()?;
    if !m.is_hermitian(tol.structural) {
        return Err(QetError::invalid(format!(
            "matrix is not Hermitian (deviation {:e})",
            m.hermiticity_error()
        )));
    }
    let scale = m.max_abs().max(1.0);

    // Work on the exactly Hermitian part.
    let mut a = (*m + m.adjoint()).scale_real(0.5);
    let mut v = Matrix::<N>::identity();
    let converged_below = 1e-14 * scale;

    let mut converged = false;
    for _ in 0..tol.jacobi_max_sweeps {
        if off_diagonal_norm(&a) <= converged_below {
            converged = true;
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let b = a.entries[p][q];
                let r = b.norm();
                if r <= f64::MIN_POSITIVE {
                    continue;
                }
                let rotation = jacobi_rotation::<N>(&a, p, q);
                a = rotation.adjoint() * a * rotation;
                a.entries[p][q] = ZERO;
                a.entries[q][p] = ZERO;
                for i in 0..N {
                    a.entries[i][i] = C64::new(a.entries[i][i].re, 0.0);
                }
                v = v * rotation;
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > converged_below {
        return Err(QetError::numeric(format!(
            "Jacobi eigensolver did not converge in {} sweeps",
            tol.jacobi_max_sweeps
        )));
    }

    let mut pairs: Vec<(f64, Ket<N>)> = (0..N)
        .map(|j| {
            let mut amps = [ZERO; N];
            for (i, x) in amps.iter_mut().enumerate() {
                *x = v.entries[i][j];
            }
            (a.entries[j][j].re, Ket { amps })
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));

    // Deterministic basis inside degenerate clusters.
    let cluster_gap = tol.derived * scale;
    let mut start = 0;
    while start < N {
        let mut end = start + 1;
        while end < N && pairs[end].0 - pairs[end - 1].0 <= cluster_gap {
            end += 1;
        }
        if end - start > 1 {
            for i in start..end {
                let mut w = pairs[i].1;
                for j in start..i {
                    let u = pairs[j].1;
                    w = w - u.scale(u.inner(&w));
                }
                pairs[i].1 = w.normalized()?;
            }
        }
        start = end;
    }

    let mut eigenvalues = [0.0; N];
    let mut eigenvectors = [Ket { amps: [ZERO; N] }; N];
    for (i, (value, vector)) in pairs.into_iter().enumerate() {
        eigenvalues[i] = value;
        eigenvectors[i] = canonical_phase(&vector);
    }

    let spectrum = Spectrum {
        eigenvalues,
        eigenvectors,
    };
    let residual = spectrum.max_residual(m);
    if residual > tol.structural * scale {
        return Err(QetError::numeric(format!(
            "eigen-residual {residual:e} exceeds tolerance"
        )));
    }
    Ok(spectrum)
}

fn off_diagonal_norm<const N: usize>(a: &Matrix<N>) -> f64 {
    let mut s = 0.0;
    for p in 0..N {
        for q in 0..N {
            if p != q {
                s += a.entries[p][q].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Unitary `G` such that `(G† A G)_pq = 0`: a phase on column `q` makes the
/// pivot real, then a real plane rotation with `|angle| ≤ π/4` annihilates it.
fn jacobi_rotation<const N: usize>(a: &Matrix<N>, p: usize, q: usize) -> Matrix<N> {
    let b = a.entries[p][q];
    let r = b.norm();
    let phase = (b / r).conj();
    let app = a.entries[p][p].re;
    let aqq = a.entries[q][q].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
        sign / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let mut g = Matrix::<N>::identity();
    g.entries[p][p] = C64::new(c, 0.0);
    g.entries[p][q] = C64::new(s, 0.0);
    g.entries[q][p] = phase * (-s);
    g.entries[q][q] = phase * c;
    g
}

fn canonical_phase<const N: usize>(v: &Ket<N>) -> Ket<N> {
    let max = v.amps.iter().map(|a| a.norm()).fold(0.0, f64::max);
    // First component within rounding of the largest modulus.
    let pivot = v
        .amps
        .iter()
        .position(|a| a.norm() >= max - TOLERANCES.structural)
        .unwrap_or(0);
    let a = v.amps[pivot];
    if a.norm() == 0.0 {
        return *v;
    }
    let mut out = v.scale((a / a.norm()).conj());
    out.amps[pivot] = C64::new(a.norm(), 0.0);
    out
}

impl<const N: usize> Spectrum<N> {
    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn ground_vector(&self) -> &Ket<N> {
        &self.eigenvectors[0]
    }

    /// Largest `‖H v_i − λ_i v_i‖` over all returned pairs.
    pub fn max_residual(&self, h: &Matrix<N>) -> f64 {
        self.eigenvalues
            .iter()
            .zip(self.eigenvectors.iter())
            .map(|(&lambda, v)| (h.apply(v) - v.scale(C64::new(lambda, 0.0))).norm())
            .fold(0.0, f64::max)
    }

    /// Largest `|⟨v_i|v_j⟩ − δ_ij|`.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..N {
            for j in 0..N {
                let target = if i == j { ONE } else { ZERO };
                let d = (self.eigenvectors[i].inner(&self.eigenvectors[j]) - target).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// `Σ f(λ_i) |v_i⟩⟨v_i|`.
    pub fn reconstruct(&self, f: impl Fn(f64) -> C64) -> Matrix<N> {
        self.eigenvalues
            .iter()
            .zip(self.eigenvectors.iter())
            .fold(Matrix::zeros(), |acc, (&lambda, v)| {
                acc + Matrix::outer(v, v).scale(f(lambda))
            })
    }
}

/// `exp(−i H t)` from the eigendecomposition of `H`.
pub fn evolve_operator<const N: usize>(h: &Matrix<N>, t: f64) -> Result<Matrix<N>> {
    if !t.is_finite() {
        return Err(QetError::invalid("evolution time must be finite"));
    }
    let spectrum = hermitian_eig(h)?;
    Ok(propagator_from_spectrum(&spectrum, t))
}

/// `exp(−i H t)` for an already diagonalised `H`.
pub fn propagator_from_spectrum<const N: usize>(spectrum: &Spectrum<N>, t: f64) -> Matrix<N> {
    spectrum.reconstruct(|lambda| C64::from_polar(1.0, -lambda * t))
}

/// `⟨ψ|op|ψ⟩` for a Hermitian operator.
pub fn expectation<const N: usize>(state: &Ket<N>, op: &Matrix<N>) -> Result<f64> {
    let value = state.inner(&op.apply(state));
    let bound = TOLERANCES.imaginary_residue * op.max_abs().max(1.0) * state.norm_sqr().max(1.0);
    if !value.is_finite() {
        return Err(QetError::numeric("non-finite expectation value"));
    }
    if value.im.abs() > bound {
        return Err(QetError::numeric(format!(
            "expectation has imaginary part {:e}; operator is not Hermitian",
            value.im
        )));
    }
    Ok(value.re)
}

/// `cos θ·I + i sin θ·(n̂·σ⃗)`.
pub fn su2(theta: f64, axis: [f64; 3]) -> Result<Mat2> {
    if !theta.is_finite() || axis.iter().any(|x| !x.is_finite()) {
        return Err(QetError::invalid("SU(2) parameters must be finite"));
    }
    let len = axis.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (len - 1.0).abs() > TOLERANCES.structural {
        return Err(QetError::invalid(format!(
            "SU(2) axis must be a unit vector (length {len})"
        )));
    }
    let (s, c) = theta.sin_cos();
    let [nx, ny, nz] = axis;
    // i·s·(nx σx + ny σy + nz σz)
    Ok(Mat2::from_rows([
        [C64::new(c, s * nz), C64::new(s * ny, s * nx)],
        [C64::new(-s * ny, s * nx), C64::new(c, -s * nz)],
    ]))
}

/// Unit vector from polar and azimuthal angles.
pub fn axis_from_angles(polar: f64, azimuth: f64) -> [f64; 3] {
    let (sp, cp) = polar.sin_cos();
    let (sa, ca) = azimuth.sin_cos();
    [sp * ca, sp * sa, cp]
}
