//! Dense complex vectors and matrices.
//!
//! The inner product is conjugate-linear in its **first** argument:
//! `inner(f, g) = Σ conj(f_k) g_k`. This is the physics (Dirac) convention and
//! is the one for which `inner(f, A g) == inner(adjoint(A) f, g)` holds.
//! Many numerical libraries use the opposite slot; take care when porting
//! formulas.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::LinalgError;

/// Complex double-precision scalar.
pub type Complex = Complex64;

/// Default pairing floor for `bi_rayleigh`.
pub const DEFAULT_PAIRING_FLOOR: f64 = 1e-12;

pub(crate) const ZERO: Complex = Complex::new(0.0, 0.0);
pub(crate) const ONE: Complex = Complex::new(1.0, 0.0);

/// Dense complex vector.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct CVector(Vec<Complex>);

impl CVector {
    pub fn new(entries: Vec<Complex>) -> Self {
        Self(entries)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![ZERO; n])
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self(values.iter().map(|&v| Complex::new(v, 0.0)).collect())
    }

    /// Canonical basis vector `e_index` (zero based).
    pub fn basis(n: usize, index: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[index] = ONE;
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<Complex> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `Σ conj(self_k) other_k`. Panics on length mismatch; see [`inner`] for
    /// the checked form.
    pub fn dot(&self, other: &CVector) -> Complex {
        assert_eq!(self.len(), other.len(), "vector length mismatch");
        self.0.iter().zip(&other.0).fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        // scaled to avoid overflow/underflow on extreme entries
        let scale = self.max_abs();
        if scale == 0.0 || !scale.is_finite() {
            return scale;
        }
        let s: f64 = self.0.iter().map(|z| (z / scale).norm_sqr()).sum();
        scale * s.sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Index of the entry with largest modulus (first one on ties).
    pub fn argmax_abs(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, z) in self.0.iter().enumerate() {
            let m = z.norm();
            if best.is_none_or(|(_, b)| m > b) {
                best = Some((i, m));
            }
        }
        best.map(|(i, _)| i)
    }

    pub fn scale(&self, c: Complex) -> CVector {
        CVector(self.0.iter().map(|z| z * c).collect())
    }

    pub fn scale_mut(&mut self, c: Complex) {
        for z in &mut self.0 {
            *z *= c;
        }
    }

    /// `self += c * x`
    pub fn axpy(&mut self, c: Complex, x: &CVector) {
        assert_eq!(self.len(), x.len(), "vector length mismatch");
        for (a, b) in self.0.iter_mut().zip(&x.0) {
            *a += c * b;
        }
    }

    pub fn conj(&self) -> CVector {
        CVector(self.0.iter().map(|z| z.conj()).collect())
    }

    /// Unit vector in the same direction. `None` for the zero vector.
    pub fn normalized(&self) -> Option<CVector> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self.scale(Complex::new(1.0 / n, 0.0)))
    }

    /// Rotates the vector so that its largest-modulus entry is real positive.
    pub fn canonical_phase(&self) -> CVector {
        match self.argmax_abs() {
            Some(i) if self.0[i].norm() > 0.0 => {
                let z = self.0[i];
                self.scale(z.conj() / z.norm())
            }
            _ => self.clone(),
        }
    }
}

impl From<Vec<Complex>> for CVector {
    fn from(v: Vec<Complex>) -> Self {
        Self(v)
    }
}

impl Index<usize> for CVector {
    type Output = Complex;
    fn index(&self, i: usize) -> &Complex {
        &self.0[i]
    }
}

impl IndexMut<usize> for CVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex {
        &mut self.0[i]
    }
}

impl Add for &CVector {
    type Output = CVector;
    fn add(self, rhs: &CVector) -> CVector {
        assert_eq!(self.len(), rhs.len(), "vector length mismatch");
        CVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &CVector {
    type Output = CVector;
    fn sub(self, rhs: &CVector) -> CVector {
        assert_eq!(self.len(), rhs.len(), "vector length mismatch");
        CVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &CVector {
    type Output = CVector;
    fn neg(self) -> CVector {
        CVector(self.0.iter().map(|z| -z).collect())
    }
}

impl Mul<Complex> for &CVector {
    type Output = CVector;
    fn mul(self, c: Complex) -> CVector {
        self.scale(c)
    }
}

/// Dense square complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex>,
}

impl CMatrix {
    /// Builds an `n × n` matrix from row-major entries.
    pub fn new(n: usize, data: Vec<Complex>) -> Result<Self, LinalgError> {
        if n == 0 {
            return Err(LinalgError::Empty);
        }
        if data.len() != n * n {
            return Err(LinalgError::DimensionMismatch { expected: n * n, found: data.len() });
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: Vec<Vec<Complex>>) -> Result<Self, LinalgError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(LinalgError::NotSquare { rows: n, cols: row.len() });
            }
            data.extend(row);
        }
        Self::new(n, data)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self, LinalgError> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&v| Complex::new(v, 0.0)).collect()).collect())
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex) -> Self {
        assert!(n > 0, "matrix order must be positive");
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_fn(n, |_, _| ZERO)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_diag(d: &[Complex]) -> Self {
        Self::from_fn(d.len(), |i, j| if i == j { d[i] } else { ZERO })
    }

    pub fn from_real_diag(d: &[f64]) -> Self {
        Self::from_fn(d.len(), |i, j| if i == j { Complex::new(d[i], 0.0) } else { ZERO })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `A x`. Panics on dimension mismatch; see [`matvec`] for the checked form.
    pub fn apply(&self, x: &CVector) -> CVector {
        assert_eq!(self.n, x.len(), "matrix/vector dimension mismatch");
        let xs = x.as_slice();
        CVector::new(
            self.data
                .chunks_exact(self.n)
                .map(|row| row.iter().zip(xs).fold(ZERO, |acc, (a, b)| acc + a * b))
                .collect(),
        )
    }

    /// `A† x` without forming the adjoint.
    pub fn apply_adjoint(&self, x: &CVector) -> CVector {
        assert_eq!(self.n, x.len(), "matrix/vector dimension mismatch");
        let mut out = vec![ZERO; self.n];
        for (i, row) in self.data.chunks_exact(self.n).enumerate() {
            let xi = x[i];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a.conj() * xi;
            }
        }
        CVector::new(out)
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n, "matrix order mismatch");
        let n = self.n;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let orow = &other.data[k * n..(k + 1) * n];
                for (o, b) in out[i * n..(i + 1) * n].iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        CMatrix { n, data: out }
    }

    pub fn scale(&self, c: Complex) -> CMatrix {
        CMatrix { n: self.n, data: self.data.iter().map(|z| z * c).collect() }
    }

    /// `A - q I`
    pub fn shifted(&self, q: Complex) -> CMatrix {
        let mut m = self.clone();
        for i in 0..self.n {
            m[(i, i)] -= q;
        }
        m
    }

    pub fn trace(&self) -> Complex {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.n).map(|j| (0..self.n).map(|i| self[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation `max |A_ij - B_ij|`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.n, other.n, "matrix order mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Hermitian to within `tol` relative to `max(1, max|A_ij|)`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(1.0);
        (0..self.n).all(|i| (i..self.n).all(|j| (self[(i, j)] - self[(j, i)].conj()).norm() <= tol * scale))
    }

    /// Exactly upper Hessenberg (zero below the first subdiagonal).
    pub fn is_upper_hessenberg(&self) -> bool {
        (0..self.n).all(|i| (0..i.saturating_sub(1)).all(|j| self[(i, j)] == ZERO))
    }

    /// Union of Gershgorin disks as `(center, radius)` pairs.
    pub fn gershgorin_disks(&self) -> Vec<(Complex, f64)> {
        (0..self.n)
            .map(|i| {
                let r = (0..self.n).filter(|&j| j != i).map(|j| self[(i, j)].norm()).sum();
                (self[(i, i)], r)
            })
            .collect()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex;
    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        &mut self.data[i * self.n + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "matrix order mismatch");
        CMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n, "matrix order mismatch");
        CMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale(Complex::new(-1.0, 0.0))
    }
}

fn check_len(expected: usize, found: usize) -> Result<(), LinalgError> {
    if expected == found {
        Ok(())
    } else {
        Err(LinalgError::DimensionMismatch { expected, found })
    }
}

/// Dense product `A x`.
pub fn matvec(a: &CMatrix, x: &CVector) -> Result<CVector, LinalgError> {
    check_len(a.n(), x.len())?;
    Ok(a.apply(x))
}

/// Conjugate transpose.
pub fn adjoint(a: &CMatrix) -> CMatrix {
    a.adjoint()
}

/// `⟨f, g⟩ = Σ conj(f_k) g_k`, conjugate-linear in `f`.
pub fn inner(f: &CVector, g: &CVector) -> Result<Complex, LinalgError> {
    check_len(f.len(), g.len())?;
    Ok(f.dot(g))
}

pub fn norm2(f: &CVector) -> f64 {
    f.norm()
}

/// Rayleigh quotient `⟨y, A y⟩ / ⟨y, y⟩`.
pub fn rayleigh(a: &CMatrix, y: &CVector) -> Result<Complex, LinalgError> {
    check_len(a.n(), y.len())?;
    let yy = y.norm_sqr();
    if yy == 0.0 {
        return Err(LinalgError::ZeroVector);
    }
    Ok(y.dot(&a.apply(y)) / yy)
}

/// Biorthogonal quotient `⟨x_psi, A x_phi⟩ / ⟨x_psi, x_phi⟩`.
///
/// Fails when `|⟨x_psi, x_phi⟩| < floor`, which signals that the left/right
/// pair has lost its pairing.
pub fn bi_rayleigh(
    a: &CMatrix,
    x_psi: &CVector,
    x_phi: &CVector,
    floor: f64,
) -> Result<Complex, LinalgError> {
    check_len(a.n(), x_psi.len())?;
    check_len(a.n(), x_phi.len())?;
    let pairing = x_psi.dot(x_phi);
    if pairing.norm() < floor {
        return Err(LinalgError::DegeneratePairing { magnitude: pairing.norm(), floor });
    }
    Ok(x_psi.dot(&a.apply(x_phi)) / pairing)
}

/// `‖A x - λ x‖`.
pub fn residual(a: &CMatrix, lambda: Complex, x: &CVector) -> Result<f64, LinalgError> {
    check_len(a.n(), x.len())?;
    let mut r = a.apply(x);
    r.axpy(-lambda, x);
    Ok(r.norm())
}

/// `sup_j |⟨v_j, f⟩|`.
pub fn v_norm(f: &CVector, basis: &[CVector]) -> Result<f64, LinalgError> {
    let mut best = 0.0f64;
    for v in basis {
        best = best.max(inner(v, f)?.norm());
    }
    Ok(best)
}
