//! Reference eigensolver and closed-form flow trajectories.
//!
//! [`qr_spectrum`] reduces to Hessenberg form with Householder reflectors
//! and runs single-shift QR with Wilkinson shifts. Eigenvectors come from
//! inverse iteration on the original matrix and its adjoint.

use serde::{Deserialize, Serialize};

use crate::error::LinalgError;
use crate::linalg::{CMatrix, CVector, Complex, ONE, ZERO};
use crate::lu::LuFactors;
use crate::types::BiorthoPair;

/// Diagnostics attached to one eigenpair.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PairFlags {
    pub residual_right: f64,
    pub residual_left: f64,
    /// `|⟨v, u⟩|` for unit `u`, `v`; small means ill-conditioned.
    pub pairing: f64,
    /// Another eigenvalue lies within `1e-8` relative.
    pub repeated: bool,
    /// Left and right vectors are (numerically) orthogonal.
    pub defective: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    /// By descending real part, ties by descending imaginary part.
    pub eigenvalues: Vec<Complex>,
    /// Unit norm, largest entry real positive.
    pub right_vectors: Vec<CVector>,
    /// Scaled so that `⟨left_k, right_k⟩ = 1` when the pairing allows.
    pub left_vectors: Vec<CVector>,
    pub flags: Vec<PairFlags>,
    /// False when QR ran out of sweeps; trailing eigenvalues are then taken
    /// from the unreduced diagonal.
    pub converged: bool,
}

impl SpectralData {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn pair(&self, k: usize) -> BiorthoPair {
        BiorthoPair {
            lambda: self.eigenvalues[k],
            phi: self.right_vectors[k].clone(),
            psi: self.left_vectors[k].clone(),
        }
    }

    pub fn pairs(&self) -> Vec<BiorthoPair> {
        (0..self.n()).map(|k| self.pair(k)).collect()
    }

    /// Indices ordered by descending modulus.
    pub fn by_modulus(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.n()).collect();
        idx.sort_by(|&i, &j| self.eigenvalues[j].norm().total_cmp(&self.eigenvalues[i].norm()));
        idx
    }

    pub fn dominant_modulus(&self) -> Complex {
        self.eigenvalues[self.by_modulus()[0]]
    }

    pub fn dominant_real(&self) -> Complex {
        self.eigenvalues[0]
    }

    pub fn smallest_real(&self) -> Complex {
        self.eigenvalues[self.n() - 1]
    }

    /// `|λ₂| / |λ₁|` by modulus; 0 for 1×1.
    pub fn gap_ratio(&self) -> f64 {
        let idx = self.by_modulus();
        if idx.len() < 2 {
            return 0.0;
        }
        self.eigenvalues[idx[1]].norm() / self.eigenvalues[idx[0]].norm()
    }

    /// True when the two largest real parts differ by at most `tol`
    /// relative to the spectral scale.
    pub fn real_part_tie(&self, tol: f64) -> bool {
        if self.n() < 2 {
            return false;
        }
        let scale = self.eigenvalues.iter().map(|z| z.norm()).fold(1.0, f64::max);
        (self.eigenvalues[0].re - self.eigenvalues[1].re).abs() <= tol * scale
    }

    /// `c_k = ⟨left_k, x⟩`, the coordinates of `x` in the right basis.
    pub fn coefficients(&self, x: &CVector) -> Vec<Complex> {
        self.left_vectors.iter().map(|v| v.dot(x)).collect()
    }

    /// `d_k = ⟨right_k, y⟩`, the coordinates of `y` in the left basis.
    pub fn left_coefficients(&self, y: &CVector) -> Vec<Complex> {
        self.right_vectors.iter().map(|u| u.dot(y)).collect()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.eigenvalues.iter().all(|z| z.im.abs() < tol)
    }
}

fn sort_key(a: &Complex, b: &Complex) -> std::cmp::Ordering {
    b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im))
}

/// Householder reduction to upper Hessenberg form (similarity only; the
/// transformations are not kept).
pub fn hessenberg_reduce(a: &CMatrix) -> CMatrix {
    let n = a.n();
    let mut h: Vec<Complex> = a.as_slice().to_vec();
    for k in 0..n.saturating_sub(2) {
        let col: Vec<Complex> = (k + 1..n).map(|i| h[i * n + k]).collect();
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let phase = if col[0].norm() > 0.0 { col[0] / col[0].norm() } else { ONE };
        let mut v = col;
        v[0] += phase * norm;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut v {
            *z /= vn;
        }
        // H ← (I − 2vv†) H
        for j in 0..n {
            let s: Complex = (0..v.len()).map(|r| v[r].conj() * h[(k + 1 + r) * n + j]).sum();
            for r in 0..v.len() {
                h[(k + 1 + r) * n + j] -= v[r] * s * 2.0;
            }
        }
        // H ← H (I − 2vv†)
        for i in 0..n {
            let s: Complex = (0..v.len()).map(|r| h[i * n + k + 1 + r] * v[r]).sum();
            for r in 0..v.len() {
                h[i * n + k + 1 + r] -= s * v[r].conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[i * n + k] = ZERO;
        }
    }
    CMatrix::new(n, h).expect("square")
}

fn wilkinson_shift(a: Complex, b: Complex, c: Complex, d: Complex) -> Complex {
    // eigenvalue of [[a, b], [c, d]] closer to d
    let m = (a + d) * 0.5;
    let disc = (((a - d) * 0.5).powi(2) + b * c).sqrt();
    let (l1, l2) = (m + disc, m - disc);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Eigenvalues of an upper Hessenberg matrix by shifted QR. Returns the
/// (unsorted) eigenvalues and whether every one deflated.
pub fn hessenberg_qr_eigenvalues(h: &CMatrix) -> (Vec<Complex>, bool) {
    let n = h.n();
    let mut a: Vec<Complex> = h.as_slice().to_vec();
    let at = |a: &Vec<Complex>, i: usize, j: usize| a[i * n + j];
    let mut eig = vec![ZERO; n];
    let mut hi = n;
    let mut sweeps = 0usize;
    let mut since_deflation = 0usize;
    let max_sweeps = 100 * n.max(1);
    while hi > 0 {
        let last = hi - 1;
        // find the active block [lo, last]
        let mut lo = last;
        while lo > 0 {
            let s = at(&a, lo, lo - 1).norm();
            let d = at(&a, lo - 1, lo - 1).norm() + at(&a, lo, lo).norm();
            if s <= f64::EPSILON * d.max(f64::MIN_POSITIVE) {
                a[lo * n + lo - 1] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == last {
            eig[last] = at(&a, last, last);
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if sweeps >= max_sweeps {
            for k in 0..hi {
                eig[k] = at(&a, k, k);
            }
            return (eig, false);
        }
        sweeps += 1;
        since_deflation += 1;
        let mut mu = wilkinson_shift(
            at(&a, last - 1, last - 1),
            at(&a, last - 1, last),
            at(&a, last, last - 1),
            at(&a, last, last),
        );
        if since_deflation % 11 == 10 {
            mu = at(&a, last, last) + Complex::new(0.75, 0.5) * at(&a, last, last - 1).norm();
        }
        for k in lo..=last {
            a[k * n + k] -= mu;
        }
        // QR by Givens rotations on the active block, then RQ.
        let mut rots = Vec::with_capacity(last - lo);
        for k in lo..last {
            let x = at(&a, k, k);
            let y = at(&a, k + 1, k);
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (c, s) = if r == 0.0 { (ONE, ZERO) } else { (x / r, y / r) };
            // G = [[conj c, conj s], [−s, c]]
            for j in k..=last {
                let p = at(&a, k, j);
                let q = at(&a, k + 1, j);
                a[k * n + j] = c.conj() * p + s.conj() * q;
                a[(k + 1) * n + j] = -s * p + c * q;
            }
            rots.push((c, s));
        }
        for (off, &(c, s)) in rots.iter().enumerate() {
            let k = lo + off;
            // right-multiply by G†
            for i in lo..=(k + 1).min(last) {
                let p = at(&a, i, k);
                let q = at(&a, i, k + 1);
                a[i * n + k] = p * c + q * s;
                a[i * n + k + 1] = -p * s.conj() + q * c.conj();
            }
        }
        for k in lo..=last {
            a[k * n + k] += mu;
        }
    }
    (eig, true)
}

fn inverse_iteration(a: &CMatrix, lambda: Complex) -> Option<CVector> {
    let n = a.n();
    let scale = a.max_abs().max(1.0);
    for eps in [1e-10, 1e-8, 1e-6] {
        let shift = lambda + Complex::new(eps, eps) * scale;
        let Ok(lu) = LuFactors::factor_with_floor(&a.shifted(shift), 0.0) else {
            continue;
        };
        let mut x =
            CVector::new((0..n).map(|k| Complex::new(1.0 + 0.1 * k as f64, 0.05 * (k % 3) as f64)).collect());
        let mut ok = true;
        for _ in 0..4 {
            match lu.solve(&x).ok().and_then(|y| y.normalized()) {
                Some(y) if y.is_finite() => x = y,
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Some(x.canonical_phase());
        }
    }
    None
}

/// Full spectrum with left and right eigenvectors.
pub fn qr_spectrum(a: &CMatrix) -> SpectralData {
    let (mut eigenvalues, converged) = hessenberg_qr_eigenvalues(&hessenberg_reduce(a));
    eigenvalues.sort_by(sort_key);
    finish_spectrum(a, eigenvalues, converged)
}

fn finish_spectrum(a: &CMatrix, eigenvalues: Vec<Complex>, converged: bool) -> SpectralData {
    let n = a.n();
    let adj = a.adjoint();
    let scale = eigenvalues.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut right = Vec::with_capacity(n);
    let mut left = Vec::with_capacity(n);
    let mut flags = Vec::with_capacity(n);
    for (k, &l) in eigenvalues.iter().enumerate() {
        let u = inverse_iteration(a, l).unwrap_or_else(|| CVector::basis(n, k));
        let v = inverse_iteration(&adj, l.conj()).unwrap_or_else(|| CVector::basis(n, k));
        let repeated = eigenvalues.iter().enumerate().any(|(j, &m)| j != k && (m - l).norm() <= 1e-8 * scale);
        let p = v.dot(&u);
        let defective = p.norm() < 1e-12;
        let v = if defective { v } else { v.scale(ONE / p.conj()) };
        let pair = BiorthoPair { lambda: l, phi: u.clone(), psi: v.clone() };
        flags.push(PairFlags {
            residual_right: pair.residual_right(a),
            residual_left: pair.residual_left(a),
            pairing: p.norm(),
            repeated,
            defective,
        });
        right.push(u);
        left.push(v);
    }
    SpectralData { eigenvalues, right_vectors: right, left_vectors: left, flags, converged }
}

fn null_vector_2x2(a: &CMatrix, l: Complex) -> CVector {
    let (p, b, c, q) = (a[(0, 0)] - l, a[(0, 1)], a[(1, 0)], a[(1, 1)] - l);
    let v1 = CVector::new(vec![b, -p]);
    let v2 = CVector::new(vec![-q, c]);
    let v = if v1.norm() >= v2.norm() { v1 } else { v2 };
    v.normalized().unwrap_or_else(|| CVector::basis(2, 0)).canonical_phase()
}

/// Closed-form 2×2 eigensystem.
pub fn eig_2x2(a: &CMatrix) -> Result<SpectralData, LinalgError> {
    if a.n() != 2 {
        return Err(LinalgError::DimensionMismatch { expected: 2, found: a.n() });
    }
    let (p, b, c, d) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let m = (p + d) * 0.5;
    let disc = (((p - d) * 0.5).powi(2) + b * c).sqrt();
    let mut eigenvalues = vec![m + disc, m - disc];
    eigenvalues.sort_by(sort_key);
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let adj = a.adjoint();
    let mut right = Vec::new();
    let mut left = Vec::new();
    let mut flags = Vec::new();
    let scalar = b.norm() <= 1e-14 * scale && c.norm() <= 1e-14 * scale && (p - d).norm() <= 1e-14 * scale;
    for (k, &l) in eigenvalues.iter().enumerate() {
        let (u, v) = if scalar {
            (CVector::basis(2, k), CVector::basis(2, k))
        } else {
            (null_vector_2x2(a, l), null_vector_2x2(&adj, l.conj()))
        };
        let pr = v.dot(&u);
        let defective = !scalar && (disc.norm() <= 1e-8 * scale || pr.norm() < 1e-12);
        let v = if defective { v } else { v.scale(ONE / pr.conj()) };
        let pair = BiorthoPair { lambda: l, phi: u.clone(), psi: v.clone() };
        flags.push(PairFlags {
            residual_right: pair.residual_right(a),
            residual_left: pair.residual_left(a),
            pairing: pr.norm(),
            repeated: disc.norm() <= 1e-8 * scale,
            defective,
        });
        right.push(u);
        left.push(v);
    }
    Ok(SpectralData { eigenvalues, right_vectors: right, left_vectors: left, flags, converged: true })
}

/// Continuous argument of `g(t)` on `[0, t]`, starting from `arg g(0)`.
fn continuous_arg(mut g: impl FnMut(f64) -> Complex, t: f64, rate: f64) -> f64 {
    let steps = ((t.abs() * rate * 4.0).ceil() as usize).clamp(16, 1_000_000);
    let mut prev = g(0.0);
    let mut arg = prev.arg();
    for s in 1..=steps {
        let cur = g(t * s as f64 / steps as f64);
        arg += (cur / prev).arg();
        prev = cur;
    }
    arg
}

/// Right and left flow vectors at time `t` from `x_phi(0) = Σ c_k φ_k` and
/// `x_psi(0) = Σ d_k ψ_k`, with `χ = Σ conj(d_k) c_k`:
/// `c_k(t) = c_k e^{χλ_k t} / √(Σ_l conj(d_l) c_l e^{2χλ_l t} / χ)` and
/// `conj(d_k(t)) = conj(d_k) e^{χλ_k t} / (same root)`.
/// Exponentials are scaled by their largest real part, and the branch of
/// the root is followed continuously from `t = 0`.
pub fn closed_form_pair(
    spec: &SpectralData,
    c0: &[Complex],
    d0: &[Complex],
    t: f64,
) -> Result<(CVector, CVector), LinalgError> {
    let n = spec.n();
    for len in [c0.len(), d0.len()] {
        if len != n {
            return Err(LinalgError::DimensionMismatch { expected: n, found: len });
        }
    }
    if c0.iter().chain(d0).any(|z| !(z.re.is_finite() && z.im.is_finite())) || !t.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let w: Vec<Complex> = c0.iter().zip(d0).map(|(c, d)| d.conj() * c).collect();
    let chi: Complex = w.iter().sum();
    if chi.norm() < 1e-300 || c0.iter().all(|z| z.norm() == 0.0) {
        return Err(LinalgError::DegeneratePairing { magnitude: chi.norm(), floor: 1e-300 });
    }
    let lam = &spec.eigenvalues;
    // only terms with nonzero weight enter the normalization
    let active: Vec<usize> = (0..n).filter(|&l| w[l].norm() > 0.0).collect();
    let peak =
        |tau: f64| active.iter().map(|&l| (chi * lam[l] * 2.0 * tau).re).fold(f64::NEG_INFINITY, f64::max);
    let scaled_sum = |tau: f64| -> Complex {
        let m = peak(tau);
        active.iter().map(|&l| w[l] * (chi * lam[l] * 2.0 * tau - m).exp()).sum::<Complex>() / chi
    };
    let rate = active.iter().map(|&l| (chi * lam[l] * 2.0).im.abs()).fold(0.0, f64::max) + 1.0;
    let m = peak(t);
    let s = scaled_sum(t);
    let arg = continuous_arg(scaled_sum, t, rate);
    // log of 1/√(S/χ) with S = e^m · s
    let log_f = Complex::new(-(0.5 * (s.norm().ln() + m)), -0.5 * arg);
    let mut x = CVector::zeros(n);
    let mut y = CVector::zeros(n);
    for k in 0..n {
        let e = chi * lam[k] * t + log_f;
        let ck = c0[k] * e.exp();
        let dk_conj = d0[k].conj() * e.exp();
        if c0[k].norm() > 0.0 {
            x.axpy(ck, &spec.right_vectors[k]);
        }
        if d0[k].norm() > 0.0 {
            y.axpy(dk_conj.conj(), &spec.left_vectors[k]);
        }
    }
    if !x.is_finite() || !y.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    Ok((x, y))
}

/// Right flow vector with `x_psi(0)` sharing the coefficients of
/// `x_phi(0)` (`d = c`); for real `c` this is the symmetric closed form.
pub fn closed_form_flow(spec: &SpectralData, c0: &[Complex], t: f64) -> Result<CVector, LinalgError> {
    closed_form_pair(spec, c0, c0, t).map(|(x, _)| x)
}
