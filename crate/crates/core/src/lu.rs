//! LU factorization with partial pivoting.

use crate::error::LinalgError;
use crate::linalg::{CMatrix, CVector, Complex, ZERO};

/// Default relative pivot floor.
pub const DEFAULT_PIVOT_FLOOR: f64 = 1e-14;

/// `P A = L U`, with unit-lower `L` and `U` packed into one matrix.
#[derive(Clone, Debug)]
pub struct LuFactors {
    lu: CMatrix,
    perm: Vec<usize>,
}

impl LuFactors {
    /// Factors `a` with the default pivot floor.
    pub fn factor(a: &CMatrix) -> Result<Self, LinalgError> {
        Self::factor_with_floor(a, DEFAULT_PIVOT_FLOOR)
    }

    /// Factors `a`; a pivot below `floor * max|A_ij|` is an error.
    pub fn factor_with_floor(a: &CMatrix, floor: f64) -> Result<Self, LinalgError> {
        if !a.is_finite() {
            return Err(LinalgError::NonFinite);
        }
        let n = a.n();
        let tiny = floor * a.max_abs();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let (p, pmag) = (k..n).map(|i| (i, lu[(i, k)].norm())).fold((k, -1.0), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            });
            if pmag <= tiny || pmag == 0.0 {
                return Err(LinalgError::SingularPivot { index: k, magnitude: pmag });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let m = lu[(i, k)] / pivot;
                lu[(i, k)] = m;
                if m == ZERO {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= m * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn n(&self) -> usize {
        self.lu.n()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &CVector) -> Result<CVector, LinalgError> {
        let n = self.n();
        if b.len() != n {
            return Err(LinalgError::DimensionMismatch { expected: n, found: b.len() });
        }
        let mut x: Vec<Complex> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        finite(CVector::new(x))
    }

    /// Solves `A† x = b` reusing the same factors.
    pub fn solve_adjoint(&self, b: &CVector) -> Result<CVector, LinalgError> {
        let n = self.n();
        if b.len() != n {
            return Err(LinalgError::DimensionMismatch { expected: n, found: b.len() });
        }
        // A† = U† L† P, so solve U† z = b, L† w = z, x = Pᵀ w.
        let mut z: Vec<Complex> = b.as_slice().to_vec();
        for i in 0..n {
            let mut s = z[i];
            for j in 0..i {
                s -= self.lu[(j, i)].conj() * z[j];
            }
            z[i] = s / self.lu[(i, i)].conj();
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for j in i + 1..n {
                s -= self.lu[(j, i)].conj() * z[j];
            }
            z[i] = s;
        }
        let mut x = vec![ZERO; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = z[i];
        }
        finite(CVector::new(x))
    }

    /// Inverse matrix, column by column.
    pub fn inverse(&self) -> Result<CMatrix, LinalgError> {
        let n = self.n();
        let mut inv = CMatrix::zeros(n);
        for j in 0..n {
            let col = self.solve(&CVector::basis(n, j))?;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Ok(inv)
    }

    pub fn determinant(&self) -> Complex {
        let n = self.n();
        let mut det: Complex = (0..n).map(|i| self.lu[(i, i)]).product();
        // sign of the permutation
        let mut seen = vec![false; n];
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.perm[i];
                len += 1;
            }
            if len % 2 == 0 {
                det = -det;
            }
        }
        det
    }
}

fn finite(v: CVector) -> Result<CVector, LinalgError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(LinalgError::NonFinite)
    }
}

/// Solves `A x = b` by LU with partial pivoting.
pub fn lu_solve(a: &CMatrix, b: &CVector) -> Result<CVector, LinalgError> {
    if a.n() != b.len() {
        return Err(LinalgError::DimensionMismatch { expected: a.n(), found: b.len() });
    }
    LuFactors::factor(a)?.solve(b)
}

/// Inverse of `a`.
pub fn inverse(a: &CMatrix) -> Result<CMatrix, LinalgError> {
    LuFactors::factor(a)?.inverse()
}
