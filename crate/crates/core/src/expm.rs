//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! (Higham 2005, Algorithm 2.3).

use crate::linalg::{CMatrix, Complex};
use crate::lu::LuFactors;

const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.53939833006323e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068e0;
const THETA_13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn re(x: f64) -> Complex {
    Complex::new(x, 0.0)
}

/// `Σ c_k P_k` over matrices of equal order.
fn combo(terms: &[(f64, &CMatrix)]) -> CMatrix {
    let n = terms[0].1.n();
    let mut out = CMatrix::zeros(n);
    for &(c, m) in terms {
        if c == 0.0 {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += m[(i, j)] * c;
            }
        }
    }
    out
}

/// Low-degree approximant: U (odd part) and V (even part) from powers of A².
fn pade_low(a: &CMatrix, b: &[f64]) -> (CMatrix, CMatrix) {
    let n = a.n();
    let id = CMatrix::identity(n);
    let m = b.len() - 1;
    let a2 = a.matmul(a);
    let mut powers = vec![id.clone(), a2.clone()];
    while powers.len() < m.div_ceil(2) {
        let next = powers.last().unwrap().matmul(&a2);
        powers.push(next);
    }
    let odd: Vec<(f64, &CMatrix)> = (0..powers.len()).map(|k| (b[2 * k + 1], &powers[k])).collect();
    let even: Vec<(f64, &CMatrix)> = (0..powers.len()).map(|k| (b[2 * k], &powers[k])).collect();
    (a.matmul(&combo(&odd)), combo(&even))
}

fn pade13(a: &CMatrix) -> (CMatrix, CMatrix) {
    let b = &B13;
    let id = CMatrix::identity(a.n());
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let inner_u = combo(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)]);
    let u = a.matmul(&(&a6.matmul(&inner_u) + &combo(&[(b[7], &a6), (b[5], &a4), (b[3], &a2), (b[1], &id)])));
    let inner_v = combo(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)]);
    let v = &a6.matmul(&inner_v) + &combo(&[(b[6], &a6), (b[4], &a4), (b[2], &a2), (b[0], &id)]);
    (u, v)
}

/// Solves `(V - U) X = (V + U)`.
fn pade_solve(u: &CMatrix, v: &CMatrix) -> CMatrix {
    let p = v + u;
    let q = v - u;
    let n = u.n();
    let lu = LuFactors::factor_with_floor(&q, 0.0)
        .expect("Padé denominator is nonsingular for norms within theta_13");
    let mut out = CMatrix::zeros(n);
    for j in 0..n {
        let col = lu
            .solve(&crate::linalg::CVector::new((0..n).map(|i| p[(i, j)]).collect()))
            .expect("dimension matches");
        for i in 0..n {
            out[(i, j)] = col[i];
        }
    }
    out
}

/// Matrix exponential `e^M`.
pub fn expm(m: &CMatrix) -> CMatrix {
    let n = m.n();
    let norm = m.norm_one();
    if norm == 0.0 {
        return CMatrix::identity(n);
    }
    for (theta, b) in [(THETA_3, &B3[..]), (THETA_5, &B5[..]), (THETA_7, &B7[..]), (THETA_9, &B9[..])] {
        if norm <= theta {
            let (u, v) = pade_low(m, b);
            return pade_solve(&u, &v);
        }
    }
    let s = if norm > THETA_13 { (norm / THETA_13).log2().ceil().max(0.0) as i32 } else { 0 };
    let scaled = m.scale(re(0.5f64.powi(s)));
    let (u, v) = pade13(&scaled);
    let mut r = pade_solve(&u, &v);
    for _ in 0..s {
        r = r.matmul(&r);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matgen::random_complex;

    #[test]
    fn zero_gives_identity() {
        assert_eq!(expm(&CMatrix::zeros(3)), CMatrix::identity(3));
    }

    #[test]
    fn diagonal_exponentiates_entrywise() {
        let d = [Complex::new(0.3, 1.0), Complex::new(-2.0, 0.0), Complex::new(4.0, -3.0)];
        let e = expm(&CMatrix::from_diag(&d));
        for (i, z) in d.iter().enumerate() {
            assert!((e[(i, i)] - z.exp()).norm() < 1e-12 * z.exp().norm().max(1.0));
        }
    }

    #[test]
    fn every_pade_degree_is_accurate() {
        // rotation generator: exp(t [[0,1],[-1,0]]) = [[cos t, sin t], [-sin t, cos t]]
        for t in [1e-3, 0.1, 0.5, 1.5, 4.0, 30.0] {
            let g = CMatrix::from_real_rows(&[&[0.0, t], &[-t, 0.0]]).unwrap();
            let e = expm(&g);
            assert!((e[(0, 0)] - re(t.cos())).norm() < 1e-13, "t = {t}");
            assert!((e[(0, 1)] - re(t.sin())).norm() < 1e-13, "t = {t}");
        }
    }

    #[test]
    fn inverse_property() {
        for seed in 0..5 {
            let m = random_complex(6, seed).scale(re(1.5));
            let p = expm(&m).matmul(&expm(&m.scale(re(-1.0))));
            assert!(p.max_abs_diff(&CMatrix::identity(6)) < 1e-10);
        }
    }

    #[test]
    fn skew_hermitian_gives_unitary() {
        let a = random_complex(5, 9);
        let k = &a - &a.adjoint();
        let u = expm(&k);
        let uu = u.adjoint().matmul(&u);
        assert!(uu.max_abs_diff(&CMatrix::identity(5)) < 1e-12);
    }
}
