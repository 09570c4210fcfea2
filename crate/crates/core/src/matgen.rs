//! Test matrix constructors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::GenError;
use crate::expm::expm;
use crate::linalg::{CMatrix, CVector, Complex, ONE, ZERO};
use crate::lu::LuFactors;

fn uniform(rng: &mut ChaCha8Rng) -> Complex {
    Complex::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
}

/// Entries with real and imaginary parts uniform on `[-1, 1]`.
pub fn random_vector_rng(n: usize, rng: &mut ChaCha8Rng) -> CVector {
    CVector::new((0..n).map(|_| uniform(rng)).collect())
}

pub fn random_vector(n: usize, seed: u64) -> CVector {
    random_vector_rng(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Dense matrix with real and imaginary parts uniform on `[-1, 1]`.
pub fn random_complex(n: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CMatrix::from_fn(n, |_, _| uniform(&mut rng))
}

/// `(B + B†) / 2` for a [`random_complex`] `B`.
pub fn random_hermitian(n: usize, seed: u64) -> CMatrix {
    let b = random_complex(n, seed);
    let h = &b + &b.adjoint();
    h.scale(Complex::new(0.5, 0.0))
}

/// `V diag(eigenvalues) V⁻¹` with a random `V`.
pub fn with_spectrum(eigenvalues: &[Complex], seed: u64) -> Result<CMatrix, GenError> {
    let n = eigenvalues.len();
    if n == 0 {
        return Err(GenError::InvalidParam("empty spectrum".into()));
    }
    let v = &random_complex(n, seed) + &CMatrix::identity(n).scale(Complex::new(1.5, 0.0));
    let vinv = LuFactors::factor(&v)?.inverse()?;
    Ok(v.matmul(&CMatrix::from_diag(eigenvalues)).matmul(&vinv))
}

const E1_R: [[f64; 7]; 7] = [
    [0.445, -0.219, 0.489, 0.770, 0.589, -0.00333, 0.950],
    [0.481, -0.892, -0.806, -0.743, -0.641, -0.422, 0.701],
    [-0.735, 0.747, 0.750, -0.879, 0.884, -0.0114, -0.260],
    [0.528, 0.357, 0.707, 0.986, 0.201, 0.320, 0.207],
    [0.899, 0.727, 0.206, -0.792, 0.109, 0.895, 0.672],
    [-0.400, -0.259, -0.988, 0.459, 0.681, 0.843, 0.788],
    [0.326, -0.530, -0.168, 0.141, 0.0158, -0.496, -0.907],
];

const E1_T: [[f64; 7]; 7] = [
    [0.959, 0.314, -0.237, 0.232, -0.608, 0.199, -0.164],
    [-0.744, -0.112, 0.239, 0.384, -0.132, 0.299, 0.817],
    [0.921, 0.681, -0.302, 0.942, -0.781, 0.908, -0.0566],
    [0.465, -0.641, 0.505, -0.892, -0.830, 0.715, -0.170],
    [-0.807, 0.978, -0.185, -0.619, -0.923, 0.322, -0.690],
    [0.0672, 0.893, 0.620, 0.711, -0.631, -0.636, -0.211],
    [-0.742, -0.0257, 0.536, -0.952, -0.325, 0.0701, 0.196],
];

/// Published eigenvalues of the 7×7 fixture, by descending real part.
pub const E1_EIGENVALUES: [(f64, f64); 7] = [
    (1.5181, -1.2564),
    (0.9604, -2.2206),
    (0.9394, -0.6078),
    (0.8326, 2.0418),
    (-0.7583, -1.154),
    (-0.8380, 0.1978),
    (-1.3201, 1.2896),
];

/// `(R, T, A)` with `A = R + iT`.
pub fn e1_fixture() -> (CMatrix, CMatrix, CMatrix) {
    let r = CMatrix::from_fn(7, |i, j| Complex::new(E1_R[i][j], 0.0));
    let t = CMatrix::from_fn(7, |i, j| Complex::new(E1_T[i][j], 0.0));
    let a = CMatrix::from_fn(7, |i, j| Complex::new(E1_R[i][j], E1_T[i][j]));
    (r, t, a)
}

pub fn e1_eigenvalues() -> Vec<Complex> {
    E1_EIGENVALUES.iter().map(|&(re, im)| Complex::new(re, im)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "snake_case")]
pub enum AlphaSequence {
    /// `α_j = exp(−j²)`
    ExpMinusKSquared,
    /// `α_j = 1/((j+1)²)!`. The unshifted `k = 1` term is 1, which is not
    /// admissible.
    InverseFactorialKSquared,
    /// `α_j = 1/((j+1)!)²`, the alternate reading of the factorial family.
    InverseFactorialSquared,
    /// `α_1..α_n` given explicitly.
    Custom(Vec<Complex>),
}

fn ln_factorial(m: u64) -> f64 {
    (2..=m).map(|k| (k as f64).ln()).sum()
}

impl AlphaSequence {
    /// `α_1..α_n`; `α_0 = 1` is implicit.
    pub fn values(&self, n: usize) -> Result<Vec<Complex>, GenError> {
        let v: Vec<Complex> = match self {
            Self::ExpMinusKSquared => (1..=n).map(|j| Complex::new((-((j * j) as f64)).exp(), 0.0)).collect(),
            Self::InverseFactorialKSquared => {
                (1..=n as u64).map(|j| Complex::new((-ln_factorial((j + 1) * (j + 1))).exp(), 0.0)).collect()
            }
            Self::InverseFactorialSquared => {
                (1..=n as u64).map(|j| Complex::new((-2.0 * ln_factorial(j + 1)).exp(), 0.0)).collect()
            }
            Self::Custom(v) => {
                if v.len() < n {
                    return Err(GenError::InvalidParam(format!(
                        "custom sequence has {} terms, need {n}",
                        v.len()
                    )));
                }
                v[..n].to_vec()
            }
        };
        for (i, a) in v.iter().enumerate() {
            if !(a.norm() < 1.0) {
                return Err(GenError::AlphaOutOfRange { index: i + 1, modulus: a.norm() });
            }
        }
        Ok(v)
    }
}

/// Upper Hessenberg `D{α}` of order `n`: entry `(i, j)`, `i ≤ j`, is
/// `−(k_i/k_j) α_{j+1} conj(α_i)` and the subdiagonal is `k_j/k_{j+1}`, with
/// `k_0 = 1`, `k_j = k_{j−1}/√(1 − |α_j|²)` and `α_0 = 1` (0-based indices).
pub fn hessenberg(alpha: &AlphaSequence, n: usize) -> Result<CMatrix, GenError> {
    if n < 2 {
        return Err(GenError::InvalidParam("hessenberg order must be at least 2".into()));
    }
    let mut a = vec![ONE];
    a.extend(alpha.values(n)?);
    let mut k = vec![1.0f64];
    for j in 1..n {
        k.push(k[j - 1] / (1.0 - a[j].norm_sqr()).sqrt());
    }
    Ok(CMatrix::from_fn(n, |i, j| {
        if i <= j {
            -(a[j + 1] * a[i].conj()) * (k[i] / k[j])
        } else if i == j + 1 {
            Complex::new(k[j] / k[i], 0.0)
        } else {
            ZERO
        }
    }))
}

/// Right shift: ones on the subdiagonal.
pub fn right_shift(n: usize) -> CMatrix {
    CMatrix::from_fn(n, |i, j| if i == j + 1 { ONE } else { ZERO })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwansonParams {
    pub n: usize,
    pub theta: f64,
}

impl SwansonParams {
    pub fn validate(&self) -> Result<(), GenError> {
        if self.n == 0 {
            return Err(GenError::InvalidParam("dimension must be positive".into()));
        }
        let bound = std::f64::consts::FRAC_PI_4;
        if !(self.theta.abs() < bound) || self.theta == 0.0 {
            return Err(GenError::InvalidParam(format!(
                "theta must lie in (-pi/4, pi/4) without 0, got {}",
                self.theta
            )));
        }
        Ok(())
    }
}

/// Ladder index convention and generator scale used by [`swanson`].
pub const SWANSON_CONVENTION: &str = "a e_k = sqrt(k-1) e_(k-1); T = expm(-i (theta/2) (a^2 - a_dag^2))";

/// Truncated annihilation operator: `a e_k = √(k−1) e_{k−1}` (1-based).
pub fn annihilation(n: usize) -> CMatrix {
    CMatrix::from_fn(n, |i, j| if j == i + 1 { Complex::new(((i + 1) as f64).sqrt(), 0.0) } else { ZERO })
}

/// `H = T h T⁻¹` with `h = diag(1/2, 3/2, …)` and
/// `T = exp(−i(θ/2)(a² − a†²))`.
pub fn swanson(p: SwansonParams) -> Result<CMatrix, GenError> {
    p.validate()?;
    let n = p.n;
    let a = annihilation(n);
    let a2 = a.matmul(&a);
    let ad = a.adjoint();
    let g = &a2 - &ad.matmul(&ad);
    let t = expm(&g.scale(Complex::new(0.0, -p.theta / 2.0)));
    let h = CMatrix::from_fn(n, |i, j| if i == j { Complex::new(i as f64 + 0.5, 0.0) } else { ZERO });
    let tinv = LuFactors::factor(&t)?.inverse()?;
    Ok(t.matmul(&h).matmul(&tinv))
}

/// The published `H_θ` for `N = 7`, `θ = 0.4` (six significant digits).
pub fn printed_swanson_fixture() -> CMatrix {
    let r = |x: f64| Complex::new(x, 0.0);
    let i = |x: f64| Complex::new(0.0, x);
    let z = ZERO;
    CMatrix::from_rows(vec![
        vec![r(0.348126), z, i(-0.510541), z, r(0.0140773), z, i(0.0216558)],
        vec![z, r(1.05673), z, i(-0.805139), z, r(-0.145695), z],
        vec![i(-0.510541), z, r(1.79157), z, i(-1.01756), z, r(-0.372785)],
        vec![z, i(-0.805139), z, r(1.9337), z, i(-2.76093), z],
        vec![r(0.0140773), z, i(-1.01756), z, r(2.0337), z, i(-4.04439)],
        vec![z, r(-0.145695), z, i(-2.76093), z, r(7.50957), z],
        vec![i(0.0216558), z, r(-0.372785), z, i(-4.04439), z, r(9.8266)],
    ])
    .expect("square fixture")
}

/// True iff every entry with odd `i + j` vanishes (below 1e-12).
pub fn swanson_checkerboard(h: &CMatrix) -> bool {
    let n = h.n();
    (0..n).all(|i| (0..n).all(|j| (i + j) % 2 == 0 || h[(i, j)].norm() < 1e-12))
}

/// Largest entrywise relative error, `|x − y| / max(|y|, 1e-3)`.
pub fn max_relative_entry_error(x: &CMatrix, reference: &CMatrix) -> f64 {
    x.as_slice()
        .iter()
        .zip(reference.as_slice())
        .map(|(a, b)| (a - b).norm() / b.norm().max(1e-3))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_is_deterministic() {
        assert_eq!(random_complex(4, 9), random_complex(4, 9));
        assert_ne!(random_complex(4, 9), random_complex(4, 10));
        let z = random_complex(1, 3)[(0, 0)];
        assert!(z.re.abs() <= 1.0 && z.im.abs() <= 1.0);
    }

    #[test]
    fn random_is_non_hermitian() {
        for seed in 0..100 {
            assert!(!random_complex(3, seed).is_hermitian(1e-12));
        }
        assert!(random_hermitian(4, 1).is_hermitian(0.0));
    }

    #[test]
    fn e1_entries() {
        let (r, t, a) = e1_fixture();
        assert_eq!(a[(0, 0)], Complex::new(0.445, 0.959));
        assert_eq!(a[(6, 6)], Complex::new(-0.907, 0.196));
        assert_eq!(r[(0, 5)], Complex::new(-0.00333, 0.0));
        assert_eq!(t[(6, 1)], Complex::new(-0.0257, 0.0));
    }

    #[test]
    fn zero_alpha_gives_right_shift() {
        let d = hessenberg(&AlphaSequence::Custom(vec![ZERO; 5]), 5).unwrap();
        assert_eq!(d, right_shift(5));
    }

    #[test]
    fn hessenberg_structure() {
        let d = hessenberg(&AlphaSequence::ExpMinusKSquared, 15).unwrap();
        assert!(d.is_upper_hessenberg());
        for j in 0..14 {
            let s = d[(j + 1, j)].re;
            assert!(s > 0.0 && s <= 1.0);
        }
        assert!((d[(0, 0)].re + (-1.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn faster_tail_is_closer_to_shift() {
        let n = 15;
        let halves =
            AlphaSequence::Custom((1..=n).map(|k| Complex::new(0.5f64.powi(k as i32), 0.0)).collect());
        let s = right_shift(n);
        let fast = (&hessenberg(&AlphaSequence::ExpMinusKSquared, n).unwrap() - &s).norm_fro();
        let slow = (&hessenberg(&halves, n).unwrap() - &s).norm_fro();
        assert!(fast < slow);
    }

    #[test]
    fn alpha_out_of_range() {
        let bad = AlphaSequence::Custom(vec![Complex::new(0.5, 0.0), Complex::new(1.0, 0.0)]);
        assert!(matches!(hessenberg(&bad, 2), Err(GenError::AlphaOutOfRange { index: 2, .. })));
    }

    #[test]
    fn factorial_sequence_decays() {
        let v = AlphaSequence::InverseFactorialKSquared.values(15).unwrap();
        assert!((v[0].re - 1.0 / 24.0).abs() < 1e-16);
        assert!((v[1].re - 1.0 / 362_880.0).abs() < 1e-20);
        assert_eq!(v[14].re, 0.0);
    }

    #[test]
    fn swanson_matches_printed() {
        let h = swanson(SwansonParams { n: 7, theta: 0.4 }).unwrap();
        let printed = printed_swanson_fixture();
        assert!(max_relative_entry_error(&h, &printed) < 1e-3);
        assert!((h[(0, 0)].re - 0.348126).abs() < 1e-5);
        assert!((h[(0, 2)] - Complex::new(0.0, -0.510541)).norm() < 1e-5);
    }

    #[test]
    fn swanson_checkerboard_pattern() {
        assert!(swanson_checkerboard(&printed_swanson_fixture()));
        assert!(swanson_checkerboard(&swanson(SwansonParams { n: 5, theta: 0.2 }).unwrap()));
        assert!(!swanson_checkerboard(&e1_fixture().2));
    }

    #[test]
    fn swanson_small_theta_is_near_h() {
        let h = swanson(SwansonParams { n: 7, theta: 1e-3 }).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                let expect = if i == j { i as f64 + 0.5 } else { 0.0 };
                assert!((h[(i, j)] - Complex::new(expect, 0.0)).norm() < 1e-2);
            }
        }
    }

    #[test]
    fn swanson_rejects_bad_theta() {
        for theta in [0.0, 0.8, -1.0, f64::NAN] {
            assert!(swanson(SwansonParams { n: 4, theta }).is_err());
        }
    }

    #[test]
    fn designed_spectrum() {
        let eigs = [Complex::new(2.0, 1.0), Complex::new(-1.0, 0.0), Complex::new(0.5, -0.5)];
        let a = with_spectrum(&eigs, 3).unwrap();
        let sum: Complex = eigs.iter().sum();
        assert!((a.trace() - sum).norm() < 1e-12);
    }
}
