use biortho::flow::{coupled_rhs, FlowState};
use biortho::io::to_json_string;
use biortho::matgen::{random_complex, random_hermitian, random_vector, with_spectrum};
use biortho::power::{deflate_adjoint_raw, deflate_raw, schwartz_quotient};
use biortho::{
    expm, lu_solve, power_iterate, qr_spectrum, BiorthoPair, CMatrix, CVector, Complex, PowerStatus,
    SolverConfig,
};
use proptest::prelude::*;

fn dims() -> impl Strategy<Value = (usize, u64)> {
    (1usize..=8, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn binormalized_pair_has_unit_phi_and_unit_pairing((n, seed) in dims()) {
        let x = random_vector(n, seed);
        let y = random_vector(n, seed ^ 0xABCD);
        prop_assume!(y.dot(&x).norm() > 1e-6);
        let p = BiorthoPair::binormalized(Complex::new(1.0, 0.0), &x, &y, 1e-12).unwrap();
        prop_assert!((p.phi.norm() - 1.0).abs() < 1e-14);
        prop_assert!((p.pairing() - Complex::new(1.0, 0.0)).norm() < 1e-12);
        let k = p.phi.argmax_abs().unwrap();
        prop_assert!(p.phi[k].im.abs() < 1e-15 && p.phi[k].re > 0.0);
    }

    #[test]
    fn lu_solve_has_small_backward_error((n, seed) in dims()) {
        let a = random_complex(n, seed);
        let b = random_vector(n, seed.wrapping_add(1));
        let x = lu_solve(&a, &b).unwrap();
        let r = &a.apply(&x) - &b;
        prop_assert!(r.norm() <= 1e-12 * (a.norm_fro() * x.norm() + b.norm()));
    }

    #[test]
    fn json_round_trip_is_bit_exact((n, seed) in dims()) {
        let a = random_complex(n, seed);
        let back: CMatrix = serde_json::from_str(&to_json_string(&a).unwrap()).unwrap();
        prop_assert_eq!(a.max_abs_diff(&back), 0.0);
        let v = random_vector(n, seed);
        let w: CVector = serde_json::from_str(&to_json_string(&v).unwrap()).unwrap();
        for (p, q) in v.iter().zip(w.iter()) {
            prop_assert_eq!(p.re.to_bits(), q.re.to_bits());
            prop_assert_eq!(p.im.to_bits(), q.im.to_bits());
        }
    }

    #[test]
    fn oracle_trace_and_biorthogonality((n, seed) in dims()) {
        let a = random_complex(n, seed);
        let s = qr_spectrum(&a);
        let sum: Complex = s.eigenvalues.iter().sum();
        prop_assert!((sum - a.trace()).norm() < 1e-10 * a.norm_fro().max(1.0));
        for i in 0..n {
            for j in 0..n {
                let g = s.left_vectors[i].dot(&s.right_vectors[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((g - Complex::new(want, 0.0)).norm() < 1e-7, "<l{i}, r{j}> = {g}");
            }
        }
    }

    #[test]
    fn deflation_removes_found_components((n, seed) in (2usize..=7, any::<u64>())) {
        let a = random_complex(n, seed);
        let s = qr_spectrum(&a);
        let found: Vec<BiorthoPair> = (0..n / 2).map(|k| s.pair(k)).collect();
        let x = deflate_raw(&random_vector(n, seed), &found);
        let y = deflate_adjoint_raw(&random_vector(n, seed ^ 1), &found);
        for p in &found {
            prop_assert!(p.psi.dot(&x).norm() < 1e-8 * x.norm().max(1.0));
            prop_assert!(p.phi.dot(&y).norm() < 1e-8 * y.norm().max(1.0));
        }
    }

    #[test]
    fn eigenpairs_are_flow_equilibria((n, seed) in dims()) {
        let a = random_complex(n, seed);
        let s = qr_spectrum(&a);
        for k in 0..n {
            let p = s.pair(k);
            let (fp, fq) = coupled_rhs(&a, &FlowState::new(p.phi.clone(), p.psi.clone())).unwrap();
            let scale = a.norm_fro() * p.psi.norm().max(1.0);
            prop_assert!(fp.norm() < 1e-7 * scale && fq.norm() < 1e-7 * scale * p.psi.norm());
        }
    }

    #[test]
    fn schwartz_quotient_is_scale_invariant((n, seed) in dims(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let c = Complex::new(re, im);
        prop_assume!(c.norm() > 1e-3);
        let a = random_complex(n, seed);
        let x = random_vector(n, seed);
        let y = random_vector(n, seed ^ 7);
        prop_assume!(y.dot(&x).norm() > 1e-3);
        let g1 = schwartz_quotient(&a, &x, &y, 1e-12).unwrap();
        let g2 = schwartz_quotient(&a, &x.scale(c), &y.scale(c.conj()), 1e-12).unwrap();
        prop_assert!((g1 - g2).norm() < 1e-10 * g1.norm().max(1.0));
    }

    #[test]
    fn expm_inverse_is_expm_of_negative((n, seed) in dims()) {
        let a = random_complex(n, seed);
        let prod = expm(&a).matmul(&expm(&-&a));
        prop_assert!(prod.max_abs_diff(&CMatrix::identity(n)) < 1e-11);
    }

    #[test]
    fn hermitian_spectrum_is_real((n, seed) in dims()) {
        let s = qr_spectrum(&random_hermitian(n, seed));
        prop_assert!(s.eigenvalues.iter().all(|z| z.im.abs() < 1e-10));
    }
}

#[test]
fn power_iterate_finds_dominant_of_prescribed_spectrum() {
    for seed in 0..10u64 {
        let eigs = [
            Complex::new(2.0, 1.0),
            Complex::new(-1.0, 0.5),
            Complex::new(0.3, -0.2),
            Complex::new(0.0, 1.1),
        ];
        let a = with_spectrum(&eigs, seed).unwrap();
        let r = power_iterate(&a, &random_vector(4, seed), &SolverConfig::with_seed(seed)).unwrap();
        assert_eq!(r.status, PowerStatus::Converged);
        assert!((r.lambda().unwrap() - eigs[0]).norm() < 1e-8);
        let t = &r.trace.samples;
        assert!(t.windows(2).all(|w| w[1].t_or_iter > w[0].t_or_iter));
        let last = t.last().unwrap();
        assert!(last.residual_phi < 1e-8 && last.residual_psi < 1e-8);
    }
}
