use krein::circlefn::CircleFunction;
use krein::doi::{
    direct_difference, divided_difference_on_spectra, dkbs_difference, doi_compute, trace_norm,
};
use krein::multiplier::schur_norm;
use krein::spectra::{
    c, cis, decompose_hermitian, decompose_unitary, matrix_function, path_point, random_complex,
    random_haar_unitary, random_hermitian, random_instance, HermitianMatrix, UnitaryMatrix, DEFAULT_GAP_TOL,
};
use krein::ssf::{build_ssf, krein_rhs, track_eigenphases, verify_trace_formula, TrackingPolicy};
use proptest::prelude::*;

#[test]
fn decompose_reconstruct_200_instances() {
    let mut worst: f64 = 0.0;
    for k in 0..200u64 {
        let n = 2 + (k % 31) as usize;
        let u = random_haar_unitary(n, 1000 + k).unwrap();
        let d = decompose_unitary(&u, DEFAULT_GAP_TOL).unwrap();
        worst = worst.max((d.reconstruct() - u.matrix()).norm() / u.matrix().norm());
        let a = random_hermitian(n, 1 + (k as usize % n), 2.0, 2000 + k).unwrap();
        let da = decompose_hermitian(&a, DEFAULT_GAP_TOL).unwrap();
        worst = worst.max((da.reconstruct() - a.matrix()).norm() / a.matrix().norm());
    }
    assert!(worst <= 1e-9, "worst relative reconstruction error {worst:e}");
}

#[test]
fn powers_match_repeated_products() {
    for k in 1..=6 {
        let u = random_haar_unitary(9, 40 + k as u64).unwrap();
        let d = decompose_unitary(&u, DEFAULT_GAP_TOL).unwrap();
        let f = matrix_function(&d, &CircleFunction::monomial(k)).unwrap();
        let mut p = u.matrix().clone();
        for _ in 1..k {
            p = &p * u.matrix();
        }
        assert!((f - p).norm() <= 1e-9 * k as f64);
    }
}

#[test]
fn path_points_are_unitary_and_compose() {
    let (u, a) = random_instance(7, 3, 2.0, 5).unwrap();
    for s in [-1.0, 0.0, 0.3, 0.6, 1.0, 4.0] {
        path_point(&u, &a, s).unwrap();
    }
    assert_eq!(path_point(&u, &HermitianMatrix::zeros(7), 0.7).unwrap().matrix(), u.matrix());
    let two_steps = path_point(&path_point(&u, &a, 0.3).unwrap(), &a, 0.3).unwrap();
    assert!((two_steps.matrix() - path_point(&u, &a, 0.6).unwrap().matrix()).norm() <= 1e-10);
}

#[test]
fn dkbs_up_to_dimension_32() {
    for (k, n) in [4usize, 12, 20, 32].into_iter().enumerate() {
        let (u, a) = random_instance(n, 3, 1.0, 70 + k as u64).unwrap();
        let v = path_point(&u, &a, 1.0).unwrap();
        let f = CircleFunction::random_trig(8, 70 + k as u64);
        let err = (dkbs_difference(&f, &u, &v).unwrap() - direct_difference(&f, &u, &v).unwrap()).norm();
        let scale = matrix_function(&decompose_unitary(&u, DEFAULT_GAP_TOL).unwrap(), &f).unwrap().norm();
        assert!(err <= 1e-9 * (1.0 + scale), "n = {n}: {err:e}");
    }
}

#[test]
fn dkbs_with_repeated_eigenvalues() {
    // U has a threefold eigenvalue; V differs by a rank-one rotation.
    let u = UnitaryMatrix::from_phases(&[0.4, 0.4, 0.4, 2.0, -1.0]);
    let a = random_hermitian(5, 1, 1.0, 3).unwrap();
    let v = path_point(&u, &a, 1.0).unwrap();
    let f = CircleFunction::random_trig(6, 9);
    let err = (dkbs_difference(&f, &u, &v).unwrap() - direct_difference(&f, &u, &v).unwrap()).norm();
    assert!(err <= 1e-10, "{err:e}");
}

#[test]
fn transformer_bound_100_instances() {
    for k in 0..100u64 {
        let n = 2 + (k % 4) as usize;
        let (u, a) = random_instance(n, 1 + (k % 2) as usize, 1.0, 3000 + k).unwrap();
        let v = path_point(&u, &a, 1.0).unwrap();
        let f = CircleFunction::random_trig(1 + (k % 6) as usize, 3000 + k);
        let du = decompose_unitary(&u, DEFAULT_GAP_TOL).unwrap();
        let dv = decompose_unitary(&v, DEFAULT_GAP_TOL).unwrap();
        let phi = divided_difference_on_spectra(&f, &du, &dv).unwrap();
        let t = random_complex(n, n, 4000 + k);
        let lhs = trace_norm(&doi_compute(&phi, &du, &t, &dv).unwrap()).unwrap();
        let bound = schur_norm(&phi, 1e-3).unwrap().value * trace_norm(&t).unwrap();
        assert!(lhs <= bound + 1e-8, "instance {k}: {lhs} > {bound}");
    }
}

#[test]
fn ssf_exact_crossing_of_commuting_branches() {
    // Branches cross each other head on; any matching at the crossing
    // gives the same function.
    let u = UnitaryMatrix::from_phases(&[0.0, 1.0, 2.5]);
    let a = HermitianMatrix::from_real_diagonal(&[2.0, -2.0, 0.5]);
    let r = verify_trace_formula(&CircleFunction::random_trig(7, 1), &u, &a).unwrap();
    assert!(r.rel_error <= 1e-12, "{r:?}");
}

#[test]
fn ssf_from_degenerate_start() {
    let u = UnitaryMatrix::from_phases(&[1.0, 1.0, 1.0, -2.0]);
    let a = random_hermitian(4, 2, 1.5, 8).unwrap();
    let r = verify_trace_formula(&CircleFunction::random_trig(5, 2), &u, &a).unwrap();
    assert!(r.rel_error <= 1e-9, "{r:?}");
}

#[test]
fn ssf_full_winding() {
    // exp(2πi) returns to the start: lhs vanishes, and so must the formula.
    let u = random_haar_unitary(3, 4).unwrap();
    let a = HermitianMatrix::from_real_diagonal(&[std::f64::consts::TAU, 0.0, 0.0]);
    let rot = random_haar_unitary(3, 5).unwrap();
    let a = HermitianMatrix::new(rot.matrix() * a.matrix() * rot.matrix().adjoint()).unwrap();
    let r = verify_trace_formula(&CircleFunction::random_trig(4, 3), &u, &a).unwrap();
    assert!(r.lhs.norm() < 1e-12 && r.abs_error < 1e-10, "{r:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trace_formula_exact_on_polynomials(
        n in 2usize..10,
        rank in 1usize..4,
        degree in 0usize..=10,
        bound in 0.2f64..3.0,
        seed in 0u64..10_000,
    ) {
        let (u, a) = random_instance(n, rank.min(n), bound, seed).unwrap();
        let f = CircleFunction::random_trig(degree, seed + 1);
        let braid = track_eigenphases(&u, &a, &TrackingPolicy::default()).unwrap();
        let v = path_point(&u, &a, 1.0).unwrap();
        prop_assert!(braid.endpoint_defect(&v).unwrap() <= 1e-8);
        let xi = build_ssf(&braid).unwrap();
        prop_assert!(xi.mean().abs() <= 1e-10);
        for r in xi.raw_values() {
            prop_assert!((r - r.round()).abs() <= 1e-9);
        }
        let r = verify_trace_formula(&f, &u, &a).unwrap();
        prop_assert!(r.abs_error <= 1e-7 * (1.0 + r.lhs.norm()), "{:?}", r);
        prop_assert!((krein_rhs(&xi, &f) - r.rhs).norm() == 0.0);
    }

    #[test]
    fn rotation_leaves_ssf_formula_consistent(seed in 0u64..1000, t in 0.0f64..6.3) {
        let (u, a) = random_instance(5, 2, 1.0, seed).unwrap();
        let f = CircleFunction::random_trig(4, seed);
        let zu = u.rotated(cis(t)).unwrap();
        let lhs_rotated = verify_trace_formula(&f, &zu, &a).unwrap();
        let direct = verify_trace_formula(&f.rotated(cis(t)).unwrap(), &u, &a).unwrap();
        prop_assert!((lhs_rotated.lhs - direct.lhs).norm() <= 1e-10);
        prop_assert!((lhs_rotated.rhs - direct.rhs).norm() <= 1e-7);
    }
}

#[test]
fn trace_formula_sign_oracle() {
    // f(z) = z: trace(U − V) for V = e^{iA}U, compared with the hand value.
    let u = UnitaryMatrix::from_phases(&[0.0, std::f64::consts::FRAC_PI_2]);
    let a = HermitianMatrix::from_real_diagonal(&[0.5, 0.0]);
    let r = verify_trace_formula(&CircleFunction::monomial(1), &u, &a).unwrap();
    let want = c(1.0, 0.0) - cis(0.5);
    assert!((r.lhs - want).norm() < 1e-15 && (r.rhs - want).norm() < 1e-14);
}
