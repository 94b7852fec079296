use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ulab::group::*;
use ulab::linalg::{self, CMat};
use ulab::positive_type::*;
use ulab::ucond::CertificateStatus;
use ulab::Error;

fn grp(s: &str) -> FiniteAbelianGroup {
    s.parse().unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn character_times_psd_is_positive_type() {
    let mut r = rng(1);
    let g = grp("4,2");
    let c = linalg::random_psd(2, &mut r);
    let p = OperatorField::character_times(g, 5, c).unwrap();
    let v = check_positive_type(&p);
    assert!(v.is_positive_type, "{v:?}");
    assert_eq!(v.witness_points.len(), 8);
}

#[test]
fn delta_psd_is_positive_type() {
    let mut r = rng(2);
    let c = linalg::random_psd(3, &mut r);
    let p = OperatorField::delta(grp("5"), 0, c).unwrap();
    assert!(check_positive_type(&p).is_positive_type);
}

#[test]
fn delta_off_identity_is_not_positive_type() {
    let p = OperatorField::delta(grp("2"), 1, linalg::identity(1)).unwrap();
    let v = check_positive_type(&p);
    assert!(!v.is_positive_type);
    // eigenvalues of [[0,1],[1,0]] are -1 and 1
    assert!((v.min_eigenvalue + 1.0).abs() < 1e-14);
    assert!(matches!(naimark_dilate(&p), Err(Error::NotPositiveType { .. })));
}

#[test]
fn non_hermitian_gram_is_malformed() {
    let p = OperatorField::delta(grp("3"), 1, linalg::identity(1)).unwrap();
    assert!(!check_positive_type(&p).is_positive_type);
    assert!(matches!(naimark_dilate(&p), Err(Error::Malformed(_))));
}

#[test]
fn character_dilates_to_one_dimension() {
    let g = grp("5");
    let p = OperatorField::character_times(g.clone(), 2, linalg::identity(1)).unwrap();
    let dil = naimark_dilate(&p).unwrap();
    assert_eq!(dil.dilation_dim, 1);
    for t in 0..5 {
        let phase = dil.embedding[(0, 0)] / dil.embedding[(0, 0)].norm();
        assert!((dil.embedding[(0, 0)].norm() - 1.0).abs() < 1e-12);
        assert!((dil.rep[t][(0, 0)] - g.pairing_idx(t, 2)).norm() < 1e-12, "phase {phase}");
    }
    assert!(dil.reconstruction_residual(&p) < 1e-12);
    let sm = spectral_measure(&dil).unwrap();
    for x in 0..5 {
        let want = if x == 2 { 1.0 } else { 0.0 };
        assert!((sm.projections[x][(0, 0)] - Complex64::new(want, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn delta_identity_gives_block_translation() {
    let g = grp("3");
    let p = OperatorField::delta(g.clone(), 0, linalg::identity(2)).unwrap();
    let dil = naimark_dilate(&p).unwrap();
    assert_eq!(dil.dilation_dim, 6);
    assert!(dil.unitarity_residual() < 1e-12);
    assert!(dil.homomorphism_residual() < 1e-12);
    assert!(dil.reconstruction_residual(&p) < 1e-12);
    // rep is similar to the block translation: same traces
    for t in 0..3 {
        let want = if t == 0 { 6.0 } else { 0.0 };
        assert!((dil.rep[t].trace() - Complex64::new(want, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn regular_representation_spectral_projections() {
    // rep = regular representation of Z_3 on C^3; E({x}) is the projection onto
    // the normalized character vector conj((., x)).
    let g = grp("3");
    let rep: Vec<CMat> = (0..3)
        .map(|t| CMat::from_fn(3, 3, |i, j| if i == g.add(j, t) { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }))
        .collect();
    let sm = stone_projections(&g, &rep);
    for x in 0..3 {
        let w = CMat::from_fn(3, 1, |s, _| g.pairing_idx(s, x).conj() / 3f64.sqrt());
        let want = &w * w.adjoint();
        assert!(linalg::max_abs_diff(&sm.projections[x], &want) < 1e-14);
    }
    assert!(sm.projection_residual() < 1e-14);
    assert!(sm.orthogonality_residual() < 1e-14);
    assert!(sm.completeness_residual() < 1e-14);
    assert!(sm.stone_residual(&rep) < 1e-14);

    let ident = vec![linalg::identity(2); 3];
    let sm = stone_projections(&g, &ident);
    assert!(linalg::max_abs_diff(&sm.projections[0], &linalg::identity(2)) < 1e-15);
    assert!(linalg::max_abs(&sm.projections[1]) < 1e-15);
}

#[test]
fn dilation_and_spectral_soundness() {
    let mut r = rng(11);
    for gs in ["1", "2", "3", "2,2", "5", "3,2", "4,2", "2,2,2", "12", "6,2"] {
        let g = grp(gs);
        for d in 1..=3 {
            for _ in 0..100 {
                let p = random_positive_type(&g, d, &mut r);
                let v = check_positive_type(&p);
                assert!(v.min_eigenvalue >= -1e-10, "{gs} d={d}: {}", v.min_eigenvalue);
                let a = Analysis::new(p).unwrap();
                assert!(a.dilation.dilation_dim <= g.order() * d);
                assert!(a.dilation.unitarity_residual() <= 1e-10);
                assert!(a.dilation.homomorphism_residual() <= 1e-10);
                let rr = a.dilation.reconstruction_residual(&a.p);
                assert!(rr <= 1e-8, "{gs} d={d} residual {rr} dim {} cutoff {}", a.dilation.dilation_dim, a.dilation.cutoff);
                assert!(a.measure.projection_residual() <= 1e-10);
                assert!(a.measure.orthogonality_residual() <= 1e-10);
                assert!(a.measure.completeness_residual() <= 1e-10);
                assert!(a.measure.stone_residual(&a.dilation.rep) <= 1e-10);
            }
        }
    }
}

#[test]
fn babalu_examples() {
    let mut r = rng(5);
    let g = grp("4");
    let p = random_positive_type(&g, 2, &mut r);
    let a = Analysis::new(p.clone()).unwrap();
    let xi = linalg::random_vector(2, &mut r);
    let eta = linalg::random_vector(2, &mut r);

    let mut delta = vec![Complex64::new(0.0, 0.0); 4];
    delta[0] = Complex64::new(1.0, 0.0);
    let c = a.babalu_check(&delta, &xi, &eta).unwrap();
    assert!((c.lhs - linalg::inner(&(p.get(0) * &xi), &eta)).norm() < 1e-12);
    assert!(c.abs_err < 1e-10);

    let zero = vec![Complex64::new(0.0, 0.0); 4];
    let c = a.babalu_check(&zero, &xi, &eta).unwrap();
    assert_eq!(c.abs_err, 0.0);

    for _ in 0..20 {
        let gv: Vec<Complex64> = (0..4).map(|_| linalg::random_complex(&mut r)).collect();
        let xi = linalg::random_vector(2, &mut r);
        let eta = linalg::random_vector(2, &mut r);
        let c = a.babalu_check(&gv, &xi, &eta).unwrap();
        // independent lhs: sum over t of g(t) eta* p(t) xi
        let lhs: Complex64 = (0..4).map(|t| gv[t] * (eta.adjoint() * p.get(t) * &xi)[(0, 0)]).sum();
        assert!((c.lhs - lhs).norm() < 1e-12);
        assert!(c.abs_err <= 1e-9);
    }
}

#[test]
fn equal_measures_examples() {
    let g = grp("3");
    let p = OperatorField::character_times(g.clone(), 1, linalg::identity(1)).unwrap();
    let a = Analysis::new(p).unwrap();
    let xi = CMat::from_element(1, 1, Complex64::new(0.5, 1.0));
    let eta = CMat::from_element(1, 1, Complex64::new(-1.0, 0.25));
    assert!(a.equal_measures_check(&xi, &eta).unwrap() < 1e-12);
    assert_eq!(a.equal_measures_check(&linalg::zeros(1, 1), &eta).unwrap(), 0.0);

    let mut r = rng(9);
    let g = grp("3,2");
    for _ in 0..50 {
        let a = Analysis::new(random_positive_type(&g, 2, &mut r)).unwrap();
        let xi = linalg::random_vector(2, &mut r);
        let eta = linalg::random_vector(2, &mut r);
        assert!(a.equal_measures_check(&xi, &eta).unwrap() <= 1e-9);
    }
    assert!(matches!(a.equal_measures_check(&linalg::zeros(3, 1), &eta), Err(Error::ShapeMismatch(_))));
}

#[test]
fn combined_exhaustive_small_groups() {
    let mut r = rng(13);
    for gs in ["2,2", "3", "4,2", "2,2,2"] {
        let g = grp(gs);
        let n = g.order();
        let a = Analysis::new(random_positive_type(&g, 2, &mut r)).unwrap();
        for t in 0..n {
            for mask in 0u32..(1 << n) {
                let set: Vec<usize> = (0..n).filter(|x| mask & (1 << x) != 0).collect();
                let c = a.combined_check(t, &set);
                assert!(c.abs_err <= 1e-9, "{gs} t={t} L={set:?}: {}", c.abs_err);
                assert!(c.ordering_err <= 1e-12);
                if set.is_empty() {
                    assert_eq!(linalg::max_abs(&c.lhs), 0.0);
                }
                if set.len() == n {
                    assert!(linalg::max_abs_diff(&c.lhs, a.p.get(t)) < 1e-12);
                    let inv = inversion_check(&a.p, t).unwrap();
                    assert!(linalg::max_abs_diff(&c.lhs, &inv.value) < 1e-12);
                }
            }
        }
    }
}

#[test]
fn wrong_orientation_would_be_detected() {
    // Using E(L) instead of E(-L) fails on some subset: the exhaustive test
    // has teeth.
    let mut r = rng(17);
    let g = grp("3");
    let a = Analysis::new(random_positive_type(&g, 1, &mut r)).unwrap();
    let set = vec![1usize];
    let good = a.combined_check(0, &set);
    let v = &a.dilation.embedding;
    let wrong = v.adjoint() * a.measure.of_set(&set) * &a.dilation.rep[0] * v;
    assert!(good.abs_err < 1e-9);
    assert!(linalg::max_abs_diff(&good.lhs, &wrong) > 1e-6);
}

#[test]
fn inversion_examples() {
    let g = grp("4");
    let p = OperatorField::delta(g.clone(), 0, linalg::identity(2)).unwrap();
    for t in 0..4 {
        let out = inversion_check(&p, t).unwrap();
        assert_eq!(out.certificate.status, CertificateStatus::Exact);
        assert_eq!(out.certificate.epsilon, 0.0);
        let want = if t == 0 { linalg::identity(2) } else { linalg::zeros(2, 2) };
        assert!(linalg::max_abs_diff(&out.value, &want) < 1e-15);
    }

    let mut r = rng(4);
    let c = linalg::random_psd(2, &mut r);
    let p = OperatorField::character_times(g, 3, c).unwrap();
    for t in 0..4 {
        assert!(inversion_check(&p, t).unwrap().abs_err < 1e-14);
    }

    let g5 = grp("5");
    for _ in 0..20 {
        let p = random_positive_type(&g5, 3, &mut r);
        for t in 0..5 {
            assert!(inversion_check(&p, t).unwrap().abs_err <= 1e-10);
        }
    }

    let bad = OperatorField::delta(grp("2"), 1, linalg::identity(1)).unwrap();
    assert!(matches!(inversion_check(&bad, 0), Err(Error::NotPositiveType { .. })));
}

#[test]
fn completeness_is_the_finite_lemma() {
    let mut r = rng(21);
    let g = grp("2,2");
    let a = Analysis::new(random_positive_type(&g, 2, &mut r)).unwrap();
    let all: Vec<usize> = (0..4).collect();
    let ev = a.measure.of_set(&all) * &a.dilation.embedding;
    assert!(linalg::max_abs_diff(&ev, &a.dilation.embedding) < 1e-12);
}
