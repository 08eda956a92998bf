use proptest::prelude::*;
use qhyp_core::classify::real_trace;
use qhyp_core::fenchel::{realize_twist, symmetric_pants_seed, TwistBend};
use qhyp_core::invariants::CPoint;
use qhyp_core::qmat::is_member;
use qhyp_core::sample::{random_element, rng};
use qhyp_core::{Group, QMatrix, Quaternion, Tolerances};

fn quat() -> impl Strategy<Value = Quaternion> {
    prop::array::uniform4(-3.0f64..3.0).prop_map(Quaternion::from)
}

fn group() -> impl Strategy<Value = Group> {
    prop_oneof![Just(Group::Sp21), Just(Group::Sp11)]
}

fn conj(s: &QMatrix, m: &QMatrix, g: Group) -> QMatrix {
    &(s * m) * &s.form_inverse(&g.form().unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quaternion_norm_is_multiplicative(p in quat(), q in quat()) {
        let lhs = (p * q).norm();
        prop_assert!((lhs - p.norm() * q.norm()).abs() <= 1e-12 * (1.0 + lhs));
    }

    #[test]
    fn conjugate_reverses_products(p in quat(), q in quat()) {
        let d = (p * q).conj() - q.conj() * p.conj();
        prop_assert!(d.norm() <= 1e-12 * (1.0 + p.norm() * q.norm()));
    }

    #[test]
    fn embedding_respects_products(seed in any::<u64>(), g in group()) {
        let mut r = rng(seed);
        let (a, b) = (random_element(&mut r, g), random_element(&mut r, g));
        let gap = ((&a * &b).complexify() - a.complexify() * b.complexify()).norm();
        prop_assert!(gap <= 1e-12 * a.frobenius() * b.frobenius());
    }

    #[test]
    fn membership_is_closed(seed in any::<u64>(), g in group()) {
        let tol = Tolerances::default();
        let mut r = rng(seed);
        let (a, b) = (random_element(&mut r, g), random_element(&mut r, g));
        prop_assert!(is_member(&(&a * &b), g, &tol).member);
        prop_assert!(is_member(&a.form_inverse(&g.form().unwrap()), g, &tol).member);
    }

    #[test]
    fn real_trace_is_a_class_function(seed in any::<u64>()) {
        let g = Group::Sp21;
        let mut r = rng(seed);
        let (a, s) = (random_element(&mut r, g), random_element(&mut r, g));
        let (t1, t2) = (real_trace(&a, g).unwrap(), real_trace(&conj(&s, &a, g), g).unwrap());
        let scale = 1.0 + t1.a().abs().max(t1.b().abs()).max(t1.c().abs());
        prop_assert!(t1.max_diff(&t2) <= 1e-7 * scale, "{}", t1.max_diff(&t2));
    }

    #[test]
    fn cpoint_is_complex_projective(q in quat(), t in -3.2f64..3.2) {
        prop_assume!(q.norm() > 1e-3);
        let p = CPoint::from_quat(q);
        let rotated = CPoint::from_quat(q * Quaternion::cis(t));
        prop_assert!(p.distance(&rotated) <= 1e-9);
        prop_assert!(p.distance(&p.canonical()) <= 1e-9);
        prop_assert!(p.times_j().times_j().distance(&p) <= 1e-9);
    }

    #[test]
    fn twists_commute_with_their_anchor(seed in 0u64..2000) {
        let tol = Tolerances::default();
        let mut r = rng(seed);
        let seed = symmetric_pants_seed(&mut r, &tol).unwrap();
        let k = realize_twist(&seed.a, &TwistBend::random(&mut r), &tol).unwrap();
        prop_assert!(is_member(&k, Group::Sp21, &tol).member);
        prop_assert!(seed.a.commutator_norm(&k) <= 1e-9 * seed.a.frobenius() * k.frobenius());
    }
}
