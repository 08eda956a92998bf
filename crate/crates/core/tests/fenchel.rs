use qhyp_core::conjugacy::{oracle_decide, oracle_decide_tuples, Verdict};
use qhyp_core::fenchel::*;
use qhyp_core::invariants::CPoint;
use qhyp_core::qmat::Group;
use qhyp_core::sample::{random_element, rng};
use qhyp_core::{QMatrix, Tolerances};

fn conj(s: &QMatrix, m: &QMatrix) -> QMatrix {
    let h = Group::Sp21.form().unwrap();
    &(s * m) * &s.form_inverse(&h)
}

fn inv(m: &QMatrix) -> QMatrix {
    m.form_inverse(&Group::Sp21.form().unwrap())
}

#[test]
fn surface_ledger_and_relator() {
    let tol = Tolerances::default();
    for g in [2usize, 3, 4] {
        let spec = compatible_surface_spec(g, &mut rng(40 + g as u64), &tol).unwrap();
        let rep = build_surface(&spec, &tol).unwrap();
        assert_eq!(rep.ledger.len(), 42 * g - 42);
        assert_eq!(rep.a.len(), g);
        assert!(rep.relator_residual <= 1e-6, "g={g} residual {}", rep.relator_residual);
        assert!(rep.assembled);
        for f in &rep.factor_residuals {
            assert!(f.residual <= 1e-6, "{} {}", f.factor, f.residual);
        }
    }
}

#[test]
fn surface_ledger_is_conjugation_invariant() {
    let tol = Tolerances::default();
    let spec = compatible_surface_spec(2, &mut rng(5), &tol).unwrap();
    let s = random_element(&mut rng(6), Group::Sp21);
    let mut moved = spec.clone();
    for p in &mut moved.pants {
        p.a = conj(&s, &p.a);
        p.b = conj(&s, &p.b);
    }
    let (r1, r2) = (build_surface(&spec, &tol).unwrap(), build_surface(&moved, &tol).unwrap());
    assert!(r1.ledger.max_diff(&r2.ledger) < 1e-6);
}

#[test]
fn attach_and_close_handle() {
    let tol = Tolerances::default();
    let mut r = rng(9);
    let seed = symmetric_pants_seed(&mut r, &tol).unwrap();
    let g1 = PantsGroup::new(seed.a.clone(), seed.b.clone(), &tol).unwrap();
    // ⟨C, A⁻¹⟩ from a conjugate of the seed with its first slot moved onto A⁻¹
    let other = random_element(&mut r, Group::Sp21);
    let c0 = conj(&other, &seed.b);
    let d0 = conj(&other, &seed.a);
    let m = gluing_conjugator(&d0, &seed.a, &tol).unwrap();
    let (c, d) = (conj(&m, &c0), conj(&m, &d0));
    assert!(d.dist(&inv(&seed.a)) < 1e-8);
    let g2 = PantsGroup::new(c, inv(&seed.a), &tol).unwrap();
    let _ = d;
    let kappa = TwistBend::random(&mut r);
    let four = attach(&g1, &g2, &kappa, &tol).unwrap();
    assert_eq!(four.ledger.len(), 42);
    assert!(four.peripheral_residual < 1e-8);
    let kappa2 = TwistBend { s: kappa.s + 0.4, ..kappa };
    let four2 = attach(&g1, &g2, &kappa2, &tol).unwrap();
    assert!(four.ledger.max_diff(&four2.ledger) > 0.1);

    // handle: ⟨A, Y⟩ with Y = B A⁻¹ B⁻¹
    let b = gluing_conjugator(&seed.a, &seed.b, &tol).unwrap();
    let pants = PantsGroup::new(seed.a.clone(), seed.b.clone(), &tol).unwrap();
    let t = close_handle(&pants, &b, &TwistBend::trivial(), &tol).unwrap();
    assert_eq!(t.ledger.len(), 21);
    assert!(t.generators[1].dist(&b) < 1e-8);
    let k1 = close_handle(&pants, &b, &kappa, &tol).unwrap();
    let k2 = close_handle(&pants, &b, &kappa2, &tol).unwrap();
    let d = oracle_decide(&k1.generators[0], &k1.generators[1], &k2.generators[0], &k2.generators[1], Group::Sp21, &tol);
    assert_eq!(d.verdict, Verdict::NotConjugate);
    let s = random_element(&mut r, Group::Sp21);
    let d = oracle_decide_tuples(
        &[(&k1.generators[0], &conj(&s, &k1.generators[0])), (&k1.generators[1], &conj(&s, &k1.generators[1]))],
        Group::Sp21,
        &tol,
    );
    assert_eq!(d.verdict, Verdict::Conjugate);
}

#[test]
fn twist_commutes_and_separates() {
    let tol = Tolerances::default();
    let mut r = rng(21);
    let seed = symmetric_pants_seed(&mut r, &tol).unwrap();
    let c = conj(&random_element(&mut r, Group::Sp21), &seed.a);
    for _ in 0..100 {
        let k = TwistBend::random(&mut r);
        let k2 = TwistBend::random(&mut r);
        let m1 = realize_twist(&seed.a, &k, &tol).unwrap();
        let m2 = realize_twist(&seed.a, &k2, &tol).unwrap();
        assert!(seed.a.commutator_norm(&m1) <= 1e-9 * seed.a.frobenius() * m1.frobenius());
        let t1 = twist_invariants(&seed.a, &seed.b, &c, &m1, &tol).unwrap();
        let t2 = twist_invariants(&seed.a, &seed.b, &c, &m2, &tol).unwrap();
        let same_pts = k.k1.distance(&k2.k1) < 1e-9 && k.k2.distance(&k2.k2) < 1e-9;
        assert!(!(t1.approx_eq(&t2, 1e-6) && same_pts));
    }
    let _ = CPoint::ZERO_SIDE;
}
