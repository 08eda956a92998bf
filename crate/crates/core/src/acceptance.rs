//! The twelve acceptance criteria as library functions, shared by the
//! integration test and `qhyp selftest`.

use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{hyperbolic_type, real_trace, real_trace_with_residual, trace_from_params, HypTag};
use crate::conjugacy::{
    oracle_decide, oracle_decide_tuples, pairs_conjugate_gl2, pairs_conjugate_sp11, pairs_conjugate_sp21,
    quad_map_sp11, ConjDecision, Verdict,
};
use crate::error::Result;
use crate::fenchel::{
    attach, build_surface, close_handle, compatible_surface_spec, gluing_conjugator, symmetric_pants_seed,
    PantsGroup, TwistBend,
};
use crate::invariants::{angular, cross_ratio, CrossRatioClass, pair_invariants, platis_residuals, projective_point};
use crate::model::{infinity, origin, proj_distance};
use crate::qmat::{right_eigen, Group, QMatrix, QVec};
use crate::quat::Quaternion;
use crate::sample::{
    heisenberg, imaginary_in_box, params_of_type, qmatrix_in_box, quat_in_box, random_element, random_of_type, rng,
    SeededRng, TypeRequest,
};
use crate::tol::Tolerances;

/// Signature of an angular-invariant implementation, so a faulty one can be
/// injected.
pub type AngularFn = fn(&[Quaternion], &[Quaternion], &[Quaternion]) -> Result<f64>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AcceptanceConfig {
    pub seed: u64,
    /// Batch size for the 10³ criteria.
    pub large: usize,
    /// Batch size for the 10² criteria.
    pub small: usize,
    #[serde(skip, default = "default_angular")]
    pub angular: AngularFn,
}

fn default_angular() -> AngularFn {
    angular
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        AcceptanceConfig { seed: 2024, large: 1000, small: 100, angular }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the criterion's metric.
    pub worst: Option<f64>,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2}. {} ({:.2}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

struct Outcome {
    passed: bool,
    worst: Option<f64>,
    detail: String,
}

fn timed(id: u8, name: &str, f: impl FnOnce() -> Outcome) -> CriterionReport {
    let t = Instant::now();
    let o = f();
    CriterionReport { id, name: name.into(), passed: o.passed, worst: o.worst, detail: o.detail, seconds: t.elapsed().as_secs_f64() }
}

fn stream(cfg: &AcceptanceConfig, id: u8) -> SeededRng {
    rng(cfg.seed.wrapping_mul(1000).wrapping_add(id as u64))
}

fn conj(s: &QMatrix, m: &QMatrix) -> QMatrix {
    &(s * m) * &s.try_inverse().expect("invertible")
}

pub fn embedding_homomorphism(cfg: &AcceptanceConfig) -> CriterionReport {
    let t0 = Instant::now();
    let mut r = stream(cfg, 1);
    let mut worst = 0.0f64;
    for _ in 0..cfg.large {
        let a = qmatrix_in_box(&mut r, 3, 2.0);
        let b = qmatrix_in_box(&mut r, 3, 2.0);
        let lhs = (&a * &b).complexify();
        let rhs = a.complexify() * b.complexify();
        worst = worst.max((lhs - rhs).norm() / (a.frobenius() * b.frobenius()));
    }
    let secs = t0.elapsed().as_secs_f64();
    let mut rep = timed(1, "embedding homomorphism", || Outcome {
        passed: worst <= 1e-12 && secs < 1.0,
        worst: Some(worst),
        detail: format!("max ‖(AB)_C − A_C B_C‖/(‖A‖‖B‖) = {worst:.2e} over {} pairs in {secs:.3}s", cfg.large),
    });
    rep.seconds = secs;
    rep
}

pub fn group_membership(cfg: &AcceptanceConfig) -> CriterionReport {
    let t0 = Instant::now();
    let mut r = stream(cfg, 2);
    let mut worst = 0.0f64;
    let kinds = [TypeRequest::Loxodromic, TypeRequest::OneRealEig, TypeRequest::TwoRealEig, TypeRequest::StrictlyHyperbolic];
    for i in 0..cfg.large {
        for g in [Group::Sp21, Group::Sp11] {
            let a = if i % 2 == 0 { random_element(&mut r, g) } else { random_of_type(&mut r, g, kinds[i / 2 % 4]) };
            let h = g.form().expect("form").matrix;
            worst = worst.max((&(&a.adjoint() * &h) * &a).dist(&h));
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    let mut rep = timed(2, "group membership", || Outcome {
        passed: worst <= 1e-9 && secs < 1.0,
        worst: Some(worst),
        detail: format!("max ‖A*HA − H‖ = {worst:.2e} over {} elements in {secs:.3}s", 2 * cfg.large),
    });
    rep.seconds = secs;
    rep
}

pub fn trace_palindromicity(cfg: &AcceptanceConfig) -> CriterionReport {
    timed(3, "real-trace palindromicity", || {
        let mut r = stream(cfg, 3);
        let mut worst = 0.0f64;
        let mut errors = 0;
        for i in 0..cfg.large {
            let g = if i % 2 == 0 { Group::Sp21 } else { Group::Sp11 };
            match real_trace_with_residual(&random_element(&mut r, g), g) {
                Ok((_, res)) => worst = worst.max(res.imag).max(res.mirror),
                Err(_) => errors += 1,
            }
        }
        Outcome {
            passed: worst <= 1e-9 && errors == 0,
            worst: Some(worst),
            detail: format!("max imaginary/mirror residue {worst:.2e}, {errors} failures over {}", cfg.large),
        }
    })
}

/// Type read off the eigenvalue classes directly.
fn spectral_tag(a: &QMatrix, tol: &Tolerances) -> Option<HypTag> {
    let eig = right_eigen(a, tol).ok()?;
    let mut off = Vec::new();
    let mut unit = Vec::new();
    for d in &eig {
        for _ in 0..d.mult {
            if (d.cls.modulus - 1.0).abs() > 1e-6 {
                off.push(d.cls.is_real(1e-6));
            } else {
                unit.push(d.cls.is_real(1e-6));
            }
        }
    }
    if off.len() != 2 || unit.len() != 1 {
        return None;
    }
    Some(match (off[0], unit[0]) {
        (false, false) => HypTag::Loxodromic,
        (false, true) => HypTag::OneRealEig,
        (true, false) => HypTag::TwoRealEig,
        (true, true) => HypTag::StrictlyHyperbolic,
    })
}

fn requested_tag(t: TypeRequest) -> HypTag {
    match t {
        TypeRequest::Loxodromic => HypTag::Loxodromic,
        TypeRequest::OneRealEig => HypTag::OneRealEig,
        TypeRequest::TwoRealEig => HypTag::TwoRealEig,
        TypeRequest::StrictlyHyperbolic => HypTag::StrictlyHyperbolic,
    }
}

pub fn closed_forms(cfg: &AcceptanceConfig) -> CriterionReport {
    timed(4, "closed forms and types", || {
        let tol = Tolerances::default();
        let mut r = stream(cfg, 4);
        let kinds = [TypeRequest::Loxodromic, TypeRequest::OneRealEig, TypeRequest::TwoRealEig, TypeRequest::StrictlyHyperbolic];
        let mut worst = 0.0f64;
        let mut disagree = 0;
        for i in 0..cfg.large {
            let kind = kinds[i % 4];
            let (rr, th, ph) = if i % 8 < 4 {
                (r.gen_range(0.05..0.95), r.gen_range(0.0..std::f64::consts::PI), r.gen_range(0.0..std::f64::consts::PI))
            } else {
                params_of_type(&mut r, kind)
            };
            let e = QMatrix::e_sp21(rr, th, ph);
            let closed = trace_from_params(rr, th, ph);
            match real_trace(&e, Group::Sp21) {
                Ok(t) => {
                    for k in 0..3 {
                        worst = worst.max((t.coeffs[k] - closed[k]).abs());
                    }
                }
                Err(_) => worst = f64::INFINITY,
            }
            if i % 8 >= 4 {
                let s = random_element(&mut r, Group::Sp21);
                let a = conj(&s, &e);
                let from_trace = real_trace(&a, Group::Sp21).map(|t| hyperbolic_type(&t, &tol).tag).ok();
                let spectral = spectral_tag(&a, &tol);
                if from_trace != Some(requested_tag(kind)) || spectral != from_trace {
                    disagree += 1;
                }
            }
        }
        Outcome {
            passed: worst <= 1e-9 && disagree == 0,
            worst: Some(worst),
            detail: format!("max closed-form gap {worst:.2e}; {disagree} type disagreements (incl. boundary types)"),
        }
    })
}

fn loxodromic_pair(r: &mut SeededRng, g: Group) -> (QMatrix, QMatrix) {
    (random_of_type(r, g, TypeRequest::Loxodromic), random_of_type(r, g, TypeRequest::Loxodromic))
}

pub fn conjugation_invariance(cfg: &AcceptanceConfig) -> CriterionReport {
    timed(5, "conjugation invariance", || {
        let tol = Tolerances::default();
        let mut r = stream(cfg, 5);
        let (mut done, mut skipped, mut bad) = (0, 0, Vec::new());
        while done < cfg.large {
            let (a, b) = loxodromic_pair(&mut r, Group::Sp21);
            let Ok(p) = pair_invariants(&a, &b, &tol) else {
                skipped += 1;
                continue;
            };
            let s = random_element(&mut r, Group::Sp21);
            match pair_invariants(&conj(&s, &a), &conj(&s, &b), &tol) {
                Ok(q) => {
                    if let Some(m) = p.first_mismatch(&q, &tol) {
                        bad.push(format!("{m:?}"));
                    }
                }
                Err(e) => bad.push(e.to_string()),
            }
            done += 1;
        }
        Outcome {
            passed: bad.is_empty(),
            worst: None,
            detail: format!("{} mismatches over {done} pairs ({skipped} reducible draws skipped){}", bad.len(), first(&bad)),
        }
    })
}

fn first(v: &[String]) -> String {
    v.first().map(|s| format!("; first: {s}")).unwrap_or_default()
}

fn boundary_point(r: &mut SeededRng) -> QVec {
    heisenberg(quat_in_box(r, 1.5), imaginary_in_box(r, 1.5)).column(2)
}

pub fn platis_relations(cfg: &AcceptanceConfig) -> CriterionReport {
    timed(6, "Platis relations", || {
        let mut r = stream(cfg, 6);
        let mut worst = 0.0f64;
        let mut errors = 0;
        for _ in 0..cfg.large {
            let z: Vec<QVec> = (0..4).map(|_| boundary_point(&mut r)).collect();
            match platis_residuals([&z[0], &z[1], &z[2], &z[3]]) {
                Ok((a, b)) => worst = worst.max(a).max(b),
                Err(_) => errors += 1,
            }
        }
        Outcome {
            passed: worst <= 1e-8 && errors == 0,
            worst: Some(worst),
            detail: format!("max residual {worst:.2e}, {errors} degenerate draws over {}", cfg.large),
        }
    })
}

pub fn angular_extremes(cfg: &AcceptanceConfig) -> CriterionReport {
    timed(7, "angular extremes", || {
        let mut r = stream(cfg, 7);
        let f = cfg.angular;
        let (mut real_worst, mut line_worst) = (0.0f64, 0.0f64);
        let q = Quaternion::real;
        for _ in 0..cfg.small {
            let s = random_element(&mut r, Group::Sp21);
            // totally real: real Heisenberg points
            let pts: Vec<QVec> = (0..3)
                .map(|_| {
                    let x: f64 = r.gen_range(-2.0..2.0);
                    s.mul_vec(&[q(-x * x / 2.0), q(x), q(1.0)])
                })
                .collect();
            real_worst = real_worst.max(f(&pts[0], &pts[1], &pts[2]).unwrap_or(f64::INFINITY));
            // ℍ-line: o, ∞ and a boundary point of the line through them
            let v = imaginary_in_box(&mut r, 2.0);
            let line = [origin(3), infinity(3), vec![v, Quaternion::ZERO, Quaternion::ONE]];
            let pts: Vec<QVec> = line.iter().map(|z| s.mul_vec(z)).collect();
            line_worst = line_worst.max((f(&pts[0], &pts[1], &pts[2]).unwrap_or(f64::INFINITY) - FRAC_PI_2).abs());
        }
        Outcome {
            passed: real_worst <= 1e-9 && line_worst <= 1e-9,
            worst: Some(real_worst.max(line_worst)),
            detail: format!("totally real max A = {real_worst:.2e}; H-line max |A − π/2| = {line_worst:.2e}"),
        }
    })
}

type Decider = fn(&QMatrix, &QMatrix, &QMatrix, &QMatrix, &Tolerances) -> Result<ConjDecision>;

struct BatchStats {
    conj_fail: usize,
    worst_residual: f64,
    nonconj_fail: usize,
    disagree: usize,
    errors: usize,
}

fn group_pair(r: &mut SeededRng, g: Group) -> (QMatrix, QMatrix) {
    loxodromic_pair(r, g)
}

fn perturbed(r: &mut SeededRng, g: Group, a: &QMatrix, b: &QMatrix, k: usize) -> (QMatrix, QMatrix) {
    match k % 3 {
        // same traces, moved relative position
        0 => {
            let p = random_element(r, g);
            (a.clone(), conj(&p, b))
        }
        // unrelated pair
        1 => group_pair(r, g),
        // nearby but different trace
        _ => {
            let n = a.n();
            let eps = match g {
                Group::Gl2h => &QMatrix::identity(n) + &qmatrix_in_box(r, n, 1e-3),
                _ => heisenberg_like(r, n),
            };
            (a.clone(), &eps * b)
        }
    }
}

fn heisenberg_like(r: &mut SeededRng, n: usize) -> QMatrix {
    if n == 3 {
        heisenberg(quat_in_box(r, 1e-3), imaginary_in_box(r, 1e-3))
    } else {
        crate::sample::translation_sp11(imaginary_in_box(r, 1e-3))
    }
}

fn run_batch(cfg: &AcceptanceConfig, r: &mut SeededRng, g: Group, decide: Decider, tol: &Tolerances) -> BatchStats {
    let mut st = BatchStats { conj_fail: 0, worst_residual: 0.0, nonconj_fail: 0, disagree: 0, errors: 0 };
    for _ in 0..cfg.large {
        let (a, b) = group_pair(r, g);
        let s = random_element(r, g);
        match decide(&a, &b, &conj(&s, &a), &conj(&s, &b), tol) {
            Ok(d) if d.verdict == Verdict::Conjugate => {
                st.worst_residual = st.worst_residual.max(d.residual.unwrap_or(f64::INFINITY));
                if d.residual.map_or(true, |x| x > 1e-6) {
                    st.conj_fail += 1;
                }
            }
            Ok(_) => st.conj_fail += 1,
            Err(_) => st.errors += 1,
        }
    }
    for k in 0..cfg.large {
        let (a, b) = group_pair(r, g);
        let (a2, b2) = perturbed(r, g, &a, &b, k);
        match decide(&a, &b, &a2, &b2, tol) {
            Ok(d) if d.verdict == Verdict::NotConjugate => {}
            Ok(_) => st.nonconj_fail += 1,
            Err(_) => st.errors += 1,
        }
    }
    for k in 0..cfg.large {
        let (a, b) = group_pair(r, g);
        let (a2, b2) = if k % 2 == 0 {
            let s = random_element(r, g);
            (conj(&s, &a), conj(&s, &b))
        } else {
            perturbed(r, g, &a, &b, k / 2)
        };
        let oracle = oracle_decide(&a, &b, &a2, &b2, g, tol);
        match decide(&a, &b, &a2, &b2, tol) {
            Ok(d) if d.verdict == oracle.verdict => {}
            Ok(_) => st.disagree += 1,
            Err(_) => st.errors += 1,
        }
    }
    st
}

pub fn conjugacy_decisions(cfg: &AcceptanceConfig) -> CriterionReport {
    timed(8, "conjugacy soundness and completeness", || {
        let tol = Tolerances::default();
        let mut r = stream(cfg, 8);
        let mut passed = true;
        let mut parts = Vec::new();
        let mut worst = 0.0f64;
        let suites: [(Group, Decider); 3] =
            [(Group::Sp21, pairs_conjugate_sp21), (Group::Sp11, pairs_conjugate_sp11), (Group::Gl2h, pairs_conjugate_gl2)];
        for (g, decide) in suites {
            let st = run_batch(cfg, &mut r, g, decide, &tol);
            let ok = st.conj_fail == 0 && st.nonconj_fail == 0 && st.disagree == 0 && st.errors == 0;
            passed &= ok;
            worst = worst.max(st.worst_residual);
            parts.push(format!(
                "{}: conj-miss {} (max res {:.1e}), nonconj-miss {}, oracle disagreements {}, errors {}",
                g.name(),
                st.conj_fail,
                st.worst_residual,
                st.nonconj_fail,
                st.disagree,
                st.errors
            ));
        }
        Outcome { passed, worst: Some(worst), detail: parts.join("; ") }
    })
}

fn sp11_boundary_point(r: &mut SeededRng) -> QVec {
    vec![imaginary_in_box(r, 2.0), Quaternion::ONE]
}

fn right_scaled(z: &[Quaternion], q: Quaternion) -> QVec {
    z.iter().map(|x| *x * q).collect()
}

pub fn quadruple_construction(cfg: &AcceptanceConfig) -> CriterionReport {
    timed(9, "quadruple construction", || {
        let tol = Tolerances::default();
        let mut r = stream(cfg, 9);
        let mut worst = 0.0f64;
        let (mut missed, mut spurious, mut skipped) = (0, 0, 0);
        for _ in 0..cfg.small {
            let z: Vec<QVec> = (0..4).map(|_| sp11_boundary_point(&mut r)).collect();
            let h = random_element(&mut r, Group::Sp11);
            let w: Vec<QVec> = z.iter().map(|p| right_scaled(&h.mul_vec(p), quat_in_box(&mut r, 1.0) + Quaternion::ONE)).collect();
            let m = quad_map_sp11([&z[0], &z[1], &z[2], &z[3]], [&w[0], &w[1], &w[2], &w[3]], &tol);
            match m.h {
                Some(hh) => {
                    for k in 0..4 {
                        worst = worst.max(proj_distance(&w[k], &hh.mul_vec(&z[k])));
                    }
                }
                None => missed += 1,
            }
            // move the fourth point off the cross-ratio class
            let mut w2 = w.clone();
            w2[3] = h.mul_vec(&sp11_boundary_point(&mut r));
            let x = cross_ratio(&z[0], &z[1], &z[2], &z[3]);
            let y = cross_ratio(&w2[0], &w2[1], &w2[2], &w2[3]);
            match (x, y) {
                (Ok(x), Ok(y)) if CrossRatioClass::of(x).sim().distance(&CrossRatioClass::of(y).sim()) > 1e-4 => {
                    if quad_map_sp11([&z[0], &z[1], &z[2], &z[3]], [&w2[0], &w2[1], &w2[2], &w2[3]], &tol).h.is_some() {
                        spurious += 1;
                    }
                }
                _ => skipped += 1,
            }
        }
        Outcome {
            passed: worst <= 1e-8 && missed == 0 && spurious == 0,
            worst: Some(worst),
            detail: format!(
                "max image distance {worst:.2e}; {missed} missed maps, {spurious} maps for mismatched quadruples ({skipped} near-equal draws skipped)"
            ),
        }
    })
}

pub fn ledger_arithmetic(cfg: &AcceptanceConfig) -> CriterionReport {
    timed(10, "ledger arithmetic", || {
        let tol = Tolerances::default();
        let mut r = stream(cfg, 10);
        let mut run = || -> Result<(usize, usize, Vec<(usize, usize)>)> {
            let seed = symmetric_pants_seed(&mut r, &tol)?;
            let h = Group::Sp21.form().expect("form");
            let g1 = PantsGroup::new(seed.a.clone(), seed.b.clone(), &tol)?;
            let s = random_element(&mut r, Group::Sp21);
            let (c0, d0) = (conj(&s, &seed.b), conj(&s, &seed.a));
            let m = gluing_conjugator(&d0, &seed.a, &tol)?;
            let g2 = PantsGroup::new(conj(&m, &c0), seed.a.form_inverse(&h), &tol)?;
            let kappa = TwistBend::random(&mut r);
            let four = attach(&g1, &g2, &kappa, &tol)?;
            let b = gluing_conjugator(&seed.a, &seed.b, &tol)?;
            let one = close_handle(&g1, &b, &kappa, &tol)?;
            let mut surf = Vec::new();
            for g in [2usize, 3, 4] {
                let spec = compatible_surface_spec(g, &mut r, &tol)?;
                surf.push((g, build_surface(&spec, &tol)?.ledger.len()));
            }
            Ok((four.ledger.len(), one.ledger.len(), surf))
        };
        match run() {
            Ok((a, c, surf)) => {
                let ok = a == 42 && c == 21 && surf.iter().all(|(g, n)| *n == 42 * g - 42);
                Outcome {
                    passed: ok,
                    worst: None,
                    detail: format!(
                        "attach {a}, close_handle {c}, surfaces {}",
                        surf.iter().map(|(g, n)| format!("g={g}: {n}")).collect::<Vec<_>>().join(", ")
                    ),
                }
            }
            Err(e) => Outcome { passed: false, worst: None, detail: format!("error: {e}") },
        }
    })
}

pub fn surface_assembly(cfg: &AcceptanceConfig) -> CriterionReport {
    timed(11, "surface assembly", || {
        let tol = Tolerances::default();
        let mut r = stream(cfg, 11);
        let mut run = || -> Result<Outcome> {
            let spec = compatible_surface_spec(2, &mut r, &tol)?;
            let rep = build_surface(&spec, &tol)?;
            let mut still_conj = Vec::new();
            for i in 0..spec.twists.len() {
                let mut m = spec.clone();
                let k = m.twists[i];
                m.twists[i] = TwistBend { s: k.s + 0.3, psi: (k.psi + 0.2).min(std::f64::consts::PI), ..k };
                let rep2 = build_surface(&m, &tol)?;
                let e = spec.gluing[i];
                let pairs: Vec<(&QMatrix, &QMatrix)> = if e[0] == e[2] {
                    // the handle's (1,1) group
                    let h = rep.handle_gluings.iter().position(|&x| x == i).expect("handle");
                    vec![(&rep.a[h], &rep2.a[h]), (&rep.b[h], &rep2.b[h])]
                } else {
                    rep.a.iter().zip(&rep2.a).chain(rep.b.iter().zip(&rep2.b)).collect()
                };
                let d = oracle_decide_tuples(&pairs, Group::Sp21, &tol);
                if d.verdict != Verdict::NotConjugate {
                    still_conj.push(i);
                }
            }
            Ok(Outcome {
                passed: rep.relator_residual <= 1e-6 && still_conj.is_empty(),
                worst: Some(rep.relator_residual),
                detail: format!(
                    "genus-2 relator residual {:.2e}; mutated twists left conjugate: {still_conj:?} of {}",
                    rep.relator_residual,
                    spec.twists.len()
                ),
            })
        };
        run().unwrap_or_else(|e| Outcome { passed: false, worst: None, detail: format!("error: {e}") })
    })
}

pub fn gauge_laws(cfg: &AcceptanceConfig) -> CriterionReport {
    timed(12, "projective-point gauge laws", || {
        let tol = Tolerances::default();
        let mut r = stream(cfg, 12);
        let (mut drift, mut jgap) = (0.0f64, 0.0f64);
        let mut unseparated = 0;
        for _ in 0..cfg.small {
            let frame: QVec = (0..3).map(|_| quat_in_box(&mut r, 1.0)).collect();
            let q = quat_in_box(&mut r, 1.0) + Quaternion::real(0.1);
            let v = right_scaled(&frame, q);
            let p = projective_point(&v, &frame, false).expect("on line");
            let c = Quaternion::new(r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0), 0.0, 0.0);
            let c = if c.norm() < 0.1 { Quaternion::ONE } else { c };
            let pc = projective_point(&right_scaled(&v, c), &frame, false).expect("on line");
            drift = drift.max(p.distance(&pc));
            let pj = projective_point(&right_scaled(&v, Quaternion::J), &frame, false).expect("on line");
            jgap = jgap.max(pj.distance(&p.times_j()));

            let (rr, th, ph) = params_of_type(&mut r, TypeRequest::Loxodromic);
            let a = QMatrix::e_sp21(rr, th, ph);
            let b = random_of_type(&mut r, Group::Sp21, TypeRequest::Loxodromic);
            let k = QMatrix::diag(&[Quaternion::J, Quaternion::ONE, Quaternion::J]);
            match pairs_conjugate_sp21(&a, &b, &conj(&k, &a), &b, &tol) {
                Ok(d) if d.verdict == Verdict::NotConjugate => {}
                _ => unseparated += 1,
            }
        }
        Outcome {
            passed: drift <= 1e-10 && jgap <= 1e-10 && unseparated == 0,
            worst: Some(drift.max(jgap)),
            detail: format!(
                "complex-rescaling drift {drift:.2e}; j-image gap {jgap:.2e}; {unseparated} of {} j-twisted pairs not separated",
                cfg.small
            ),
        }
    })
}

pub type Criterion = fn(&AcceptanceConfig) -> CriterionReport;

pub const CRITERIA: [Criterion; 12] = [
    embedding_homomorphism,
    group_membership,
    trace_palindromicity,
    closed_forms,
    conjugation_invariance,
    platis_relations,
    angular_extremes,
    conjugacy_decisions,
    quadruple_construction,
    ledger_arithmetic,
    surface_assembly,
    gauge_laws,
];

pub fn run_all(cfg: &AcceptanceConfig) -> Vec<CriterionReport> {
    CRITERIA.iter().map(|c| c(cfg)).collect()
}
