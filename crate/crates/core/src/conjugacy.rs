//! Conjugacy of hyperbolic pairs: canonical frames, staged invariant
//! comparison, the intertwiner oracle and the Sp(1,1) quadruple map.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{hyperbolic_type, normal_form, real_trace, HypTag, NormalForm};
use crate::error::{Error, Result};
use crate::invariants::{
    canonical_cpoints, cross_ratio, spans_h_line, CrossRatioClass, Mismatch, PairInvariants,
};
use crate::model::proj_distance;
use crate::qmat::{is_member, solve_schur, vec_norm, Group, HermForm, QMatrix, QVec};
use crate::quat::{rotation_between, Quaternion};
use crate::sample::rng;
use crate::tol::Tolerances;

/// Group element moving `a_A → o`, `r_A → ∞` with the residual diagonal
/// gauge fixed, and the pair in that frame.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalFrame {
    pub t: QMatrix,
    pub t_inv: QMatrix,
    pub a_hat: QMatrix,
    pub b_hat: QMatrix,
    /// Elements that fix the canonical pair and act trivially (`±I`).
    pub leftover: Vec<QMatrix>,
}

fn coords(v: &[Quaternion]) -> Option<QVec> {
    let n = v.len();
    let last = v[n - 1];
    if last.norm() <= 1e-9 * vec_norm(v) {
        return None;
    }
    let inv = last.recip();
    Some(v[..n - 1].iter().map(|z| *z * inv).collect())
}

/// Unit `ν` whose conjugation sends the first significant vector to `+i`
/// and the next independent one into the `+j` half-plane.
fn residual_rotation(vectors: &[Quaternion]) -> Quaternion {
    let sig = |q: &Quaternion| q.im_norm() > 1e-6 * (1.0 + q.norm());
    let Some(first) = vectors.iter().find(|q| sig(q)) else {
        return Quaternion::ONE;
    };
    let nu1 = rotation_between(first.im().normalize().im_vec(), [1.0, 0.0, 0.0]);
    for q in vectors {
        let v = (nu1 * q.im() * nu1.conj()).im_vec();
        let perp = (v[1] * v[1] + v[2] * v[2]).sqrt();
        if perp > 1e-6 * (1.0 + q.norm()) {
            let alpha = v[2].atan2(v[1]);
            let nu2 = Quaternion::from_axis_angle([1.0, 0.0, 0.0], -alpha / 2.0);
            return nu2 * nu1;
        }
    }
    nu1
}

/// Canonical frame of a hyperbolic pair in Sp(2,1) or Sp(1,1).
pub fn canonical_frame(a: &QMatrix, b: &QMatrix, tol: &Tolerances) -> Result<CanonicalFrame> {
    let na = normal_form(a, tol)?;
    let nb = normal_form(b, tol)?;
    canonical_frame_nf(a, b, &na, &nb)
}

pub fn canonical_frame_nf(a: &QMatrix, b: &QMatrix, na: &NormalForm, nb: &NormalForm) -> Result<CanonicalFrame> {
    let n = a.n();
    let h = HermForm::h1(n);
    let j = QMatrix::antidiag(n);
    let t0 = &j * &na.c_inv();
    let ab0 = t0.mul_vec(&nb.fixed_points.attracting);
    let rb0 = t0.mul_vec(&nb.fixed_points.repelling);
    let o = crate::model::origin(n);
    let inf = crate::model::infinity(n);
    for (p, name) in [(&ab0, "a_B"), (&rb0, "r_B")] {
        if proj_distance(&o, p) < 1e-8 || proj_distance(&inf, p) < 1e-8 {
            return Err(Error::Degenerate(format!("{name} coincides with a fixed point of A")));
        }
    }
    let wa = coords(&ab0).ok_or_else(|| Error::Degenerate("a_B at infinity".into()))?;
    let rho = 1.0 / wa[0].norm().sqrt();
    let d0 = if n == 3 {
        let side = |w: &QVec| {
            (w[1].norm() > 1e-6 * w[0].norm().sqrt()).then(|| w[1].conj().normalize())
        };
        let u0 = match side(&wa) {
            Some(u) => u,
            None => {
                let wr = coords(&rb0).ok_or_else(|| Error::Degenerate("r_B at infinity".into()))?;
                side(&wr).ok_or_else(|| {
                    Error::Degenerate("all fixed points lie on one quaternionic line".into())
                })?
            }
        };
        QMatrix::diag(&[Quaternion::real(rho), u0, Quaternion::real(1.0 / rho)])
    } else {
        QMatrix::diag(&[Quaternion::real(rho), Quaternion::real(1.0 / rho)])
    };
    let t1 = &d0 * &t0;
    let t1_inv = t1.form_inverse(&h);
    let a1 = &(&t1 * a) * &t1_inv;
    let b1 = &(&t1 * b) * &t1_inv;
    let mut vectors: Vec<Quaternion> = Vec::new();
    for p in [&nb.fixed_points.attracting, &nb.fixed_points.repelling] {
        if let Some(w) = coords(&t1.mul_vec(p)) {
            vectors.extend(w);
        }
    }
    vectors.extend(b1.entries().iter().copied());
    vectors.extend(a1.entries().iter().copied());
    let nu = residual_rotation(&vectors);
    let t = t1.left_mul_scalar(nu);
    let t_inv = t.form_inverse(&h);
    let a_hat = &(&t * a) * &t_inv;
    let b_hat = &(&t * b) * &t_inv;
    let id = QMatrix::identity(n);
    Ok(CanonicalFrame { t, t_inv, a_hat, b_hat, leftover: vec![id.clone(), id.scale(-1.0)] })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Conjugate,
    NotConjugate,
    Indeterminate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Invariants,
    Oracle,
}

/// Largest observed gap per stage; absent stages were not reached.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    pub trace: Option<f64>,
    pub cross_ratio: Option<f64>,
    pub angular: Option<f64>,
    pub projective_point: Option<f64>,
    pub frame: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjDecision {
    pub verdict: Verdict,
    pub conjugator: Option<QMatrix>,
    pub residual: Option<f64>,
    pub mismatch: Option<Mismatch>,
    pub method: Method,
    #[serde(default)]
    pub margins: Margins,
    /// Conjugacy up to real scalars (GL(2,ℍ) only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pgl_conjugate: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ConjDecision {
    fn not_conjugate(method: Method, mismatch: Option<Mismatch>, margins: Margins) -> ConjDecision {
        ConjDecision {
            verdict: Verdict::NotConjugate,
            conjugator: None,
            residual: None,
            mismatch,
            method,
            margins,
            pgl_conjugate: None,
            note: None,
        }
    }
}

/// `max(‖C A C⁻¹ - A'‖ / ‖A'‖, ‖C B C⁻¹ - B'‖ / ‖B'‖)`.
pub fn conjugation_residual(c: &QMatrix, pairs: &[(&QMatrix, &QMatrix)]) -> f64 {
    let Ok(ci) = c.try_inverse() else {
        return f64::INFINITY;
    };
    pairs
        .iter()
        .map(|(x, xp)| (&(c * *x) * &ci).dist(xp) / xp.frobenius().max(1e-300))
        .fold(0.0, f64::max)
}

fn group_of(n: usize) -> Group {
    if n == 3 {
        Group::Sp21
    } else {
        Group::Sp11
    }
}

/// Stage one and two data that do not need a frame.
struct Staged {
    na: NormalForm,
    nb: NormalForm,
    ta: HypTag,
    tb: HypTag,
    inv: PairInvariants,
}

fn staged(a: &QMatrix, b: &QMatrix, tol: &Tolerances) -> Result<Staged> {
    let g = group_of(a.n());
    let tra = real_trace(a, g)?;
    let trb = real_trace(b, g)?;
    let ta = hyperbolic_type(&tra, tol).tag;
    let tb = hyperbolic_type(&trb, tol).tag;
    if ta == HypTag::NotHyperbolic || tb == HypTag::NotHyperbolic {
        return Err(Error::NotHyperbolic("pair element is not hyperbolic".into()));
    }
    let na = normal_form(a, tol)?;
    let nb = normal_form(b, tol)?;
    let (aa, ra) = (&na.fixed_points.attracting, &na.fixed_points.repelling);
    let (ab, rb) = (&nb.fixed_points.attracting, &nb.fixed_points.repelling);
    let (cross_ratios, angular) = if g == Group::Sp21 {
        (
            crate::invariants::cross_ratio_triple_nf(&na, &nb, tol)?.x.to_vec(),
            crate::invariants::angular_triple_nf(&na, &nb)?.to_vec(),
        )
    } else {
        (vec![CrossRatioClass::of(cross_ratio(aa, ra, ab, rb)?)], Vec::new())
    };
    let inv = PairInvariants { traces: vec![tra, trb], cross_ratios, angular, cpoints: Vec::new() };
    Ok(Staged { na, nb, ta, tb, inv })
}

fn trace_gap(x: &PairInvariants, y: &PairInvariants) -> f64 {
    x.traces.iter().zip(&y.traces).map(|(p, q)| p.max_diff(q)).fold(0.0, f64::max)
}

fn cr_gap(x: &PairInvariants, y: &PairInvariants) -> f64 {
    x.cross_ratios
        .iter()
        .zip(&y.cross_ratios)
        .map(|(p, q)| p.sim().distance(&q.sim()))
        .fold(0.0, f64::max)
}

fn ang_gap(x: &PairInvariants, y: &PairInvariants) -> f64 {
    x.angular.iter().zip(&y.angular).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

fn cp_gap(x: &PairInvariants, y: &PairInvariants) -> f64 {
    if x.cpoints.len() != y.cpoints.len() {
        return 1.0;
    }
    x.cpoints.iter().zip(&y.cpoints).map(|(p, q)| p.point.distance(&q.point)).fold(0.0, f64::max)
}

fn frame_gap(f: &CanonicalFrame, g: &CanonicalFrame) -> f64 {
    let scale = 1.0 + f.a_hat.frobenius() + f.b_hat.frobenius();
    f.leftover
        .iter()
        .map(|s| {
            let si = s.try_inverse().expect("leftover invertible");
            let a = &(&(s * &f.a_hat) * &si) - &g.a_hat;
            let b = &(&(s * &f.b_hat) * &si) - &g.b_hat;
            a.frobenius().max(b.frobenius()) / scale
        })
        .fold(f64::INFINITY, f64::min)
}

/// Staged decision for pairs in Sp(2,1) or Sp(1,1); reducible or degenerate
/// pairs are handed to the oracle.
pub fn pairs_conjugate_sp(
    a: &QMatrix,
    b: &QMatrix,
    a2: &QMatrix,
    b2: &QMatrix,
    tol: &Tolerances,
) -> Result<ConjDecision> {
    let n = a.n();
    let g = group_of(n);
    if [b, a2, b2].iter().any(|m| m.n() != n) {
        return Err(Error::Dimension { expected: n, got: b.n().max(a2.n()).max(b2.n()) });
    }
    let oracle = |note: String| -> ConjDecision {
        let mut d = oracle_decide(a, b, a2, b2, g, tol);
        d.note = Some(note);
        d
    };
    let (s1, s2) = match (staged(a, b, tol), staged(a2, b2, tol)) {
        (Ok(x), Ok(y)) => (x, y),
        (Err(e), _) | (_, Err(e)) => return Ok(oracle(format!("invariants unavailable: {e}"))),
    };
    let mut margins = Margins::default();
    margins.trace = Some(trace_gap(&s1.inv, &s2.inv));
    if s1.inv.first_mismatch(&s2.inv, tol) == Some(Mismatch::Trace) {
        return Ok(ConjDecision::not_conjugate(Method::Invariants, Some(Mismatch::Trace), margins));
    }
    let reducible = |s: &Staged| {
        n == 3
            && spans_h_line(&[
                &s.na.fixed_points.attracting,
                &s.na.fixed_points.repelling,
                &s.nb.fixed_points.attracting,
                &s.nb.fixed_points.repelling,
            ])
    };
    if reducible(&s1) || reducible(&s2) {
        return Ok(oracle("fixed points on one quaternionic line".into()));
    }
    margins.cross_ratio = Some(cr_gap(&s1.inv, &s2.inv));
    margins.angular = Some(ang_gap(&s1.inv, &s2.inv));
    match s1.inv.first_mismatch(&s2.inv, tol) {
        Some(m @ (Mismatch::CrossRatio | Mismatch::Angular)) => {
            return Ok(ConjDecision::not_conjugate(Method::Invariants, Some(m), margins));
        }
        _ => {}
    }
    let (f1, f2) = match (
        canonical_frame_nf(a, b, &s1.na, &s1.nb),
        canonical_frame_nf(a2, b2, &s2.na, &s2.nb),
    ) {
        (Ok(x), Ok(y)) => (x, y),
        (Err(e), _) | (_, Err(e)) => return Ok(oracle(format!("frame indeterminate: {e}"))),
    };
    let mut inv1 = s1.inv.clone();
    let mut inv2 = s2.inv.clone();
    inv1.cpoints = canonical_cpoints(&f1, &s1.nb, s1.ta, s1.tb)?;
    inv2.cpoints = canonical_cpoints(&f2, &s2.nb, s2.ta, s2.tb)?;
    margins.projective_point = Some(cp_gap(&inv1, &inv2));
    if inv1.first_mismatch(&inv2, tol) == Some(Mismatch::ProjectivePoint) {
        return Ok(ConjDecision::not_conjugate(Method::Invariants, Some(Mismatch::ProjectivePoint), margins));
    }
    let gap = frame_gap(&f1, &f2);
    margins.frame = Some(gap);
    if gap > tol.conj {
        return Ok(ConjDecision::not_conjugate(Method::Invariants, Some(Mismatch::Frame), margins));
    }
    let c = &f2.t_inv * &f1.t;
    let residual = conjugation_residual(&c, &[(a, a2), (b, b2)]);
    let member = is_member(&c, g, &Tolerances { grp: tol.conj, ..*tol }).member;
    let verdict = if residual <= tol.conj && member { Verdict::Conjugate } else { Verdict::Indeterminate };
    Ok(ConjDecision {
        verdict,
        conjugator: Some(c),
        residual: Some(residual),
        mismatch: None,
        method: Method::Invariants,
        margins,
        pgl_conjugate: None,
        note: (verdict == Verdict::Indeterminate).then(|| "frame conjugator failed certification".into()),
    })
}

pub fn pairs_conjugate_sp21(a: &QMatrix, b: &QMatrix, a2: &QMatrix, b2: &QMatrix, tol: &Tolerances) -> Result<ConjDecision> {
    if a.n() != 3 {
        return Err(Error::Dimension { expected: 3, got: a.n() });
    }
    pairs_conjugate_sp(a, b, a2, b2, tol)
}

pub fn pairs_conjugate_sp11(a: &QMatrix, b: &QMatrix, a2: &QMatrix, b2: &QMatrix, tol: &Tolerances) -> Result<ConjDecision> {
    if a.n() != 2 {
        return Err(Error::Dimension { expected: 2, got: a.n() });
    }
    pairs_conjugate_sp(a, b, a2, b2, tol)
}

/// Real Frobenius inner product.
fn inner(x: &QMatrix, y: &QMatrix) -> f64 {
    x.entries().iter().zip(y.entries()).map(|(p, q)| (p.conj() * *q).r0).sum()
}

fn combine(basis: &[QMatrix], coef: &[f64]) -> QMatrix {
    let mut c = QMatrix::zeros(basis[0].n());
    for (m, x) in basis.iter().zip(coef) {
        c = &c + &m.scale(*x);
    }
    c
}

/// `(‖C*HC - ηH‖ / ‖C‖², η)` with the best real `η`.
fn form_defect(c: &QMatrix, h: &HermForm) -> (f64, f64) {
    let m = &(&c.adjoint() * &h.matrix) * c;
    let eta = inner(&h.matrix, &m) / inner(&h.matrix, &h.matrix);
    let d = m.dist(&h.matrix.scale(eta));
    (d / c.frobenius().powi(2).max(1e-300), eta)
}

fn unit(coef: &[f64]) -> Vec<f64> {
    let n = coef.iter().map(|x| x * x).sum::<f64>().sqrt();
    coef.iter().map(|x| x / n).collect()
}

/// Search the span for a multiple of a form-preserving matrix.
fn search_form_element(basis: &[QMatrix], h: &HermForm) -> Option<(QMatrix, f64, f64)> {
    let k = basis.len();
    let eval = |coef: &[f64]| {
        let c = combine(basis, coef);
        let (d, eta) = form_defect(&c, h);
        (d, eta, c)
    };
    let best_coef: Vec<f64> = match k {
        1 => vec![1.0],
        2 => {
            let f = |t: f64| eval(&[t.cos(), t.sin()]).0;
            let steps = 360;
            let mut bt = 0.0;
            let mut bf = f64::INFINITY;
            for s in 0..steps {
                let t = std::f64::consts::PI * s as f64 / steps as f64;
                let v = f(t);
                if v < bf {
                    bf = v;
                    bt = t;
                }
            }
            let delta = std::f64::consts::PI / steps as f64;
            let (mut lo, mut hi) = (bt - delta, bt + delta);
            let gr = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..100 {
                let m1 = hi - gr * (hi - lo);
                let m2 = lo + gr * (hi - lo);
                if f(m1) < f(m2) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            let t = 0.5 * (lo + hi);
            vec![t.cos(), t.sin()]
        }
        _ => {
            let mut r = rng(0x5eed);
            let mut best = (f64::INFINITY, vec![1.0; k]);
            for _ in 0..4000 {
                let coef = unit(&(0..k).map(|_| r.gen_range(-1.0..1.0)).collect::<Vec<f64>>());
                let v = eval(&coef).0;
                if v < best.0 {
                    best = (v, coef);
                }
            }
            let mut step = 0.1;
            let mut coef = best.1;
            let mut fv = best.0;
            while step > 1e-13 {
                let mut improved = false;
                for i in 0..k {
                    for sgn in [-1.0, 1.0] {
                        let mut trial = coef.clone();
                        trial[i] += sgn * step;
                        let trial = unit(&trial);
                        let v = eval(&trial).0;
                        if v < fv {
                            fv = v;
                            coef = trial;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                }
            }
            coef
        }
    };
    let (d, eta, c) = eval(&best_coef);
    Some((c, d, eta))
}

/// Ground-truth decision from the intertwiner space.
pub fn oracle_decide(a: &QMatrix, b: &QMatrix, a2: &QMatrix, b2: &QMatrix, g: Group, tol: &Tolerances) -> ConjDecision {
    oracle_decide_tuples(&[(a, a2), (b, b2)], g, tol)
}

/// Oracle for generator tuples of any length: is there `C` in the group with
/// `C X C⁻¹ = X'` for every pair `(X, X')`?
pub fn oracle_decide_tuples(pairs: &[(&QMatrix, &QMatrix)], g: Group, tol: &Tolerances) -> ConjDecision {
    let basis = solve_schur(pairs);
    if basis.is_empty() {
        let mut d = ConjDecision::not_conjugate(Method::Oracle, None, Margins::default());
        d.note = Some("no intertwiner".into());
        return d;
    }
    let candidate = match g.form() {
        Some(h) => match search_form_element(&basis, &h) {
            Some((c, defect, eta)) if defect <= 1e-8 && eta > 0.0 => Some(c.scale(1.0 / eta.sqrt())),
            Some((_, defect, eta)) if defect <= 1e-8 => {
                let mut d = ConjDecision::not_conjugate(Method::Oracle, None, Margins::default());
                d.note = Some(format!("intertwiner reverses the form (eta = {eta:e})"));
                return d;
            }
            Some((_, defect, _)) => {
                let verdict = if basis.len() >= 3 { Verdict::Indeterminate } else { Verdict::NotConjugate };
                return ConjDecision {
                    verdict,
                    conjugator: None,
                    residual: None,
                    mismatch: None,
                    method: Method::Oracle,
                    margins: Margins::default(),
                    pgl_conjugate: None,
                    note: Some(format!("no form-preserving intertwiner (defect {defect:e})")),
                };
            }
            None => None,
        },
        None => best_invertible(&basis),
    };
    match candidate {
        Some(c) => {
            let residual = conjugation_residual(&c, pairs);
            let ok = residual <= tol.conj
                && is_member(&c, g, &Tolerances { grp: tol.conj, ..*tol }).member;
            ConjDecision {
                verdict: if ok { Verdict::Conjugate } else { Verdict::NotConjugate },
                conjugator: ok.then_some(c),
                residual: Some(residual),
                mismatch: None,
                method: Method::Oracle,
                margins: Margins::default(),
                pgl_conjugate: None,
                note: None,
            }
        }
        None => {
            let mut d = ConjDecision::not_conjugate(Method::Oracle, None, Margins::default());
            d.note = Some("intertwiners are all singular".into());
            d
        }
    }
}

fn conditioning(c: &QMatrix) -> f64 {
    let s = c.complexify().svd(false, false).singular_values;
    let mx = s.max();
    if mx == 0.0 {
        0.0
    } else {
        s.min() / mx
    }
}

fn best_invertible(basis: &[QMatrix]) -> Option<QMatrix> {
    let mut best: Option<(f64, QMatrix)> = None;
    let mut consider = |c: QMatrix| {
        let k = conditioning(&c);
        if best.as_ref().map_or(true, |(b, _)| k > *b) {
            best = Some((k, c));
        }
    };
    for m in basis {
        consider(m.clone());
    }
    if basis.len() > 1 {
        let mut r = rng(0x91);
        for _ in 0..200 {
            let coef: Vec<f64> = (0..basis.len()).map(|_| r.gen_range(-1.0..1.0)).collect();
            consider(combine(basis, &coef));
        }
    }
    best.filter(|(k, _)| *k > 1e-8).map(|(_, c)| c.scale(1.0 / c.frobenius()))
}

/// Decision in GL(2,ℍ): trace comparison, then the oracle; also reports
/// conjugacy up to real scalars.
pub fn pairs_conjugate_gl2(a: &QMatrix, b: &QMatrix, a2: &QMatrix, b2: &QMatrix, tol: &Tolerances) -> Result<ConjDecision> {
    let traces = |x: &QMatrix| real_trace(x, Group::Gl2h);
    let (ta, tb, ta2, tb2) = (traces(a)?, traces(b)?, traces(a2)?, traces(b2)?);
    let pgl = pgl_conjugate(a, b, a2, b2, tol);
    let eps = tol.conj;
    let same = |x: &crate::classify::RealTrace, y: &crate::classify::RealTrace| {
        let dx = x.det.unwrap_or(1.0);
        let dy = y.det.unwrap_or(1.0);
        x.approx_eq(y, eps) && (dx - dy).abs() <= eps * (1.0 + dx.abs())
    };
    let gap = ta.max_diff(&ta2).max(tb.max_diff(&tb2));
    if !same(&ta, &ta2) || !same(&tb, &tb2) {
        let mut d = ConjDecision::not_conjugate(
            Method::Invariants,
            Some(Mismatch::Trace),
            Margins { trace: Some(gap), ..Margins::default() },
        );
        d.pgl_conjugate = Some(pgl);
        return Ok(d);
    }
    let mut d = oracle_decide(a, b, a2, b2, Group::Gl2h, tol);
    d.margins.trace = Some(gap);
    d.pgl_conjugate = Some(pgl);
    Ok(d)
}

/// Conjugate after rescaling each element by a real number.
pub fn pgl_conjugate(a: &QMatrix, b: &QMatrix, a2: &QMatrix, b2: &QMatrix, tol: &Tolerances) -> bool {
    let scale = |x: &QMatrix, y: &QMatrix| -> Option<f64> {
        let dx = x.det_complex().re;
        let dy = y.det_complex().re;
        (dx > 0.0 && dy > 0.0).then(|| (dx / dy).powf(0.25))
    };
    let (Some(la), Some(lb)) = (scale(a, a2), scale(b, b2)) else {
        return false;
    };
    for sa in [1.0, -1.0] {
        for sb in [1.0, -1.0] {
            let a2s = a2.scale(sa * la);
            let b2s = b2.scale(sb * lb);
            if oracle_decide(a, b, &a2s, &b2s, Group::Gl2h, tol).verdict == Verdict::Conjugate {
                return true;
            }
        }
    }
    false
}

/// Outcome of the quadruple construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadMap {
    pub h: Option<QMatrix>,
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl QuadMap {
    fn none(reason: impl Into<String>) -> QuadMap {
        QuadMap { h: None, residual: None, reason: Some(reason.into()) }
    }
}

/// `C ∈ Sp(1,1)` with `C e1 ~ z2` and `C e2 ~ z1`; its inverse sends
/// `z1 → o`, `z2 → ∞`.
fn to_standard_sp11(z1: &[Quaternion], z2: &[Quaternion]) -> Option<QMatrix> {
    let h = HermForm::h1(2);
    let p = h.pair(z1, z2);
    if p.norm() <= 1e-12 * vec_norm(z1) * vec_norm(z2) {
        return None;
    }
    let s = p.recip().conj();
    let u: QVec = z2.iter().map(|x| *x * s).collect();
    let c = QMatrix::from_columns(&[u, z1.to_vec()]);
    Some(c.form_inverse(&h))
}

fn orthonormal_frame(x: [f64; 3], y: [f64; 3]) -> Option<[[f64; 3]; 3]> {
    let nx = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if nx == 0.0 {
        return None;
    }
    let e1 = [x[0] / nx, x[1] / nx, x[2] / nx];
    let d = y[0] * e1[0] + y[1] * e1[1] + y[2] * e1[2];
    let mut e2 = [y[0] - d * e1[0], y[1] - d * e1[1], y[2] - d * e1[2]];
    let n2 = (e2[0] * e2[0] + e2[1] * e2[1] + e2[2] * e2[2]).sqrt();
    if n2 <= 1e-12 * (1.0 + d.abs()) {
        let trial = if e1[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let d2 = trial[0] * e1[0] + trial[1] * e1[1] + trial[2] * e1[2];
        e2 = [trial[0] - d2 * e1[0], trial[1] - d2 * e1[1], trial[2] - d2 * e1[2]];
    }
    let n2 = (e2[0] * e2[0] + e2[1] * e2[1] + e2[2] * e2[2]).sqrt();
    let e2 = [e2[0] / n2, e2[1] / n2, e2[2] / n2];
    let e3 = [
        e1[1] * e2[2] - e1[2] * e2[1],
        e1[2] * e2[0] - e1[0] * e2[2],
        e1[0] * e2[1] - e1[1] * e2[0],
    ];
    Some([e1, e2, e3])
}

/// Element of Sp(1,1) carrying `z1..z4` to `w1..w4`, when one exists.
pub fn quad_map_sp11(z: [&[Quaternion]; 4], w: [&[Quaternion]; 4], tol: &Tolerances) -> QuadMap {
    let (xz, xw) = match (cross_ratio(z[0], z[1], z[2], z[3]), cross_ratio(w[0], w[1], w[2], w[3])) {
        (Ok(a), Ok(b)) => (CrossRatioClass::of(a), CrossRatioClass::of(b)),
        _ => return QuadMap::none("points not pairwise distinct"),
    };
    if !xz.approx_eq(&xw, 1e-8) {
        return QuadMap::none("cross ratios differ");
    }
    let (Some(mz), Some(mw)) = (to_standard_sp11(z[0], z[1]), to_standard_sp11(w[0], w[1])) else {
        return QuadMap::none("first two points not distinct");
    };
    let pz: Vec<Quaternion> = z[2..].iter().filter_map(|p| coords(&mz.mul_vec(p)).map(|c| c[0])).collect();
    let pw: Vec<Quaternion> = w[2..].iter().filter_map(|p| coords(&mw.mul_vec(p)).map(|c| c[0])).collect();
    if pz.len() != 2 || pw.len() != 2 {
        return QuadMap::none("third or fourth point at infinity");
    }
    let t = pz[0].norm() / pw[0].norm();
    let fz = orthonormal_frame(pz[0].im_vec(), pz[1].im_vec());
    let fw = orthonormal_frame(pw[0].im_vec(), pw[1].im_vec());
    let (Some(fz), Some(fw)) = (fz, fw) else {
        return QuadMap::none("third point at the origin");
    };
    // R = Fwᵀ Fz maps frame z onto frame w
    let mut rot = [[0.0; 3]; 3];
    for (r, row) in rot.iter_mut().enumerate() {
        for (c, x) in row.iter_mut().enumerate() {
            *x = (0..3).map(|k| fw[k][r] * fz[k][c]).sum();
        }
    }
    let psi = Quaternion::from_rotation_matrix(&rot);
    let st = t.sqrt();
    let hmat = QMatrix::diag(&[psi.scale(1.0 / st), psi.scale(st)]);
    let Ok(mw_inv) = mw.try_inverse() else {
        return QuadMap::none("singular normalization");
    };
    let full = &(&mw_inv * &hmat) * &mz;
    let residual = (0..4)
        .map(|k| proj_distance(w[k], &full.mul_vec(z[k])))
        .fold(0.0, f64::max);
    if residual > 1e-8 || !is_member(&full, Group::Sp11, &Tolerances { grp: 1e-8, ..*tol }).member {
        return QuadMap { h: None, residual: Some(residual), reason: Some("alignment infeasible".into()) };
    }
    QuadMap { h: Some(full), residual: Some(residual), reason: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{infinity, origin};
    use crate::sample::{random_element, random_of_type, TypeRequest};

    fn conj(s: &QMatrix, x: &QMatrix) -> QMatrix {
        &(s * x) * &s.try_inverse().unwrap()
    }

    #[test]
    fn quad_map_scaling_example() {
        let lift = |q: Quaternion| vec![q, Quaternion::ONE];
        let (o, inf) = (origin(2), infinity(2));
        let z3 = lift(Quaternion::I);
        let z4 = lift(Quaternion::J);
        let w3 = lift(Quaternion::I.scale(2.0));
        let w4 = lift(Quaternion::J.scale(2.0));
        let m = quad_map_sp11([&o, &inf, &z3, &z4], [&o, &inf, &w3, &w4], &Tolerances::default());
        let h = m.h.expect("map exists");
        let target = QMatrix::diag(&[Quaternion::real(2f64.sqrt()), Quaternion::real(1.0 / 2f64.sqrt())]);
        assert!(h.dist(&target) < 1e-12 || h.dist(&target.scale(-1.0)) < 1e-12, "{h}");
        let w4b = lift(Quaternion::J.scale(3.0));
        let m = quad_map_sp11([&o, &inf, &z3, &z4], [&o, &inf, &w3, &w4b], &Tolerances::default());
        assert!(m.h.is_none());
    }

    #[test]
    fn conjugated_pair_is_recognized() {
        let tol = Tolerances::default();
        let mut r = rng(5);
        let a = random_of_type(&mut r, Group::Sp21, TypeRequest::Loxodromic);
        let b = random_of_type(&mut r, Group::Sp21, TypeRequest::Loxodromic);
        let s = random_element(&mut r, Group::Sp21);
        let d = pairs_conjugate_sp21(&a, &b, &conj(&s, &a), &conj(&s, &b), &tol).unwrap();
        assert_eq!(d.verdict, Verdict::Conjugate, "{d:?}");
        assert_eq!(d.method, Method::Invariants);
        let o = oracle_decide(&a, &b, &conj(&s, &a), &conj(&s, &b), Group::Sp21, &tol);
        assert_eq!(o.verdict, Verdict::Conjugate, "{o:?}");
    }

    #[test]
    fn j_twisted_projective_point_separates() {
        let tol = Tolerances::default();
        let mut r = rng(8);
        let a = QMatrix::e_sp21(0.4, 1.1, 2.0);
        let b = random_of_type(&mut r, Group::Sp21, TypeRequest::Loxodromic);
        let k = QMatrix::diag(&[Quaternion::J, Quaternion::ONE, Quaternion::J]);
        let a2 = conj(&k, &a);
        let d = pairs_conjugate_sp21(&a, &b, &a2, &b, &tol).unwrap();
        assert_eq!(d.verdict, Verdict::NotConjugate, "{d:?}");
        assert_eq!(d.mismatch, Some(Mismatch::ProjectivePoint));
        let o = oracle_decide(&a, &b, &a2, &b, Group::Sp21, &tol);
        assert_eq!(o.verdict, Verdict::NotConjugate);
    }

    #[test]
    fn gl2_scalar_multiple_is_pgl_only() {
        let tol = Tolerances::default();
        let mut r = rng(9);
        let a = random_of_type(&mut r, Group::Gl2h, TypeRequest::Loxodromic);
        let b = random_of_type(&mut r, Group::Gl2h, TypeRequest::Loxodromic);
        let d = pairs_conjugate_gl2(&a, &b, &a.scale(2.0), &b, &tol).unwrap();
        assert_eq!(d.verdict, Verdict::NotConjugate);
        assert_eq!(d.pgl_conjugate, Some(true));
    }
}
