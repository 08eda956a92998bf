//! Cross ratios, Platis relations, Cartan angular invariants, projective
//! points and the conjugacy-invariant bundle of a hyperbolic pair.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classify::{hyperbolic_type, normal_form, real_trace, HypTag, NormalForm, RealTrace};
use crate::conjugacy::{canonical_frame, CanonicalFrame};
use crate::error::{Error, Result};
use crate::qmat::{vec_norm, Group, HermForm, QMatrix, QVec};
use crate::quat::{Quaternion, SimClass};
use crate::tol::Tolerances;

fn form_for(z: &[Quaternion]) -> HermForm {
    HermForm::h1(z.len())
}

/// Pairing that must not vanish; the error names the pair.
fn nonzero_pair(h: &HermForm, z: &[Quaternion], w: &[Quaternion], label: &str) -> Result<Quaternion> {
    let p = h.pair(z, w);
    if p.norm() <= 1e-12 * vec_norm(z) * vec_norm(w) {
        return Err(Error::Degenerate(format!("vanishing pairing {label}")));
    }
    Ok(p)
}

/// `⟨z3,z1⟩ ⟨z3,z2⟩⁻¹ ⟨z4,z2⟩ ⟨z4,z1⟩⁻¹`, in this order.
pub fn cross_ratio(z1: &[Quaternion], z2: &[Quaternion], z3: &[Quaternion], z4: &[Quaternion]) -> Result<Quaternion> {
    let zs = [z1, z2, z3, z4];
    for i in 0..4 {
        for j in i + 1..4 {
            if crate::model::proj_distance(zs[i], zs[j]) < 1e-10 {
                return Err(Error::Degenerate(format!("points z{} and z{} coincide", i + 1, j + 1)));
            }
        }
    }
    let h = form_for(z1);
    let p31 = nonzero_pair(&h, z3, z1, "<z3,z1>")?;
    let p32 = nonzero_pair(&h, z3, z2, "<z3,z2>")?;
    let p42 = nonzero_pair(&h, z4, z2, "<z4,z2>")?;
    let p41 = nonzero_pair(&h, z4, z1, "<z4,z1>")?;
    Ok(p31 * p32.recip() * p42 * p41.recip())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossRatioClass {
    pub re: f64,
    #[serde(rename = "mod")]
    pub modulus: f64,
    /// Lift-dependent representative, kept for inspection only.
    #[serde(skip)]
    pub raw: Quaternion,
}

impl CrossRatioClass {
    pub fn of(x: Quaternion) -> CrossRatioClass {
        CrossRatioClass { re: x.r0, modulus: x.norm(), raw: x }
    }

    pub fn sim(&self) -> SimClass {
        SimClass { re: self.re, modulus: self.modulus }
    }

    pub fn approx_eq(&self, other: &CrossRatioClass, eps: f64) -> bool {
        self.sim().approx_eq(&other.sim(), eps)
    }
}

/// Residuals of the two real relations on the Parker–Platis triple
/// `X(z1,z2,z3,z4)`, `X(z1,z3,z2,z4)`, `X(z2,z3,z1,z4)`, each divided by the
/// size of its largest term.
pub fn platis_residuals(z: [&[Quaternion]; 4]) -> Result<(f64, f64)> {
    let x1 = cross_ratio(z[0], z[1], z[2], z[3])?;
    let x2 = cross_ratio(z[0], z[2], z[1], z[3])?;
    let x3 = cross_ratio(z[1], z[2], z[0], z[3])?;
    let (m1, m2, m3) = (x1.norm(), x2.norm(), x3.norm());
    let r1 = (m2 - m1 * m3).abs() / (1.0 + m2);
    let lhs = 2.0 * m1 * m1 * x3.r0;
    let rhs = m1 * m1 + m2 * m2 - 2.0 * x1.r0 - 2.0 * x2.r0 + 1.0;
    let r2 = (lhs - rhs).abs() / (1.0 + lhs.abs() + m1 * m1 + m2 * m2);
    Ok((r1, r2))
}

/// `arccos(Re(-T) / |T|)` with `T = ⟨z1,z2⟩⟨z2,z3⟩⟨z3,z1⟩`.
pub fn angular(z1: &[Quaternion], z2: &[Quaternion], z3: &[Quaternion]) -> Result<f64> {
    angular_signed(z1, z2, z3, -1.0)
}

/// Angular invariant with the sign in front of the triple product exposed.
pub fn angular_signed(z1: &[Quaternion], z2: &[Quaternion], z3: &[Quaternion], sign: f64) -> Result<f64> {
    let h = form_for(z1);
    let t = h.pair(z1, z2) * h.pair(z2, z3) * h.pair(z3, z1);
    let n = t.norm();
    if n <= 1e-12 * (vec_norm(z1) * vec_norm(z2) * vec_norm(z3)).powi(2) {
        return Err(Error::Degenerate("vanishing triple product".into()));
    }
    let x = sign * t.r0 / n;
    if x.abs() > 1.0 + 1e-7 {
        log::warn!("angular: arccos argument {x} clamped");
    }
    Ok(x.clamp(-1.0, 1.0).acos())
}

/// Complex line inside a quaternionic line, as a point of CP¹.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct CPoint {
    pub c1: Complex64,
    pub c2: Complex64,
}

impl From<[f64; 4]> for CPoint {
    fn from(a: [f64; 4]) -> Self {
        CPoint { c1: Complex64::new(a[0], a[1]), c2: Complex64::new(a[2], a[3]) }
    }
}

impl From<CPoint> for [f64; 4] {
    fn from(p: CPoint) -> Self {
        [p.c1.re, p.c1.im, p.c2.re, p.c2.im]
    }
}

impl CPoint {
    /// `[1 : 0]`
    pub const ZERO_SIDE: CPoint =
        CPoint { c1: Complex64 { re: 1.0, im: 0.0 }, c2: Complex64 { re: 0.0, im: 0.0 } };
    /// `[0 : 1]`
    pub const INF_SIDE: CPoint =
        CPoint { c1: Complex64 { re: 0.0, im: 0.0 }, c2: Complex64 { re: 1.0, im: 0.0 } };

    /// Point of `q = c1 + j c2`, canonicalized.
    pub fn from_quat(q: Quaternion) -> CPoint {
        let (c1, c2) = q.complex_pair();
        CPoint { c1, c2 }.canonical()
    }

    /// Unit quaternion `c1 + j c2` of the canonical representative.
    pub fn to_quat(&self) -> Quaternion {
        let p = self.canonical();
        Quaternion::from_complex_pair(p.c1, p.c2)
    }

    /// Unit norm, leading coordinate real-positive.
    pub fn canonical(&self) -> CPoint {
        let n = (self.c1.norm_sqr() + self.c2.norm_sqr()).sqrt();
        let (c1, c2) = (self.c1 / n, self.c2 / n);
        let lead = if c1.norm() > 1e-12 { c1 } else { c2 };
        let ph = lead.conj() / lead.norm();
        CPoint { c1: c1 * ph, c2: c2 * ph }
    }

    /// Image under right multiplication of the defining vector by `j`.
    pub fn times_j(&self) -> CPoint {
        CPoint { c1: -self.c2.conj(), c2: self.c1.conj() }.canonical()
    }

    /// Fubini–Study chordal distance in `[0, 1]`.
    pub fn distance(&self, other: &CPoint) -> f64 {
        let (p, q) = (self.canonical(), other.canonical());
        let ip = p.c1.conj() * q.c1 + p.c2.conj() * q.c2;
        // norm of the part of q orthogonal to p; stable near zero
        let (d1, d2) = (q.c1 - p.c1 * ip, q.c2 - p.c2 * ip);
        (d1.norm_sqr() + d2.norm_sqr()).sqrt().min(1.0)
    }

    /// Bloch-sphere angles `(polar, azimuth)`.
    pub fn angles(&self) -> [f64; 2] {
        let p = self.canonical();
        let polar = 2.0 * p.c2.norm().atan2(p.c1.norm());
        let az = if p.c1.norm() > 1e-12 && p.c2.norm() > 1e-12 { (p.c2 / p.c1).arg() } else { 0.0 };
        [polar, az]
    }
}

/// Write `v = frame · q` and return the point of `q`.
pub fn projective_point(v: &[Quaternion], frame: &[Quaternion], real_class: bool) -> Result<CPoint> {
    if real_class {
        return Err(Error::Domain("real eigenvalue class carries no projective point".into()));
    }
    let nf = vec_norm(frame);
    let mut ip = Quaternion::ZERO;
    for k in 0..frame.len() {
        ip += frame[k].conj() * v[k];
    }
    let q = ip.scale(1.0 / (nf * nf));
    let mut res = 0.0;
    for k in 0..frame.len() {
        res += (v[k] - frame[k] * q).norm_sqr();
    }
    if res.sqrt() > 1e-6 * vec_norm(v) {
        return Err(Error::Domain("frame is not on the eigenvector's line".into()));
    }
    Ok(CPoint::from_quat(q))
}

/// Three cross ratios of a pair and the Platis check on its quadruple.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossRatioTriple {
    pub x: [CrossRatioClass; 3],
    pub platis: (f64, f64),
    /// All four fixed points lie on one ℍ-line.
    pub on_h_line: bool,
}

fn lifts(nf: &NormalForm) -> (QVec, QVec) {
    (nf.fixed_points.attracting.clone(), nf.fixed_points.repelling.clone())
}

/// Rank below 3 of the four lifts (they span an ℍ-line).
pub fn spans_h_line(points: &[&[Quaternion]]) -> bool {
    let n = points[0].len();
    if n < 3 {
        return true;
    }
    let mut m = crate::qmat::CMat::zeros(2 * n, points.len());
    for (c, p) in points.iter().enumerate() {
        let s = vec_norm(p);
        for k in 0..n {
            let (a, b) = p[k].complex_pair();
            m[(k, c)] = a / s;
            m[(k + n, c)] = b / s;
        }
    }
    // complex rank of the stacked lifts and their j-multiples is twice the ℍ-rank
    let mut full = crate::qmat::CMat::zeros(2 * n, 2 * points.len());
    for c in 0..points.len() {
        for k in 0..n {
            full[(k, 2 * c)] = m[(k, c)];
            full[(k + n, 2 * c)] = m[(k + n, c)];
            full[(k, 2 * c + 1)] = -m[(k + n, c)].conj();
            full[(k + n, 2 * c + 1)] = m[(k, c)].conj();
        }
    }
    let sv = full.svd(false, false).singular_values;
    let mut s: Vec<f64> = sv.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s.len() < 5 || s[4] <= 1e-8 * s[0]
}

pub fn cross_ratio_triple(a: &QMatrix, b: &QMatrix, tol: &Tolerances) -> Result<CrossRatioTriple> {
    let (na, nb) = (normal_form(a, tol)?, normal_form(b, tol)?);
    cross_ratio_triple_nf(&na, &nb, tol)
}

pub fn cross_ratio_triple_nf(na: &NormalForm, nb: &NormalForm, tol: &Tolerances) -> Result<CrossRatioTriple> {
    let (aa, ra) = lifts(na);
    let (ab, rb) = lifts(nb);
    let x1 = cross_ratio(&aa, &ra, &ab, &rb)?;
    let x2 = cross_ratio(&aa, &rb, &ab, &ra)?;
    let x3 = cross_ratio(&ra, &rb, &ab, &aa)?;
    let platis = platis_residuals([&aa, &ra, &ab, &rb])?;
    if platis.0.max(platis.1) > tol.platis {
        log::warn!("Platis relations violated: {platis:?}");
    }
    let on_h_line = spans_h_line(&[&aa, &ra, &ab, &rb]);
    Ok(CrossRatioTriple {
        x: [CrossRatioClass::of(x1), CrossRatioClass::of(x2), CrossRatioClass::of(x3)],
        platis,
        on_h_line,
    })
}

pub fn angular_triple(a: &QMatrix, b: &QMatrix, tol: &Tolerances) -> Result<[f64; 3]> {
    let (na, nb) = (normal_form(a, tol)?, normal_form(b, tol)?);
    angular_triple_nf(&na, &nb)
}

pub fn angular_triple_nf(na: &NormalForm, nb: &NormalForm) -> Result<[f64; 3]> {
    let (aa, ra) = lifts(na);
    let (ab, rb) = lifts(nb);
    Ok([angular(&aa, &ra, &ab)?, angular(&aa, &ra, &rb)?, angular(&ra, &ab, &rb)?])
}

/// Labeled projective point of a pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledCPoint {
    pub label: String,
    pub point: CPoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairInvariants {
    pub traces: Vec<RealTrace>,
    pub cross_ratios: Vec<CrossRatioClass>,
    pub angular: Vec<f64>,
    /// In order `p1(A), p2(A), p1(B), p2(B)`, skipping real classes.
    pub cpoints: Vec<LabeledCPoint>,
}

/// Which bundle component separated two pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mismatch {
    Trace,
    CrossRatio,
    Angular,
    ProjectivePoint,
    Frame,
}

impl PairInvariants {
    /// Count of independent real parameters exposed by the bundle.
    pub fn exposed_real_parameters(&self) -> usize {
        let traces: usize = self.traces.iter().map(|t| t.coeffs.len()).sum();
        let platis = if self.cross_ratios.len() == 3 { 2 } else { 0 };
        traces + 2 * self.cross_ratios.len() - platis + self.angular.len() + 2 * self.cpoints.len()
    }

    /// First differing component, in the order trace, cross ratio, angular,
    /// projective point.
    pub fn first_mismatch(&self, other: &PairInvariants, tol: &Tolerances) -> Option<Mismatch> {
        let trace_eps = tol.conj.max(tol.sim);
        if self.traces.len() != other.traces.len()
            || self.traces.iter().zip(&other.traces).any(|(x, y)| !x.approx_eq(y, trace_eps))
        {
            return Some(Mismatch::Trace);
        }
        if self.cross_ratios.iter().zip(&other.cross_ratios).any(|(x, y)| !x.approx_eq(y, tol.conj)) {
            return Some(Mismatch::CrossRatio);
        }
        if self.angular.iter().zip(&other.angular).any(|(x, y)| (x - y).abs() > tol.conj) {
            return Some(Mismatch::Angular);
        }
        let labels = |p: &PairInvariants| p.cpoints.iter().map(|c| c.label.clone()).collect::<Vec<_>>();
        if labels(self) != labels(other)
            || self
                .cpoints
                .iter()
                .zip(&other.cpoints)
                .any(|(x, y)| x.point.distance(&y.point) > tol.conj)
        {
            return Some(Mismatch::ProjectivePoint);
        }
        None
    }
}

/// `q` with `d q = q λ` for the complex representative `λ` of `[d]`.
fn diagonal_eigen_quat(d: Quaternion) -> Quaternion {
    d.to_complex_conjugator()
}

/// Projective points of a pair read off its canonical form.
pub fn canonical_cpoints(
    frame: &CanonicalFrame,
    nb: &NormalForm,
    ta: HypTag,
    tb: HypTag,
) -> Result<Vec<LabeledCPoint>> {
    let n = frame.a_hat.n();
    let mut out = Vec::new();
    let (fix_a, pol_a) = ta.nonreal_classes();
    let (fix_b, pol_b) = tb.nonreal_classes();
    if fix_a {
        out.push(LabeledCPoint {
            label: "p1(A)".into(),
            point: CPoint::from_quat(diagonal_eigen_quat(frame.a_hat[(0, 0)])),
        });
    }
    if n == 3 && pol_a {
        out.push(LabeledCPoint {
            label: "p2(A)".into(),
            point: CPoint::from_quat(diagonal_eigen_quat(frame.a_hat[(1, 1)])),
        });
    }
    if fix_b {
        let v = frame.t.mul_vec(&nb.fixed_points.attracting);
        out.push(LabeledCPoint { label: "p1(B)".into(), point: CPoint::from_quat(v[n - 1]) });
    }
    if n == 3 && pol_b {
        let v = frame.t.mul_vec(nb.fixed_points.polar.as_ref().expect("polar"));
        let nv = vec_norm(&v);
        let k = (0..n).rev().find(|&k| v[k].norm() >= 1e-6 * nv).unwrap_or(0);
        out.push(LabeledCPoint { label: "p2(B)".into(), point: CPoint::from_quat(v[k]) });
    }
    Ok(out)
}

/// Full invariant bundle of a hyperbolic pair in Sp(2,1) or Sp(1,1).
pub fn pair_invariants(a: &QMatrix, b: &QMatrix, tol: &Tolerances) -> Result<PairInvariants> {
    let g = if a.n() == 3 { Group::Sp21 } else { Group::Sp11 };
    let ta = real_trace(a, g)?;
    let tb = real_trace(b, g)?;
    let ha = hyperbolic_type(&ta, tol).tag;
    let hb = hyperbolic_type(&tb, tol).tag;
    if ha == HypTag::NotHyperbolic || hb == HypTag::NotHyperbolic {
        return Err(Error::NotHyperbolic("pair element is not hyperbolic".into()));
    }
    let na = normal_form(a, tol)?;
    let nb = normal_form(b, tol)?;
    let (cross_ratios, angular) = if g == Group::Sp21 {
        (cross_ratio_triple_nf(&na, &nb, tol)?.x.to_vec(), angular_triple_nf(&na, &nb)?.to_vec())
    } else {
        let (aa, ra) = lifts(&na);
        let (ab, rb) = lifts(&nb);
        (vec![CrossRatioClass::of(cross_ratio(&aa, &ra, &ab, &rb)?)], Vec::new())
    };
    let frame = canonical_frame(a, b, tol)?;
    let cpoints = canonical_cpoints(&frame, &nb, ha, hb)?;
    Ok(PairInvariants { traces: vec![ta, tb], cross_ratios, angular, cpoints })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{infinity, origin};
    use std::f64::consts::PI;

    fn lift(w: &[Quaternion]) -> QVec {
        let mut v = w.to_vec();
        v.push(Quaternion::ONE);
        v
    }

    #[test]
    fn cross_ratio_on_h_line() {
        let x = cross_ratio(&origin(2), &infinity(2), &lift(&[Quaternion::I]), &lift(&[Quaternion::J])).unwrap();
        let c = CrossRatioClass::of(x);
        assert!(c.re.abs() < 1e-15 && (c.modulus - 1.0).abs() < 1e-15);
        assert!((x - (-Quaternion::K)).norm() < 1e-15 || (x - Quaternion::K).norm() < 1e-15);
    }

    #[test]
    fn cross_ratio_rejects_repeated_point() {
        let o = origin(3);
        let z = lift(&[Quaternion::real(-0.5), Quaternion::ONE]);
        assert!(matches!(cross_ratio(&o, &o, &infinity(3), &z), Err(Error::Degenerate(_))));
        let e2 = vec![Quaternion::ZERO, Quaternion::ONE, Quaternion::ZERO];
        let e = cross_ratio(&o, &infinity(3), &z, &e2).unwrap_err();
        assert!(matches!(e, Error::Degenerate(ref m) if m.contains("<z4,z2>")));
    }

    #[test]
    fn angular_examples() {
        let z3 = lift(&[Quaternion::real(-0.5), Quaternion::ONE]);
        assert!(angular(&origin(3), &infinity(3), &z3).unwrap().abs() < 1e-12);
        let z3 = lift(&[Quaternion::I, Quaternion::ZERO]);
        assert!((angular(&origin(3), &infinity(3), &z3).unwrap() - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn cpoint_gauge_laws() {
        assert_eq!(CPoint::from_quat(Quaternion::ONE), CPoint::ZERO_SIDE);
        assert_eq!(CPoint::from_quat(Quaternion::J), CPoint::INF_SIDE);
        let q = Quaternion::new(0.3, -0.4, 1.1, 0.2);
        let p = CPoint::from_quat(q);
        let z = Quaternion::new(-0.7, 1.9, 0.0, 0.0);
        assert!(p.distance(&CPoint::from_quat(q * z)) < 1e-12);
        assert!(p.times_j().distance(&CPoint::from_quat(q * Quaternion::J)) < 1e-12);
        assert_eq!(p.canonical(), p.canonical().canonical());
    }

    #[test]
    fn projective_point_in_diagonal_frame() {
        let e3 = origin(3);
        assert_eq!(projective_point(&e3, &e3, false).unwrap(), CPoint::ZERO_SIDE);
        let vj: QVec = e3.iter().map(|x| *x * Quaternion::J).collect();
        assert_eq!(projective_point(&vj, &e3, false).unwrap(), CPoint::INF_SIDE);
        assert!(projective_point(&e3, &e3, true).is_err());
        assert!(projective_point(&infinity(3), &e3, false).is_err());
    }
}
