//! Real traces, hyperbolic types, trace domains and normal forms.

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{complex_eigenvalues, right_eigen, EigenDatum, Group, HermForm, QMatrix, QVec};
use crate::quat::Quaternion;
use crate::tol::Tolerances;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealTrace {
    pub group: Group,
    /// `(a, b, c)` for Sp(2,1) and GL(2,ℍ), `(a, b)` for Sp(1,1).
    pub coeffs: Vec<f64>,
    /// `det A_ℂ` before normalization (GL(2,ℍ) only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub det: Option<f64>,
}

impl RealTrace {
    pub fn a(&self) -> f64 {
        self.coeffs[0]
    }
    pub fn b(&self) -> f64 {
        self.coeffs[1]
    }
    pub fn c(&self) -> f64 {
        self.coeffs[2]
    }

    pub fn max_diff(&self, other: &RealTrace) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &RealTrace, eps: f64) -> bool {
        let scale = 1.0 + self.coeffs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        self.group == other.group
            && self.coeffs.len() == other.coeffs.len()
            && self.max_diff(other) <= eps * scale
    }
}

/// Monic characteristic polynomial from its roots; `p[k]` multiplies `x^k`.
pub fn poly_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut p = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut q = vec![Complex64::new(0.0, 0.0); p.len() + 1];
        for (k, c) in p.iter().enumerate() {
            q[k + 1] += c;
            q[k] -= c * r;
        }
        p = q;
    }
    p
}

/// Diagnostics of the characteristic polynomial read-off.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceResidual {
    pub imag: f64,
    pub mirror: f64,
}

/// Real trace with the size of the imaginary parts and palindromic gaps.
pub fn real_trace_with_residual(a: &QMatrix, g: Group) -> Result<(RealTrace, TraceResidual)> {
    if a.n() != g.dim() {
        return Err(Error::Dimension { expected: g.dim(), got: a.n() });
    }
    let mut vals = complex_eigenvalues(&a.complexify())?;
    let mut det = None;
    if g == Group::Gl2h {
        let d: Complex64 = vals.iter().product();
        if d.norm() == 0.0 {
            return Err(Error::NotMember("singular matrix".into()));
        }
        let s = d.re.abs().powf(0.25);
        vals.iter_mut().for_each(|z| *z /= s);
        det = Some(d.re);
    }
    let p = poly_from_roots(&vals);
    let deg = p.len() - 1;
    let scale = p.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let imag = p.iter().map(|z| z.im.abs()).fold(0.0, f64::max) / scale;
    let coeffs;
    let mut mirror = 0.0;
    match g {
        Group::Gl2h => {
            coeffs = vec![-p[3].re, p[2].re, -p[1].re];
        }
        _ => {
            for k in 0..=deg / 2 {
                mirror = f64::max(mirror, (p[k] - p[deg - k]).norm() / scale);
            }
            let sym = |k: usize| 0.5 * (p[k].re + p[deg - k].re);
            coeffs = if g == Group::Sp21 {
                vec![-sym(5), sym(4), -sym(3)]
            } else {
                vec![-sym(3), sym(2)]
            };
        }
    }
    if imag > 1e-6 || mirror > 1e-6 {
        return Err(Error::NotMember(format!(
            "characteristic polynomial not real palindromic (imag {imag:e}, mirror {mirror:e})"
        )));
    }
    Ok((RealTrace { group: g, coeffs, det }, TraceResidual { imag, mirror }))
}

pub fn real_trace(a: &QMatrix, g: Group) -> Result<RealTrace> {
    real_trace_with_residual(a, g).map(|t| t.0)
}

/// `(a, b, c)` of `E(r, θ, φ)` in closed form.
pub fn trace_from_params(r: f64, theta: f64, phi: f64) -> [f64; 3] {
    let s = r + 1.0 / r;
    let q = r * r + 1.0 / (r * r);
    let (ct, cp) = (theta.cos(), phi.cos());
    [
        2.0 * s * ct + 2.0 * cp,
        4.0 * s * ct * cp + 4.0 * ct * ct + q + 1.0,
        4.0 * s * ct + 2.0 * (q + 4.0 * ct * ct) * cp,
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HypTag {
    Loxodromic,
    OneRealEig,
    TwoRealEig,
    StrictlyHyperbolic,
    NotHyperbolic,
}

impl HypTag {
    /// Whether the fixed-point-line class and the polar class are non-real.
    pub fn nonreal_classes(&self) -> (bool, bool) {
        match self {
            HypTag::Loxodromic => (true, true),
            HypTag::OneRealEig => (true, false),
            HypTag::TwoRealEig => (false, true),
            HypTag::StrictlyHyperbolic | HypTag::NotHyperbolic => (false, false),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypType {
    pub tag: HypTag,
    pub delta: f64,
    pub g: f64,
    pub h: f64,
    pub abs_2a_c: f64,
    pub abs_2b_2: f64,
    /// A decision quantity sat close to its threshold.
    pub marginal: bool,
}

fn cubic_roots(a: f64, b: f64, c: f64) -> Vec<Complex64> {
    // t³ - a t² + (b-3) t - (c-2a)
    let m = Matrix3::new(a, -(b - 3.0), c - 2.0 * a, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
    m.complex_eigenvalues().iter().copied().collect()
}

/// Type of an Sp(2,1) or Sp(1,1) element from its real trace.
pub fn hyperbolic_type(t: &RealTrace, tol: &Tolerances) -> HypType {
    match t.group {
        Group::Sp11 => hyperbolic_type_sp11(t, tol),
        _ => hyperbolic_type_sp21(t, tol),
    }
}

fn hyperbolic_type_sp21(t: &RealTrace, tol: &Tolerances) -> HypType {
    let (a, b, c) = (t.a(), t.b(), t.c());
    let g = 27.0 * (a - c) + 9.0 * a * b - 2.0 * a.powi(3);
    let h = 3.0 * (b - 3.0) - a * a;
    let delta = g * g + 4.0 * h.powi(3);
    let dscale = 1.0 + g * g + 4.0 * h.abs().powi(3);
    let dband = tol.typ * dscale;
    let (l, r) = ((2.0 * a + c).abs(), (2.0 * b + 2.0).abs());
    let eband = tol.typ * (1.0 + r);
    let real_eig = (l - r).abs() <= eband;
    let marginal = (delta.abs() > dband && delta.abs() <= 1e3 * dband)
        || ((l - r).abs() > eband && (l - r).abs() <= 1e3 * eband);
    let tag = if delta > dband {
        if real_eig {
            HypTag::OneRealEig
        } else {
            HypTag::Loxodromic
        }
    } else if delta < -dband {
        HypTag::NotHyperbolic
    } else {
        let outside = cubic_roots(a, b, c)
            .iter()
            .any(|z| z.im.abs() <= 1e-4 * (1.0 + z.re.abs()) && z.re.abs() > 2.0 + 1e-4);
        match (outside, real_eig) {
            (false, _) => HypTag::NotHyperbolic,
            (true, false) => HypTag::TwoRealEig,
            (true, true) => HypTag::StrictlyHyperbolic,
        }
    };
    HypType { tag, delta, g, h, abs_2a_c: l, abs_2b_2: r, marginal }
}

/// Negative discriminant of `t² - a t + (b - 2)`.
pub fn delta_sp11(t: &RealTrace) -> f64 {
    4.0 * (t.b() - 2.0) - t.a() * t.a()
}

fn hyperbolic_type_sp11(t: &RealTrace, tol: &Tolerances) -> HypType {
    let (a, b) = (t.a(), t.b());
    let delta = delta_sp11(t);
    let band = tol.typ * (1.0 + a * a + b.abs());
    let marginal = delta.abs() > band && delta.abs() <= 1e3 * band;
    let tag = if delta > band {
        HypTag::Loxodromic
    } else if delta < -band {
        HypTag::NotHyperbolic
    } else if a.abs() / 2.0 > 2.0 + 1e-4 {
        HypTag::StrictlyHyperbolic
    } else {
        HypTag::NotHyperbolic
    };
    HypType { tag, delta, g: f64::NAN, h: f64::NAN, abs_2a_c: f64::NAN, abs_2b_2: f64::NAN, marginal }
}

/// Sp(1,1) loxodromic traces: `4(b - 2) - a² > 0`.
pub fn in_d1(t: &RealTrace, tol: &Tolerances) -> bool {
    t.group == Group::Sp11 && hyperbolic_type_sp11(t, tol).tag == HypTag::Loxodromic
}

/// Sp(2,1) loxodromic traces.
pub fn in_d2(t: &RealTrace, tol: &Tolerances) -> bool {
    t.group == Group::Sp21 && hyperbolic_type_sp21(t, tol).tag == HypTag::Loxodromic
}

/// Normalized GL(2,ℍ) traces of 3-simple loxodromics: `a ≠ c` and no real
/// root of `x⁴ - a x³ + b x² - c x + 1`.
pub fn in_d3(t: &RealTrace, tol: &Tolerances) -> bool {
    if t.group != Group::Gl2h {
        return false;
    }
    let (a, b, c) = (t.a(), t.b(), t.c());
    if (a - c).abs() <= tol.typ * (1.0 + a.abs() + c.abs()) {
        return false;
    }
    let roots = poly_roots_quartic(a, b, c);
    roots.iter().all(|z| z.im.abs() > 1e-6 * (1.0 + z.norm()))
}

fn poly_roots_quartic(a: f64, b: f64, c: f64) -> Vec<Complex64> {
    let m = nalgebra::Matrix4::new(
        a, -b, c, -1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0,
    );
    m.complex_eigenvalues().iter().copied().collect()
}

/// `A = C E C⁻¹` with `C` in the group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalForm {
    #[serde(rename = "C")]
    pub c: QMatrix,
    pub r: f64,
    pub theta: f64,
    /// Polar rotation angle (Sp(2,1) only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    pub fixed_points: FixedPoints,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPoints {
    /// Eigenvector of the class with modulus below one.
    pub attracting: QVec,
    pub repelling: QVec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polar: Option<QVec>,
}

impl NormalForm {
    pub fn e(&self) -> QMatrix {
        match self.phi {
            Some(phi) => QMatrix::e_sp21(self.r, self.theta, phi),
            None => QMatrix::e_sp11(self.r, self.theta),
        }
    }

    pub fn group(&self) -> Group {
        if self.phi.is_some() {
            Group::Sp21
        } else {
            Group::Sp11
        }
    }

    pub fn c_inv(&self) -> QMatrix {
        let h = self.group().form().expect("form");
        self.c.form_inverse(&h)
    }
}

fn pick_classes(eig: &[EigenDatum], n: usize, tol: &Tolerances) -> Result<Vec<EigenDatum>> {
    let mut flat: Vec<EigenDatum> = Vec::new();
    for d in eig {
        for _ in 0..d.mult {
            flat.push(d.clone());
        }
    }
    if flat.len() != n {
        return Err(Error::Numerical("eigenvalue multiplicities do not add up".into()));
    }
    let hi = &flat[0];
    let lo = &flat[n - 1];
    let gap = 1e-6f64.max(tol.nf);
    if hi.cls.modulus <= 1.0 + gap || lo.cls.modulus >= 1.0 - gap {
        return Err(Error::NotHyperbolic(format!(
            "eigenvalue moduli {} and {} do not straddle 1",
            lo.cls.modulus, hi.cls.modulus
        )));
    }
    if n == 3 && (flat[1].cls.modulus - 1.0).abs() > 1e-6 {
        return Err(Error::NotHyperbolic("middle eigenvalue class is not unimodular".into()));
    }
    Ok(flat)
}

pub fn normal_form(a: &QMatrix, tol: &Tolerances) -> Result<NormalForm> {
    let n = a.n();
    let g = match n {
        3 => Group::Sp21,
        2 => Group::Sp11,
        _ => return Err(Error::Dimension { expected: 3, got: n }),
    };
    let h = HermForm::h1(n);
    let eig = right_eigen(a, tol)?;
    let flat = pick_classes(&eig, n, tol)?;
    let rep_d = &flat[0];
    let att_d = &flat[n - 1];
    let r = att_d.cls.modulus;
    let theta = att_d.cls.theta();
    let rv = rep_d.vec.clone();
    let p = h.pair(&att_d.vec, &rv);
    if p.norm() <= 1e-10 {
        return Err(Error::Numerical("attracting and repelling lifts are orthogonal".into()));
    }
    let pinv = p.recip();
    let av: QVec = att_d.vec.iter().map(|z| *z * pinv).collect();
    let (phi, xv) = if n == 3 {
        let x = flat[1].vec.clone();
        let xx = h.pair(&x, &x).r0;
        if xx <= 0.0 {
            return Err(Error::Numerical("polar eigenvector is not positive".into()));
        }
        let s = 1.0 / xx.sqrt();
        (Some(flat[1].cls.theta()), Some(x.iter().map(|z| z.scale(s)).collect::<QVec>()))
    } else {
        (None, None)
    };
    let cols: Vec<QVec> = match &xv {
        Some(x) => vec![av.clone(), x.clone(), rv.clone()],
        None => vec![av.clone(), rv.clone()],
    };
    let c = QMatrix::from_columns(&cols);
    let mut nf = NormalForm {
        c,
        r,
        theta,
        phi,
        fixed_points: FixedPoints { attracting: av, repelling: rv, polar: xv },
        residual: 0.0,
    };
    let rec = &(&nf.c * &nf.e()) * &nf.c_inv();
    nf.residual = rec.dist(a) / a.frobenius().max(1.0);
    // the defect of C*HC grows with ‖C‖²
    let scale = (nf.c.frobenius().powi(2) / n as f64).max(1.0);
    let mem = crate::qmat::is_member(&nf.c, g, &Tolerances { grp: 1e-6 * scale, ..*tol });
    if nf.residual > tol.nf.max(1e-8) * 10.0 || !mem.member {
        return Err(Error::Numerical(format!(
            "normal form residual {:e}, frame form residual {:e}",
            nf.residual, mem.residual
        )));
    }
    Ok(nf)
}

/// Whether forward iteration of `A` from an interior point approaches the
/// eigenline of the class with modulus below one.
pub fn forward_orbit_hits_small_class(a: &QMatrix, tol: &Tolerances) -> Result<bool> {
    let nf = normal_form(a, tol)?;
    let n = a.n();
    let mut z: QVec = (0..n).map(|k| Quaternion::new(0.3 + k as f64, 0.1, -0.2, 0.05 * k as f64)).collect();
    for _ in 0..200 {
        z = a.mul_vec(&z);
        let s = crate::qmat::vec_norm(&z);
        z.iter_mut().for_each(|q| *q = q.scale(1.0 / s));
    }
    let da = crate::model::proj_distance(&nf.fixed_points.attracting, &z);
    let dr = crate::model::proj_distance(&nf.fixed_points.repelling, &z);
    Ok(da < dr)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Gl2Class {
    ThreeSimple { r: f64, s: f64, theta: f64, phi: f64, trace: RealTrace },
    Other { reason: String },
}

pub fn gl2_classify(a: &QMatrix, tol: &Tolerances) -> Result<Gl2Class> {
    if a.n() != 2 {
        return Err(Error::Dimension { expected: 2, got: a.n() });
    }
    let eig = right_eigen(a, tol)?;
    if eig.len() != 2 {
        return Ok(Gl2Class::Other { reason: "repeated eigenvalue class".into() });
    }
    let (e1, e2) = (&eig[0], &eig[1]);
    if e1.cls.is_real(1e-9) || e2.cls.is_real(1e-9) {
        return Ok(Gl2Class::Other { reason: "real eigenvalue class".into() });
    }
    let (r, s) = (e1.cls.modulus, e2.cls.modulus);
    let (theta, phi) = (e1.cls.theta(), e2.cls.theta());
    let trace = real_trace(a, Group::Gl2h)?;
    if !in_d3(&trace, tol) {
        return Ok(Gl2Class::Other { reason: "equal moduli or equal rotation angles".into() });
    }
    Ok(Gl2Class::ThreeSimple { r, s, theta, phi, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn identity_trace() {
        let t = real_trace(&QMatrix::identity(3), Group::Sp21).unwrap();
        for (x, y) in t.coeffs.iter().zip([6.0, 15.0, 20.0]) {
            assert!((x - y).abs() < 1e-12);
        }
        assert_eq!(hyperbolic_type(&t, &tol()).tag, HypTag::NotHyperbolic);
    }

    #[test]
    fn trace_of_e_half_right_angles() {
        let t = real_trace(&QMatrix::e_sp21(0.5, PI / 2.0, PI / 2.0), Group::Sp21).unwrap();
        for (x, y) in t.coeffs.iter().zip([0.0, 21.0 / 4.0, 0.0]) {
            assert!((x - y).abs() < 1e-12, "{:?}", t.coeffs);
        }
        let ty = hyperbolic_type(&t, &tol());
        assert_eq!(ty.tag, HypTag::Loxodromic);
        assert!((ty.delta - 4.0 * (27.0f64 / 4.0).powi(3)).abs() < 1e-9);
        assert!(in_d2(&t, &tol()));
    }

    #[test]
    fn boundary_types() {
        let t = real_trace(&QMatrix::e_sp21(0.5, 0.0, 0.0), Group::Sp21).unwrap();
        let ty = hyperbolic_type(&t, &tol());
        assert_eq!(ty.tag, HypTag::StrictlyHyperbolic);
        assert!(!in_d2(&t, &tol()));
        assert!((t.a() - 7.0).abs() < 1e-12);
        let t = real_trace(&QMatrix::e_sp21(0.5, PI / 2.0, 0.0), Group::Sp21).unwrap();
        assert_eq!(hyperbolic_type(&t, &tol()).tag, HypTag::OneRealEig);
        let t = real_trace(&QMatrix::e_sp21(0.5, PI, 1.0), Group::Sp21).unwrap();
        assert_eq!(hyperbolic_type(&t, &tol()).tag, HypTag::TwoRealEig);
    }

    #[test]
    fn d1_membership() {
        let t = RealTrace { group: Group::Sp11, coeffs: vec![0.0, 3.0], det: None };
        assert!(in_d1(&t, &tol()));
        let e = real_trace(&QMatrix::e_sp11(0.5, 0.0), Group::Sp11).unwrap();
        assert!((4.0 * e.b() - e.a() * e.a() - 8.0).abs() < 1e-12);
        assert!(!in_d1(&e, &tol()));
        assert_eq!(hyperbolic_type(&e, &tol()).tag, HypTag::StrictlyHyperbolic);
    }

    #[test]
    fn normal_form_of_diagonal() {
        let e = QMatrix::e_sp21(0.5, PI / 3.0, PI / 4.0);
        let nf = normal_form(&e, &tol()).unwrap();
        assert!((nf.r - 0.5).abs() < 1e-12);
        assert!((nf.theta - PI / 3.0).abs() < 1e-12);
        assert!((nf.phi.unwrap() - PI / 4.0).abs() < 1e-12);
        assert!(nf.fixed_points.attracting[0].norm() > 0.99);
        assert!(nf.fixed_points.repelling[2].norm() > 0.99);
    }

    #[test]
    fn strictly_hyperbolic_normal_form() {
        let nf = normal_form(&QMatrix::e_sp21(0.5, 0.0, 0.0), &tol()).unwrap();
        assert_eq!((nf.theta, nf.phi), (0.0, Some(0.0)));
    }

    #[test]
    fn gl2_examples() {
        let a = QMatrix::diag(&[Quaternion::cis(PI / 3.0).scale(2.0), Quaternion::cis(PI / 4.0)]);
        match gl2_classify(&a, &tol()).unwrap() {
            Gl2Class::ThreeSimple { r, s, theta, phi, trace } => {
                assert!((r - 2.0).abs() < 1e-12 && (s - 1.0).abs() < 1e-12);
                assert!((theta - PI / 3.0).abs() < 1e-12 && (phi - PI / 4.0).abs() < 1e-12);
                assert!((trace.det.unwrap() - 4.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        let b = QMatrix::diag(&[Quaternion::real(2.0), Quaternion::real(3.0)]);
        assert!(matches!(gl2_classify(&b, &tol()).unwrap(), Gl2Class::Other { .. }));
    }

    #[test]
    fn attracting_label_versus_dynamics() {
        let e = QMatrix::e_sp21(0.5, 1.0, 2.0);
        assert!(!forward_orbit_hits_small_class(&e, &tol()).unwrap());
    }
}
