//! Real quaternions `r0 + r1 i + r2 j + r3 k`, their similarity classes and
//! centralizers, and the splitting `q = c1 + j c2` over the complex numbers.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quaternion {
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl From<[f64; 4]> for Quaternion {
    fn from(a: [f64; 4]) -> Self {
        Quaternion::new(a[0], a[1], a[2], a[3])
    }
}

impl From<Quaternion> for [f64; 4] {
    fn from(q: Quaternion) -> Self {
        [q.r0, q.r1, q.r2, q.r3]
    }
}

impl From<f64> for Quaternion {
    fn from(x: f64) -> Self {
        Quaternion::real(x)
    }
}

impl From<Complex64> for Quaternion {
    fn from(c: Complex64) -> Self {
        Quaternion::new(c.re, c.im, 0.0, 0.0)
    }
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion { r0: 0.0, r1: 0.0, r2: 0.0, r3: 0.0 };
    pub const ONE: Quaternion = Quaternion { r0: 1.0, r1: 0.0, r2: 0.0, r3: 0.0 };
    pub const I: Quaternion = Quaternion { r0: 0.0, r1: 1.0, r2: 0.0, r3: 0.0 };
    pub const J: Quaternion = Quaternion { r0: 0.0, r1: 0.0, r2: 1.0, r3: 0.0 };
    pub const K: Quaternion = Quaternion { r0: 0.0, r1: 0.0, r2: 0.0, r3: 1.0 };

    pub const fn new(r0: f64, r1: f64, r2: f64, r3: f64) -> Self {
        Quaternion { r0, r1, r2, r3 }
    }

    pub const fn real(x: f64) -> Self {
        Quaternion::new(x, 0.0, 0.0, 0.0)
    }

    /// Pure quaternion with imaginary part `v`.
    pub const fn pure(v: [f64; 3]) -> Self {
        Quaternion::new(0.0, v[0], v[1], v[2])
    }

    /// `e^{i t}` inside the standard complex line.
    pub fn cis(t: f64) -> Self {
        Quaternion::new(t.cos(), t.sin(), 0.0, 0.0)
    }

    /// `cos t + sin t · u` for a unit imaginary direction `u`.
    pub fn from_axis_angle(axis: [f64; 3], t: f64) -> Self {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let s = t.sin() / n;
        Quaternion::new(t.cos(), axis[0] * s, axis[1] * s, axis[2] * s)
    }

    pub fn re(&self) -> f64 {
        self.r0
    }

    pub fn im(&self) -> Quaternion {
        Quaternion::new(0.0, self.r1, self.r2, self.r3)
    }

    pub fn im_vec(&self) -> [f64; 3] {
        [self.r1, self.r2, self.r3]
    }

    pub fn conj(&self) -> Quaternion {
        Quaternion::new(self.r0, -self.r1, -self.r2, -self.r3)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.r0 * self.r0 + self.r1 * self.r1 + self.r2 * self.r2 + self.r3 * self.r3
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn im_norm(&self) -> f64 {
        (self.r1 * self.r1 + self.r2 * self.r2 + self.r3 * self.r3).sqrt()
    }

    pub fn scale(&self, s: f64) -> Quaternion {
        Quaternion::new(self.r0 * s, self.r1 * s, self.r2 * s, self.r3 * s)
    }

    pub fn inv(&self) -> Result<Quaternion> {
        let n = self.norm_sqr();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Domain("inverse of zero quaternion".into()));
        }
        Ok(self.conj().scale(1.0 / n))
    }

    /// Unchecked inverse; zero maps to non-finite entries.
    pub fn recip(&self) -> Quaternion {
        self.conj().scale(1.0 / self.norm_sqr())
    }

    pub fn normalize(&self) -> Quaternion {
        self.scale(1.0 / self.norm())
    }

    pub fn is_finite(&self) -> bool {
        self.r0.is_finite() && self.r1.is_finite() && self.r2.is_finite() && self.r3.is_finite()
    }

    /// `(c1, c2)` with `q = c1 + j c2`.
    pub fn complex_pair(&self) -> (Complex64, Complex64) {
        (Complex64::new(self.r0, self.r1), Complex64::new(self.r2, -self.r3))
    }

    pub fn from_complex_pair(c1: Complex64, c2: Complex64) -> Quaternion {
        Quaternion::new(c1.re, c1.im, c2.re, -c2.im)
    }

    pub fn sim_class(&self) -> Result<SimClass> {
        SimClass::of(self)
    }

    pub fn commutes_with(&self, other: &Quaternion, eps: f64) -> bool {
        let c = *self * *other - *other * *self;
        c.norm() <= eps * (1.0 + self.norm() * other.norm())
    }

    /// Unit `z` with `z⁻¹ q z` equal to the complex representative of `[q]`.
    pub fn to_complex_conjugator(&self) -> Quaternion {
        let n = self.im_norm();
        if n == 0.0 {
            return Quaternion::ONE;
        }
        let u = self.im().scale(1.0 / n);
        // w u w⁻¹ = i, then z = w⁻¹
        let w = rotation_between(u.im_vec(), [1.0, 0.0, 0.0]);
        w.conj()
    }

    /// Matrix of `x ↦ q x q⁻¹` on imaginary parts, for unit `q`.
    pub fn rotation_matrix(&self) -> [[f64; 3]; 3] {
        let q = self.normalize();
        let (w, x, y, z) = (q.r0, q.r1, q.r2, q.r3);
        [
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ]
    }

    /// Unit quaternion whose conjugation action is the rotation `m`.
    pub fn from_rotation_matrix(m: &[[f64; 3]; 3]) -> Quaternion {
        let tr = m[0][0] + m[1][1] + m[2][2];
        let q = if tr > 0.0 {
            let s = (tr + 1.0).sqrt() * 2.0;
            Quaternion::new(
                0.25 * s,
                (m[2][1] - m[1][2]) / s,
                (m[0][2] - m[2][0]) / s,
                (m[1][0] - m[0][1]) / s,
            )
        } else if m[0][0] > m[1][1] && m[0][0] > m[2][2] {
            let s = (1.0 + m[0][0] - m[1][1] - m[2][2]).sqrt() * 2.0;
            Quaternion::new(
                (m[2][1] - m[1][2]) / s,
                0.25 * s,
                (m[0][1] + m[1][0]) / s,
                (m[0][2] + m[2][0]) / s,
            )
        } else if m[1][1] > m[2][2] {
            let s = (1.0 + m[1][1] - m[0][0] - m[2][2]).sqrt() * 2.0;
            Quaternion::new(
                (m[0][2] - m[2][0]) / s,
                (m[0][1] + m[1][0]) / s,
                0.25 * s,
                (m[1][2] + m[2][1]) / s,
            )
        } else {
            let s = (1.0 + m[2][2] - m[0][0] - m[1][1]).sqrt() * 2.0;
            Quaternion::new(
                (m[1][0] - m[0][1]) / s,
                (m[0][2] + m[2][0]) / s,
                (m[1][2] + m[2][1]) / s,
                0.25 * s,
            )
        };
        q.normalize()
    }
}

/// Unit `w` with `w u w⁻¹ = v` for unit imaginary directions `u`, `v`.
pub fn rotation_between(u: [f64; 3], v: [f64; 3]) -> Quaternion {
    let dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let cross = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    let w = Quaternion::new(1.0 + dot, cross[0], cross[1], cross[2]);
    if w.norm() > 1e-8 {
        return w.normalize();
    }
    // antipodal: half-turn about any axis orthogonal to u
    let trial = if u[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let p = [
        u[1] * trial[2] - u[2] * trial[1],
        u[2] * trial[0] - u[0] * trial[2],
        u[0] * trial[1] - u[1] * trial[0],
    ];
    Quaternion::pure(p).normalize()
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:+}i {:+}j {:+}k", self.r0, self.r1, self.r2, self.r3)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.r0 + o.r0, self.r1 + o.r1, self.r2 + o.r2, self.r3 + o.r3)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Quaternion) {
        *self = *self + o;
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.r0 - o.r0, self.r1 - o.r1, self.r2 - o.r2, self.r3 - o.r3)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        self.scale(-1.0)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Quaternion) -> Quaternion {
        let (a1, b1, c1, d1) = (self.r0, self.r1, self.r2, self.r3);
        let (a2, b2, c2, d2) = (o.r0, o.r1, o.r2, o.r3);
        Quaternion::new(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        self.scale(s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    fn mul(self, q: Quaternion) -> Quaternion {
        q.scale(self)
    }
}

impl Div<f64> for Quaternion {
    type Output = Quaternion;
    fn div(self, s: f64) -> Quaternion {
        self.scale(1.0 / s)
    }
}

/// Similarity class `[q]`, determined by real part and modulus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimClass {
    pub re: f64,
    #[serde(rename = "mod")]
    pub modulus: f64,
}

impl SimClass {
    pub fn of(q: &Quaternion) -> Result<SimClass> {
        let m = q.norm();
        if m == 0.0 {
            return Err(Error::Domain("similarity class of zero".into()));
        }
        Ok(SimClass { re: q.r0, modulus: m })
    }

    pub fn from_complex(z: Complex64) -> SimClass {
        SimClass { re: z.re, modulus: z.norm() }
    }

    pub fn theta(&self) -> f64 {
        (self.re / self.modulus).clamp(-1.0, 1.0).acos()
    }

    /// Representative `|q| e^{iθ}` with `θ ∈ [0, π]`.
    pub fn rep(&self) -> Complex64 {
        Complex64::from_polar(self.modulus, self.theta())
    }

    pub fn rep_quat(&self) -> Quaternion {
        self.rep().into()
    }

    pub fn is_real(&self, eps: f64) -> bool {
        let im = (self.modulus * self.modulus - self.re * self.re).max(0.0).sqrt();
        im <= eps * self.modulus
    }

    /// Relative comparison on both coordinates.
    pub fn approx_eq(&self, other: &SimClass, eps: f64) -> bool {
        let scale = 1.0 + self.modulus.max(other.modulus);
        (self.re - other.re).abs() <= eps * scale
            && (self.modulus - other.modulus).abs() <= eps * scale
    }

    pub fn distance(&self, other: &SimClass) -> f64 {
        (self.re - other.re).abs().max((self.modulus - other.modulus).abs())
    }
}

/// `Z(q) = ℝ + ℝq`, or all of ℍ for real `q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Centralizer {
    All,
    /// Span of `1` and the unit imaginary direction.
    Span([f64; 3]),
}

impl Centralizer {
    pub fn of(q: &Quaternion) -> Centralizer {
        let n = q.im_norm();
        if n == 0.0 {
            Centralizer::All
        } else {
            let v = q.im_vec();
            Centralizer::Span([v[0] / n, v[1] / n, v[2] / n])
        }
    }

    pub fn basis(&self) -> Vec<Quaternion> {
        match self {
            Centralizer::All => vec![Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K],
            Centralizer::Span(u) => vec![Quaternion::ONE, Quaternion::pure(*u)],
        }
    }

    /// Whether `x` lies in the centralizer, up to a relative tolerance.
    pub fn contains(&self, x: &Quaternion, eps: f64) -> bool {
        match self {
            Centralizer::All => true,
            Centralizer::Span(u) => {
                let v = x.im_vec();
                let cross = [
                    v[1] * u[2] - v[2] * u[1],
                    v[2] * u[0] - v[0] * u[2],
                    v[0] * u[1] - v[1] * u[0],
                ];
                let c = (cross[0].powi(2) + cross[1].powi(2) + cross[2].powi(2)).sqrt();
                c <= eps * (1.0 + x.norm())
            }
        }
    }
}

pub fn centralizer(q: &Quaternion) -> Centralizer {
    Centralizer::of(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: Quaternion, b: Quaternion) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn multiplication_table() {
        let (i, j, k) = (Quaternion::I, Quaternion::J, Quaternion::K);
        assert_eq!(i * j, k);
        assert_eq!(j * i, -k);
        assert_eq!(i * i, Quaternion::real(-1.0));
        assert_eq!(i * j * k, Quaternion::real(-1.0));
    }

    #[test]
    fn inverse_and_norm() {
        assert_eq!(Quaternion::real(2.0).inv().unwrap(), Quaternion::real(0.5));
        assert!(Quaternion::ZERO.inv().is_err());
        let q = Quaternion::new(1.0, 2.0, 3.0, 4.0);
        assert!((q.norm() - 30f64.sqrt()).abs() < 1e-15);
        assert!(close(q * q.inv().unwrap(), Quaternion::ONE));
    }

    #[test]
    fn sim_class_examples() {
        let c = Quaternion::J.sim_class().unwrap();
        assert_eq!((c.re, c.modulus), (0.0, 1.0));
        assert!((c.rep() - Complex64::i()).norm() < 1e-15);
        let c = Quaternion::real(3.0).sim_class().unwrap();
        assert_eq!(c.rep(), Complex64::new(3.0, 0.0));
        assert!(Quaternion::ZERO.sim_class().is_err());
    }

    #[test]
    fn sim_class_one_plus_ijk() {
        let q = Quaternion::new(1.0, 1.0, 1.0, 1.0);
        let c = q.sim_class().unwrap();
        assert_eq!((c.re, c.modulus), (1.0, 2.0));
        assert!((c.theta() - PI / 3.0).abs() < 1e-15);
        let z = q.to_complex_conjugator();
        let w = z.inv().unwrap() * q * z;
        assert!(close(w, Quaternion::new(1.0, 3f64.sqrt(), 0.0, 0.0)));
    }

    #[test]
    fn centralizer_examples() {
        assert_eq!(centralizer(&Quaternion::real(5.0)), Centralizer::All);
        assert_eq!(centralizer(&Quaternion::I), Centralizer::Span([1.0, 0.0, 0.0]));
        let z = centralizer(&Quaternion::new(1.0, 0.0, 1.0, 0.0));
        assert!(z.contains(&Quaternion::J, 1e-12));
        assert!(!z.contains(&Quaternion::I, 1e-12));
    }

    #[test]
    fn complex_pair_examples() {
        let (c1, c2) = Quaternion::new(1.0, 2.0, 3.0, 4.0).complex_pair();
        assert_eq!((c1, c2), (Complex64::new(1.0, 2.0), Complex64::new(3.0, -4.0)));
        assert_eq!(Quaternion::J.complex_pair(), (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)));
        assert_eq!(Quaternion::I.complex_pair(), (Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn complex_pair_is_c1_plus_j_c2() {
        let q = Quaternion::new(0.3, -1.2, 2.5, 0.7);
        let (c1, c2) = q.complex_pair();
        let back = Quaternion::from(c1) + Quaternion::J * Quaternion::from(c2);
        assert!(close(back, q));
    }

    #[test]
    fn rotation_roundtrip() {
        let q = Quaternion::new(0.3, -0.5, 0.8, 0.1).normalize();
        let m = q.rotation_matrix();
        let p = Quaternion::from_rotation_matrix(&m);
        assert!(close(p, q) || close(p, -q));
        let x = Quaternion::pure([0.2, 0.4, -0.9]);
        let y = q * x * q.conj();
        let mv = [
            m[0][0] * 0.2 + m[0][1] * 0.4 - m[0][2] * 0.9,
            m[1][0] * 0.2 + m[1][1] * 0.4 - m[1][2] * 0.9,
            m[2][0] * 0.2 + m[2][1] * 0.4 - m[2][2] * 0.9,
        ];
        assert!(close(y, Quaternion::pure(mv)));
    }

    #[test]
    fn serde_as_quadruple() {
        let q = Quaternion::new(1.0, 2.0, 3.0, 4.0);
        let s = serde_json::to_string(&q).unwrap();
        assert_eq!(s, "[1.0,2.0,3.0,4.0]");
        let back: Quaternion = serde_json::from_str(&s).unwrap();
        assert_eq!(back, q);
    }
}
