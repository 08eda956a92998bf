//! Projective model of quaternionic hyperbolic space over the Siegel form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{vec_norm, HermForm, QVec};
use crate::quat::Quaternion;
use crate::tol::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointClass {
    Negative,
    Null,
    Positive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelPoint {
    pub lift: QVec,
    pub cls: PointClass,
    /// Nonzero norm that fell inside the null band.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub marginal: bool,
}

impl ModelPoint {
    /// `w_i = z_i z_{n+1}⁻¹`, or `None` at ∞.
    pub fn coords(&self) -> Option<QVec> {
        let last = *self.lift.last()?;
        if last.norm() <= 1e-14 * vec_norm(&self.lift) {
            return None;
        }
        let inv = last.recip();
        Some(self.lift[..self.lift.len() - 1].iter().map(|z| *z * inv).collect())
    }

    pub fn is_null(&self) -> bool {
        self.cls == PointClass::Null
    }
}

pub fn origin(n: usize) -> QVec {
    let mut v = vec![Quaternion::ZERO; n];
    v[n - 1] = Quaternion::ONE;
    v
}

pub fn infinity(n: usize) -> QVec {
    let mut v = vec![Quaternion::ZERO; n];
    v[0] = Quaternion::ONE;
    v
}

pub fn classify_point(z: &[Quaternion], tol: &Tolerances) -> Result<ModelPoint> {
    let nz = vec_norm(z);
    if nz == 0.0 {
        return Err(Error::Domain("zero vector has no projective class".into()));
    }
    let h = HermForm::h1(z.len());
    let v = h.pair(z, z).r0;
    let band = tol.cls * nz * nz;
    let (cls, marginal) = if v.abs() <= band {
        (PointClass::Null, v != 0.0)
    } else if v < 0.0 {
        (PointClass::Negative, false)
    } else {
        (PointClass::Positive, false)
    };
    Ok(ModelPoint { lift: z.to_vec(), cls, marginal })
}

/// `(w_1, …, w_n, 1)`.
pub fn standard_lift(w: &[Quaternion], tol: &Tolerances) -> ModelPoint {
    let mut lift = w.to_vec();
    lift.push(Quaternion::ONE);
    classify_point(&lift, tol).expect("standard lift is nonzero")
}

/// Bergman distance between negative points.
pub fn bergman_dist(z: &ModelPoint, w: &ModelPoint) -> Result<f64> {
    if z.cls != PointClass::Negative || w.cls != PointClass::Negative {
        return Err(Error::Domain("Bergman distance needs two negative points".into()));
    }
    let h = HermForm::h1(z.lift.len());
    let zw = h.pair(&z.lift, &w.lift);
    let wz = h.pair(&w.lift, &z.lift);
    let zz = h.pair(&z.lift, &z.lift).r0;
    let ww = h.pair(&w.lift, &w.lift).r0;
    let c2 = (zw * wz).r0 / (zz * ww);
    Ok(2.0 * c2.max(1.0).sqrt().acosh())
}

/// Distance of `w`'s direction from the right ℍ-line through `z`, in `[0, 1]`.
pub fn proj_distance(z: &[Quaternion], w: &[Quaternion]) -> f64 {
    let nz = vec_norm(z);
    let nw = vec_norm(w);
    let mut ip = Quaternion::ZERO;
    for k in 0..z.len() {
        ip += z[k].conj() * w[k];
    }
    let c = ip.scale(1.0 / (nz * nz));
    let mut r = 0.0;
    for k in 0..z.len() {
        r += (w[k] - z[k] * c).norm_sqr();
    }
    r.sqrt() / nw
}

pub fn proj_equal(z: &[Quaternion], w: &[Quaternion], tol: &Tolerances) -> bool {
    proj_distance(z, w) <= tol.proj
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(x: f64) -> Quaternion {
        Quaternion::real(x)
    }

    #[test]
    fn classification_examples() {
        let tol = Tolerances::default();
        assert_eq!(classify_point(&origin(3), &tol).unwrap().cls, PointClass::Null);
        let p = classify_point(&[q(-0.5), q(1.0), q(1.0)], &tol).unwrap();
        assert_eq!(p.cls, PointClass::Null);
        let p = classify_point(&[q(1.0), q(0.0), q(1.0)], &tol).unwrap();
        assert_eq!(p.cls, PointClass::Positive);
        assert!(classify_point(&[q(0.0); 3], &tol).is_err());
    }

    #[test]
    fn standard_lift_examples() {
        let tol = Tolerances::default();
        assert_eq!(standard_lift(&[q(0.0), q(0.0)], &tol).lift, origin(3));
        let p = standard_lift(&[Quaternion::I, q(0.0)], &tol);
        assert_eq!(p.cls, PointClass::Null);
        let p = standard_lift(&[q(-1.0), q(1.0)], &tol);
        assert_eq!(p.cls, PointClass::Negative);
        assert_eq!(p.coords().unwrap(), vec![q(-1.0), q(1.0)]);
    }

    #[test]
    fn bergman_examples() {
        let tol = Tolerances::default();
        let z = standard_lift(&[q(-1.0), q(0.0)], &tol);
        let w = standard_lift(&[q(-2.0), q(0.0)], &tol);
        assert_eq!(bergman_dist(&z, &z).unwrap(), 0.0);
        let rho = bergman_dist(&z, &w).unwrap();
        assert!(((rho / 2.0).cosh().powi(2) - 9.0 / 8.0).abs() < 1e-12);
        let o = classify_point(&origin(3), &tol).unwrap();
        assert!(bergman_dist(&o, &z).is_err());
    }

    #[test]
    fn projective_equality() {
        let tol = Tolerances::default();
        let z = vec![Quaternion::new(0.3, 1.0, -0.2, 0.5), q(2.0), Quaternion::J];
        let c = Quaternion::new(0.1, -2.0, 0.7, 0.4);
        let zc: QVec = z.iter().map(|x| *x * c).collect();
        assert!(proj_equal(&z, &zc, &tol));
        assert!(!proj_equal(&origin(3), &infinity(3), &tol));
        let mut zp = z.clone();
        zp[1] = zp[1] + Quaternion::real(1e-14);
        assert!(proj_equal(&z, &zp, &tol));
    }
}
