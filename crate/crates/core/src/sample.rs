//! Explicit group elements (Heisenberg translations, dilations, inversion) and
//! seeded random samplers built from them.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::qmat::{Group, QMatrix};
use crate::quat::Quaternion;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// Hyperbolic type requested from a generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TypeRequest {
    Loxodromic,
    OneRealEig,
    TwoRealEig,
    StrictlyHyperbolic,
}

impl std::str::FromStr for TypeRequest {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<TypeRequest> {
        match s {
            "loxodromic" => Ok(TypeRequest::Loxodromic),
            "one-real-eig" => Ok(TypeRequest::OneRealEig),
            "two-real-eig" => Ok(TypeRequest::TwoRealEig),
            "strictly-hyperbolic" => Ok(TypeRequest::StrictlyHyperbolic),
            _ => Err(crate::Error::Domain(format!("unknown type {s}"))),
        }
    }
}

pub fn quat_in_box(rng: &mut impl Rng, half: f64) -> Quaternion {
    Quaternion::new(
        rng.gen_range(-half..=half),
        rng.gen_range(-half..=half),
        rng.gen_range(-half..=half),
        rng.gen_range(-half..=half),
    )
}

pub fn imaginary_in_box(rng: &mut impl Rng, half: f64) -> Quaternion {
    quat_in_box(rng, half).im()
}

pub fn unit_quat(rng: &mut impl Rng) -> Quaternion {
    loop {
        let q = quat_in_box(rng, 1.0);
        let n = q.norm();
        if n > 0.1 && n <= 1.0 {
            return q.normalize();
        }
    }
}

pub fn qmatrix_in_box(rng: &mut impl Rng, n: usize, half: f64) -> QMatrix {
    QMatrix::from_fn(n, |_, _| quat_in_box(rng, half))
}

/// Heisenberg translation by `(ζ, v)` with `v` imaginary.
pub fn heisenberg(zeta: Quaternion, v: Quaternion) -> QMatrix {
    let v = v.im();
    QMatrix::from_rows(vec![
        vec![Quaternion::ONE, -zeta.conj(), Quaternion::real(-zeta.norm_sqr() / 2.0) + v],
        vec![Quaternion::ZERO, Quaternion::ONE, zeta],
        vec![Quaternion::ZERO, Quaternion::ZERO, Quaternion::ONE],
    ])
    .expect("3x3")
}

/// `diag(μ, u, conj(μ)⁻¹)` with unit `u`.
pub fn dilation_sp21(mu: Quaternion, u: Quaternion) -> QMatrix {
    QMatrix::diag(&[mu, u, mu.conj().recip()])
}

pub fn translation_sp11(v: Quaternion) -> QMatrix {
    QMatrix::from_rows(vec![vec![Quaternion::ONE, v.im()], vec![Quaternion::ZERO, Quaternion::ONE]])
        .expect("2x2")
}

pub fn dilation_sp11(mu: Quaternion) -> QMatrix {
    QMatrix::diag(&[mu, mu.conj().recip()])
}

pub fn inversion(n: usize) -> QMatrix {
    QMatrix::antidiag(n)
}

fn modulus(rng: &mut impl Rng) -> f64 {
    (rng.gen_range(-0.7f64..0.7)).exp()
}

/// Random element of the group, a word in translations, dilations and `J`.
pub fn random_element(rng: &mut impl Rng, g: Group) -> QMatrix {
    match g {
        Group::Sp21 => {
            let t1 = heisenberg(quat_in_box(rng, 1.0), imaginary_in_box(rng, 1.0));
            let d = dilation_sp21(unit_quat(rng).scale(modulus(rng)), unit_quat(rng));
            let t2 = heisenberg(quat_in_box(rng, 1.0), imaginary_in_box(rng, 1.0));
            let j = inversion(3);
            &(&(&t1 * &d) * &j) * &t2
        }
        Group::Sp11 => {
            let t1 = translation_sp11(imaginary_in_box(rng, 1.0));
            let d = dilation_sp11(unit_quat(rng).scale(modulus(rng)));
            let t2 = translation_sp11(imaginary_in_box(rng, 1.0));
            &(&(&t1 * &d) * &inversion(2)) * &t2
        }
        Group::Gl2h => loop {
            let m = &QMatrix::identity(2) + &qmatrix_in_box(rng, 2, 0.8);
            let s = m.complexify().svd(false, false).singular_values;
            if s.min() > 0.2 * s.max() {
                return m;
            }
        },
    }
}

/// Angle in `(0, π)` kept away from the endpoints and from `π/2`-free ties.
pub fn generic_angle(rng: &mut impl Rng) -> f64 {
    rng.gen_range(0.15..PI - 0.15)
}

pub fn generic_r(rng: &mut impl Rng) -> f64 {
    rng.gen_range(0.2..0.8)
}

/// Normal-form parameters `(r, θ, φ)` for the requested type.
pub fn params_of_type(rng: &mut impl Rng, t: TypeRequest) -> (f64, f64, f64) {
    let r = generic_r(rng);
    let real_angle = |rng: &mut dyn rand::RngCore| if rng.gen_bool(0.5) { 0.0 } else { PI };
    match t {
        TypeRequest::Loxodromic => (r, generic_angle(rng), generic_angle(rng)),
        TypeRequest::OneRealEig => (r, generic_angle(rng), real_angle(rng)),
        TypeRequest::TwoRealEig => (r, real_angle(rng), generic_angle(rng)),
        TypeRequest::StrictlyHyperbolic => (r, real_angle(rng), real_angle(rng)),
    }
}

/// `S E S⁻¹` for random `S` and the given type.
pub fn random_of_type(rng: &mut impl Rng, g: Group, t: TypeRequest) -> QMatrix {
    let (r, th, ph) = params_of_type(rng, t);
    let s = random_element(rng, g);
    let e = match g {
        Group::Sp21 => QMatrix::e_sp21(r, th, ph),
        Group::Sp11 => QMatrix::e_sp11(r, th),
        Group::Gl2h => QMatrix::diag(&[Quaternion::cis(th).scale(1.0 / r), Quaternion::cis(ph)]),
    };
    let sinv = s.try_inverse().expect("invertible");
    &(&s * &e) * &sinv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::is_member;
    use crate::tol::Tolerances;

    #[test]
    fn generators_preserve_form() {
        let tol = Tolerances::default();
        let mut r = rng(7);
        for _ in 0..50 {
            let z = quat_in_box(&mut r, 2.0);
            let v = imaginary_in_box(&mut r, 2.0);
            assert!(is_member(&heisenberg(z, v), Group::Sp21, &tol).member);
            let mu = quat_in_box(&mut r, 2.0);
            assert!(is_member(&dilation_sp21(mu, unit_quat(&mut r)), Group::Sp21, &tol).member);
            assert!(is_member(&translation_sp11(v), Group::Sp11, &tol).member);
            assert!(is_member(&dilation_sp11(mu), Group::Sp11, &tol).member);
        }
        assert!(is_member(&inversion(3), Group::Sp21, &tol).member);
        assert!(is_member(&inversion(2), Group::Sp11, &tol).member);
    }

    #[test]
    fn random_elements_are_members() {
        let tol = Tolerances::default();
        let mut r = rng(11);
        for g in [Group::Sp21, Group::Sp11, Group::Gl2h] {
            for _ in 0..100 {
                assert!(is_member(&random_element(&mut r, g), g, &tol).member);
            }
        }
    }

    #[test]
    fn seeded_streams_repeat() {
        let a = random_element(&mut rng(3), Group::Sp21);
        let b = random_element(&mut rng(3), Group::Sp21);
        assert_eq!(a, b);
    }
}
