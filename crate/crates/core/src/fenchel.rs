//! Twist-bends, gluing of pants groups, and genus-g assembly.
//!
//! Conventions:
//! - a gluing `[v, s, w, t]` identifies peripheral `P(v,s)` with the inverse of
//!   `P(w,t)`;
//! - its twist-bend commutes with `P(w,t)`;
//! - pants slots are `0: A`, `1: B`, `2: (AB)⁻¹`.

use std::collections::VecDeque;
use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{normal_form, NormalForm};
use crate::error::{Error, Result};
use crate::invariants::{angular, cross_ratio, pair_invariants, CPoint, CrossRatioClass, PairInvariants};
use crate::qmat::{is_member, Group, QMatrix};
use crate::quat::Quaternion;
use crate::sample::{dilation_sp21, heisenberg, imaginary_in_box, quat_in_box, random_element, unit_quat, SeededRng};
use crate::tol::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistBend {
    pub s: f64,
    pub psi: f64,
    pub xi: f64,
    pub k1: CPoint,
    pub k2: CPoint,
}

impl TwistBend {
    pub fn trivial() -> TwistBend {
        TwistBend { s: 1.0, psi: 0.0, xi: 0.0, k1: CPoint::ZERO_SIDE, k2: CPoint::ZERO_SIDE }
    }

    /// `(s, ψ, ξ, k1, k2)` flattened with each point as its two sphere angles.
    pub fn real_params(&self) -> [f64; 7] {
        let [p1, a1] = self.k1.angles();
        let [p2, a2] = self.k2.angles();
        [self.s, self.psi, self.xi, p1, a1, p2, a2]
    }

    pub fn distance(&self, other: &TwistBend) -> f64 {
        let d = (self.s - other.s).abs().max((self.psi - other.psi).abs()).max((self.xi - other.xi).abs());
        d.max(self.k1.distance(&other.k1)).max(self.k2.distance(&other.k2))
    }

    fn validate(&self) -> Result<()> {
        let in_range = |x: f64| (0.0..=PI).contains(&x);
        if !(self.s >= 1.0) || !in_range(self.psi) || !in_range(self.xi) {
            return Err(Error::Domain(format!(
                "twist-bend needs s >= 1 and angles in [0, pi], got ({}, {}, {})",
                self.s, self.psi, self.xi
            )));
        }
        Ok(())
    }

    /// Random twist-bend whose points are the two commuting choices.
    pub fn random(rng: &mut impl Rng) -> TwistBend {
        let side = |rng: &mut dyn rand::RngCore| if rng.gen_bool(0.5) { CPoint::ZERO_SIDE } else { CPoint::INF_SIDE };
        TwistBend {
            s: rng.gen_range(1.0..2.5),
            psi: rng.gen_range(0.1..PI - 0.1),
            xi: rng.gen_range(0.1..PI - 0.1),
            k1: side(rng),
            k2: side(rng),
        }
    }
}

fn sp21_only(a: &QMatrix) -> Result<()> {
    if a.n() != 3 {
        return Err(Error::Dimension { expected: 3, got: a.n() });
    }
    Ok(())
}

fn rel_commutator(a: &QMatrix, k: &QMatrix) -> f64 {
    a.commutator_norm(k) / (a.frobenius() * k.frobenius()).max(1e-300)
}

/// `K = Q D E(s, ψ, ξ) D⁻¹ Q⁻¹` with `D = diag(q, u, q)` taken from `k1`, `k2`.
///
/// Points other than `[1:0]` and `[0:1]` break commutation with a loxodromic
/// anchor whose rotation angles are not real; such requests are rejected.
pub fn realize_twist(a: &QMatrix, kappa: &TwistBend, tol: &Tolerances) -> Result<QMatrix> {
    sp21_only(a)?;
    kappa.validate()?;
    let nf = normal_form(a, tol)?;
    realize_twist_nf(a, &nf, kappa, tol)
}

fn realize_twist_nf(a: &QMatrix, nf: &NormalForm, kappa: &TwistBend, tol: &Tolerances) -> Result<QMatrix> {
    let q = kappa.k1.to_quat();
    let u = kappa.k2.to_quat();
    let d = QMatrix::diag(&[q, u, q]);
    let d_inv = QMatrix::diag(&[q.conj(), u.conj(), q.conj()]);
    let e = QMatrix::e_sp21(kappa.s, kappa.psi, kappa.xi);
    let k = &(&(&(&nf.c * &d) * &e) * &d_inv) * &nf.c_inv();
    let comm = rel_commutator(a, &k);
    if comm > tol.conj {
        return Err(Error::Incompatible(format!("twist-bend does not commute with its anchor (residual {comm:e})")));
    }
    // roundoff in K*HK grows with ‖K‖²
    let scale = (k.frobenius().powi(2) / 3.0).max(1.0);
    let m = is_member(&k, Group::Sp21, &Tolerances { grp: tol.conj * scale, ..*tol });
    if !m.member {
        return Err(Error::NotMember(format!("twist-bend leaves the group (residual {:e})", m.residual)));
    }
    Ok(k)
}

/// `(X̃1, X̃2, Ã1, Ã3)` measured on `(a_A, r_A, K r_C, a_B)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistInvariants {
    pub x1: CrossRatioClass,
    pub x2: CrossRatioClass,
    pub a1: f64,
    pub a3: f64,
}

impl TwistInvariants {
    pub fn approx_eq(&self, other: &TwistInvariants, eps: f64) -> bool {
        self.x1.approx_eq(&other.x1, eps)
            && self.x2.approx_eq(&other.x2, eps)
            && (self.a1 - other.a1).abs() <= eps
            && (self.a3 - other.a3).abs() <= eps
    }
}

pub fn twist_invariants(a: &QMatrix, b: &QMatrix, c: &QMatrix, k: &QMatrix, tol: &Tolerances) -> Result<TwistInvariants> {
    let (na, nb, nc) = (normal_form(a, tol)?, normal_form(b, tol)?, normal_form(c, tol)?);
    let z1 = &na.fixed_points.attracting;
    let z2 = &na.fixed_points.repelling;
    let z3 = k.mul_vec(&nc.fixed_points.repelling);
    let z4 = &nb.fixed_points.attracting;
    Ok(TwistInvariants {
        x1: CrossRatioClass::of(cross_ratio(z1, z2, &z3, z4)?),
        x2: CrossRatioClass::of(cross_ratio(z1, z4, &z3, z2)?),
        a1: angular(z1, z2, &z3)?,
        a3: angular(z2, &z3, z4)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub label: String,
    pub value: f64,
}

/// Real coordinates in assembly order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ledger(pub Vec<LedgerEntry>);

impl Ledger {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn push(&mut self, label: impl Into<String>, value: f64) {
        self.0.push(LedgerEntry { label: label.into(), value });
    }

    fn extend(&mut self, other: Ledger) {
        self.0.extend(other.0);
    }

    pub fn values(&self) -> Vec<f64> {
        self.0.iter().map(|e| e.value).collect()
    }

    /// Largest entrywise gap; infinite when labels differ.
    pub fn max_diff(&self, other: &Ledger) -> f64 {
        if self.len() != other.len() || self.0.iter().zip(&other.0).any(|(x, y)| x.label != y.label) {
            return f64::INFINITY;
        }
        self.0.iter().zip(&other.0).map(|(x, y)| (x.value - y.value).abs()).fold(0.0, f64::max)
    }
}

fn twist_entries(prefix: &str, kappa: &TwistBend) -> Ledger {
    let names = ["s", "psi", "xi", "k1.polar", "k1.azimuth", "k2.polar", "k2.azimuth"];
    let mut l = Ledger::default();
    for (n, v) in names.iter().zip(kappa.real_params()) {
        l.push(format!("{prefix}.{n}"), v);
    }
    l
}

fn trace_entries(l: &mut Ledger, label: &str, inv: &PairInvariants, idx: usize) {
    for (name, v) in ["a", "b", "c"].iter().zip(&inv.traces[idx].coeffs) {
        l.push(format!("tr({label}).{name}"), *v);
    }
}

fn cross_entries(l: &mut Ledger, pair: &str, inv: &PairInvariants) {
    for k in 0..2 {
        let x = &inv.cross_ratios[k];
        l.push(format!("X{}({pair}).re", k + 1), x.re);
        l.push(format!("X{}({pair}).mod", k + 1), x.modulus);
    }
}

fn angular_entries(l: &mut Ledger, pair: &str, inv: &PairInvariants) {
    for (k, v) in inv.angular.iter().enumerate() {
        l.push(format!("A{}({pair})", k + 1), *v);
    }
}

fn point_entries(l: &mut Ledger, inv: &PairInvariants, from: &str, rename: &str) {
    for p in &inv.cpoints {
        if !p.label.ends_with(&format!("({from})")) {
            continue;
        }
        let label = p.label.replace(&format!("({from})"), &format!("({rename})"));
        let [polar, az] = p.point.angles();
        l.push(format!("{label}.polar"), polar);
        l.push(format!("{label}.azimuth"), az);
    }
}

fn need_loxodromic(inv: &PairInvariants) -> Result<()> {
    if inv.cpoints.len() != 4 || inv.cross_ratios.len() != 3 {
        return Err(Error::Domain("ledger needs loxodromic Sp(2,1) peripherals".into()));
    }
    Ok(())
}

/// Twenty-one coordinates of a pants group: two traces, two cross ratios,
/// three angular invariants, four projective points.
fn pants_block(prefix: &str, inv: &PairInvariants) -> Result<Ledger> {
    need_loxodromic(inv)?;
    let mut l = Ledger::default();
    trace_entries(&mut l, "A", inv, 0);
    trace_entries(&mut l, "B", inv, 1);
    cross_entries(&mut l, "A,B", inv);
    angular_entries(&mut l, "A,B", inv);
    point_entries(&mut l, inv, "A", "A");
    point_entries(&mut l, inv, "B", "B");
    for e in &mut l.0 {
        e.label = format!("{prefix}.{}", e.label);
    }
    Ok(l)
}

/// Irreducible (0,3) group with peripherals `A`, `B`, `B⁻¹A⁻¹`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PantsGroup {
    pub a: QMatrix,
    pub b: QMatrix,
    pub irreducible: bool,
    pub invariants: Option<PairInvariants>,
}

impl PantsGroup {
    pub fn new(a: QMatrix, b: QMatrix, tol: &Tolerances) -> Result<PantsGroup> {
        sp21_only(&a)?;
        sp21_only(&b)?;
        let g = Group::Sp21;
        let h = g.form().expect("form");
        let third = (&a * &b).form_inverse(&h);
        for (name, p) in [("A", &a), ("B", &b), ("B^-1 A^-1", &third)] {
            let m = is_member(p, g, &Tolerances { grp: tol.conj, ..*tol });
            if !m.member {
                return Err(Error::NotMember(format!("peripheral {name} (residual {:e})", m.residual)));
            }
            normal_form(p, tol).map_err(|e| Error::NotHyperbolic(format!("peripheral {name}: {e}")))?;
        }
        let invariants = pair_invariants(&a, &b, tol).ok();
        let on_line = crate::invariants::cross_ratio_triple(&a, &b, tol).map(|t| t.on_h_line).unwrap_or(true);
        let irreducible = invariants.is_some() && !on_line;
        Ok(PantsGroup { a, b, irreducible, invariants })
    }

    pub fn peripherals(&self) -> [QMatrix; 3] {
        let h = Group::Sp21.form().expect("form");
        [self.a.clone(), self.b.clone(), (&self.a * &self.b).form_inverse(&h)]
    }

    fn require_irreducible(&self, name: &str) -> Result<&PairInvariants> {
        match (&self.invariants, self.irreducible) {
            (Some(inv), true) => Ok(inv),
            _ => Err(Error::Degenerate(format!("pants group {name} is reducible"))),
        }
    }
}

fn rel_dist(x: &QMatrix, y: &QMatrix) -> f64 {
    x.dist(y) / y.frobenius().max(1e-300)
}

/// `M` in Sp(2,1) with `M P M⁻¹ = Q⁻¹`, read off the two normal forms.
pub fn gluing_conjugator(p: &QMatrix, q: &QMatrix, tol: &Tolerances) -> Result<QMatrix> {
    let h = Group::Sp21.form().expect("form");
    let q_inv = q.form_inverse(&h);
    let np = normal_form(p, tol)?;
    let nq = normal_form(&q_inv, tol)?;
    let gap = (np.r - nq.r)
        .abs()
        .max((np.theta - nq.theta).abs())
        .max((np.phi.unwrap_or(0.0) - nq.phi.unwrap_or(0.0)).abs());
    if gap > tol.conj {
        return Err(Error::Incompatible(format!("peripherals are not inverse-conjugate (normal forms differ by {gap:e})")));
    }
    let m = balance(&(&nq.c * &np.c_inv()), &np);
    let res = rel_dist(&(&(&m * p) * &m.form_inverse(&h)), &q_inv);
    if res > tol.conj {
        return Err(Error::Incompatible(format!("gluing conjugator residual {res:e}")));
    }
    Ok(m)
}

/// Least-norm `M C diag(t, 1, 1/t) C⁻¹` over `t > 0`; the factor commutes
/// with `P = C E C⁻¹`, so the gluing relation is unchanged.
fn balance(m: &QMatrix, np: &NormalForm) -> QMatrix {
    let ci = np.c_inv();
    let part = |k: usize| {
        let mut e = QMatrix::zeros(3);
        e[(k, k)] = Quaternion::ONE;
        &(&(m * &np.c) * &e) * &ci
    };
    let (x1, x2, x3) = (part(0), part(1), part(2));
    let at = |lt: f64| &(&x1.scale(lt.exp()) + &x2) + &x3.scale((-lt).exp());
    let f = |lt: f64| at(lt).frobenius();
    let (mut lo, mut hi) = (-30.0f64, 30.0f64);
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..120 {
        let m1 = hi - gr * (hi - lo);
        let m2 = lo + gr * (hi - lo);
        if f(m1) < f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    at(0.5 * (lo + hi))
}

/// `⟨A, B, KCK⁻¹⟩` with its peripherals and coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourHoledGroup {
    pub generators: [QMatrix; 3],
    /// `K D⁻¹C⁻¹ K⁻¹, K C K⁻¹, B, B⁻¹A⁻¹`, whose product is the identity.
    pub peripherals: [QMatrix; 4],
    pub peripheral_residual: f64,
    pub twist: QMatrix,
    pub ledger: Ledger,
}

pub fn attach(g1: &PantsGroup, g2: &PantsGroup, kappa: &TwistBend, tol: &Tolerances) -> Result<FourHoledGroup> {
    let h = Group::Sp21.form().expect("form");
    let (a, b) = (&g1.a, &g1.b);
    let (c, d) = (&g2.a, &g2.b);
    let res = rel_dist(&(d * a), &QMatrix::identity(3));
    if res > tol.conj {
        return Err(Error::Incompatible(format!("D is not A^-1 (residual {res:e})")));
    }
    let inv_ab = g1.require_irreducible("<A,B>")?;
    g2.require_irreducible("<C,D>")?;
    let k = realize_twist(a, kappa, tol)?;
    let k_inv = k.form_inverse(&h);
    let kck = &(&k * c) * &k_inv;
    let dc = (c * d).form_inverse(&h);
    let p = [
        &(&k * &dc) * &k_inv,
        kck.clone(),
        b.clone(),
        (a * b).form_inverse(&h),
    ];
    let prod = crate::qmat::product(&[&p[0], &p[1], &p[2], &p[3]]);
    let peripheral_residual = prod.dist(&QMatrix::identity(3));

    let inv_ac = pair_invariants(a, c, tol)?;
    need_loxodromic(inv_ab)?;
    need_loxodromic(&inv_ac)?;
    let mut l = Ledger::default();
    trace_entries(&mut l, "A", inv_ab, 0);
    trace_entries(&mut l, "B", inv_ab, 1);
    trace_entries(&mut l, "C", &inv_ac, 1);
    cross_entries(&mut l, "A,B", inv_ab);
    cross_entries(&mut l, "A,C", &inv_ac);
    angular_entries(&mut l, "A,B", inv_ab);
    angular_entries(&mut l, "A,C", &inv_ac);
    point_entries(&mut l, inv_ab, "A", "A");
    point_entries(&mut l, inv_ab, "B", "B");
    point_entries(&mut l, &inv_ac, "B", "C");
    l.extend(twist_entries("kappa", kappa));
    Ok(FourHoledGroup { generators: [a.clone(), b.clone(), kck], peripherals: p, peripheral_residual, twist: k, ledger: l })
}

/// `⟨A, BK⟩` with its boundary commutator and coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneOneGroup {
    pub generators: [QMatrix; 2],
    pub boundary: QMatrix,
    pub twist: QMatrix,
    pub ledger: Ledger,
}

/// Close the handle of `⟨A, BA⁻¹B⁻¹⟩` with `B` twisted by `κ`.
pub fn close_handle(pants: &PantsGroup, b: &QMatrix, kappa: &TwistBend, tol: &Tolerances) -> Result<OneOneGroup> {
    let h = Group::Sp21.form().expect("form");
    let a = &pants.a;
    let y = &(&(b * &a.form_inverse(&h)) * &b.form_inverse(&h));
    let res = rel_dist(y, &pants.b);
    if res > tol.conj {
        return Err(Error::Incompatible(format!("second generator is not B A^-1 B^-1 (residual {res:e})")));
    }
    let inv = pants.require_irreducible("<A, BA^-1B^-1>")?;
    need_loxodromic(inv)?;
    let k = realize_twist(a, kappa, tol)?;
    let bk = b * &k;
    let boundary = &(&(a * &bk) * &a.form_inverse(&h)) * &bk.form_inverse(&h);
    let mut l = Ledger::default();
    trace_entries(&mut l, "A", inv, 0);
    cross_entries(&mut l, "A,Y", inv);
    angular_entries(&mut l, "A,Y", inv);
    point_entries(&mut l, inv, "A", "A");
    l.extend(twist_entries("kappa", kappa));
    Ok(OneOneGroup { generators: [a.clone(), bk], boundary, twist: k, ledger: l })
}

/// One pants seed of a surface input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PantsSeed {
    #[serde(rename = "A")]
    pub a: QMatrix,
    #[serde(rename = "B")]
    pub b: QMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub genus: usize,
    pub pants: Vec<PantsSeed>,
    /// `[v, s, w, t]`: slot `s` of pants `v` is glued to slot `t` of pants `w`.
    pub gluing: Vec<[usize; 4]>,
    pub twists: Vec<TwistBend>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorResidual {
    pub factor: String,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRep {
    pub genus: usize,
    pub a: Vec<QMatrix>,
    pub b: Vec<QMatrix>,
    /// Gluing index closed by each handle `(a_i, b_i)`.
    pub handle_gluings: Vec<usize>,
    pub twists: Vec<TwistBend>,
    pub ledger: Ledger,
    /// `‖∏[a_i, b_i] − I‖`.
    pub relator_residual: f64,
    pub factor_residuals: Vec<FactorResidual>,
    /// Relator residual within `ε_rel`.
    pub assembled: bool,
}

fn check_pattern(spec: &SurfaceSpec) -> Result<()> {
    let g = spec.genus;
    if g < 2 {
        return Err(Error::Domain("genus must be at least 2".into()));
    }
    let (nv, ne) = (2 * g - 2, 3 * g - 3);
    if spec.pants.len() != nv || spec.gluing.len() != ne || spec.twists.len() != ne {
        return Err(Error::Domain(format!(
            "genus {g} needs {nv} pants, {ne} gluings and {ne} twists; got {}, {}, {}",
            spec.pants.len(),
            spec.gluing.len(),
            spec.twists.len()
        )));
    }
    let mut used = vec![[false; 3]; nv];
    for e in &spec.gluing {
        for (v, s) in [(e[0], e[1]), (e[2], e[3])] {
            if v >= nv || s > 2 {
                return Err(Error::Domain(format!("gluing {e:?} is out of range")));
            }
            if used[v][s] {
                return Err(Error::Domain(format!("slot {s} of pants {v} is glued twice")));
            }
            used[v][s] = true;
        }
    }
    let loops = spec.gluing.iter().filter(|e| e[0] == e[2]).count();
    if loops != g {
        return Err(Error::Domain(format!("expected {g} handle closures (self-gluings), found {loops}")));
    }
    Ok(())
}

/// Vertex of least eccentricity in the tree of non-handle gluings, which
/// keeps placement products short.
fn central_vertex(spec: &SurfaceSpec, nv: usize) -> usize {
    let mut adj = vec![Vec::new(); nv];
    for e in spec.gluing.iter().filter(|e| e[0] != e[2]) {
        adj[e[0]].push(e[2]);
        adj[e[2]].push(e[0]);
    }
    let ecc = |r: usize| {
        let mut d = vec![usize::MAX; nv];
        d[r] = 0;
        let mut q = VecDeque::from([r]);
        while let Some(v) = q.pop_front() {
            for &w in &adj[v] {
                if d[w] == usize::MAX {
                    d[w] = d[v] + 1;
                    q.push_back(w);
                }
            }
        }
        d.into_iter().max().unwrap_or(0)
    };
    (0..nv).min_by_key(|&v| ecc(v)).unwrap_or(0)
}

/// Placement of each pants into the common frame via the spanning tree.
struct Placement {
    t: Vec<QMatrix>,
    parent_slot: Vec<Option<usize>>,
    children: Vec<Vec<(usize, usize, usize)>>,
}

pub fn build_surface(spec: &SurfaceSpec, tol: &Tolerances) -> Result<SurfaceRep> {
    check_pattern(spec)?;
    let h = Group::Sp21.form().expect("form");
    let inv = |m: &QMatrix| m.form_inverse(&h);
    let nv = spec.pants.len();
    let pants: Vec<PantsGroup> = spec
        .pants
        .iter()
        .map(|p| PantsGroup::new(p.a.clone(), p.b.clone(), tol))
        .collect::<Result<_>>()?;
    let per: Vec<[QMatrix; 3]> = pants.iter().map(|p| p.peripherals()).collect();

    // edge data: conjugator then twist, anchored at P(w,t)
    let mut link = Vec::with_capacity(spec.gluing.len());
    for (e, kappa) in spec.gluing.iter().zip(&spec.twists) {
        let [v, s, w, t] = *e;
        let m = gluing_conjugator(&per[w][t], &per[v][s], tol)?;
        let k = realize_twist(&per[w][t], kappa, tol)?;
        link.push(&m * &k);
    }

    // slot → (edge index, is first end)
    let mut slot_edge = vec![[None; 3]; nv];
    for (i, e) in spec.gluing.iter().enumerate() {
        slot_edge[e[0]][e[1]] = Some((i, true));
        slot_edge[e[2]][e[3]] = Some((i, false));
    }

    let mut pl = Placement {
        t: vec![QMatrix::identity(3); nv],
        parent_slot: vec![None; nv],
        children: vec![Vec::new(); nv],
    };
    let root = central_vertex(spec, nv);
    let mut seen = vec![false; nv];
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for s in 0..3 {
            let Some((i, first)) = slot_edge[v][s] else { continue };
            let [a0, s0, b0, t0] = spec.gluing[i];
            if a0 == b0 || Some(s) == pl.parent_slot[v] {
                continue;
            }
            let (w, t) = if first { (b0, t0) } else { (a0, s0) };
            if seen[w] {
                return Err(Error::Domain("non-handle gluings must form a tree".into()));
            }
            seen[w] = true;
            // P(v,s) placed = (P(w,t) placed)⁻¹ either way round
            pl.t[w] = if first {
                &pl.t[v] * &link[i]
            } else {
                &pl.t[v] * &inv(&link[i])
            };
            pl.parent_slot[w] = Some(t);
            pl.children[v].push((s, w, t));
            queue.push_back(w);
        }
    }
    if seen.iter().any(|x| !x) {
        return Err(Error::Domain("gluing graph is disconnected".into()));
    }

    let place = |v: usize, m: &QMatrix| &(&pl.t[v] * m) * &inv(&pl.t[v]);

    // free slots in boundary order
    fn walk(v: usize, entry: usize, pl: &Placement, out: &mut Vec<(usize, usize)>) {
        for k in 1..3 {
            let s = (entry + k) % 3;
            if let Some(&(_, w, t)) = pl.children[v].iter().find(|c| c.0 == s) {
                walk(w, t, pl, out);
            } else {
                out.push((v, s));
            }
        }
    }
    let (root_slot, w0, t0) =
        *pl.children[root].first().ok_or_else(|| Error::Domain("root pants is isolated".into()))?;
    let mut word = Vec::new();
    walk(w0, t0, &pl, &mut word);
    for k in 1..3 {
        let s = (root_slot + k) % 3;
        if let Some(&(_, w, t)) = pl.children[root].iter().find(|c| c.0 == s) {
            walk(w, t, &pl, &mut word);
        } else {
            word.push((root, s));
        }
    }

    let mut handle_gluings = Vec::new();
    let mut a_gen = Vec::new();
    let mut b_gen = Vec::new();
    let mut factor_residuals = Vec::new();
    let mut ledger = Ledger::default();
    let mut handle_twists = Ledger::default();
    let mut dropped = vec![None; nv];
    let mut idx = 0;
    while idx < word.len() {
        let (v, x) = word[idx];
        let next = word.get(idx + 1).copied();
        let Some((_, y)) = next.filter(|n| n.0 == v) else {
            return Err(Error::Domain(format!("handle slots of pants {v} are not adjacent on the boundary")));
        };
        let (i, _) = slot_edge[v][x].expect("glued");
        let [_, s, _, t] = spec.gluing[i];
        let tau = place(v, &link[i]);
        let pt = place(v, &per[v][t]);
        let ps = place(v, &per[v][s]);
        let glue = rel_dist(&(&(&tau * &pt) * &inv(&tau)), &inv(&ps));
        factor_residuals.push(FactorResidual { factor: format!("handle {} (pants {v})", a_gen.len()), residual: glue });
        handle_gluings.push(i);
        if (x, y) == (t, s) {
            a_gen.push(pt);
            b_gen.push(tau);
        } else {
            a_gen.push(tau);
            b_gen.push(inv(&pt));
        }
        dropped[v] = Some(if s.min(t) == 0 && s.max(t) == 1 { 1 } else { s.min(t) });
        handle_twists.extend(twist_entries(&format!("handle{}.kappa", b_gen.len() - 1), &spec.twists[i]));
        idx += 2;
    }

    for (i, e) in spec.gluing.iter().enumerate() {
        let [v, s, w, t] = *e;
        if v == w {
            continue;
        }
        let prod = &place(v, &per[v][s]) * &place(w, &per[w][t]);
        factor_residuals.push(FactorResidual {
            factor: format!("gluing {i} ({v}:{s} ~ {w}:{t})"),
            residual: prod.dist(&QMatrix::identity(3)),
        });
    }

    let mut rel = QMatrix::identity(3);
    for (x, y) in a_gen.iter().zip(&b_gen) {
        let c = &(&(x * y) * &inv(x)) * &inv(y);
        rel = &rel * &c;
    }
    let relator_residual = rel.dist(&QMatrix::identity(3));

    for (v, p) in pants.iter().enumerate() {
        let inv_v = p.require_irreducible(&format!("{v}"))?;
        let mut block = pants_block(&format!("pants{v}"), inv_v)?;
        if let Some(slot) = dropped[v] {
            let name = if slot == 0 { "(A)" } else { "(B)" };
            let before = block.len();
            block.0.retain(|e| !e.label.contains(name));
            debug_assert_eq!(before - block.len(), 7);
        }
        ledger.extend(block);
    }
    ledger.extend(handle_twists);

    Ok(SurfaceRep {
        genus: spec.genus,
        a: a_gen,
        b: b_gen,
        handle_gluings,
        twists: spec.twists.clone(),
        ledger,
        relator_residual,
        factor_residuals,
        assembled: relator_residual <= tol.rel,
    })
}

/// Elliptic of order three: a conjugate of `diag(w1, 1, w3)` in the ball form.
fn order_three(rng: &mut SeededRng) -> QMatrix {
    let c = std::f64::consts::FRAC_1_SQRT_2;
    let p = QMatrix::from_rows(vec![
        vec![Quaternion::real(c), Quaternion::ZERO, Quaternion::real(-c)],
        vec![Quaternion::ZERO, Quaternion::ONE, Quaternion::ZERO],
        vec![Quaternion::real(c), Quaternion::ZERO, Quaternion::real(c)],
    ])
    .expect("3x3");
    let mut axis = || {
        let v = imaginary_in_box(rng, 1.0);
        if v.norm() < 1e-3 {
            Quaternion::I
        } else {
            v.normalize()
        }
    };
    let rot = |n: Quaternion, ang: f64| Quaternion::real(ang.cos()) + n.scale(ang.sin());
    let third = 2.0 * PI / 3.0;
    // a repeated class on all three lines makes the pants degenerate
    let d = QMatrix::diag(&[rot(axis(), third), Quaternion::ONE, rot(axis(), -third)]);
    let p_inv = p.adjoint();
    let s = random_element(rng, Group::Sp21);
    let s_inv = s.form_inverse(&Group::Sp21.form().expect("form"));
    &(&(&(&s * &p) * &d) * &p_inv) * &s_inv
}

/// Pants `⟨X, Y⟩` with an order-three symmetry cycling its peripherals, so
/// every slot is compatible with every other.
pub fn symmetric_pants_seed(rng: &mut SeededRng, tol: &Tolerances) -> Result<PantsSeed> {
    let h = Group::Sp21.form().expect("form");
    for _ in 0..5000 {
        let r = order_three(rng);
        let u = order_three(rng);
        let r_inv = r.form_inverse(&h);
        let x = &u * &r_inv;
        let y = &(&r * &x) * &r_inv;
        let ok = PantsGroup::new(x.clone(), y.clone(), tol)
            .map(|p| p.irreducible && p.invariants.as_ref().is_some_and(|i| i.cpoints.len() == 4))
            .unwrap_or(false);
        // moderate traces keep the normal forms well conditioned
        let tame = |t: &crate::classify::RealTrace| t.coeffs.iter().all(|c| c.abs() < 15.0);
        if ok && crate::classify::real_trace(&x, Group::Sp21)
            .map(|t| tame(&t) && crate::classify::hyperbolic_type(&t, tol).tag == crate::classify::HypTag::Loxodromic)
            .unwrap_or(false)
        {
            return Ok(PantsSeed { a: x, b: y });
        }
    }
    Err(Error::Numerical("no loxodromic symmetric pants found".into()))
}

/// Handle pants first, then the connecting chain.
pub fn caterpillar_gluing(g: usize) -> Vec<[usize; 4]> {
    let mut e: Vec<[usize; 4]> = (0..g).map(|v| [v, 1, v, 0]).collect();
    if g == 2 {
        e.push([0, 2, 1, 2]);
        return e;
    }
    let chain = |i: usize| g + i;
    e.push([0, 2, chain(0), 0]);
    for i in 0..g - 2 {
        e.push([chain(i), 1, i + 1, 2]);
        if i + 1 < g - 2 {
            e.push([chain(i), 2, chain(i + 1), 0]);
        }
    }
    e.push([chain(g - 3), 2, g - 1, 2]);
    e
}

/// Compatible genus-g input: conjugates of one symmetric seed glued along
/// the caterpillar pattern.
pub fn compatible_surface_spec(g: usize, rng: &mut SeededRng, tol: &Tolerances) -> Result<SurfaceSpec> {
    let seed = symmetric_pants_seed(rng, tol)?;
    let h = Group::Sp21.form().expect("form");
    let pants = (0..2 * g - 2)
        .map(|_| {
            // mild conjugators keep products of generators well scaled
            let s = &heisenberg(quat_in_box(rng, 0.3), imaginary_in_box(rng, 0.3))
                * &dilation_sp21(Quaternion::real(rng.gen_range(0.8..1.25)), unit_quat(rng));
            let si = s.form_inverse(&h);
            PantsSeed { a: &(&s * &seed.a) * &si, b: &(&s * &seed.b) * &si }
        })
        .collect();
    let gluing = caterpillar_gluing(g);
    let twists = (0..gluing.len()).map(|_| TwistBend::random(rng)).collect();
    Ok(SurfaceSpec { genus: g, pants, gluing, twists })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{random_of_type, rng, TypeRequest};

    #[test]
    fn trivial_twist_is_identity() {
        let tol = Tolerances::default();
        let a = random_of_type(&mut rng(1), Group::Sp21, TypeRequest::Loxodromic);
        let k = realize_twist(&a, &TwistBend::trivial(), &tol).unwrap();
        assert!(k.dist(&QMatrix::identity(3)) < 1e-9);
    }

    #[test]
    fn generic_point_is_rejected() {
        let tol = Tolerances::default();
        let a = random_of_type(&mut rng(2), Group::Sp21, TypeRequest::Loxodromic);
        let kappa = TwistBend { k1: CPoint::from_quat(Quaternion::new(1.0, 0.0, 1.0, 0.0)), ..TwistBend::random(&mut rng(3)) };
        assert!(matches!(realize_twist(&a, &kappa, &tol), Err(Error::Incompatible(_))));
    }

    #[test]
    fn caterpillar_counts() {
        for g in 2..6 {
            let e = caterpillar_gluing(g);
            assert_eq!(e.len(), 3 * g - 3);
        }
    }
}
