//! Square matrices over ℍ, the complex embedding `A ↦ A_ℂ`, Hermitian forms
//! of signature `(n-1, 1)`, group membership and right eigenstructure.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::{Quaternion, SimClass};
use crate::tol::Tolerances;

pub type QVec = Vec<Quaternion>;
pub type CMat = DMatrix<Complex64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Sp21,
    Sp11,
    Gl2h,
}

impl Group {
    pub fn dim(&self) -> usize {
        match self {
            Group::Sp21 => 3,
            Group::Sp11 | Group::Gl2h => 2,
        }
    }

    pub fn form(&self) -> Option<HermForm> {
        match self {
            Group::Sp21 => Some(HermForm::h1(3)),
            Group::Sp11 => Some(HermForm::h1(2)),
            Group::Gl2h => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Group::Sp21 => "sp21",
            Group::Sp11 => "sp11",
            Group::Gl2h => "gl2h",
        }
    }
}

impl std::str::FromStr for Group {
    type Err = Error;
    fn from_str(s: &str) -> Result<Group> {
        match s {
            "sp21" => Ok(Group::Sp21),
            "sp11" => Ok(Group::Sp11),
            "gl2h" => Ok(Group::Gl2h),
            _ => Err(Error::Domain(format!("unknown group tag {s}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<Quaternion>>", into = "Vec<Vec<Quaternion>>")]
pub struct QMatrix {
    n: usize,
    data: Vec<Quaternion>,
}

impl TryFrom<Vec<Vec<Quaternion>>> for QMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<Quaternion>>) -> Result<QMatrix> {
        QMatrix::from_rows(rows)
    }
}

impl From<QMatrix> for Vec<Vec<Quaternion>> {
    fn from(m: QMatrix) -> Self {
        m.rows()
    }
}

impl Index<(usize, usize)> for QMatrix {
    type Output = Quaternion;
    fn index(&self, (r, c): (usize, usize)) -> &Quaternion {
        &self.data[r * self.n + c]
    }
}

impl IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Quaternion {
        &mut self.data[r * self.n + c]
    }
}

impl QMatrix {
    pub fn zeros(n: usize) -> QMatrix {
        QMatrix { n, data: vec![Quaternion::ZERO; n * n] }
    }

    pub fn identity(n: usize) -> QMatrix {
        QMatrix::diag(&vec![Quaternion::ONE; n])
    }

    pub fn diag(d: &[Quaternion]) -> QMatrix {
        let mut m = QMatrix::zeros(d.len());
        for (i, q) in d.iter().enumerate() {
            m[(i, i)] = *q;
        }
        m
    }

    /// Ones on the anti-diagonal.
    pub fn antidiag(n: usize) -> QMatrix {
        let mut m = QMatrix::zeros(n);
        for i in 0..n {
            m[(i, n - 1 - i)] = Quaternion::ONE;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Quaternion>>) -> Result<QMatrix> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Dimension { expected: 1, got: 0 });
        }
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::Dimension { expected: n, got: row.len() });
            }
            data.extend(row);
        }
        Ok(QMatrix { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Quaternion) -> QMatrix {
        let mut m = QMatrix::zeros(n);
        for r in 0..n {
            for c in 0..n {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[QVec]) -> QMatrix {
        let n = cols.len();
        QMatrix::from_fn(n, |r, c| cols[c][r])
    }

    pub fn rows(&self) -> Vec<Vec<Quaternion>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn column(&self, c: usize) -> QVec {
        (0..self.n).map(|r| self[(r, c)]).collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Quaternion] {
        &self.data
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> QMatrix {
        QMatrix::from_fn(self.n, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, s: f64) -> QMatrix {
        QMatrix { n: self.n, data: self.data.iter().map(|q| q.scale(s)).collect() }
    }

    /// `A·q`, each entry multiplied on the right.
    pub fn right_mul_scalar(&self, q: Quaternion) -> QMatrix {
        QMatrix { n: self.n, data: self.data.iter().map(|x| *x * q).collect() }
    }

    pub fn left_mul_scalar(&self, q: Quaternion) -> QMatrix {
        QMatrix { n: self.n, data: self.data.iter().map(|x| q * *x).collect() }
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|q| q.norm()).fold(0.0, f64::max)
    }

    pub fn dist(&self, other: &QMatrix) -> f64 {
        (self - other).frobenius()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|q| q.is_finite())
    }

    pub fn mul_vec(&self, v: &[Quaternion]) -> QVec {
        (0..self.n)
            .map(|r| {
                let mut s = Quaternion::ZERO;
                for c in 0..self.n {
                    s += self[(r, c)] * v[c];
                }
                s
            })
            .collect()
    }

    /// `[[A1, -conj(A2)], [A2, conj(A1)]]` for `A = A1 + j A2`.
    pub fn complexify(&self) -> CMat {
        let n = self.n;
        let mut m = CMat::zeros(2 * n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                let (a1, a2) = self[(r, c)].complex_pair();
                m[(r, c)] = a1;
                m[(r, c + n)] = -a2.conj();
                m[(r + n, c)] = a2;
                m[(r + n, c + n)] = a1.conj();
            }
        }
        m
    }

    /// Reads `A1` and `A2` from the left block column.
    pub fn decomplexify(m: &CMat) -> Result<QMatrix> {
        if m.nrows() != m.ncols() || m.nrows() % 2 != 0 {
            return Err(Error::Dimension { expected: 2 * (m.nrows() / 2), got: m.ncols() });
        }
        let n = m.nrows() / 2;
        Ok(QMatrix::from_fn(n, |r, c| Quaternion::from_complex_pair(m[(r, c)], m[(r + n, c)])))
    }

    pub fn try_inverse(&self) -> Result<QMatrix> {
        let inv = self
            .complexify()
            .try_inverse()
            .ok_or_else(|| Error::Domain("singular quaternionic matrix".into()))?;
        QMatrix::decomplexify(&inv)
    }

    /// `H A* H`, the inverse of a form-preserving matrix.
    pub fn form_inverse(&self, h: &HermForm) -> QMatrix {
        &(&h.matrix * &self.adjoint()) * &h.matrix
    }

    pub fn det_complex(&self) -> Complex64 {
        self.complexify().determinant()
    }

    pub fn commutator_norm(&self, other: &QMatrix) -> f64 {
        (&(self * other) - &(other * self)).frobenius()
    }

    /// `E(r, θ, φ) = diag(r e^{iθ}, e^{iφ}, r⁻¹ e^{iθ})`.
    pub fn e_sp21(r: f64, theta: f64, phi: f64) -> QMatrix {
        QMatrix::diag(&[
            Quaternion::cis(theta).scale(r),
            Quaternion::cis(phi),
            Quaternion::cis(theta).scale(1.0 / r),
        ])
    }

    /// `diag(r e^{iθ}, r⁻¹ e^{iθ})`.
    pub fn e_sp11(r: f64, theta: f64) -> QMatrix {
        QMatrix::diag(&[Quaternion::cis(theta).scale(r), Quaternion::cis(theta).scale(1.0 / r)])
    }
}

impl fmt::Display for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|c| format!("[{}]", self[(r, c)])).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

impl Mul for &QMatrix {
    type Output = QMatrix;
    fn mul(self, o: &QMatrix) -> QMatrix {
        assert_eq!(self.n, o.n, "matrix dimension mismatch");
        let n = self.n;
        QMatrix::from_fn(n, |r, c| {
            let mut s = Quaternion::ZERO;
            for k in 0..n {
                s += self[(r, k)] * o[(k, c)];
            }
            s
        })
    }
}

impl Mul for QMatrix {
    type Output = QMatrix;
    fn mul(self, o: QMatrix) -> QMatrix {
        &self * &o
    }
}

impl Add for &QMatrix {
    type Output = QMatrix;
    fn add(self, o: &QMatrix) -> QMatrix {
        QMatrix { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| *a + *b).collect() }
    }
}

impl Sub for &QMatrix {
    type Output = QMatrix;
    fn sub(self, o: &QMatrix) -> QMatrix {
        QMatrix { n: self.n, data: self.data.iter().zip(&o.data).map(|(a, b)| *a - *b).collect() }
    }
}

/// Product of a sequence of matrices, left to right.
pub fn product(ms: &[&QMatrix]) -> QMatrix {
    let mut acc = QMatrix::identity(ms[0].n());
    for m in ms {
        acc = &acc * *m;
    }
    acc
}

pub fn vec_norm(v: &[Quaternion]) -> f64 {
    v.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec_right_mul(v: &[Quaternion], q: Quaternion) -> QVec {
    v.iter().map(|x| *x * q).collect()
}

pub fn vec_sub(a: &[Quaternion], b: &[Quaternion]) -> QVec {
    a.iter().zip(b).map(|(x, y)| *x - *y).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormTag {
    /// Anti-diagonal Siegel form.
    H1,
    /// `diag(-1, 1, ..., 1)`.
    H2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HermForm {
    pub n: usize,
    pub tag: FormTag,
    pub matrix: QMatrix,
}

impl HermForm {
    pub fn h1(n: usize) -> HermForm {
        HermForm { n, tag: FormTag::H1, matrix: QMatrix::antidiag(n) }
    }

    pub fn h2(n: usize) -> HermForm {
        let mut d = vec![Quaternion::ONE; n];
        d[0] = Quaternion::real(-1.0);
        HermForm { n, tag: FormTag::H2, matrix: QMatrix::diag(&d) }
    }

    /// `⟨z, w⟩ = w* H z`.
    pub fn herm(&self, z: &[Quaternion], w: &[Quaternion]) -> Result<Quaternion> {
        if z.len() != self.n {
            return Err(Error::Dimension { expected: self.n, got: z.len() });
        }
        if w.len() != self.n {
            return Err(Error::Dimension { expected: self.n, got: w.len() });
        }
        Ok(self.pair(z, w))
    }

    /// Unchecked pairing.
    pub fn pair(&self, z: &[Quaternion], w: &[Quaternion]) -> Quaternion {
        let hz = self.matrix.mul_vec(z);
        let mut s = Quaternion::ZERO;
        for k in 0..self.n {
            s += w[k].conj() * hz[k];
        }
        s
    }
}

pub fn herm(z: &[Quaternion], w: &[Quaternion], h: &HermForm) -> Result<Quaternion> {
    h.herm(z, w)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Membership {
    pub member: bool,
    pub residual: f64,
    pub reason: Option<String>,
}

pub fn is_member(a: &QMatrix, g: Group, tol: &Tolerances) -> Membership {
    if a.n() != g.dim() {
        return Membership {
            member: false,
            residual: f64::INFINITY,
            reason: Some(format!("dimension {} for group {}", a.n(), g.name())),
        };
    }
    if !a.is_finite() {
        return Membership { member: false, residual: f64::INFINITY, reason: Some("non-finite entries".into()) };
    }
    match g.form() {
        Some(h) => {
            let lhs = &(&a.adjoint() * &h.matrix) * a;
            let residual = lhs.dist(&h.matrix) / h.matrix.frobenius();
            let member = residual <= tol.grp;
            Membership {
                member,
                residual,
                reason: (!member).then(|| format!("A*HA - H has relative size {residual:e}")),
            }
        }
        None => {
            let svd = a.complexify().svd(false, false);
            let smax = svd.singular_values.max();
            let smin = svd.singular_values.min();
            let member = smin > 1e-12 * smax;
            Membership {
                member,
                residual: if smax > 0.0 { smin / smax } else { 0.0 },
                reason: (!member).then(|| "singular matrix".to_string()),
            }
        }
    }
}

/// One similarity class of right eigenvalues with a representative eigenvector.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenDatum {
    pub cls: SimClass,
    /// Complex representative with non-negative imaginary part.
    pub rep: Complex64,
    /// Unit vector with `A v = v λ`.
    pub vec: QVec,
    pub mult: usize,
}

/// Eigenvalues of a complex square matrix via the Schur form.
pub fn complex_eigenvalues(m: &CMat) -> Result<Vec<Complex64>> {
    let schur = m
        .clone()
        .try_schur(1e-15, 10_000)
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Perfect matching of `vals` into pairs `(λ, conj λ)` with minimal total gap.
fn conjugate_pairing(vals: &[Complex64]) -> (Vec<(usize, usize)>, f64) {
    fn rec(
        vals: &[Complex64],
        used: &mut Vec<bool>,
        cur: &mut Vec<(usize, usize)>,
        cost: f64,
        best: &mut (Vec<(usize, usize)>, f64),
    ) {
        if cost >= best.1 {
            return;
        }
        let Some(a) = used.iter().position(|u| !u) else {
            *best = (cur.clone(), cost);
            return;
        };
        used[a] = true;
        for b in a + 1..vals.len() {
            if used[b] {
                continue;
            }
            used[b] = true;
            cur.push((a, b));
            rec(vals, used, cur, cost + (vals[a] - vals[b].conj()).norm(), best);
            cur.pop();
            used[b] = false;
        }
        used[a] = false;
    }
    let mut best = (Vec::new(), f64::INFINITY);
    rec(vals, &mut vec![false; vals.len()], &mut Vec::new(), 0.0, &mut best);
    best
}

/// Unit null vector of `m - λ I` from the smallest singular value.
fn null_vector(m: &CMat, lambda: Complex64) -> DVector<Complex64> {
    let k = m.nrows();
    let shifted = m - CMat::identity(k, k) * lambda;
    let svd = shifted.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let imin = svd.singular_values.imin();
    vt.row(imin).transpose().map(|z| z.conj())
}

/// Quaternionic vector `v1 + j v2` from the stacked complex vector `(v1; v2)`.
pub fn quat_from_stacked(v: &DVector<Complex64>) -> QVec {
    let n = v.len() / 2;
    (0..n).map(|k| Quaternion::from_complex_pair(v[k], v[k + n])).collect()
}

/// Unit norm, then a right phase making the leading coordinate's `c1` (or `c2`)
/// real-positive; real eigenvalues allow a full quaternionic phase.
pub fn gauge_fix(v: &[Quaternion], real_eig: bool) -> QVec {
    let nrm = vec_norm(v);
    let v: QVec = v.iter().map(|q| q.scale(1.0 / nrm)).collect();
    let lead = v.iter().position(|q| q.norm() > 1e-8).unwrap_or(0);
    let q = v[lead];
    let phase = if real_eig {
        q.conj().normalize()
    } else {
        let (c1, c2) = q.complex_pair();
        let c = if c1.norm() > 1e-8 { c1 } else { c2 };
        Quaternion::from(c.conj() / c.norm())
    };
    vec_right_mul(&v, phase)
}

/// Right eigenvalue classes of `A`, sorted by `(mod, re)` descending.
pub fn right_eigen(a: &QMatrix, tol: &Tolerances) -> Result<Vec<EigenDatum>> {
    let ac = a.complexify();
    let vals = complex_eigenvalues(&ac)?;
    let scale = vals.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let (pairs, cost) = conjugate_pairing(&vals);
    if cost > tol.pair * scale {
        log::warn!("right_eigen: conjugate pairing gap {cost:e} exceeds tolerance");
    }
    let mut reps: Vec<Complex64> = pairs
        .iter()
        .map(|&(p, q)| {
            let z = (vals[p] + vals[q].conj()) * 0.5;
            if z.im < 0.0 {
                z.conj()
            } else {
                z
            }
        })
        .collect();
    reps.sort_by(|x, y| {
        (y.norm(), y.re).partial_cmp(&(x.norm(), x.re)).unwrap_or(std::cmp::Ordering::Equal)
    });
    let merge = 1e-8 * scale;
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for z in reps {
        match clusters.iter_mut().find(|(c, _)| (*c - z).norm() <= merge) {
            Some((c, m)) => {
                *c = (*c * (*m as f64) + z) / ((*m + 1) as f64);
                *m += 1;
            }
            None => clusters.push((z, 1)),
        }
    }
    let mut out = Vec::with_capacity(clusters.len());
    for (mut z, mult) in clusters {
        let real_eig = z.im.abs() <= 1e-9 * scale.max(z.norm());
        if real_eig {
            z.im = 0.0;
        }
        let nv = null_vector(&ac, z);
        let vec = gauge_fix(&quat_from_stacked(&nv), real_eig);
        let cls = SimClass::from_complex(z);
        out.push(EigenDatum { cls, rep: z, vec, mult });
    }
    Ok(out)
}

/// Real basis of `{C : C X = X' C}` over all supplied pairs `(X, X')`.
///
/// Unknowns are the `4n²` real coordinates of `C`; the returned matrices are
/// orthonormal for the Frobenius inner product.
pub fn solve_schur(pairs: &[(&QMatrix, &QMatrix)]) -> Vec<QMatrix> {
    let n = pairs[0].0.n();
    let unknowns = 4 * n * n;
    let units = [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K];
    let basis: Vec<QMatrix> = (0..unknowns)
        .map(|idx| {
            let mut c = QMatrix::zeros(n);
            c.data[idx / 4] = units[idx % 4];
            c
        })
        .collect();
    let rows = unknowns * pairs.len();
    let mut m = DMatrix::<f64>::zeros(rows.max(unknowns), unknowns);
    for (col, c) in basis.iter().enumerate() {
        for (p, (x, xp)) in pairs.iter().enumerate() {
            let r = &(c * *x) - &(*xp * c);
            for (e, q) in r.data.iter().enumerate() {
                let base = p * unknowns + 4 * e;
                m[(base, col)] = q.r0;
                m[(base + 1, col)] = q.r1;
                m[(base + 2, col)] = q.r2;
                m[(base + 3, col)] = q.r3;
            }
        }
    }
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.max().max(1e-300);
    let mut out = Vec::new();
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s <= 1e-8 * smax {
            let row = vt.row(k);
            let mut c = QMatrix::zeros(n);
            for e in 0..n * n {
                c.data[e] = Quaternion::new(row[4 * e], row[4 * e + 1], row[4 * e + 2], row[4 * e + 3]);
            }
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn q(a: f64, b: f64, c: f64, d: f64) -> Quaternion {
        Quaternion::new(a, b, c, d)
    }

    #[test]
    fn herm_examples() {
        let h = HermForm::h1(3);
        let o = vec![Quaternion::ZERO, Quaternion::ZERO, Quaternion::ONE];
        let inf = vec![Quaternion::ONE, Quaternion::ZERO, Quaternion::ZERO];
        assert_eq!(h.herm(&o, &inf).unwrap(), Quaternion::ONE);
        assert_eq!(h.herm(&o, &o).unwrap(), Quaternion::ZERO);
        let z = vec![Quaternion::I, Quaternion::ZERO, Quaternion::ONE];
        assert_eq!(h.herm(&z, &o).unwrap(), Quaternion::I);
        assert!(h.herm(&o[..2], &o).is_err());
    }

    #[test]
    fn complexify_examples() {
        let j = QMatrix::diag(&[Quaternion::J]);
        let m = j.complexify();
        assert_eq!(m[(0, 0)], Complex64::new(0.0, 0.0));
        assert_eq!(m[(0, 1)], Complex64::new(-1.0, 0.0));
        assert_eq!(m[(1, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(QMatrix::identity(3).complexify(), CMat::identity(6, 6));
        let a = QMatrix::from_fn(3, |r, c| q(r as f64, c as f64 - 1.0, 0.5, -(r as f64) * 0.3));
        assert_eq!(QMatrix::decomplexify(&a.complexify()).unwrap(), a);
    }

    #[test]
    fn membership_examples() {
        let tol = Tolerances::default();
        assert!(is_member(&QMatrix::e_sp21(0.4, 1.0, 2.0), Group::Sp21, &tol).member);
        assert!(is_member(&QMatrix::identity(3), Group::Sp21, &tol).member);
        let d = QMatrix::diag(&[q(2.0, 0.0, 0.0, 0.0), Quaternion::ONE, Quaternion::ONE]);
        assert!(!is_member(&d, Group::Sp21, &tol).member);
        assert!(!is_member(&QMatrix::zeros(2), Group::Gl2h, &tol).member);
    }

    #[test]
    fn eigen_of_diagonal_normal_form() {
        let (r, t, p) = (0.5, PI / 2.0, PI / 3.0);
        let e = QMatrix::e_sp21(r, t, p);
        let eig = right_eigen(&e, &Tolerances::default()).unwrap();
        assert_eq!(eig.len(), 3);
        let expect = [Complex64::from_polar(2.0, t), Complex64::from_polar(1.0, p), Complex64::from_polar(0.5, t)];
        for (k, d) in eig.iter().enumerate() {
            assert!((d.rep - expect[k]).norm() < 1e-12, "{:?}", d.rep);
            let pos = [2, 1, 0][k];
            assert!((d.vec[pos].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eigen_of_identity() {
        let eig = right_eigen(&QMatrix::identity(3), &Tolerances::default()).unwrap();
        assert_eq!(eig.len(), 1);
        assert_eq!(eig[0].mult, 3);
        assert!((eig[0].rep - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn eigenvector_equation_holds() {
        let a = QMatrix::from_fn(3, |r, c| q(1.0 + r as f64, 0.3 * c as f64, -0.2, 0.1 * (r * c) as f64));
        for d in right_eigen(&a, &Tolerances::default()).unwrap() {
            let lhs = a.mul_vec(&d.vec);
            let rhs = vec_right_mul(&d.vec, d.rep.into());
            assert!(vec_norm(&vec_sub(&lhs, &rhs)) < 1e-9);
        }
    }

    #[test]
    fn schur_identity_is_one_dimensional_for_generic_pair() {
        let a = QMatrix::e_sp21(0.5, 1.0, 2.0);
        let b = QMatrix::from_fn(3, |r, c| q(0.3 + r as f64, 0.7 * c as f64, -0.4 + (r + c) as f64 * 0.1, 0.2));
        let sol = solve_schur(&[(&a, &a), (&b, &b)]);
        assert_eq!(sol.len(), 1);
        let c = &sol[0];
        let s = c[(0, 0)];
        let target = QMatrix::identity(3).scale(s.r0);
        assert!(c.dist(&target) < 1e-10);
    }
}
