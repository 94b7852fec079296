//! Fell bundles over finite abelian groups realized as graded subspaces of a
//! matrix algebra, their cross-sectional algebra through the regular
//! representation, fiber multipliers and the dual action.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::FiniteAbelianGroup;
use crate::linalg::{self, CMat};
use crate::positive_type::{check_positive_type, PositiveTypeVerdict};
use crate::ucond::{u_integrate, CertificateStatus, LocalIntegrationSpace, NormKind, Target, VectorField};

/// Relative projection residual accepted for fiber membership.
pub const FIBER_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct FellBundle {
    group: FiniteAbelianGroup,
    ambient_dim: usize,
    /// Frobenius-orthonormal basis of each fiber, indexed like the group.
    fibers: Vec<Vec<CMat>>,
}

/// Gram-Schmidt in the Frobenius inner product; dependent members are dropped.
fn orthonormalize(span: &[CMat]) -> Vec<CMat> {
    let mut basis: Vec<CMat> = Vec::new();
    for m in span {
        let scale = linalg::frobenius(m);
        if scale == 0.0 {
            continue;
        }
        let mut v = m.clone();
        // two passes keep the basis orthonormal to rounding
        for _ in 0..2 {
            for b in &basis {
                let c = linalg::frobenius_inner(&v, b);
                v -= b * c;
            }
        }
        let n = linalg::frobenius(&v);
        if n > 1e-10 * scale {
            basis.push(v / Complex64::new(n, 0.0));
        }
    }
    basis
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct BundleReport {
    pub product_residual: f64,
    pub involution_residual: f64,
    pub shape_ok: bool,
}

impl FellBundle {
    /// Fibers are given as spanning lists of `ambient_dim x ambient_dim`
    /// matrices, one list per group element in enumeration order.
    pub fn new(group: FiniteAbelianGroup, ambient_dim: usize, spans: Vec<Vec<CMat>>) -> Result<Self> {
        if spans.len() != group.order() {
            return Err(Error::ShapeMismatch(format!(
                "{} fibers for a group of order {}",
                spans.len(),
                group.order()
            )));
        }
        for span in &spans {
            if let Some(m) = span.iter().find(|m| m.shape() != (ambient_dim, ambient_dim)) {
                return Err(Error::ShapeMismatch(format!(
                    "fiber element of shape {:?}, expected {ambient_dim}x{ambient_dim}",
                    m.shape()
                )));
            }
        }
        let fibers = spans.iter().map(|s| orthonormalize(s)).collect();
        Ok(FellBundle { group, ambient_dim, fibers })
    }

    /// `B_t = M_d` for every `t`.
    pub fn trivial(group: FiniteAbelianGroup, d: usize) -> Self {
        let full: Vec<CMat> = (0..d * d).map(|k| linalg::unit(d, k / d, k % d)).collect();
        let spans = vec![full; group.order()];
        Self::new(group, d, spans).expect("valid shapes")
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn fiber_basis(&self, t: usize) -> &[CMat] {
        &self.fibers[t]
    }

    /// `sum_t dim B_t`, the dimension of the cross-sectional algebra.
    pub fn total_dim(&self) -> usize {
        self.fibers.iter().map(Vec::len).sum()
    }

    pub fn project(&self, t: usize, m: &CMat) -> CMat {
        let mut p = linalg::zeros(self.ambient_dim, self.ambient_dim);
        for b in &self.fibers[t] {
            p += b * linalg::frobenius_inner(m, b);
        }
        p
    }

    /// Frobenius distance from `m` to `B_t`, relative to `max(1, ||m||)`.
    pub fn fiber_residual(&self, t: usize, m: &CMat) -> f64 {
        linalg::frobenius(&(m - self.project(t, m))) / linalg::frobenius(m).max(1.0)
    }

    pub fn contains(&self, t: usize, m: &CMat) -> bool {
        m.shape() == (self.ambient_dim, self.ambient_dim) && self.fiber_residual(t, m) <= FIBER_TOL
    }

    fn require_in_fiber(&self, t: usize, m: &CMat) -> Result<()> {
        if m.shape() != (self.ambient_dim, self.ambient_dim) {
            return Err(Error::ShapeMismatch(format!("{:?} is not the ambient shape", m.shape())));
        }
        let r = self.fiber_residual(t, m);
        if r > FIBER_TOL {
            return Err(Error::FiberViolation(format!(
                "value at {} has residual {r:.3e}",
                self.group.element(t)
            )));
        }
        Ok(())
    }

    /// Graded product `B_s B_t in B_{s+t}` and graded involution
    /// `B_t* = B_{-t}` on basis elements; the fiber over the identity is then
    /// a *-subalgebra.
    pub fn validate(&self) -> Result<BundleReport> {
        let n = self.group.order();
        let mut report = BundleReport { shape_ok: true, ..BundleReport::default() };
        for s in 0..n {
            for (i, u) in self.fibers[s].iter().enumerate() {
                let r = self.fiber_residual(self.group.neg(s), &u.adjoint());
                report.involution_residual = report.involution_residual.max(r);
                if r > FIBER_TOL {
                    return Err(Error::GradingViolation(format!(
                        "adjoint of basis element {i} of B_{} leaves B_{} (residual {r:.3e})",
                        self.group.element(s),
                        self.group.element(self.group.neg(s))
                    )));
                }
                for t in 0..n {
                    let st = self.group.add(s, t);
                    for (j, v) in self.fibers[t].iter().enumerate() {
                        let r = self.fiber_residual(st, &(u * v));
                        report.product_residual = report.product_residual.max(r);
                        if r > FIBER_TOL {
                            return Err(Error::GradingViolation(format!(
                                "s = {}, t = {}: product of basis elements u = #{i}, v = #{j} leaves B_{} (residual {r:.3e})",
                                self.group.element(s),
                                self.group.element(t),
                                self.group.element(st)
                            )));
                        }
                    }
                }
            }
        }
        Ok(report)
    }
}

pub fn validate_bundle(b: &FellBundle) -> Result<BundleReport> {
    b.validate()
}

/// The Z_2-grading of M_2: diagonal units in degree 0, off-diagonal in degree 1.
pub fn m2z2() -> FellBundle {
    let g = FiniteAbelianGroup::cyclic(2).expect("valid");
    let spans = vec![
        vec![linalg::unit(2, 0, 0), linalg::unit(2, 1, 1)],
        vec![linalg::unit(2, 0, 1), linalg::unit(2, 1, 0)],
    ];
    FellBundle::new(g, 2, spans).expect("valid shapes")
}

/// Semidirect product of Z_3 acting on the diagonal of M_3 by cyclic shift.
pub fn z3_shift() -> FellBundle {
    let g = FiniteAbelianGroup::cyclic(3).expect("valid");
    let diagonal: Vec<CMat> = (0..3).map(|i| linalg::unit(3, i, i)).collect();
    let shift = cyclic_shift(3);
    let action = vec![linalg::identity(3), shift.clone(), &shift * &shift];
    build_semidirect_bundle_on(&g, &diagonal, &action).expect("valid action")
}

pub const FIXTURE_NAMES: [&str; 2] = ["m2z2", "z3-shift"];

pub fn fixture(name: &str) -> Option<FellBundle> {
    match name {
        "m2z2" => Some(m2z2()),
        "z3-shift" => Some(z3_shift()),
        _ => None,
    }
}

/// `S e_u = e_{u+1 mod n}`.
pub fn cyclic_shift(n: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| if i == (j + 1) % n { linalg::ONE } else { linalg::ZERO })
}

/// The shift `e_u -> e_{u+t}` on `C^|G|`.
fn group_shift(group: &FiniteAbelianGroup, t: usize) -> CMat {
    let n = group.order();
    CMat::from_fn(n, n, |i, j| if i == group.add(j, t) { linalg::ONE } else { linalg::ZERO })
}

/// Semidirect product bundle of `A = M_{a_dim}` by `t -> Ad(action[t])`.
pub fn build_semidirect_bundle(group: &FiniteAbelianGroup, a_dim: usize, action: &[CMat]) -> Result<FellBundle> {
    let basis: Vec<CMat> = (0..a_dim * a_dim).map(|k| linalg::unit(a_dim, k / a_dim, k % a_dim)).collect();
    build_semidirect_bundle_on(group, &basis, action)
}

/// Semidirect product bundle of the matrix algebra spanned by `algebra` by
/// `t -> Ad(action[t])`: `B_t = { a U_t (x) S_t : a in A }` inside
/// `M_{k |G|}`, so that `(a U_s (x) S_s)(b U_t (x) S_t)` is
/// `a tau_s(b) U_{s+t} (x) S_{s+t}`.
pub fn build_semidirect_bundle_on(group: &FiniteAbelianGroup, algebra: &[CMat], action: &[CMat]) -> Result<FellBundle> {
    let n = group.order();
    if action.len() != n {
        return Err(Error::ShapeMismatch(format!("{} action matrices for order {n}", action.len())));
    }
    let k = action[0].nrows();
    if action.iter().chain(algebra).any(|m| m.shape() != (k, k)) {
        return Err(Error::ShapeMismatch(String::from("action and algebra must share one square shape")));
    }
    let defect = action.iter().map(linalg::unitarity_defect).fold(0.0, f64::max);
    if defect > 1e-10 {
        return Err(Error::NotUnitary(defect));
    }
    let mut hom: f64 = 0.0;
    for s in 0..n {
        for t in 0..n {
            hom = hom.max(linalg::max_abs_diff(&action[group.add(s, t)], &(&action[s] * &action[t])));
        }
    }
    if hom > 1e-10 {
        return Err(Error::NotHomomorphism(hom));
    }
    let spans = (0..n)
        .map(|t| {
            let shift = group_shift(group, t);
            algebra.iter().map(|a| linalg::kron(&(a * &action[t]), &shift)).collect()
        })
        .collect();
    FellBundle::new(group.clone(), k * n, spans)
}

/// A section of a bundle: `t -> f(t) in B_t`.
#[derive(Clone, Debug)]
pub struct Section {
    bundle: Arc<FellBundle>,
    values: Vec<CMat>,
}

fn same_bundle(a: &Arc<FellBundle>, b: &Arc<FellBundle>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Section {
    pub fn new(bundle: Arc<FellBundle>, values: Vec<CMat>) -> Result<Self> {
        if values.len() != bundle.group().order() {
            return Err(Error::ShapeMismatch(format!("{} section values", values.len())));
        }
        for (t, v) in values.iter().enumerate() {
            bundle.require_in_fiber(t, v)?;
        }
        Ok(Section { bundle, values })
    }

    pub fn zero(bundle: Arc<FellBundle>) -> Self {
        let d = bundle.ambient_dim();
        let values = vec![linalg::zeros(d, d); bundle.group().order()];
        Section { bundle, values }
    }

    /// `delta_t * v`.
    pub fn delta(bundle: Arc<FellBundle>, t: usize, v: CMat) -> Result<Self> {
        let mut s = Self::zero(bundle.clone());
        if t >= s.values.len() {
            return Err(Error::InvalidArgument(format!("element index {t} out of range")));
        }
        s.values[t] = v;
        Self::new(bundle, s.values)
    }

    /// Random complex combination of the fiber bases.
    pub fn random<R: Rng + ?Sized>(bundle: Arc<FellBundle>, rng: &mut R) -> Self {
        let d = bundle.ambient_dim();
        let values = (0..bundle.group().order())
            .map(|t| {
                let mut v = linalg::zeros(d, d);
                for b in bundle.fiber_basis(t) {
                    v += b * linalg::random_complex(rng);
                }
                v
            })
            .collect();
        Section { bundle, values }
    }

    /// The sections `delta_t b` for every basis element `b` of every fiber.
    pub fn spanning_set(bundle: &Arc<FellBundle>) -> Vec<Section> {
        let mut out = Vec::new();
        for t in 0..bundle.group().order() {
            for b in bundle.fiber_basis(t) {
                out.push(Section::delta(bundle.clone(), t, b.clone()).expect("basis element lies in its fiber"));
            }
        }
        out
    }

    pub fn bundle(&self) -> &Arc<FellBundle> {
        &self.bundle
    }

    pub fn values(&self) -> &[CMat] {
        &self.values
    }

    pub fn get(&self, t: usize) -> &CMat {
        &self.values[t]
    }

    pub fn max_abs_diff(&self, other: &Section) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| linalg::max_abs_diff(a, b)).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(linalg::max_abs).fold(0.0, f64::max)
    }

    /// Largest fiber residual over all points.
    pub fn fiber_residual(&self) -> f64 {
        self.values.iter().enumerate().map(|(t, v)| self.bundle.fiber_residual(t, v)).fold(0.0, f64::max)
    }

    fn require_same(&self, other: &Section) -> Result<()> {
        if same_bundle(&self.bundle, &other.bundle) {
            Ok(())
        } else {
            Err(Error::BundleMismatch)
        }
    }
}

impl Target for Section {
    fn zero_like(&self) -> Self {
        Section::zero(self.bundle.clone())
    }

    fn add_scaled(&mut self, other: &Self, c: Complex64) {
        assert!(same_bundle(&self.bundle, &other.bundle), "sections of different bundles");
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b * c;
        }
    }

    fn norm(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::Operator => cstar_norm(self),
            NormKind::Sup => self.max_abs(),
            NormKind::Euclidean | NormKind::Frobenius => {
                self.values.iter().map(|v| linalg::frobenius(v).powi(2)).sum::<f64>().sqrt()
            }
        }
    }

    fn same_shape(&self, other: &Self) -> bool {
        same_bundle(&self.bundle, &other.bundle)
    }

    fn inner(&self, other: &Self) -> Complex64 {
        self.values.iter().zip(&other.values).map(|(a, b)| linalg::frobenius_inner(a, b)).sum()
    }

    fn shape_label(&self) -> String {
        format!("section over {} in M_{}", self.bundle.group(), self.bundle.ambient_dim())
    }
}

/// `(f * g)(t) = sum_s f(s) g(t - s)`.
pub fn convolve(f: &Section, g: &Section) -> Result<Section> {
    f.require_same(g)?;
    let b = &f.bundle;
    let grp = b.group();
    let n = grp.order();
    let mass = grp.haar().mass_g;
    let values: Vec<CMat> = (0..n)
        .map(|t| {
            let mut acc = linalg::zeros(b.ambient_dim(), b.ambient_dim());
            for s in 0..n {
                acc += f.get(s) * g.get(grp.sub(t, s)) * Complex64::new(mass, 0.0);
            }
            acc
        })
        .collect();
    Section::new(b.clone(), values)
}

/// `f*(t) = f(-t)*`.
pub fn involve(f: &Section) -> Section {
    let grp = f.bundle.group();
    let values = (0..grp.order()).map(|t| f.get(grp.neg(t)).adjoint()).collect();
    Section { bundle: f.bundle.clone(), values }
}

/// `Lambda(f)` on `l^2(G) (x) C^d`, block `(t, s)` equal to `f(t - s)`.
pub fn regular_representation(f: &Section) -> CMat {
    let grp = f.bundle.group();
    let (n, d) = (grp.order(), f.bundle.ambient_dim());
    let mut m = linalg::zeros(n * d, n * d);
    for t in 0..n {
        for s in 0..n {
            m.view_mut((t * d, s * d), (d, d)).copy_from(f.get(grp.sub(t, s)));
        }
    }
    m
}

/// Norm of `C*(B)`, the largest singular value of `Lambda(f)`.
pub fn cstar_norm(f: &Section) -> f64 {
    linalg::op_norm(&regular_representation(f))
}

/// Rank of `f -> Lambda(f)` on the cross-sectional algebra; equals
/// `total_dim` exactly when the regular representation is faithful.
pub fn regular_representation_rank(bundle: &Arc<FellBundle>) -> usize {
    let span = Section::spanning_set(bundle);
    if span.is_empty() {
        return 0;
    }
    let images: Vec<CMat> = span.iter().map(regular_representation).collect();
    let len = images[0].len();
    let stacked = CMat::from_fn(len, images.len(), |i, j| images[j][i]);
    let sv = stacked.singular_values();
    let top = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > 1e-10 * top.max(1.0)).count()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// The multiplier `F(t)` determined by an anchor `t` and a coefficient in `B_t`.
#[derive(Clone, Debug)]
pub struct BundleMultiplier {
    bundle: Arc<FellBundle>,
    pub anchor: usize,
    pub coefficient: CMat,
}

impl BundleMultiplier {
    pub fn new(bundle: Arc<FellBundle>, anchor: usize, coefficient: CMat) -> Result<Self> {
        if anchor >= bundle.group().order() {
            return Err(Error::InvalidArgument(format!("anchor {anchor} out of range")));
        }
        bundle.require_in_fiber(anchor, &coefficient)?;
        Ok(BundleMultiplier { bundle, anchor, coefficient })
    }

    /// `F(t)` with coefficient `f(t)`.
    pub fn from_section(f: &Section, t: usize) -> Self {
        BundleMultiplier { bundle: f.bundle.clone(), anchor: t, coefficient: f.get(t).clone() }
    }

    /// Matrix of `g -> F(t) g` in the regular representation coordinates.
    pub fn left_matrix(&self) -> CMat {
        let grp = self.bundle.group();
        let (n, d) = (grp.order(), self.bundle.ambient_dim());
        let mut m = linalg::zeros(n * d, n * d);
        for s in 0..n {
            let src = grp.sub(s, self.anchor);
            m.view_mut((s * d, src * d), (d, d)).copy_from(&self.coefficient);
        }
        m
    }
}

/// Left: `(F(t) g)(s) = c g(s - t)`. Right: `(g F(t))(s) = g(s - t) c`.
pub fn multiplier_apply(m: &BundleMultiplier, g: &Section, side: Side) -> Result<Section> {
    if !same_bundle(&m.bundle, &g.bundle) {
        return Err(Error::BundleMismatch);
    }
    let grp = g.bundle.group();
    let values = (0..grp.order())
        .map(|s| {
            let src = g.get(grp.sub(s, m.anchor));
            match side {
                Side::Left => &m.coefficient * src,
                Side::Right => src * &m.coefficient,
            }
        })
        .collect();
    Section::new(g.bundle.clone(), values)
}

/// `(alpha_x f)(t) = (t, x) f(t)`.
pub fn dual_action(x: usize, f: &Section) -> Section {
    let grp = f.bundle.group();
    let values = (0..grp.order()).map(|t| f.get(t) * grp.pairing_idx(t, x)).collect();
    Section { bundle: f.bundle.clone(), values }
}

/// `sum_s (s, x) F(s) g` against `alpha_x(f) * g`, and the right-hand
/// version, over a spanning set of test sections `g`.
pub fn hat_equals_action_check(f: &Section, x: usize) -> Result<f64> {
    let grp = f.bundle.group();
    let mass = grp.haar().mass_g;
    let twisted = dual_action(x, f);
    let mut worst: f64 = 0.0;
    for g in Section::spanning_set(&f.bundle) {
        for side in [Side::Left, Side::Right] {
            let mut lhs = Section::zero(f.bundle.clone());
            for s in 0..grp.order() {
                let term = multiplier_apply(&BundleMultiplier::from_section(f, s), &g, side)?;
                lhs.add_scaled(&term, grp.pairing_idx(s, x) * mass);
            }
            let rhs = match side {
                Side::Left => convolve(&twisted, &g)?,
                Side::Right => convolve(&g, &twisted)?,
            };
            worst = worst.max(lhs.max_abs_diff(&rhs));
        }
    }
    Ok(worst)
}

/// `p = f* * f` and its multipliers `P(t)` observed on the regular
/// representation, tested for positive type as a function on the group.
pub fn section_positive_type_check(f: &Section) -> Result<PositiveTypeVerdict> {
    let p = convolve(&involve(f), f)?;
    let grp = f.bundle.group().clone();
    let dim = grp.order() * f.bundle.ambient_dim();
    let field = crate::group::OperatorField::from_fn(grp, dim, |t| BundleMultiplier::from_section(&p, t).left_matrix())?;
    Ok(check_positive_type(&field))
}

#[derive(Clone, Debug)]
pub struct MainTheoremOutcome {
    /// `int conj((t,x)) a alpha_x(p) dx`.
    pub lhs_left: Section,
    /// `int conj((t,x)) alpha_x(p) a dx`.
    pub lhs_right: Section,
    /// `a P(t)`.
    pub rhs_left: Section,
    /// `P(t) a`.
    pub rhs_right: Section,
    pub abs_err: f64,
    /// `(1/|Gamma|) sum_x conj((t,x)) alpha_x(p)` against `delta_t p(t)`.
    pub collapse_err: f64,
    pub status: CertificateStatus,
    pub epsilon: f64,
}

/// Both displayed integrals of the dual-action inversion theorem for
/// `p = f* * f`, integrated by the unconditional engine over the dual group.
pub fn main_theorem_check(f: &Section, a: &Section, t: usize) -> Result<MainTheoremOutcome> {
    f.require_same(a)?;
    let bundle = f.bundle.clone();
    let grp = bundle.group().clone();
    let n = grp.order();
    if t >= n {
        return Err(Error::InvalidArgument(format!("element index {t} out of range")));
    }
    let p = Arc::new(convolve(&involve(f), f)?);
    let space = Arc::new(LocalIntegrationSpace::finite((0..n as i64).collect(), grp.haar().mass_gamma)?);

    let integrate = |left: bool| -> Result<(Section, CertificateStatus, f64)> {
        let (p, a, g) = (p.clone(), a.clone(), grp.clone());
        let field = VectorField::new(space.clone(), Section::zero(bundle.clone()), NormKind::Operator, move |x| {
            let twisted = dual_action(x as usize, &p);
            let prod = if left { convolve(&a, &twisted) } else { convolve(&twisted, &a) };
            prod.expect("same bundle").scaled(g.pairing_idx(t, x as usize).conj())
        });
        let cert = u_integrate(&field, 0.0, 0)?;
        Ok((cert.value, cert.status, cert.epsilon))
    };
    let (lhs_left, status_l, eps_l) = integrate(true)?;
    let (lhs_right, status_r, eps_r) = integrate(false)?;

    let pt = BundleMultiplier::from_section(&p, t);
    let rhs_left = multiplier_apply(&pt, a, Side::Right)?;
    let rhs_right = multiplier_apply(&pt, a, Side::Left)?;

    let mut collapse = Section::zero(bundle.clone());
    for x in 0..n {
        collapse.add_scaled(&dual_action(x, &p), grp.pairing_idx(t, x).conj() / n as f64);
    }
    let delta = Section::delta(bundle.clone(), t, p.get(t).clone())?;

    let status = if status_l == CertificateStatus::Exact { status_r } else { status_l };
    Ok(MainTheoremOutcome {
        abs_err: lhs_left.max_abs_diff(&rhs_left).max(lhs_right.max_abs_diff(&rhs_right)),
        collapse_err: collapse.max_abs_diff(&delta),
        lhs_left,
        lhs_right,
        rhs_left,
        rhs_right,
        status,
        epsilon: eps_l.max(eps_r),
    })
}
