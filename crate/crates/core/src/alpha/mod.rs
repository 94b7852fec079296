//! Integrable elements for an action of a discrete abelian group on a
//! C*-algebra, in two concrete worlds: a finite group acting on a matrix
//! algebra by unitary conjugation, and `Z` acting on finitely supported
//! operators on `l^2(Z)` by conjugation with the bilateral shift.

mod sparse;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use sparse::{cis_multiple, SparseEntry, SparseZOperator, Span, TwistedLaurentOperator};

use crate::error::{Error, Result};
use crate::fell_bundle::{FellBundle, Side};
use crate::group::FiniteAbelianGroup;
use crate::linalg::{self, CMat};
use crate::ucond::{
    u_integrate, CertificateStatus, CertificateSummary, LocalIntegrationSpace, LocalSet, NormKind, TailOracle, Target,
    UIntegralCertificate, VectorField,
};

/// Tolerance of the PSD order test.
pub const PSD_ORDER_TOL: f64 = 1e-12;

/// An element of the algebra of one of the two worlds.
#[derive(Clone, Debug, PartialEq)]
pub enum Element {
    Dense(CMat),
    Sparse(SparseZOperator),
}

impl Element {
    pub fn mul(&self, other: &Element) -> Result<Element> {
        match (self, other) {
            (Element::Dense(a), Element::Dense(b)) if a.ncols() == b.nrows() => Ok(Element::Dense(a * b)),
            (Element::Dense(a), Element::Dense(b)) => {
                Err(Error::ShapeMismatch(format!("{:?} times {:?}", a.shape(), b.shape())))
            }
            (Element::Sparse(a), Element::Sparse(b)) => Ok(Element::Sparse(a.mul(b))),
            _ => Err(Error::WorldMismatch),
        }
    }

    pub fn adjoint(&self) -> Element {
        match self {
            Element::Dense(a) => Element::Dense(a.adjoint()),
            Element::Sparse(a) => Element::Sparse(a.adjoint()),
        }
    }

    pub fn op_norm(&self) -> f64 {
        self.norm(NormKind::Operator)
    }

    pub fn max_abs_diff(&self, other: &Element) -> Result<f64> {
        match (self, other) {
            (Element::Dense(a), Element::Dense(b)) if a.shape() == b.shape() => Ok(linalg::max_abs_diff(a, b)),
            (Element::Sparse(a), Element::Sparse(b)) => Ok(a.max_abs_diff(b)),
            (Element::Dense(_), Element::Dense(_)) => Err(Error::ShapeMismatch(String::from("dense shapes differ"))),
            _ => Err(Error::WorldMismatch),
        }
    }

    pub fn trace(&self) -> Complex64 {
        match self {
            Element::Dense(a) => a.trace(),
            Element::Sparse(a) => a.trace(),
        }
    }

    pub fn as_dense(&self) -> Option<&CMat> {
        match self {
            Element::Dense(a) => Some(a),
            Element::Sparse(_) => None,
        }
    }

    pub fn as_sparse(&self) -> Option<&SparseZOperator> {
        match self {
            Element::Sparse(a) => Some(a),
            Element::Dense(_) => None,
        }
    }
}

impl Target for Element {
    fn zero_like(&self) -> Self {
        match self {
            Element::Dense(a) => Element::Dense(a.zero_like()),
            Element::Sparse(_) => Element::Sparse(SparseZOperator::zero()),
        }
    }

    fn add_scaled(&mut self, other: &Self, c: Complex64) {
        match (self, other) {
            (Element::Dense(a), Element::Dense(b)) => a.add_scaled(b, c),
            (Element::Sparse(a), Element::Sparse(b)) => a.add_scaled(b, c),
            _ => panic!("elements of different worlds"),
        }
    }

    fn norm(&self, kind: NormKind) -> f64 {
        match self {
            Element::Dense(a) => Target::norm(a, kind),
            Element::Sparse(a) => Target::norm(a, kind),
        }
    }

    fn same_shape(&self, other: &Self) -> bool {
        match (self, other) {
            (Element::Dense(a), Element::Dense(b)) => a.shape() == b.shape(),
            (Element::Sparse(_), Element::Sparse(_)) => true,
            _ => false,
        }
    }

    fn inner(&self, other: &Self) -> Complex64 {
        match (self, other) {
            (Element::Dense(a), Element::Dense(b)) => a.inner(b),
            (Element::Sparse(a), Element::Sparse(b)) => a.inner(b),
            _ => panic!("elements of different worlds"),
        }
    }

    fn shape_label(&self) -> String {
        match self {
            Element::Dense(a) => format!("{}x{} matrix", a.nrows(), a.ncols()),
            Element::Sparse(a) => a.shape_label(),
        }
    }
}

/// A point of the group dual to the acting group.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GPoint {
    /// Element index of the finite dual group.
    Element(usize),
    /// Angle on the circle dual to `Z`.
    Angle(f64),
}

#[derive(Clone, Debug)]
pub enum World {
    /// `alpha_x = Ad(unitaries[x])` on `M_d`.
    Finite { group: FiniteAbelianGroup, unitaries: Arc<Vec<CMat>> },
    /// `alpha_n` shifts entries `(i, j) -> (i + n, j + n)`.
    ZShift,
}

#[derive(Clone, Debug)]
pub struct ActionSystem {
    world: World,
    space: Arc<LocalIntegrationSpace>,
}

impl ActionSystem {
    /// Finite group acting by `Ad(unitaries[x])`, indexed like the group.
    pub fn finite(group: FiniteAbelianGroup, unitaries: Vec<CMat>) -> Result<Self> {
        let n = group.order();
        if unitaries.len() != n {
            return Err(Error::ShapeMismatch(format!("{} unitaries for order {n}", unitaries.len())));
        }
        let d = unitaries[0].nrows();
        if unitaries.iter().any(|u| u.shape() != (d, d)) {
            return Err(Error::ShapeMismatch(String::from("unitaries must share one square shape")));
        }
        let defect = unitaries.iter().map(linalg::unitarity_defect).fold(0.0, f64::max);
        if defect > 1e-10 {
            return Err(Error::NotUnitary(defect));
        }
        let sys = ActionSystem::build(World::Finite { group, unitaries: Arc::new(unitaries) });
        let law = sys.action_law_residual();
        if law > 1e-10 {
            return Err(Error::NotHomomorphism(law));
        }
        Ok(sys)
    }

    pub fn zshift() -> Self {
        Self::build(World::ZShift)
    }

    fn build(world: World) -> Self {
        let space = match &world {
            World::Finite { group, .. } => {
                let n = group.order();
                LocalIntegrationSpace::finite((0..n as i64).collect(), 1.0 / n as f64).expect("distinct points")
            }
            World::ZShift => LocalIntegrationSpace::integers(),
        };
        ActionSystem { world, space: Arc::new(space) }
    }

    /// The dual action of a bundle, transported to `M_{|G| d}` by the regular
    /// representation: `U_x = diag_t((t, x) I_d)`.
    pub fn from_bundle_dual_action(bundle: &FellBundle) -> Self {
        let group = bundle.group().clone();
        let d = bundle.ambient_dim();
        let n = group.order();
        let unitaries = (0..n)
            .map(|x| CMat::from_fn(n * d, n * d, |r, s| if r == s { group.pairing_idx(r / d, x) } else { linalg::ZERO }))
            .collect();
        Self::build(World::Finite { group, unitaries: Arc::new(unitaries) })
    }

    /// Translation on `l^2(G) (x) C^d`, acting on `M_{|G| d}` by conjugation.
    pub fn regular(group: FiniteAbelianGroup, d: usize) -> Self {
        let n = group.order();
        let unitaries = (0..n)
            .map(|x| {
                CMat::from_fn(n * d, n * d, |r, s| {
                    if r % d == s % d && r / d == group.add(s / d, x) {
                        linalg::ONE
                    } else {
                        linalg::ZERO
                    }
                })
            })
            .collect();
        Self::build(World::Finite { group, unitaries: Arc::new(unitaries) })
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.world, World::Finite { .. })
    }

    /// Integration space for the acting group with its Haar measure.
    pub fn space(&self) -> &Arc<LocalIntegrationSpace> {
        &self.space
    }

    /// Matrix size of the finite world.
    pub fn dim(&self) -> Option<usize> {
        match &self.world {
            World::Finite { unitaries, .. } => Some(unitaries[0].nrows()),
            World::ZShift => None,
        }
    }

    pub fn mass(&self) -> f64 {
        self.space.mass(0)
    }

    pub fn zero(&self) -> Element {
        match self.dim() {
            Some(d) => Element::Dense(linalg::zeros(d, d)),
            None => Element::Sparse(SparseZOperator::zero()),
        }
    }

    pub fn check_element(&self, b: &Element) -> Result<()> {
        match (&self.world, b) {
            (World::Finite { unitaries, .. }, Element::Dense(m)) => {
                let d = unitaries[0].nrows();
                if m.shape() == (d, d) {
                    Ok(())
                } else {
                    Err(Error::ShapeMismatch(format!("{:?} element in a {d}x{d} world", m.shape())))
                }
            }
            (World::ZShift, Element::Sparse(_)) => Ok(()),
            _ => Err(Error::WorldMismatch),
        }
    }

    fn check_x(&self, x: i64) -> Result<()> {
        match &self.world {
            World::Finite { group, .. } if x < 0 || x as usize >= group.order() => {
                Err(Error::InvalidArgument(format!("group index {x} out of range")))
            }
            _ => Ok(()),
        }
    }

    /// `(t, x)` for `t` in the dual of the acting group.
    pub fn pairing(&self, t: GPoint, x: i64) -> Result<Complex64> {
        match (&self.world, t) {
            (World::Finite { group, .. }, GPoint::Element(t)) if t < group.order() => Ok(group.pairing_idx(t, x as usize)),
            (World::Finite { .. }, GPoint::Element(t)) => Err(Error::InvalidArgument(format!("dual index {t} out of range"))),
            (World::ZShift, GPoint::Angle(t)) => Ok(cis_multiple(x, t)),
            _ => Err(Error::WorldMismatch),
        }
    }

    /// Largest defect of `alpha_x alpha_y = alpha_{x+y}`. In the finite world
    /// this vanishes exactly when `U_{x+y}* U_x U_y` is scalar, which is the
    /// law on every generator at once.
    pub fn action_law_residual(&self) -> f64 {
        match &self.world {
            World::Finite { group, unitaries } => {
                let n = group.order();
                let mut worst: f64 = 0.0;
                for x in 0..n {
                    for y in 0..n {
                        let w = unitaries[group.add(x, y)].adjoint() * &unitaries[x] * &unitaries[y];
                        let scalar = linalg::identity(w.nrows()) * w[(0, 0)];
                        worst = worst.max(linalg::max_abs_diff(&w, &scalar));
                    }
                }
                worst
            }
            World::ZShift => {
                let e = SparseZOperator::unit(0, 0);
                let mut worst: f64 = 0.0;
                for m in -3..=3 {
                    for n in -3..=3 {
                        worst = worst.max(e.shift(n).shift(m).max_abs_diff(&e.shift(m + n)));
                    }
                }
                worst
            }
        }
    }
}

/// `alpha_x(b)`.
pub fn alpha_apply(sys: &ActionSystem, x: i64, b: &Element) -> Result<Element> {
    sys.check_element(b)?;
    sys.check_x(x)?;
    Ok(match (&sys.world, b) {
        (World::Finite { unitaries, .. }, Element::Dense(m)) => {
            let u = &unitaries[x as usize];
            Element::Dense(u * m * u.adjoint())
        }
        (World::ZShift, Element::Sparse(s)) => Element::Sparse(s.shift(x)),
        _ => unreachable!("checked above"),
    })
}

/// Integers `n` for which `alpha_n(b) a` (left) or `a alpha_n(b)` (right)
/// can be nonzero.
pub fn zshift_support(b: &SparseZOperator, a: &SparseZOperator, side: Side) -> Option<(i64, i64)> {
    let (lo, hi) = match side {
        // columns of b + n must meet rows of a
        Side::Left => {
            let (bc, ar) = (b.col_span()?, a.row_span()?);
            (ar.lo - bc.hi, ar.hi - bc.lo)
        }
        // columns of a must meet rows of b + n
        Side::Right => {
            let (ac, br) = (a.col_span()?, b.row_span()?);
            (ac.lo - br.hi, ac.hi - br.lo)
        }
    };
    Some((lo, hi))
}

fn product(side: Side, alpha_b: &Element, a: &Element) -> Result<Element> {
    match side {
        Side::Left => alpha_b.mul(a),
        Side::Right => a.mul(alpha_b),
    }
}

/// The field `x -> phi(x) alpha_x(b) a` (left) or `x -> phi(x) a alpha_x(b)`
/// (right) over the acting group, with a finite-support oracle in the
/// shift world.
pub fn alpha_field(
    sys: &ActionSystem,
    b: &Element,
    a: &Element,
    side: Side,
    phi: impl Fn(i64) -> Complex64 + Send + Sync + 'static,
) -> Result<VectorField<Element>> {
    sys.check_element(b)?;
    sys.check_element(a)?;
    let (s, b2, a2) = (sys.clone(), b.clone(), a.clone());
    let field = VectorField::new(sys.space.clone(), sys.zero(), NormKind::Operator, move |x| {
        let moved = alpha_apply(&s, x, &b2).expect("checked element");
        product(side, &moved, &a2).expect("checked element").scaled(phi(x))
    });
    Ok(match (b, a) {
        (Element::Sparse(bs), Element::Sparse(as_)) => {
            let support = match zshift_support(bs, as_, side) {
                Some((lo, hi)) => LocalSet::from_points(lo..=hi),
                None => LocalSet::empty(),
            };
            field.with_oracle(TailOracle::finite_support(support))
        }
        _ => field,
    })
}

/// `(U) int phi(x) alpha_x(b) a dx` or `(U) int phi(x) a alpha_x(b) dx`.
pub fn alpha_integral(
    sys: &ActionSystem,
    b: &Element,
    a: &Element,
    side: Side,
    phi: impl Fn(i64) -> Complex64 + Send + Sync + 'static,
) -> Result<(Element, UIntegralCertificate<Element>)> {
    let field = alpha_field(sys, b, a, side, phi)?;
    let cert = u_integrate(&field, 0.0, 0)?;
    Ok((cert.value.clone(), cert))
}

/// `b^(t) = int conj((t, x)) alpha_x(b) dx` as a pair of one-sided actions.
#[derive(Clone, Debug)]
pub enum MultiplierPair {
    /// Observed through integrals against probe elements.
    Finite { sys: ActionSystem, b: Element, t: usize },
    Laurent(TwistedLaurentOperator),
}

impl MultiplierPair {
    /// Left: `b^(t) a`. Right: `a b^(t)`.
    pub fn apply(&self, side: Side, a: &Element) -> Result<Element> {
        match self {
            MultiplierPair::Finite { sys, b, t } => {
                let (s, t) = (sys.clone(), *t);
                alpha_integral(sys, b, a, side, move |x| s.pairing(GPoint::Element(t), x).expect("valid index").conj())
                    .map(|r| r.0)
            }
            MultiplierPair::Laurent(l) => {
                let a = a.as_sparse().ok_or(Error::WorldMismatch)?;
                Ok(Element::Sparse(match side {
                    Side::Left => l.apply_left(a),
                    Side::Right => l.apply_right(a),
                }))
            }
        }
    }

    pub fn t(&self) -> GPoint {
        match self {
            MultiplierPair::Finite { t, .. } => GPoint::Element(*t),
            MultiplierPair::Laurent(l) => GPoint::Angle(l.t),
        }
    }
}

pub fn fourier_of_element(sys: &ActionSystem, b: &Element, t: GPoint) -> Result<MultiplierPair> {
    sys.check_element(b)?;
    sys.pairing(t, 0)?;
    match (&sys.world, b, t) {
        (World::Finite { .. }, _, GPoint::Element(t)) => Ok(MultiplierPair::Finite { sys: sys.clone(), b: b.clone(), t }),
        (World::ZShift, Element::Sparse(s), GPoint::Angle(t)) => {
            Ok(MultiplierPair::Laurent(TwistedLaurentOperator::from_element(s, t)))
        }
        _ => Err(Error::WorldMismatch),
    }
}

/// Probes `E_{i0}` and `E_{0j}`; on a full matrix algebra their products
/// with a multiplier determine it on either side.
fn finite_probes(d: usize) -> Vec<Element> {
    let mut out: Vec<Element> = (0..d).map(|i| Element::Dense(linalg::unit(d, i, 0))).collect();
    out.extend((1..d).map(|j| Element::Dense(linalg::unit(d, 0, j))));
    out
}

/// Half-width of the window used for the shift-world spectral check.
pub const SPECTRAL_WINDOW: i64 = 20;

/// Largest deviation of `alpha_x(m)` from `(t, x) m`. Finite world:
/// `alpha_x(m) a = alpha_x(m alpha_{-x}(a))` against `(t, x) m a` on probes,
/// both sides. Shift world: the entry identity on a window.
pub fn spectral_subspace_check(sys: &ActionSystem, m: &MultiplierPair, t: GPoint) -> Result<f64> {
    match (&sys.world, m) {
        (World::Finite { group, unitaries }, MultiplierPair::Finite { .. }) => {
            let n = group.order();
            let d = unitaries[0].nrows();
            let mut worst: f64 = 0.0;
            for x in 0..n as i64 {
                let phase = sys.pairing(t, x)?;
                let neg = group.neg(x as usize) as i64;
                for a in finite_probes(d) {
                    for side in [Side::Left, Side::Right] {
                        let inner = m.apply(side, &alpha_apply(sys, neg, &a)?)?;
                        let lhs = alpha_apply(sys, x, &inner)?;
                        let rhs = m.apply(side, &a)?.scaled(phase);
                        worst = worst.max(lhs.max_abs_diff(&rhs)?);
                    }
                }
            }
            Ok(worst)
        }
        (World::ZShift, MultiplierPair::Laurent(l)) => {
            let GPoint::Angle(angle) = t else { return Err(Error::WorldMismatch) };
            let w = SPECTRAL_WINDOW;
            Ok((-w..=w).map(|n| l.spectral_defect(n, angle, w)).fold(0.0, f64::max))
        }
        _ => Err(Error::WorldMismatch),
    }
}

/// A functional given in factored form `y -> g(a y)` with
/// `g(z) = tr(weight z)` (plain trace when `weight` is `None`).
#[derive(Clone, Debug)]
pub struct FactoredFunctional {
    pub weight: Option<Element>,
    pub a: Element,
}

impl FactoredFunctional {
    pub fn g(&self, z: &Element) -> Result<Complex64> {
        match &self.weight {
            Some(w) => Ok(w.mul(z)?.trace()),
            None => Ok(z.trace()),
        }
    }
}

/// `int g(a alpha_x(b)) dx` against `g(a b_0)` for each functional;
/// returns the largest discrepancy.
pub fn weak_integral_check(sys: &ActionSystem, b: &Element, functionals: &[FactoredFunctional]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for f in functionals {
        if let Some(w) = &f.weight {
            sys.check_element(w)?;
        }
        let field = alpha_field(sys, b, &f.a, Side::Right, |_| linalg::ONE)?;
        let functional = f.clone();
        let scalar = field.reduce(move |z| functional.g(z).expect("checked element"));
        let lhs = u_integrate(&scalar, 0.0, 0)?.value;
        let (ab0, _) = alpha_integral(sys, b, &f.a, Side::Right, |_| linalg::ONE)?;
        worst = worst.max((lhs - f.g(&ab0)?).norm());
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MainInequality {
    pub lhs: f64,
    /// Product of the square roots of the two norms.
    pub rhs_sqrt_form: f64,
    /// Product of the two norms.
    pub rhs_printed_form: f64,
    pub ok: bool,
    pub printed_form_holds: bool,
}

fn sum_over(sys: &ActionSystem, points: &[i64], f: impl Fn(i64) -> Result<Element>) -> Result<Element> {
    let mut acc = sys.zero();
    for &x in points {
        acc.add_scaled(&f(x)?, Complex64::new(sys.space.mass(x), 0.0));
    }
    Ok(acc)
}

/// `||int_L m* alpha_x(a* b) n||` against the square-root and product forms
/// of the bound by `int_L m* alpha_x(a* a) m` and `int_L n* alpha_x(b* b) n`.
pub fn main_inequality_check(
    sys: &ActionSystem,
    a: &Element,
    b: &Element,
    m: &Element,
    n: &Element,
    set: &LocalSet,
) -> Result<MainInequality> {
    for e in [a, b, m, n] {
        sys.check_element(e)?;
    }
    sys.space.check_local(set)?;
    let points = sys.space.points_of(set);
    let compress = |left: &Element, mid: &Element, right: &Element| -> Result<f64> {
        let s = sum_over(sys, &points, |x| left.adjoint().mul(&alpha_apply(sys, x, mid)?)?.mul(right))?;
        Ok(s.op_norm())
    };
    let lhs = compress(m, &a.adjoint().mul(b)?, n)?;
    let na = compress(m, &a.adjoint().mul(a)?, m)?;
    let nb = compress(n, &b.adjoint().mul(b)?, n)?;
    let rhs_sqrt_form = na.sqrt() * nb.sqrt();
    let rhs_printed_form = na * nb;
    Ok(MainInequality {
        lhs,
        rhs_sqrt_form,
        rhs_printed_form,
        ok: lhs <= rhs_sqrt_form + 1e-10,
        printed_form_holds: lhs <= rhs_printed_form + 1e-10,
    })
}

/// Dense Hermitian form of `e` on the given sparse index list.
fn dense_on(e: &Element, idx: &[i64]) -> CMat {
    match e {
        Element::Dense(m) => m.clone(),
        Element::Sparse(s) => s.compress(idx),
    }
}

/// Smallest eigenvalue, or the negated Hermitian defect when `m` is not
/// Hermitian.
fn positivity(m: &CMat) -> f64 {
    let defect = linalg::max_abs_diff(m, &m.adjoint());
    if defect > PSD_ORDER_TOL * linalg::max_abs(m).max(1.0) {
        return -defect;
    }
    if m.nrows() == 0 {
        return 0.0;
    }
    linalg::min_eigenvalue(m)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HereditaryStep {
    /// Number of exhaustion points in `L`.
    pub size: usize,
    /// `||int_L alpha_x(h) c||`.
    pub lhs: f64,
    /// `||int_L alpha_x(h)||^(1/2) ||int_L c* alpha_x(h) c||^(1/2)`.
    pub via_h: f64,
    /// `||int_L alpha_x(k)||^(1/2) ||int_L c* alpha_x(k) c||^(1/2)`.
    pub via_k: f64,
    /// `||int_D alpha_x(h) c||` over the rest `D` of the checked exhaustion.
    pub tail_lhs: f64,
    /// `M_k^(1/2) ||int_D c* alpha_x(k) c||^(1/2)`.
    pub tail_rhs: f64,
}

#[derive(Clone, Debug)]
pub struct HereditaryReport {
    pub min_eig_h: f64,
    pub min_eig_gap: f64,
    /// Bound on `||int_L alpha_x(k)||` over all local sets.
    pub m_k: f64,
    /// Certificate of `x -> alpha_x(k) c`.
    pub k_certificate: UIntegralCertificate<Element>,
    /// Certificate of `x -> c* alpha_x(k) c`, the input of the derivation.
    pub compressed_certificate: UIntegralCertificate<Element>,
    /// Certificate of `x -> alpha_x(h) c` with the derived tolerance.
    pub h_certificate: UIntegralCertificate<Element>,
    pub derived_epsilon: f64,
    /// Tolerance achieved by certifying `x -> alpha_x(h) c` directly.
    pub rerun_epsilon: f64,
    pub rerun_confirms: bool,
    pub steps: Vec<HereditaryStep>,
    pub domination_ok: bool,
}

impl HereditaryReport {
    pub fn summary(&self) -> CertificateSummary {
        self.h_certificate.summary()
    }
}

/// For `0 <= h <= k` with `k` integrable: checks the domination chain on
/// each exhaustion step and derives a certificate for `x -> alpha_x(h) c`
/// with tolerance `sqrt(M_k eps)` from one for `x -> c* alpha_x(k) c`.
pub fn hereditary_cone_check(
    sys: &ActionSystem,
    h: &Element,
    k: &Element,
    c: &Element,
    exhaustion: usize,
    eps: f64,
) -> Result<HereditaryReport> {
    for e in [h, k, c] {
        sys.check_element(e)?;
    }
    let idx = {
        let mut v: Vec<i64> = [h, k]
            .iter()
            .filter_map(|e| e.as_sparse())
            .flat_map(|s| s.support_indices())
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let (hd, kd) = (dense_on(h, &idx), dense_on(k, &idx));
    let min_eig_h = positivity(&hd);
    let min_eig_k = positivity(&kd);
    if min_eig_h < -PSD_ORDER_TOL || min_eig_k < -PSD_ORDER_TOL {
        return Err(Error::NotPositive(min_eig_h.min(min_eig_k)));
    }
    let min_eig_gap = positivity(&(&kd - &hd));
    if min_eig_gap < -PSD_ORDER_TOL {
        return Err(Error::NotDominated(min_eig_gap));
    }

    let m_k = match (&sys.world, k) {
        (World::ZShift, Element::Sparse(ks)) => TwistedLaurentOperator::from_element(ks, 0.0).norm_bound(),
        _ => {
            let all: Vec<i64> = (0..sys.space.len().unwrap_or(0) as i64).collect();
            sum_over(sys, &all, |x| alpha_apply(sys, x, k))?.op_norm()
        }
    };

    let ck = |x: i64, e: &Element| -> Result<Element> { c.adjoint().mul(&alpha_apply(sys, x, e)?)?.mul(c) };
    let c_star = c.adjoint();
    let compressed = {
        let (s, k2, c2, cs) = (sys.clone(), k.clone(), c.clone(), c_star.clone());
        let mut field = VectorField::new(sys.space.clone(), sys.zero(), NormKind::Operator, move |x| {
            let moved = alpha_apply(&s, x, &k2).expect("checked element");
            cs.mul(&moved).and_then(|v| v.mul(&c2)).expect("checked element")
        });
        if let (Element::Sparse(ks), Element::Sparse(cs)) = (k, c) {
            // nonzero only where alpha_x(k) meets both c and c*
            let support = match zshift_support(ks, cs, Side::Left) {
                Some((lo, hi)) => LocalSet::from_points(lo..=hi),
                None => LocalSet::empty(),
            };
            field = field.with_oracle(TailOracle::finite_support(support));
        }
        field
    };
    let compressed_certificate = u_integrate(&compressed, eps, 0)?;
    let k_certificate = u_integrate(&alpha_field(sys, k, c, Side::Left, |_| linalg::ONE)?, eps, 0)?;
    let derived_epsilon = (m_k * compressed_certificate.epsilon).sqrt();

    let rerun = u_integrate(&alpha_field(sys, h, c, Side::Left, |_| linalg::ONE)?, derived_epsilon, 0)?;
    let rerun_epsilon = rerun.epsilon;
    let rerun_confirms = rerun_epsilon <= 2.0 * derived_epsilon;

    let limit = sys.space.len().map_or(exhaustion, |n| exhaustion.min(n));
    let order: Vec<i64> = (0..limit).map(|j| sys.space.nth(j).expect("within space")).collect();
    let norm_of = |pts: &[i64], f: &dyn Fn(i64) -> Result<Element>| -> Result<f64> { Ok(sum_over(sys, pts, f)?.op_norm()) };
    let mut steps = Vec::with_capacity(limit);
    let mut domination_ok = true;
    let tol = 1e-10;
    for j in 1..=limit {
        let (l, d) = order.split_at(j);
        let lhs = norm_of(l, &|x| alpha_apply(sys, x, h)?.mul(c))?;
        let via_h = (norm_of(l, &|x| alpha_apply(sys, x, h))? * norm_of(l, &|x| ck(x, h))?).sqrt();
        let via_k = (norm_of(l, &|x| alpha_apply(sys, x, k))? * norm_of(l, &|x| ck(x, k))?).sqrt();
        let tail_lhs = norm_of(d, &|x| alpha_apply(sys, x, h)?.mul(c))?;
        let tail_rhs = (m_k * norm_of(d, &|x| ck(x, k))?).sqrt();
        let scale = 1.0 + via_k + tail_rhs;
        domination_ok &= lhs <= via_h + tol * scale && via_h <= via_k + tol * scale && tail_lhs <= tail_rhs + tol * scale;
        steps.push(HereditaryStep { size: j, lhs, via_h, via_k, tail_lhs, tail_rhs });
    }

    let h_certificate = UIntegralCertificate {
        value: rerun.value,
        witness: compressed_certificate.witness.clone(),
        epsilon: derived_epsilon,
        status: match compressed_certificate.status {
            CertificateStatus::Exact if derived_epsilon == 0.0 => CertificateStatus::Exact,
            CertificateStatus::Exact => CertificateStatus::Proof,
            s => s,
        },
        policy: format!("derived from {} via sqrt(M_k eps), M_k = {m_k:.6e}", compressed_certificate.policy),
        trace: compressed_certificate.trace.clone(),
        probes: Vec::new(),
    };

    Ok(HereditaryReport {
        min_eig_h,
        min_eig_gap,
        m_k,
        k_certificate,
        compressed_certificate,
        h_certificate,
        derived_epsilon,
        rerun_epsilon,
        rerun_confirms,
        steps,
        domination_ok,
    })
}

#[derive(Clone, Debug)]
pub struct LaurentRecovery {
    pub operator: TwistedLaurentOperator,
    /// Largest entry discrepancy on the interior window.
    pub max_err: f64,
    /// Half-width of the interior window, `N - radius(b)`.
    pub interior: i64,
    /// Largest deviation from constancy along diagonals (only at `t = 0`).
    pub toeplitz_err: Option<f64>,
}

/// `b^(t)` by direct summation of `exp(-i n t) alpha_n(b)` over
/// `|n| <= window`, truncated to `[-N, N]^2`, against the closed form.
pub fn laurent_recovery(b: &SparseZOperator, t: f64, window: i64) -> Result<LaurentRecovery> {
    if window < 0 {
        return Err(Error::InvalidArgument(format!("window {window} is negative")));
    }
    let size = (2 * window + 1) as usize;
    let mut direct = linalg::zeros(size, size);
    for n in -window..=window {
        let phase = cis_multiple(-n, t);
        for (i, j, c) in b.entries() {
            let (r, s) = (i + n, j + n);
            if r.abs() <= window && s.abs() <= window {
                direct[((r + window) as usize, (s + window) as usize)] += phase * c;
            }
        }
    }
    let operator = TwistedLaurentOperator::from_element(b, t);
    let interior = window - b.radius();
    let mut max_err: f64 = 0.0;
    for j in -interior..=interior {
        for k in -interior..=interior {
            let d = direct[((j + window) as usize, (k + window) as usize)];
            max_err = max_err.max((d - operator.entry(j, k)).norm());
        }
    }
    let toeplitz_err = (operator.t == 0.0).then(|| {
        let mut err: f64 = 0.0;
        for j in -interior..=interior {
            for k in -interior..=interior {
                let base = direct[((j - k).max(0) as usize + (window - interior) as usize, (k - j).max(0) as usize + (window - interior) as usize)];
                err = err.max((direct[((j + window) as usize, (k + window) as usize)] - base).norm());
            }
        }
        err
    });
    if let Some(e) = toeplitz_err {
        if e > 1e-12 {
            return Err(Error::Invariant(format!("fixed-point transform is not Toeplitz (defect {e:.3e})")));
        }
    }
    Ok(LaurentRecovery { operator, max_err, interior, toeplitz_err })
}
