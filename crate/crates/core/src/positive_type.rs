//! Positive-type operator-valued functions on a finite abelian group: the
//! block Gram test, the Naimark dilation built by GNS on the Gram matrix, the
//! spectral measure of the dilation and the inversion identities.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{fourier, fourier_scalar, FiniteAbelianGroup, GroupElement, OperatorField};
use crate::linalg::{self, CMat};
use crate::ucond::{u_integrate, LocalIntegrationSpace, NormKind, UIntegralCertificate, VectorField};

/// Default absolute tolerance for the eigenvalue test on `O(1)` data.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PositiveTypeVerdict {
    pub is_positive_type: bool,
    pub min_eigenvalue: f64,
    /// `max |K - K*|`; positive type forces `K` Hermitian.
    pub hermitian_defect: f64,
    pub tolerance: f64,
    pub witness_points: Vec<GroupElement>,
}

/// Block Gram matrix `K_{s,t} = p(t - s)` over the whole group.
pub fn gram_matrix(p: &OperatorField) -> CMat {
    let g = p.group();
    let (n, d) = (g.order(), p.dim());
    let mut k = linalg::zeros(n * d, n * d);
    for s in 0..n {
        for t in 0..n {
            k.view_mut((s * d, t * d), (d, d)).copy_from(p.get(g.sub(t, s)));
        }
    }
    k
}

pub fn check_positive_type(p: &OperatorField) -> PositiveTypeVerdict {
    check_positive_type_tol(p, PSD_TOL)
}

/// Eigenvalue test on the Hermitian part of the block Gram matrix. The
/// tolerance is scaled by `max(1, ||K||)`; a Hermitian defect beyond the same
/// relative level makes the verdict negative.
pub fn check_positive_type_tol(p: &OperatorField, tol: f64) -> PositiveTypeVerdict {
    let k = gram_matrix(p);
    let scale = linalg::max_abs(&k).max(1.0);
    let hermitian_defect = linalg::max_abs_diff(&k, &k.adjoint());
    let (values, _) = linalg::hermitian_eigen(&k);
    let min_eigenvalue = values.first().copied().unwrap_or(0.0);
    let tolerance = tol * scale;
    PositiveTypeVerdict {
        is_positive_type: min_eigenvalue >= -tolerance && hermitian_defect <= tolerance,
        min_eigenvalue,
        hermitian_defect,
        tolerance,
        witness_points: p.group().elements(),
    }
}

/// `p(t) = V* rep(t) V` with `rep` a unitary representation on a space of
/// dimension `dilation_dim`.
#[derive(Clone, Debug)]
pub struct NaimarkDilation {
    group: FiniteAbelianGroup,
    pub dilation_dim: usize,
    pub rep: Vec<CMat>,
    pub embedding: CMat,
    pub cutoff: f64,
}

impl NaimarkDilation {
    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn unitarity_residual(&self) -> f64 {
        self.rep.iter().map(linalg::unitarity_defect).fold(0.0, f64::max)
    }

    pub fn homomorphism_residual(&self) -> f64 {
        let n = self.group.order();
        let mut worst: f64 = 0.0;
        for s in 0..n {
            for t in 0..n {
                let prod = &self.rep[s] * &self.rep[t];
                worst = worst.max(linalg::max_abs_diff(&self.rep[self.group.add(s, t)], &prod));
            }
        }
        worst
    }

    /// `V* rep(t) V`.
    pub fn reconstruct(&self, t: usize) -> CMat {
        self.embedding.adjoint() * &self.rep[t] * &self.embedding
    }

    pub fn reconstruction_residual(&self, p: &OperatorField) -> f64 {
        (0..self.group.order()).map(|t| linalg::max_abs_diff(&self.reconstruct(t), p.get(t))).fold(0.0, f64::max)
    }
}

/// GNS construction on the block Gram matrix: the translations
/// `(T_r xi)(s) = xi(s - r)` commute with `K` and descend to unitaries on the
/// span of its eigenvectors above the cutoff.
pub fn naimark_dilate(p: &OperatorField) -> Result<NaimarkDilation> {
    let verdict = check_positive_type(p);
    if verdict.hermitian_defect > verdict.tolerance {
        return Err(Error::Malformed(format!(
            "Gram matrix is not Hermitian (defect {:.3e}); p(-t) must equal p(t)*",
            verdict.hermitian_defect
        )));
    }
    if !verdict.is_positive_type {
        return Err(Error::NotPositiveType { min_eigenvalue: verdict.min_eigenvalue });
    }
    let g = p.group().clone();
    let (n, d) = (g.order(), p.dim());
    let k = gram_matrix(p);
    let (values, vectors) = linalg::hermitian_eigen(&k);
    let lambda_max = values.last().copied().unwrap_or(0.0);
    let cutoff = (1e-12 * lambda_max).max(1e-10);
    let kept: Vec<usize> = (0..values.len()).filter(|&i| values[i] > cutoff).collect();
    let r = kept.len();
    let w = CMat::from_fn(n * d, r, |i, j| vectors[(i, kept[j])]);

    let rep = (0..n)
        .map(|shift| {
            // rows of T_shift W: (T W)(s) = W(s - shift)
            let tw = CMat::from_fn(n * d, r, |i, j| {
                let (s, a) = (i / d, i % d);
                w[(g.sub(s, shift) * d + a, j)]
            });
            w.adjoint() * tw
        })
        .collect();

    let mut embedding = linalg::zeros(r, d);
    for (j, &idx) in kept.iter().enumerate() {
        let sqrt_l = values[idx].sqrt();
        for a in 0..d {
            // identity block sits at group index 0
            embedding[(j, a)] = vectors[(a, idx)].conj() * sqrt_l;
        }
    }
    Ok(NaimarkDilation { group: g, dilation_dim: r, rep, embedding, cutoff })
}

/// Projection-valued measure `E({x}) = (1/|G|) sum_t conj((t, x)) rep(t)`.
#[derive(Clone, Debug)]
pub struct SpectralMeasure {
    group: FiniteAbelianGroup,
    pub projections: Vec<CMat>,
}

const REP_TOL: f64 = 1e-10;

pub fn spectral_measure(dil: &NaimarkDilation) -> Result<SpectralMeasure> {
    let u = dil.unitarity_residual();
    if u > REP_TOL {
        return Err(Error::RepNotUnitary(u));
    }
    let h = dil.homomorphism_residual();
    if h > REP_TOL {
        return Err(Error::RepNotHomomorphism(h));
    }
    Ok(stone_projections(dil.group(), &dil.rep))
}

/// Spectral projections of any representation given by its values.
pub fn stone_projections(group: &FiniteAbelianGroup, rep: &[CMat]) -> SpectralMeasure {
    let n = group.order();
    let dim = rep.first().map_or(0, |m| m.nrows());
    let projections = (0..n)
        .map(|x| {
            let mut e = linalg::zeros(dim, dim);
            for (t, u) in rep.iter().enumerate() {
                e += u * (group.pairing_idx(t, x).conj() / n as f64);
            }
            e
        })
        .collect();
    SpectralMeasure { group: group.clone(), projections }
}

impl SpectralMeasure {
    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    fn dim(&self) -> usize {
        self.projections.first().map_or(0, |m| m.nrows())
    }

    /// `E(L) = sum_{x in L} E({x})`.
    pub fn of_set(&self, set: &[usize]) -> CMat {
        let mut e = linalg::zeros(self.dim(), self.dim());
        for &x in set {
            e += &self.projections[x];
        }
        e
    }

    /// Idempotence and self-adjointness.
    pub fn projection_residual(&self) -> f64 {
        self.projections
            .iter()
            .map(|e| linalg::max_abs_diff(&(e * e), e).max(linalg::max_abs_diff(&e.adjoint(), e)))
            .fold(0.0, f64::max)
    }

    pub fn orthogonality_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.projections.iter().enumerate() {
            for b in self.projections.iter().skip(i + 1) {
                worst = worst.max(linalg::max_abs(&(a * b)));
            }
        }
        worst
    }

    pub fn completeness_residual(&self) -> f64 {
        let all: Vec<usize> = (0..self.projections.len()).collect();
        linalg::max_abs_diff(&self.of_set(&all), &linalg::identity(self.dim()))
    }

    /// `rep(t) = sum_x (t, x) E({x})`.
    pub fn stone_residual(&self, rep: &[CMat]) -> f64 {
        let g = &self.group;
        let mut worst: f64 = 0.0;
        for (t, u) in rep.iter().enumerate() {
            let mut acc = linalg::zeros(self.dim(), self.dim());
            for (x, e) in self.projections.iter().enumerate() {
                acc += e * g.pairing_idx(t, x);
            }
            worst = worst.max(linalg::max_abs_diff(&acc, u));
        }
        worst
    }
}

/// A positive-type function together with its dilation and spectral measure.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub p: OperatorField,
    pub p_hat: OperatorField,
    pub dilation: NaimarkDilation,
    pub measure: SpectralMeasure,
}

impl Analysis {
    pub fn new(p: OperatorField) -> Result<Self> {
        let dilation = naimark_dilate(&p)?;
        let measure = spectral_measure(&dilation)?;
        let p_hat = fourier(&p);
        Ok(Analysis { p, p_hat, dilation, measure })
    }

    fn group(&self) -> &FiniteAbelianGroup {
        self.p.group()
    }

    fn check_vector(&self, v: &CMat) -> Result<()> {
        if v.shape() != (self.p.dim(), 1) {
            return Err(Error::ShapeMismatch(format!(
                "vector of shape {:?}, expected {}x1",
                v.shape(),
                self.p.dim()
            )));
        }
        Ok(())
    }

    /// `sum_t g(t) <p(t) xi, eta>` against `<(sum_x g^(x) E({x})) V xi, V eta>`.
    pub fn babalu_check(&self, g: &[Complex64], xi: &CMat, eta: &CMat) -> Result<ScalarComparison> {
        self.check_vector(xi)?;
        self.check_vector(eta)?;
        let grp = self.group();
        if g.len() != grp.order() {
            return Err(Error::ShapeMismatch(format!("{} scalar values for order {}", g.len(), grp.order())));
        }
        let mass = grp.haar().mass_g;
        let lhs: Complex64 = (0..grp.order()).map(|t| g[t] * linalg::inner(&(self.p.get(t) * xi), eta) * mass).sum();
        let g_hat = fourier_scalar(grp, g);
        let dim = self.dilation.dilation_dim;
        let mut op = linalg::zeros(dim, dim);
        for (x, e) in self.measure.projections.iter().enumerate() {
            op += e * g_hat[x];
        }
        let v = &self.dilation.embedding;
        let rhs = linalg::inner(&(op * (v * xi)), &(v * eta));
        Ok(ScalarComparison::new(lhs, rhs))
    }

    /// `max_x |<p^(-x) xi, eta> mass_Gamma - <E({x}) V xi, V eta>|`.
    pub fn equal_measures_check(&self, xi: &CMat, eta: &CMat) -> Result<f64> {
        self.check_vector(xi)?;
        self.check_vector(eta)?;
        let grp = self.group();
        let mass = grp.haar().mass_gamma;
        let v = &self.dilation.embedding;
        let (vxi, veta) = (v * xi, v * eta);
        let mut worst: f64 = 0.0;
        for x in 0..grp.order() {
            let lhs = linalg::inner(&(self.p_hat.get(grp.neg(x)) * xi), eta) * mass;
            let rhs = linalg::inner(&(&self.measure.projections[x] * &vxi), &veta);
            worst = worst.max((lhs - rhs).norm());
        }
        Ok(worst)
    }

    /// `sum_{x in L} conj((t,x)) p^(x) mass_Gamma` against
    /// `V* E(-L) rep(t) V`, and against the other ordering `V* rep(t) E(-L) V`.
    pub fn combined_check(&self, t: usize, set: &[usize]) -> CombinedOutcome {
        let grp = self.group();
        let mass = grp.haar().mass_gamma;
        let d = self.p.dim();
        let mut lhs = linalg::zeros(d, d);
        for &x in set {
            lhs += self.p_hat.get(x) * (grp.pairing_idx(t, x).conj() * mass);
        }
        let neg: Vec<usize> = set.iter().map(|&x| grp.neg(x)).collect();
        let e = self.measure.of_set(&neg);
        let v = &self.dilation.embedding;
        let u = &self.dilation.rep[t];
        let rhs = v.adjoint() * &e * u * v;
        let rhs_other_order = v.adjoint() * u * &e * v;
        CombinedOutcome {
            abs_err: linalg::max_abs_diff(&lhs, &rhs),
            ordering_err: linalg::max_abs_diff(&rhs, &rhs_other_order),
            lhs,
            rhs,
            rhs_other_order,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ScalarComparison {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub abs_err: f64,
}

impl ScalarComparison {
    pub fn new(lhs: Complex64, rhs: Complex64) -> Self {
        ScalarComparison { lhs, rhs, abs_err: (lhs - rhs).norm() }
    }
}

#[derive(Clone, Debug)]
pub struct CombinedOutcome {
    pub lhs: CMat,
    pub rhs: CMat,
    pub rhs_other_order: CMat,
    pub abs_err: f64,
    pub ordering_err: f64,
}

#[derive(Clone, Debug)]
pub struct InversionOutcome {
    pub value: CMat,
    pub abs_err: f64,
    pub certificate: UIntegralCertificate<CMat>,
}

/// Recover `p(t)` as the unconditional integral over the dual group of
/// `x -> conj((t, x)) p^(x)` with point mass `1/|G|`.
pub fn inversion_check(p: &OperatorField, t: usize) -> Result<InversionOutcome> {
    let verdict = check_positive_type(p);
    if !verdict.is_positive_type {
        return Err(Error::NotPositiveType { min_eigenvalue: verdict.min_eigenvalue });
    }
    let p_hat = Arc::new(fourier(p));
    inversion_from_transform(p, p_hat, t)
}

pub(crate) fn inversion_from_transform(p: &OperatorField, p_hat: Arc<OperatorField>, t: usize) -> Result<InversionOutcome> {
    let g = p.group().clone();
    let n = g.order();
    if t >= n {
        return Err(Error::InvalidArgument(format!("element index {t} out of range")));
    }
    let space = Arc::new(LocalIntegrationSpace::finite((0..n as i64).collect(), g.haar().mass_gamma)?);
    let field = VectorField::new(space, linalg::zeros(p.dim(), p.dim()), NormKind::Operator, move |x| {
        p_hat.get(x as usize) * g.pairing_idx(t, x as usize).conj()
    });
    let certificate = u_integrate(&field, 0.0, 0)?;
    let value = certificate.value.clone();
    Ok(InversionOutcome { abs_err: linalg::max_abs_diff(&value, p.get(t)), value, certificate })
}

/// `p(t) = V0* (sum_x (t, x) P_x) V0` with `P_x` orthogonal projections onto
/// blocks of columns of a random unitary and `V0` a random `m x d` matrix.
pub fn random_positive_type<R: Rng + ?Sized>(group: &FiniteAbelianGroup, dim: usize, rng: &mut R) -> OperatorField {
    let n = group.order();
    let m = (n * dim).max(1);
    let q = linalg::random_unitary(m, rng);
    let owner: Vec<usize> = (0..m).map(|_| rng.gen_range(0..n)).collect();
    let v0 = linalg::random_cmat(m, dim, rng);
    let projections: Vec<CMat> = (0..n)
        .map(|x| {
            let cols: Vec<usize> = (0..m).filter(|&c| owner[c] == x).collect();
            let qx = CMat::from_fn(m, cols.len(), |i, j| q[(i, cols[j])]);
            &qx * qx.adjoint()
        })
        .collect();
    let values = (0..n)
        .map(|t| {
            let mut u = linalg::zeros(m, m);
            for (x, px) in projections.iter().enumerate() {
                u += px * group.pairing_idx(t, x);
            }
            v0.adjoint() * u * &v0
        })
        .collect();
    OperatorField::new(group.clone(), dim, values).expect("shapes are consistent")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gram_of_delta_at_generator_is_swap() {
        let g = FiniteAbelianGroup::cyclic(2).unwrap();
        let p = OperatorField::delta(g, 1, linalg::identity(1)).unwrap();
        let k = gram_matrix(&p);
        assert_eq!(k, linalg::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]));
        let v = check_positive_type(&p);
        assert!(!v.is_positive_type);
        assert!((v.min_eigenvalue + 1.0).abs() < 1e-12);
    }

    #[test]
    fn generated_instance_dilates() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g: FiniteAbelianGroup = "3,2".parse().unwrap();
        let p = random_positive_type(&g, 2, &mut rng);
        let dil = naimark_dilate(&p).unwrap();
        assert!(dil.unitarity_residual() < 1e-10);
        assert!(dil.homomorphism_residual() < 1e-10);
        assert!(dil.reconstruction_residual(&p) < 1e-8);
    }
}
