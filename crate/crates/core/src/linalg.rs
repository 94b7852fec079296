//! Dense complex matrix helpers shared by every module.
//!
//! Everything here sits on top of `nalgebra`; the Hermitian eigensolver and
//! the SVD are the only numerically delicate pieces and both come from there.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

pub type CMat = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Matrix unit `E_{ij}` of size `n`.
pub fn unit(n: usize, i: usize, j: usize) -> CMat {
    let mut m = zeros(n, n);
    m[(i, j)] = ONE;
    m
}

pub fn from_real_rows(rows: &[&[f64]]) -> CMat {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    CMat::from_fn(r, c, |i, j| Complex64::new(rows[i][j], 0.0))
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entrywise modulus of `a - b`. Shapes must agree.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Frobenius inner product `<a, b> = tr(b* a)`, linear in the first slot.
pub fn frobenius_inner(a: &CMat, b: &CMat) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Operator norm, computed as the largest singular value.
pub fn op_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigen(m).0.first().copied().unwrap_or(0.0)
}

/// Positive square root of the Hermitian part of a PSD matrix; negative
/// eigenvalues are clamped to zero.
pub fn psd_sqrt(m: &CMat) -> CMat {
    let (values, vectors) = hermitian_eigen(m);
    let n = values.len();
    let mut d = zeros(n, n);
    for (i, v) in values.iter().enumerate() {
        d[(i, i)] = Complex64::new(v.max(0.0).sqrt(), 0.0);
    }
    &vectors * d * vectors.adjoint()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMat::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// `||m* m - I||` in max-entry form.
pub fn unitarity_defect(m: &CMat) -> f64 {
    max_abs_diff(&(m.adjoint() * m), &identity(m.ncols()))
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_cmat<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| random_complex(rng))
}

pub fn random_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    random_cmat(n, 1, rng)
}

pub fn random_psd<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let a = random_cmat(n, n, rng);
    &a * a.adjoint()
}

/// Haar-ish random unitary: QR of a random complex matrix with the phases of
/// the `R` diagonal pushed back into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let a = random_cmat(n, n, rng);
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `<u, v> = v* u` for column vectors.
pub fn inner(u: &CMat, v: &CMat) -> Complex64 {
    (v.adjoint() * u)[(0, 0)]
}
