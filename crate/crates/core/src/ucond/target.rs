use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, CMat};

/// Norms the engine knows how to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Euclidean,
    Sup,
    Frobenius,
    Operator,
}

/// An element of a concrete Banach space the engine can integrate into.
pub trait Target: Clone + Send + Sync + 'static {
    fn zero_like(&self) -> Self;

    /// `self += c * other`.
    fn add_scaled(&mut self, other: &Self, c: Complex64);

    fn norm(&self, kind: NormKind) -> f64;

    fn same_shape(&self, other: &Self) -> bool;

    /// Euclidean/Frobenius inner product, linear in `self`.
    fn inner(&self, other: &Self) -> Complex64;

    fn as_scalar(&self) -> Option<Complex64> {
        None
    }

    fn shape_label(&self) -> String {
        String::from("element")
    }

    fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.zero_like();
        out.add_scaled(self, c);
        out
    }

    fn distance(&self, other: &Self, kind: NormKind) -> f64 {
        let mut d = self.clone();
        d.add_scaled(other, Complex64::new(-1.0, 0.0));
        d.norm(kind)
    }
}

impl Target for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn add_scaled(&mut self, other: &Self, c: Complex64) {
        *self += c * other;
    }

    fn norm(&self, _kind: NormKind) -> f64 {
        Complex64::norm(*self)
    }

    fn same_shape(&self, _other: &Self) -> bool {
        true
    }

    fn inner(&self, other: &Self) -> Complex64 {
        self * other.conj()
    }

    fn as_scalar(&self) -> Option<Complex64> {
        Some(*self)
    }

    fn shape_label(&self) -> String {
        String::from("scalar")
    }
}

impl Target for CMat {
    fn zero_like(&self) -> Self {
        CMat::zeros(self.nrows(), self.ncols())
    }

    fn add_scaled(&mut self, other: &Self, c: Complex64) {
        assert_eq!(self.shape(), other.shape(), "matrix shapes differ");
        for (a, b) in self.iter_mut().zip(other.iter()) {
            *a += c * b;
        }
    }

    fn norm(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::Operator => linalg::op_norm(self),
            NormKind::Sup => linalg::max_abs(self),
            NormKind::Euclidean | NormKind::Frobenius => linalg::frobenius(self),
        }
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.shape() == other.shape()
    }

    fn inner(&self, other: &Self) -> Complex64 {
        linalg::frobenius_inner(self, other)
    }

    fn as_scalar(&self) -> Option<Complex64> {
        (self.shape() == (1, 1)).then(|| self[(0, 0)])
    }

    fn shape_label(&self) -> String {
        format!("{}x{}", self.nrows(), self.ncols())
    }
}
