//! Finite abelian groups, their duals and the Fourier transform of
//! operator-valued functions.
//!
//! Conventions: point mass 1 on `G` and `1/|G|` on the dual, forward transform
//! `f^(x) = sum_t (t,x) f(t)` without a conjugate, inverse transform with the
//! conjugate pairing.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// `Z_{n_1} x ... x Z_{n_k}`, elements enumerated in mixed radix with the last
/// factor varying fastest.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct FiniteAbelianGroup {
    factors: Vec<u32>,
}

/// Coordinates of a group element. Characters use the same coordinates via
/// the self-duality of `Z_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElement(pub Vec<u32>);

pub type Character = GroupElement;

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl TryFrom<Vec<u32>> for FiniteAbelianGroup {
    type Error = Error;

    fn try_from(factors: Vec<u32>) -> Result<Self> {
        FiniteAbelianGroup::new(factors)
    }
}

impl From<FiniteAbelianGroup> for Vec<u32> {
    fn from(g: FiniteAbelianGroup) -> Self {
        g.factors
    }
}

impl FromStr for FiniteAbelianGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let factors = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidArgument(format!("bad group factor {p:?} in {s:?}")))
            })
            .collect::<Result<Vec<u32>>>()?;
        FiniteAbelianGroup::new(factors)
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(u32::to_string).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// `exp(2 pi i num/den)`, exact at multiples of a quarter turn.
fn root_of_unity(num: u64, den: u64) -> Complex64 {
    let num = num % den;
    if (4 * num).is_multiple_of(den) {
        return match 4 * num / den {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, 2.0 * PI * num as f64 / den as f64)
}

impl FiniteAbelianGroup {
    pub fn new(factors: Vec<u32>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument(String::from("empty factor list")));
        }
        if factors.contains(&0) {
            return Err(Error::InvalidArgument(format!("factors must be >= 1: {factors:?}")));
        }
        let order = factors.iter().try_fold(1u64, |acc, &n| acc.checked_mul(n as u64));
        match order {
            Some(o) if o <= 1 << 20 => Ok(FiniteAbelianGroup { factors }),
            _ => Err(Error::InvalidArgument(format!("group {factors:?} is too large"))),
        }
    }

    pub fn cyclic(n: u32) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn factors(&self) -> &[u32] {
        &self.factors
    }

    pub fn order(&self) -> usize {
        self.factors.iter().map(|&n| n as usize).product()
    }

    /// Element with the given enumeration index.
    pub fn element(&self, mut idx: usize) -> GroupElement {
        let mut coords = vec![0u32; self.factors.len()];
        for (c, &n) in coords.iter_mut().zip(&self.factors).rev() {
            *c = (idx % n as usize) as u32;
            idx /= n as usize;
        }
        GroupElement(coords)
    }

    pub fn elements(&self) -> Vec<GroupElement> {
        (0..self.order()).map(|i| self.element(i)).collect()
    }

    pub fn check(&self, g: &GroupElement) -> Result<()> {
        if g.0.len() != self.factors.len() || g.0.iter().zip(&self.factors).any(|(&c, &n)| c >= n) {
            return Err(Error::FactorMismatch(g.0.clone(), self.factors.clone()));
        }
        Ok(())
    }

    pub fn index_of(&self, g: &GroupElement) -> Result<usize> {
        self.check(g)?;
        Ok(g.0.iter().zip(&self.factors).fold(0usize, |acc, (&c, &n)| acc * n as usize + c as usize))
    }

    pub fn identity(&self) -> usize {
        0
    }

    /// Index of `a + b`.
    pub fn add(&self, a: usize, b: usize) -> usize {
        let (x, y) = (self.element(a), self.element(b));
        let sum = x.0.iter().zip(&y.0).zip(&self.factors).map(|((&p, &q), &n)| (p + q) % n).collect();
        self.index_of(&GroupElement(sum)).expect("coordinates in range")
    }

    /// Index of `-a`.
    pub fn neg(&self, a: usize) -> usize {
        let x = self.element(a);
        let neg = x.0.iter().zip(&self.factors).map(|(&p, &n)| (n - p) % n).collect();
        self.index_of(&GroupElement(neg)).expect("coordinates in range")
    }

    /// Index of `a - b`.
    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    /// Duality pairing `(t, x) = prod_i exp(2 pi i t_i x_i / n_i)`.
    pub fn pairing(&self, t: &GroupElement, x: &Character) -> Result<Complex64> {
        self.check(t)?;
        self.check(x)?;
        Ok(self.pairing_coords(&t.0, &x.0))
    }

    /// Pairing of the elements with enumeration indices `t` and `x`.
    pub fn pairing_idx(&self, t: usize, x: usize) -> Complex64 {
        self.pairing_coords(&self.element(t).0, &self.element(x).0)
    }

    fn pairing_coords(&self, t: &[u32], x: &[u32]) -> Complex64 {
        // Sum the phases exactly over the common denominator prod n_i.
        let den: u64 = self.factors.iter().map(|&n| n as u64).product();
        let mut num = 0u64;
        for ((&a, &b), &n) in t.iter().zip(x).zip(&self.factors) {
            let r = (a as u64 * b as u64) % n as u64;
            num = (num + r * (den / n as u64)) % den;
        }
        root_of_unity(num, den)
    }

    /// Enumeration of the dual group; characters share element coordinates.
    pub fn dual_group(&self) -> Vec<Character> {
        self.elements()
    }

    /// `table[(t, x)] = (t, x)`.
    pub fn character_table(&self) -> CMat {
        let n = self.order();
        CMat::from_fn(n, n, |t, x| self.pairing_idx(t, x))
    }

    pub fn haar(&self) -> HaarPair {
        HaarPair { mass_g: 1.0, mass_gamma: 1.0 / self.order() as f64 }
    }

    pub fn require_same(&self, other: &FiniteAbelianGroup) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::FactorMismatch(self.factors.clone(), other.factors.clone()))
        }
    }
}

/// Point masses of the Haar measures on `G` and on its dual.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaarPair {
    pub mass_g: f64,
    pub mass_gamma: f64,
}

/// A function from a finite abelian group (or its dual, which shares the
/// enumeration) to `d x d` complex matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorField {
    group: FiniteAbelianGroup,
    dim: usize,
    values: Vec<CMat>,
}

impl OperatorField {
    pub fn new(group: FiniteAbelianGroup, dim: usize, values: Vec<CMat>) -> Result<Self> {
        if values.len() != group.order() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a group of order {}",
                values.len(),
                group.order()
            )));
        }
        if let Some(bad) = values.iter().find(|m| m.shape() != (dim, dim)) {
            return Err(Error::ShapeMismatch(format!("value of shape {:?}, expected {dim}x{dim}", bad.shape())));
        }
        Ok(OperatorField { group, dim, values })
    }

    pub fn from_fn(group: FiniteAbelianGroup, dim: usize, mut f: impl FnMut(usize) -> CMat) -> Result<Self> {
        let values = (0..group.order()).map(&mut f).collect();
        Self::new(group, dim, values)
    }

    pub fn zero(group: FiniteAbelianGroup, dim: usize) -> Self {
        let values = vec![linalg::zeros(dim, dim); group.order()];
        OperatorField { group, dim, values }
    }

    /// `delta_g * m`.
    pub fn delta(group: FiniteAbelianGroup, at: usize, m: CMat) -> Result<Self> {
        let dim = m.nrows();
        let mut f = Self::zero(group, dim);
        if at >= f.values.len() {
            return Err(Error::InvalidArgument(format!("element index {at} out of range")));
        }
        f.values[at] = m;
        Self::new(f.group, dim, f.values)
    }

    /// `t -> (t, x0) c`.
    pub fn character_times(group: FiniteAbelianGroup, x0: usize, c: CMat) -> Result<Self> {
        let dim = c.nrows();
        let g = group.clone();
        Self::from_fn(group, dim, |t| c.map(|z| z * g.pairing_idx(t, x0)))
    }

    pub fn random<R: Rng + ?Sized>(group: FiniteAbelianGroup, dim: usize, rng: &mut R) -> Self {
        let values = (0..group.order()).map(|_| linalg::random_cmat(dim, dim, rng)).collect();
        OperatorField { group, dim, values }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[CMat] {
        &self.values
    }

    pub fn get(&self, idx: usize) -> &CMat {
        &self.values[idx]
    }

    pub fn at(&self, g: &GroupElement) -> Result<&CMat> {
        Ok(&self.values[self.group.index_of(g)?])
    }

    pub fn max_abs_diff(&self, other: &OperatorField) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| linalg::max_abs_diff(a, b)).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(linalg::max_abs).fold(0.0, f64::max)
    }
}

/// `f^(x) = sum_t (t, x) f(t) mass_G`.
pub fn fourier(f: &OperatorField) -> OperatorField {
    let g = f.group();
    let mass = g.haar().mass_g;
    let n = g.order();
    let values = (0..n)
        .map(|x| {
            let mut acc = linalg::zeros(f.dim, f.dim);
            for t in 0..n {
                acc += f.get(t) * (g.pairing_idx(t, x) * mass);
            }
            acc
        })
        .collect();
    OperatorField { group: g.clone(), dim: f.dim, values }
}

/// `g^v(t) = sum_x conj((t, x)) g(x) mass_Gamma`.
pub fn inverse_fourier(h: &OperatorField) -> OperatorField {
    let g = h.group();
    let mass = g.haar().mass_gamma;
    let n = g.order();
    let values = (0..n)
        .map(|t| {
            let mut acc = linalg::zeros(h.dim, h.dim);
            for x in 0..n {
                acc += h.get(x) * (g.pairing_idx(t, x).conj() * mass);
            }
            acc
        })
        .collect();
    OperatorField { group: g.clone(), dim: h.dim, values }
}

/// Scalar forward transform of `g: G -> C`.
pub fn fourier_scalar(group: &FiniteAbelianGroup, g: &[Complex64]) -> Vec<Complex64> {
    let n = group.order();
    (0..n).map(|x| (0..n).map(|t| group.pairing_idx(t, x) * g[t]).sum()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
}

/// Both sides of Plancherel's identity with the Haar pair above.
pub fn plancherel_check(f: &OperatorField) -> Comparison {
    let haar = f.group().haar();
    let lhs: f64 = f.values().iter().map(|m| linalg::frobenius(m).powi(2) * haar.mass_g).sum();
    let rhs: f64 = fourier(f).values().iter().map(|m| linalg::frobenius(m).powi(2) * haar.mass_gamma).sum();
    Comparison { lhs, rhs, abs_err: (lhs - rhs).abs() }
}
