//! Finitely supported bi-infinite matrices and twisted Laurent operators on
//! `l^2(Z)`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, CMat};
use crate::ucond::{NormKind, Target};

/// `exp(i k t)` with the rounding error of `k t` compensated.
pub fn cis_multiple(k: i64, t: f64) -> Complex64 {
    let kf = k as f64;
    let p = kf * t;
    let err = kf.mul_add(t, -p);
    Complex64::from_polar(1.0, p) * Complex64::new(1.0, err)
}

/// A bi-infinite matrix with finitely many nonzero entries.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<SparseEntry>", into = "Vec<SparseEntry>")]
pub struct SparseZOperator {
    entries: BTreeMap<(i64, i64), Complex64>,
}

/// JSON form of one entry: `[i, j, re, im]`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SparseEntry(pub i64, pub i64, pub f64, pub f64);

impl TryFrom<Vec<SparseEntry>> for SparseZOperator {
    type Error = String;

    fn try_from(v: Vec<SparseEntry>) -> Result<Self, String> {
        let mut out = SparseZOperator::zero();
        for SparseEntry(i, j, re, im) in v {
            if !(re.is_finite() && im.is_finite()) {
                return Err(format!("entry ({i}, {j}) is not finite"));
            }
            if out.entries.contains_key(&(i, j)) {
                return Err(format!("entry ({i}, {j}) listed twice"));
            }
            out.set(i, j, Complex64::new(re, im));
        }
        Ok(out)
    }
}

impl From<SparseZOperator> for Vec<SparseEntry> {
    fn from(s: SparseZOperator) -> Self {
        s.entries.into_iter().map(|((i, j), c)| SparseEntry(i, j, c.re, c.im)).collect()
    }
}

/// Inclusive index bounds of a support.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub lo: i64,
    pub hi: i64,
}

impl SparseZOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The matrix unit `E_ij`.
    pub fn unit(i: i64, j: i64) -> Self {
        Self::from_entries([(i, j, linalg::ONE)])
    }

    pub fn from_entries<I: IntoIterator<Item = (i64, i64, Complex64)>>(entries: I) -> Self {
        let mut out = Self::zero();
        for (i, j, c) in entries {
            out.add_entry(i, j, c);
        }
        out
    }

    /// `sum_{|j| <= n} E_jj`.
    pub fn identity_window(n: i64) -> Self {
        Self::from_entries((-n..=n).map(|j| (j, j, linalg::ONE)))
    }

    pub fn set(&mut self, i: i64, j: i64, c: Complex64) {
        if c == linalg::ZERO {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), c);
        }
    }

    pub fn add_entry(&mut self, i: i64, j: i64, c: Complex64) {
        let v = self.get(i, j) + c;
        self.set(i, j, v);
    }

    pub fn get(&self, i: i64, j: i64) -> Complex64 {
        self.entries.get(&(i, j)).copied().unwrap_or(linalg::ZERO)
    }

    pub fn entries(&self) -> impl Iterator<Item = (i64, i64, Complex64)> + '_ {
        self.entries.iter().map(|(&(i, j), &c)| (i, j, c))
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn row_span(&self) -> Option<Span> {
        let lo = self.entries.keys().map(|k| k.0).min()?;
        let hi = self.entries.keys().map(|k| k.0).max()?;
        Some(Span { lo, hi })
    }

    pub fn col_span(&self) -> Option<Span> {
        let lo = self.entries.keys().map(|k| k.1).min()?;
        let hi = self.entries.keys().map(|k| k.1).max()?;
        Some(Span { lo, hi })
    }

    /// Largest `|i|` or `|j|` over the support.
    pub fn radius(&self) -> i64 {
        self.entries.keys().map(|&(i, j)| i.abs().max(j.abs())).max().unwrap_or(0)
    }

    pub fn adjoint(&self) -> Self {
        SparseZOperator { entries: self.entries.iter().map(|(&(i, j), c)| ((j, i), c.conj())).collect() }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_entries(self.entries().map(|(i, j, v)| (i, j, v * c)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&(i, k), &x) in &self.entries {
            for (&(_, j), &y) in other.entries.range((k, i64::MIN)..=(k, i64::MAX)) {
                out.add_entry(i, j, x * y);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (i, j, c) in other.entries() {
            out.add_entry(i, j, c);
        }
        out
    }

    /// Conjugation by the `n`-th power of the bilateral shift:
    /// `(i, j) -> (i + n, j + n)`.
    pub fn shift(&self, n: i64) -> Self {
        SparseZOperator { entries: self.entries.iter().map(|(&(i, j), &c)| ((i + n, j + n), c)).collect() }
    }

    pub fn trace(&self) -> Complex64 {
        self.entries().filter(|(i, j, _)| i == j).map(|(_, _, c)| c).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, j, c) in self.entries() {
            d = d.max((c - other.get(i, j)).norm());
        }
        for (i, j, c) in other.entries() {
            if !self.entries.contains_key(&(i, j)) {
                d = d.max(c.norm());
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.values().map(|c| Complex64::norm(*c)).fold(0.0, f64::max)
    }

    /// Dense block on the given sorted index list (rows and columns alike).
    pub fn compress(&self, idx: &[i64]) -> CMat {
        let pos: BTreeMap<i64, usize> = idx.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut m = linalg::zeros(idx.len(), idx.len());
        for (i, j, c) in self.entries() {
            if let (Some(&r), Some(&s)) = (pos.get(&i), pos.get(&j)) {
                m[(r, s)] = c;
            }
        }
        m
    }

    /// Sorted indices touched by rows or columns of the support.
    pub fn support_indices(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.entries.keys().flat_map(|&(i, j)| [i, j]).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Dense `[-n, n]^2` window.
    pub fn window(&self, n: i64) -> CMat {
        let idx: Vec<i64> = (-n..=n).collect();
        self.compress(&idx)
    }

    /// Exact operator norm on `l^2(Z)`.
    pub fn op_norm(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        linalg::op_norm(&self.compress(&self.support_indices()))
    }
}

impl fmt::Display for SparseZOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self.entries().map(|(i, j, c)| format!("({c})E[{i},{j}]")).collect();
        write!(f, "{}", terms.join(" + "))
    }
}

impl Target for SparseZOperator {
    fn zero_like(&self) -> Self {
        Self::zero()
    }

    fn add_scaled(&mut self, other: &Self, c: Complex64) {
        for (i, j, v) in other.entries() {
            self.add_entry(i, j, v * c);
        }
    }

    fn norm(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::Operator => self.op_norm(),
            NormKind::Sup => self.max_abs(),
            NormKind::Euclidean | NormKind::Frobenius => self.entries.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
        }
    }

    fn same_shape(&self, _other: &Self) -> bool {
        true
    }

    fn inner(&self, other: &Self) -> Complex64 {
        self.entries().map(|(i, j, c)| c * other.get(i, j).conj()).sum()
    }

    fn shape_label(&self) -> String {
        String::from("finitely supported operator on l2(Z)")
    }
}

/// `T` with entry `(j, j - m)` equal to `exp(-i j t) gamma_m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LaurentJson", into = "LaurentJson")]
pub struct TwistedLaurentOperator {
    pub t: f64,
    coeffs: BTreeMap<i64, Complex64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct LaurentJson {
    t: f64,
    coeffs: Vec<(i64, f64, f64)>,
}

impl TryFrom<LaurentJson> for TwistedLaurentOperator {
    type Error = String;

    fn try_from(j: LaurentJson) -> Result<Self, String> {
        if !j.t.is_finite() {
            return Err(String::from("t is not finite"));
        }
        Ok(TwistedLaurentOperator::new(j.t, j.coeffs.into_iter().map(|(m, re, im)| (m, Complex64::new(re, im)))))
    }
}

impl From<TwistedLaurentOperator> for LaurentJson {
    fn from(l: TwistedLaurentOperator) -> Self {
        LaurentJson { t: l.t, coeffs: l.coeffs.into_iter().map(|(m, c)| (m, c.re, c.im)).collect() }
    }
}

impl TwistedLaurentOperator {
    /// `t` is reduced into `[0, 2 pi)`.
    pub fn new<I: IntoIterator<Item = (i64, Complex64)>>(t: f64, coeffs: I) -> Self {
        let mut map = BTreeMap::new();
        for (m, c) in coeffs {
            *map.entry(m).or_insert(linalg::ZERO) += c;
        }
        map.retain(|_, c| *c != linalg::ZERO);
        TwistedLaurentOperator { t: t.rem_euclid(std::f64::consts::TAU), coeffs: map }
    }

    /// Closed form of `sum_n exp(-i n t) alpha_n(b)`:
    /// `gamma_m(t) = sum_r exp(i r t) b_{r, r - m}`.
    pub fn from_element(b: &SparseZOperator, t: f64) -> Self {
        Self::new(t, b.entries().map(|(r, s, c)| (r - s, c * cis_multiple(r, t))))
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&m, &c)| (m, c))
    }

    pub fn gamma(&self, m: i64) -> Complex64 {
        self.coeffs.get(&m).copied().unwrap_or(linalg::ZERO)
    }

    pub fn entry(&self, j: i64, k: i64) -> Complex64 {
        let g = self.gamma(j - k);
        if g == linalg::ZERO {
            return g;
        }
        cis_multiple(-j, self.t) * g
    }

    pub fn window(&self, n: i64) -> CMat {
        let size = (2 * n + 1) as usize;
        CMat::from_fn(size, size, |r, s| self.entry(r as i64 - n, s as i64 - n))
    }

    /// `T a` for a finitely supported `a`.
    pub fn apply_left(&self, a: &SparseZOperator) -> SparseZOperator {
        let mut out = SparseZOperator::zero();
        for (k, l, c) in a.entries() {
            for &m in self.coeffs.keys() {
                let j = k + m;
                out.add_entry(j, l, self.entry(j, k) * c);
            }
        }
        out
    }

    /// `a T` for a finitely supported `a`.
    pub fn apply_right(&self, a: &SparseZOperator) -> SparseZOperator {
        let mut out = SparseZOperator::zero();
        for (i, k, c) in a.entries() {
            for &m in self.coeffs.keys() {
                let l = k - m;
                out.add_entry(i, l, c * self.entry(k, l));
            }
        }
        out
    }

    /// Upper bound `sum_m |gamma_m|` on the operator norm.
    pub fn norm_bound(&self) -> f64 {
        self.coeffs.values().map(|c| Complex64::norm(*c)).sum()
    }

    /// Largest deviation of `alpha_n(T)` from `exp(i n angle) T` over the
    /// `[-w, w]^2` window.
    pub fn spectral_defect(&self, n: i64, angle: f64, w: i64) -> f64 {
        let phase = cis_multiple(n, angle);
        let mut d: f64 = 0.0;
        for j in -w..=w {
            for &m in self.coeffs.keys() {
                let k = j - m;
                // alpha_n(T)_{j,k} = T_{j-n, k-n}
                d = d.max((self.entry(j - n, k - n) - phase * self.entry(j, k)).norm());
            }
        }
        d
    }
}
