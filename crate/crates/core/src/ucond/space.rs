use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Enumerable index set of a point-mass space.
#[derive(Clone, Debug)]
pub enum PointSet {
    Finite(Vec<i64>),
    /// 1, 2, 3, ...
    Naturals,
    /// 0, 1, -1, 2, -2, ...
    Integers,
}

#[derive(Clone)]
pub enum Mass {
    Uniform(f64),
    Weighted(Arc<dyn Fn(i64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Mass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mass::Uniform(m) => write!(f, "Uniform({m})"),
            Mass::Weighted(_) => write!(f, "Weighted(..)"),
        }
    }
}

/// A local set: either the first `n` points of the canonical exhaustion, or
/// an explicit sorted list of points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocalSet {
    Prefix(usize),
    Points(Vec<i64>),
}

impl LocalSet {
    pub fn empty() -> Self {
        LocalSet::Points(Vec::new())
    }

    pub fn from_points<I: IntoIterator<Item = i64>>(points: I) -> Self {
        let mut v: Vec<i64> = points.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        LocalSet::Points(v)
    }

    pub fn describe(&self) -> String {
        match self {
            LocalSet::Prefix(n) => format!("first {n} points"),
            LocalSet::Points(p) if p.len() <= 8 => format!("{p:?}"),
            LocalSet::Points(p) => format!(
                "{{{} points in [{}, {}]}}",
                p.len(),
                p.first().unwrap(),
                p.last().unwrap()
            ),
        }
    }
}

/// Countable point-mass measure space with the local family of all finite
/// subsets and the exhaustion `L_k = first k points`.
#[derive(Clone, Debug)]
pub struct LocalIntegrationSpace {
    points: PointSet,
    mass: Mass,
    position: Option<HashMap<i64, usize>>,
}

impl LocalIntegrationSpace {
    pub fn new(points: PointSet, mass: Mass) -> Result<Self> {
        if let Mass::Uniform(m) = mass {
            if !(m >= 0.0 && m.is_finite()) {
                return Err(Error::InvalidArgument(format!("point mass {m} is not a nonnegative real")));
            }
        }
        let position = match &points {
            PointSet::Finite(list) => {
                let mut map = HashMap::with_capacity(list.len());
                for (i, p) in list.iter().enumerate() {
                    if map.insert(*p, i).is_some() {
                        return Err(Error::InvalidArgument(format!("point {p} listed twice")));
                    }
                }
                Some(map)
            }
            _ => None,
        };
        Ok(LocalIntegrationSpace { points, mass, position })
    }

    pub fn finite(points: Vec<i64>, mass: f64) -> Result<Self> {
        Self::new(PointSet::Finite(points), Mass::Uniform(mass))
    }

    /// Counting measure on 1, 2, 3, ...
    pub fn naturals() -> Self {
        Self::new(PointSet::Naturals, Mass::Uniform(1.0)).expect("valid")
    }

    /// Counting measure on the integers.
    pub fn integers() -> Self {
        Self::new(PointSet::Integers, Mass::Uniform(1.0)).expect("valid")
    }

    pub fn point_set(&self) -> &PointSet {
        &self.points
    }

    pub fn len(&self) -> Option<usize> {
        match &self.points {
            PointSet::Finite(v) => Some(v.len()),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.len().is_some()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == Some(0)
    }

    pub fn mass(&self, p: i64) -> f64 {
        match &self.mass {
            Mass::Uniform(m) => *m,
            Mass::Weighted(w) => w(p),
        }
    }

    pub fn contains(&self, p: i64) -> bool {
        match &self.points {
            PointSet::Finite(_) => self.position.as_ref().unwrap().contains_key(&p),
            PointSet::Naturals => p >= 1,
            PointSet::Integers => true,
        }
    }

    /// Point at exhaustion index `k` (0-based).
    pub fn nth(&self, k: usize) -> Option<i64> {
        match &self.points {
            PointSet::Finite(v) => v.get(k).copied(),
            PointSet::Naturals => Some(k as i64 + 1),
            PointSet::Integers => {
                let k = k as i64;
                Some(if k % 2 == 1 { (k + 1) / 2 } else { -k / 2 })
            }
        }
    }

    /// Exhaustion index of a point.
    pub fn index_of(&self, p: i64) -> Option<usize> {
        match &self.points {
            PointSet::Finite(_) => self.position.as_ref().unwrap().get(&p).copied(),
            PointSet::Naturals => (p >= 1).then(|| (p - 1) as usize),
            PointSet::Integers => Some(if p > 0 { (2 * p - 1) as usize } else { (-2 * p) as usize }),
        }
    }

    /// The canonical exhaustion member `L_k`.
    pub fn exhaustion(&self, k: usize) -> LocalSet {
        LocalSet::Prefix(k)
    }

    /// The whole space, when it is finite.
    pub fn full_set(&self) -> Option<LocalSet> {
        self.len().map(LocalSet::Prefix)
    }

    pub fn is_local(&self, set: &LocalSet) -> bool {
        match set {
            LocalSet::Prefix(n) => self.len().is_none_or(|len| *n <= len),
            LocalSet::Points(p) => p.iter().all(|&x| self.contains(x)),
        }
    }

    pub fn check_local(&self, set: &LocalSet) -> Result<()> {
        if self.is_local(set) {
            Ok(())
        } else {
            Err(Error::NotLocal(set.describe()))
        }
    }

    /// Number of points in a local set.
    pub fn cardinality(&self, set: &LocalSet) -> usize {
        match set {
            LocalSet::Prefix(n) => *n,
            LocalSet::Points(p) => p.len(),
        }
    }

    /// Visit the points of a local set in exhaustion order (prefixes) or
    /// ascending order (explicit sets).
    pub fn for_each_point(&self, set: &LocalSet, mut visit: impl FnMut(i64)) {
        match set {
            LocalSet::Prefix(n) => {
                for k in 0..*n {
                    visit(self.nth(k).expect("prefix within space"));
                }
            }
            LocalSet::Points(p) => p.iter().for_each(|&x| visit(x)),
        }
    }

    pub fn points_of(&self, set: &LocalSet) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.cardinality(set).min(1 << 20));
        self.for_each_point(set, |p| out.push(p));
        out
    }

    pub fn set_contains(&self, set: &LocalSet, p: i64) -> bool {
        match set {
            LocalSet::Prefix(n) => self.index_of(p).is_some_and(|k| k < *n),
            LocalSet::Points(v) => v.binary_search(&p).is_ok(),
        }
    }

    pub fn union(&self, a: &LocalSet, b: &LocalSet) -> LocalSet {
        match (a, b) {
            (LocalSet::Prefix(x), LocalSet::Prefix(y)) => LocalSet::Prefix(*x.max(y)),
            (LocalSet::Prefix(n), LocalSet::Points(p)) | (LocalSet::Points(p), LocalSet::Prefix(n))
                if self.extends_prefix(*n, p) =>
            {
                LocalSet::Prefix(self.covering_prefix(&LocalSet::Points(p.clone())).max(*n))
            }
            _ => {
                let mut all: BTreeSet<i64> = self.points_of(a).into_iter().collect();
                all.extend(self.points_of(b));
                LocalSet::Points(all.into_iter().collect())
            }
        }
    }

    /// Whether the first `n` points together with `p` form a prefix.
    fn extends_prefix(&self, n: usize, p: &[i64]) -> bool {
        let outside = p.iter().filter_map(|&x| self.index_of(x)).filter(|&k| k >= n).count();
        let top = self.covering_prefix(&LocalSet::Points(p.to_vec()));
        p.iter().all(|&x| self.contains(x)) && top <= n + outside
    }

    pub fn intersection(&self, a: &LocalSet, b: &LocalSet) -> LocalSet {
        let mut out = Vec::new();
        self.for_each_point(a, |p| {
            if self.set_contains(b, p) {
                out.push(p)
            }
        });
        LocalSet::from_points(out)
    }

    pub fn is_disjoint(&self, a: &LocalSet, b: &LocalSet) -> bool {
        let (small, large) = if self.cardinality(a) <= self.cardinality(b) { (a, b) } else { (b, a) };
        let mut disjoint = true;
        self.for_each_point(small, |p| {
            if self.set_contains(large, p) {
                disjoint = false;
            }
        });
        disjoint
    }

    /// Smallest exhaustion prefix containing the given set.
    pub fn covering_prefix(&self, set: &LocalSet) -> usize {
        match set {
            LocalSet::Prefix(n) => *n,
            LocalSet::Points(p) => p
                .iter()
                .filter_map(|&x| self.index_of(x))
                .map(|k| k + 1)
                .max()
                .unwrap_or(0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_enumeration_round_trips() {
        let z = LocalIntegrationSpace::integers();
        let first: Vec<i64> = (0..7).map(|k| z.nth(k).unwrap()).collect();
        assert_eq!(first, vec![0, 1, -1, 2, -2, 3, -3]);
        for p in -50..50 {
            assert_eq!(z.nth(z.index_of(p).unwrap()), Some(p));
        }
    }

    #[test]
    fn locality_in_naturals() {
        let n = LocalIntegrationSpace::naturals();
        assert!(n.is_local(&LocalSet::from_points([1, 2, 3])));
        assert!(!n.is_local(&LocalSet::from_points([0, 1])));
        assert!(n.is_local(&LocalSet::Prefix(1_000_000)));
    }

    #[test]
    fn finite_space_rejects_oversized_prefix() {
        let s = LocalIntegrationSpace::finite(vec![5, 7, 9], 1.0).unwrap();
        assert!(s.is_local(&LocalSet::Prefix(3)));
        assert!(!s.is_local(&LocalSet::Prefix(4)));
        assert!(!s.is_local(&LocalSet::from_points([6])));
    }

    #[test]
    fn union_intersection_and_disjointness() {
        let n = LocalIntegrationSpace::naturals();
        let a = LocalSet::Prefix(4);
        let b = LocalSet::from_points([3, 10]);
        assert_eq!(n.union(&a, &b), LocalSet::from_points([1, 2, 3, 4, 10]));
        assert_eq!(n.intersection(&a, &b), LocalSet::from_points([3]));
        assert!(!n.is_disjoint(&a, &b));
        assert!(n.is_disjoint(&a, &LocalSet::from_points([5, 6])));
        assert_eq!(n.covering_prefix(&b), 10);
        assert_eq!(n.union(&a, &LocalSet::from_points([5, 6])), LocalSet::Prefix(6));
        assert_eq!(n.union(&LocalSet::from_points([2]), &a), LocalSet::Prefix(4));
        assert_eq!(n.union(&a, &LocalSet::from_points([6])), LocalSet::from_points([1, 2, 3, 4, 6]));
    }
}
