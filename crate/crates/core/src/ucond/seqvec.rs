//! Finitely supported sequence-space vectors.
//!
//! A vector is a sparse map of coordinates plus a short list of *runs*: a run
//! is `scale * profile(i)` on an index interval, where the profile is a shared
//! coordinate formula. Summing the unit vectors `c(n) e_n` of a diagonal field
//! over an exhaustion prefix therefore stays one run instead of `n` map
//! entries, which is what lets the engine certify series with 10^8 terms.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_complex::Complex64;

use super::target::{NormKind, Target};

static NEXT_PROFILE: AtomicU64 = AtomicU64::new(1);

const MAX_RUNS: usize = 32;

/// A coordinate formula `i -> profile(i)`, compared by identity.
#[derive(Clone)]
pub struct Profile {
    id: u64,
    coord: Arc<dyn Fn(i64) -> Complex64 + Send + Sync>,
}

impl Profile {
    pub fn new(coord: impl Fn(i64) -> Complex64 + Send + Sync + 'static) -> Self {
        Profile { id: NEXT_PROFILE.fetch_add(1, Ordering::Relaxed), coord: Arc::new(coord) }
    }

    pub fn eval(&self, i: i64) -> Complex64 {
        (self.coord)(i)
    }
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Profile#{}", self.id)
    }
}

#[derive(Clone, Debug)]
struct Run {
    lo: i64,
    hi: i64,
    scale: Complex64,
    profile: Profile,
}

impl Run {
    fn len(&self) -> u64 {
        (self.hi - self.lo + 1) as u64
    }
}

#[derive(Clone, Debug, Default)]
pub struct SeqVec {
    entries: BTreeMap<i64, Complex64>,
    runs: Vec<Run>,
}

impl SeqVec {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `c * e_i`.
    pub fn basis(i: i64, c: Complex64) -> Self {
        let mut v = Self::zero();
        v.entries.insert(i, c);
        v
    }

    pub fn from_entries<I: IntoIterator<Item = (i64, Complex64)>>(entries: I) -> Self {
        let mut v = Self::zero();
        for (i, c) in entries {
            *v.entries.entry(i).or_default() += c;
        }
        v
    }

    /// `scale * profile(i)` for `lo <= i <= hi`, zero elsewhere.
    pub fn profile_run(profile: &Profile, lo: i64, hi: i64, scale: Complex64) -> Self {
        let mut v = Self::zero();
        if lo <= hi && scale != Complex64::new(0.0, 0.0) {
            v.runs.push(Run { lo, hi, scale, profile: profile.clone() });
        }
        v
    }

    /// `profile(i) e_i`.
    pub fn profile_point(profile: &Profile, i: i64) -> Self {
        Self::profile_run(profile, i, i, Complex64::new(1.0, 0.0))
    }

    pub fn get(&self, i: i64) -> Complex64 {
        let mut v = self.entries.get(&i).copied().unwrap_or_default();
        for r in &self.runs {
            if r.lo <= i && i <= r.hi {
                v += r.scale * r.profile.eval(i);
            }
        }
        v
    }

    /// Visit every coordinate that may be nonzero, in ascending index order.
    /// Interval pieces on which the run coefficients cancel exactly are
    /// skipped without being evaluated.
    pub fn for_each_coordinate(&self, mut visit: impl FnMut(i64, Complex64)) {
        let mut cuts: Vec<i64> = self.runs.iter().flat_map(|r| [r.lo, r.hi + 1]).collect();
        cuts.sort_unstable();
        cuts.dedup();

        let mut ents = self.entries.iter().peekable();
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mut groups: Vec<(Profile, Complex64)> = Vec::new();
            for r in self.runs.iter().filter(|r| r.lo <= a && r.hi >= b - 1) {
                match groups.iter_mut().find(|(p, _)| p.id == r.profile.id) {
                    Some((_, s)) => *s += r.scale,
                    None => groups.push((r.profile.clone(), r.scale)),
                }
            }
            groups.retain(|(_, s)| *s != Complex64::new(0.0, 0.0));
            if groups.is_empty() {
                continue;
            }
            while let Some((&k, &v)) = ents.peek() {
                if k >= a {
                    break;
                }
                visit(k, v);
                ents.next();
            }
            for i in a..b {
                let mut v: Complex64 = groups.iter().map(|(p, s)| s * p.eval(i)).sum();
                if let Some((&k, &e)) = ents.peek() {
                    if k == i {
                        v += e;
                        ents.next();
                    }
                }
                visit(i, v);
            }
        }
        for (&k, &v) in ents {
            visit(k, v);
        }
    }

    pub fn norm_l2(&self) -> f64 {
        let mut s = 0.0;
        self.for_each_coordinate(|_, v| s += v.norm_sqr());
        s.sqrt()
    }

    pub fn norm_sup(&self) -> f64 {
        let mut m: f64 = 0.0;
        self.for_each_coordinate(|_, v| m = m.max(v.norm()));
        m
    }

    /// Materialize into an explicit coordinate map (tests and small vectors).
    pub fn to_map(&self) -> BTreeMap<i64, Complex64> {
        let mut out = BTreeMap::new();
        self.for_each_coordinate(|i, v| {
            if v != Complex64::new(0.0, 0.0) {
                out.insert(i, v);
            }
        });
        out
    }

    fn push_run(&mut self, run: Run) {
        if let Some(last) = self.runs.last_mut() {
            if last.profile.id == run.profile.id && last.scale == run.scale {
                if last.hi + 1 == run.lo {
                    last.hi = run.hi;
                    return;
                }
                if run.hi + 1 == last.lo {
                    last.lo = run.lo;
                    return;
                }
            }
        }
        self.runs.push(run);
        if self.runs.len() > MAX_RUNS {
            let (idx, _) = self
                .runs
                .iter()
                .enumerate()
                .min_by_key(|(_, r)| r.len())
                .expect("nonempty");
            let r = self.runs.swap_remove(idx);
            for i in r.lo..=r.hi {
                *self.entries.entry(i).or_default() += r.scale * r.profile.eval(i);
            }
        }
    }
}

impl Target for SeqVec {
    fn zero_like(&self) -> Self {
        SeqVec::zero()
    }

    fn add_scaled(&mut self, other: &Self, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        for (&k, &v) in &other.entries {
            *self.entries.entry(k).or_default() += c * v;
        }
        for r in &other.runs {
            self.push_run(Run { scale: r.scale * c, ..r.clone() });
        }
    }

    fn norm(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::Sup => self.norm_sup(),
            _ => self.norm_l2(),
        }
    }

    fn same_shape(&self, _other: &Self) -> bool {
        true
    }

    fn inner(&self, other: &Self) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        self.for_each_coordinate(|i, v| s += v * other.get(i).conj());
        s
    }

    fn shape_label(&self) -> String {
        String::from("sequence")
    }
}
