use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::space::{LocalIntegrationSpace, LocalSet};
use super::target::{NormKind, Target};

/// What an analytic tail bound guarantees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    /// The field vanishes outside the located set.
    FiniteSupport,
    /// Values at distinct points are orthogonal; the bound controls
    /// `sum ||f(s)||^2 mass(s)^2` outside the located set.
    L2Orthogonal,
    /// The bound controls `sum ||f(s)|| mass(s)` outside the located set.
    L1Norms,
}

impl OracleKind {
    /// Kinds whose bound already has the uniform-in-phi shape
    /// `||int_D phi f|| <= eps ||phi||`.
    pub fn is_uniform(self) -> bool {
        matches!(self, OracleKind::FiniteSupport | OracleKind::L1Norms)
    }
}

/// Analytic tail oracle: given `eps`, locate a local set outside of which
/// every disjoint partial integral is below `eps`.
#[derive(Clone)]
pub struct TailOracle {
    kind: OracleKind,
    locate: Arc<dyn Fn(f64) -> Option<LocalSet> + Send + Sync>,
    description: String,
}

impl fmt::Debug for TailOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TailOracle({:?}, {})", self.kind, self.description)
    }
}

/// Smallest `n` with `tail(n) < threshold`, for a nonincreasing `tail`.
fn first_below(tail: &dyn Fn(usize) -> f64, threshold: f64) -> Option<usize> {
    if tail(0) < threshold {
        return Some(0);
    }
    let mut hi = 1usize;
    while tail(hi) >= threshold {
        if hi >= 1 << 42 {
            return None;
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    // tail(lo) >= threshold > tail(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if tail(mid) < threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

impl TailOracle {
    pub fn finite_support(support: LocalSet) -> Self {
        let description = format!("finite support {}", support.describe());
        TailOracle {
            kind: OracleKind::FiniteSupport,
            locate: Arc::new(move |_| Some(support.clone())),
            description,
        }
    }

    /// `tail_sq(n)` must bound `sum ||f(s)||^2 mass(s)^2` over the exhaustion
    /// points beyond the first `n`, for a field with mutually orthogonal values.
    pub fn l2_orthogonal(tail_sq: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Self {
        TailOracle {
            kind: OracleKind::L2Orthogonal,
            locate: Arc::new(move |eps| first_below(&tail_sq, eps * eps).map(LocalSet::Prefix)),
            description: String::from("l2 orthogonality tail"),
        }
    }

    /// `tail(n)` must bound `sum ||f(s)|| mass(s)` beyond the first `n` points.
    pub fn l1_norms(tail: impl Fn(usize) -> f64 + Send + Sync + 'static) -> Self {
        TailOracle {
            kind: OracleKind::L1Norms,
            locate: Arc::new(move |eps| first_below(&tail, eps).map(LocalSet::Prefix)),
            description: String::from("l1 norm tail"),
        }
    }

    pub fn kind(&self) -> OracleKind {
        self.kind
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn locate(&self, eps: f64) -> Option<LocalSet> {
        (self.locate)(eps)
    }

    /// Oracle for `phi * f` with `sup |phi| <= bound`.
    pub fn scaled_by(&self, bound: f64) -> Self {
        let inner = self.locate.clone();
        let kind = self.kind;
        let locate: Arc<dyn Fn(f64) -> Option<LocalSet> + Send + Sync> = if bound > 0.0 {
            Arc::new(move |eps| inner(eps / bound))
        } else if kind == OracleKind::FiniteSupport {
            Arc::new(move |eps| inner(eps))
        } else {
            Arc::new(|_| Some(LocalSet::empty()))
        };
        TailOracle { kind, locate, description: format!("{} scaled by {bound}", self.description) }
    }
}

/// A map from the points of a local integration space into one target space.
#[derive(Clone)]
pub struct VectorField<T: Target> {
    space: Arc<LocalIntegrationSpace>,
    zero: T,
    norm_kind: NormKind,
    value: Arc<dyn Fn(i64) -> T + Send + Sync>,
    tail_oracle: Option<TailOracle>,
    block_integral: Option<BlockIntegral<T>>,
}

/// Closed form for `sum_{lo <= k < hi} f(s_k) mass(s_k)` over exhaustion indices.
pub type BlockIntegral<T> = Arc<dyn Fn(usize, usize) -> T + Send + Sync>;

impl<T: Target> fmt::Debug for VectorField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField")
            .field("space", &self.space)
            .field("norm_kind", &self.norm_kind)
            .field("tail_oracle", &self.tail_oracle)
            .finish()
    }
}

impl<T: Target> VectorField<T> {
    pub fn new(
        space: Arc<LocalIntegrationSpace>,
        zero: T,
        norm_kind: NormKind,
        value: impl Fn(i64) -> T + Send + Sync + 'static,
    ) -> Self {
        VectorField { space, zero, norm_kind, value: Arc::new(value), tail_oracle: None, block_integral: None }
    }

    /// Attach an exact closed form for integrals over runs of consecutive
    /// exhaustion points. It must agree with termwise summation.
    pub fn with_block_integral(mut self, block: impl Fn(usize, usize) -> T + Send + Sync + 'static) -> Self {
        self.block_integral = Some(Arc::new(block));
        self
    }

    pub fn without_block_integral(mut self) -> Self {
        self.block_integral = None;
        self
    }

    pub fn block_integral(&self) -> Option<&BlockIntegral<T>> {
        self.block_integral.as_ref()
    }

    pub fn with_oracle(mut self, oracle: TailOracle) -> Self {
        self.tail_oracle = Some(oracle);
        self
    }

    pub fn without_oracle(mut self) -> Self {
        self.tail_oracle = None;
        self
    }

    pub fn space(&self) -> &Arc<LocalIntegrationSpace> {
        &self.space
    }

    pub fn zero(&self) -> &T {
        &self.zero
    }

    pub fn norm_kind(&self) -> NormKind {
        self.norm_kind
    }

    pub fn tail_oracle(&self) -> Option<&TailOracle> {
        self.tail_oracle.as_ref()
    }

    pub fn eval(&self, p: i64) -> T {
        (self.value)(p)
    }

    /// Scalar reduction `s -> functional(f(s))` by a linear functional. Only a
    /// finite-support oracle carries over.
    pub fn reduce(&self, functional: impl Fn(&T) -> Complex64 + Send + Sync + 'static) -> VectorField<Complex64> {
        let value = self.value.clone();
        let reduced = VectorField::new(
            self.space.clone(),
            Complex64::new(0.0, 0.0),
            NormKind::Euclidean,
            move |p| functional(&value(p)),
        );
        match &self.tail_oracle {
            Some(o) if o.kind() == OracleKind::FiniteSupport => reduced.with_oracle(o.clone()),
            _ => reduced,
        }
    }

    /// `s -> phi(s) f(s)` without any bound bookkeeping.
    pub(crate) fn pointwise_scaled(&self, phi: Arc<dyn Fn(i64) -> Complex64 + Send + Sync>) -> Self {
        let value = self.value.clone();
        VectorField {
            space: self.space.clone(),
            zero: self.zero.clone(),
            norm_kind: self.norm_kind,
            value: Arc::new(move |p| value(p).scaled(phi(p))),
            tail_oracle: None,
            block_integral: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_below_finds_minimal_index() {
        let tail = |n: usize| 1.0 / (n as f64 + 1.0);
        assert_eq!(first_below(&tail, 0.01), Some(100));
        assert_eq!(first_below(&tail, 2.0), Some(0));
        let never = |_: usize| 1.0;
        assert_eq!(first_below(&never, 0.5), None);
    }

    #[test]
    fn scaled_oracle_tightens_eps() {
        let o = TailOracle::l1_norms(|n| 1.0 / (n as f64 + 1.0));
        assert_eq!(o.locate(0.1), Some(LocalSet::Prefix(10)));
        assert_eq!(o.scaled_by(2.0).locate(0.1), Some(LocalSet::Prefix(20)));
        assert_eq!(o.scaled_by(0.0).locate(0.1), Some(LocalSet::empty()));
    }
}
