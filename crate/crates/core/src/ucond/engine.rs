use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::field::{OracleKind, TailOracle, VectorField};
use super::space::LocalSet;
use super::target::Target;
use crate::error::{Error, Result};

/// Epistemic status of a certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificateStatus {
    /// The integrand vanishes outside the witness set.
    Exact,
    /// An analytic tail oracle bounds every disjoint partial integral.
    Proof,
    /// Only the probed disjoint sets were checked.
    Evidence,
}

/// How `u_integrate` certifies a field that has neither finite support nor a
/// tail oracle.
#[derive(Clone, Debug)]
pub struct CertificationPolicy {
    /// Exhaustion points examined in evidence mode.
    pub horizon: usize,
    /// Candidate witness prefixes never exceed `horizon / head_divisor`.
    pub head_divisor: usize,
    /// Seeded random subsets probed per candidate witness.
    pub probe_budget: usize,
    pub seed: u64,
    /// Points after an oracle witness that are probed as a sanity check.
    pub sanity_window: usize,
}

impl Default for CertificationPolicy {
    fn default() -> Self {
        CertificationPolicy {
            horizon: 1_000_000,
            head_divisor: 1000,
            probe_budget: 16,
            seed: 0,
            sanity_window: 4096,
        }
    }
}

impl CertificationPolicy {
    fn describe(&self) -> String {
        format!(
            "exhaustion horizon {}, witness prefixes up to horizon/{}, {} random probes per candidate, seed {}",
            self.horizon, self.head_divisor, self.probe_budget, self.seed
        )
    }
}

#[derive(Clone, Debug)]
pub struct ProbeRecord {
    pub description: String,
    pub size: usize,
    pub norm: f64,
    /// Kept for small probes only.
    pub set: Option<LocalSet>,
}

#[derive(Clone, Debug)]
pub struct TraceEntry {
    pub set: LocalSet,
    /// `||int_set f - value||`.
    pub distance: f64,
}

#[derive(Clone, Debug)]
pub struct UIntegralCertificate<T> {
    pub value: T,
    pub witness: LocalSet,
    pub epsilon: f64,
    pub status: CertificateStatus,
    pub policy: String,
    pub trace: Vec<TraceEntry>,
    pub probes: Vec<ProbeRecord>,
}

/// Serializable digest of a certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub status: CertificateStatus,
    pub epsilon: f64,
    pub witness: String,
    pub policy: String,
    pub trace: Vec<(String, f64)>,
    pub max_probe_norm: f64,
}

impl<T> UIntegralCertificate<T> {
    pub fn summary(&self) -> CertificateSummary {
        CertificateSummary {
            status: self.status,
            epsilon: self.epsilon,
            witness: self.witness.describe(),
            policy: self.policy.clone(),
            trace: self.trace.iter().map(|t| (t.set.describe(), t.distance)).collect(),
            max_probe_norm: self.probes.iter().map(|p| p.norm).fold(0.0, f64::max),
        }
    }
}

fn sum_points<T: Target>(f: &VectorField<T>, points: impl IntoIterator<Item = i64>) -> Result<T> {
    let mut acc = f.zero().clone();
    let space = f.space();
    for p in points {
        let v = f.eval(p);
        if !v.same_shape(&acc) {
            return Err(Error::ShapeMismatch(format!(
                "value at {p} has shape {}, expected {}",
                v.shape_label(),
                acc.shape_label()
            )));
        }
        acc.add_scaled(&v, Complex64::new(space.mass(p), 0.0));
    }
    Ok(acc)
}

fn prefix_range<T: Target>(f: &VectorField<T>, lo: usize, hi: usize) -> Result<T> {
    if let Some(block) = f.block_integral() {
        return Ok(if lo < hi { block(lo, hi) } else { f.zero().clone() });
    }
    let space = f.space();
    sum_points(f, (lo..hi).map(|k| space.nth(k).expect("local prefix")))
}

/// `sum_{s in set} f(s) mass(s)`.
pub fn integrate_over<T: Target>(f: &VectorField<T>, set: &LocalSet) -> Result<T> {
    let space = f.space();
    space.check_local(set)?;
    match set {
        LocalSet::Prefix(n) => prefix_range(f, 0, *n),
        LocalSet::Points(p) => sum_points(f, p.iter().copied()),
    }
}

pub fn u_integrate<T: Target>(f: &VectorField<T>, eps: f64, probe_budget: usize) -> Result<UIntegralCertificate<T>> {
    let policy = CertificationPolicy { probe_budget, ..CertificationPolicy::default() };
    u_integrate_with(f, eps, &policy)
}

/// Net limit of the partial integrals over the exhaustion, with a Cauchy
/// certificate at tolerance `eps`.
pub fn u_integrate_with<T: Target>(
    f: &VectorField<T>,
    eps: f64,
    policy: &CertificationPolicy,
) -> Result<UIntegralCertificate<T>> {
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::InvalidArgument(format!("eps = {eps} must be nonnegative")));
    }
    let space = f.space().clone();

    let support = match (space.full_set(), f.tail_oracle()) {
        (Some(full), _) => Some((full, String::from("finite space"))),
        (None, Some(o)) if o.kind() == OracleKind::FiniteSupport => {
            let s = o.locate(eps).ok_or_else(|| Error::NoOracle(o.description().to_string()))?;
            Some((s, o.description().to_string()))
        }
        _ => None,
    };
    if let Some((witness, why)) = support {
        let value = integrate_over(f, &witness)?;
        return Ok(UIntegralCertificate {
            value,
            trace: vec![TraceEntry { set: witness.clone(), distance: 0.0 }],
            witness,
            epsilon: 0.0,
            status: CertificateStatus::Exact,
            policy: why,
            probes: Vec::new(),
        });
    }

    if eps == 0.0 {
        return Err(Error::InvalidArgument(String::from(
            "eps must be positive for fields without finite support",
        )));
    }

    match f.tail_oracle() {
        Some(oracle) => certify_with_oracle(f, oracle, eps, policy),
        None => certify_by_probing(f, eps, policy),
    }
}

fn certify_with_oracle<T: Target>(
    f: &VectorField<T>,
    oracle: &TailOracle,
    eps: f64,
    policy: &CertificationPolicy,
) -> Result<UIntegralCertificate<T>> {
    let space = f.space();
    let witness = oracle
        .locate(eps)
        .ok_or_else(|| Error::NoOracle(format!("{} cannot reach eps = {eps}", oracle.description())))?;
    let value = integrate_over(f, &witness)?;

    let start = space.covering_prefix(&witness);
    let window: Vec<i64> = (start..start + policy.sanity_window)
        .filter_map(|k| space.nth(k))
        .filter(|&p| !space.set_contains(&witness, p))
        .collect();
    let probes = match probe_window(f, &window, eps, policy, start as u64, false) {
        Ok(records) => records,
        Err((set, norm, _)) => {
            return Err(Error::OracleViolation { set: set.describe(), norm, eps });
        }
    };

    let mut trace = vec![TraceEntry { set: witness.clone(), distance: 0.0 }];
    for delta in [1usize, 16, 256, window.len()] {
        if delta == 0 || delta > window.len() {
            continue;
        }
        let extra = LocalSet::from_points(window[..delta].iter().copied());
        let tail = sum_points(f, window[..delta].iter().copied())?;
        trace.push(TraceEntry { set: space.union(&witness, &extra), distance: tail.norm(f.norm_kind()) });
    }

    Ok(UIntegralCertificate {
        value,
        witness,
        epsilon: eps,
        status: CertificateStatus::Proof,
        policy: format!("tail oracle: {}", oracle.description()),
        trace,
        probes,
    })
}

fn certify_by_probing<T: Target>(
    f: &VectorField<T>,
    eps: f64,
    policy: &CertificationPolicy,
) -> Result<UIntegralCertificate<T>> {
    let space = f.space();
    let horizon = policy.horizon.max(2);
    let max_head = (horizon / policy.head_divisor.max(1)).max(1);
    let mut heads = Vec::new();
    let mut k = 1usize;
    while k <= max_head {
        heads.push(k);
        k *= 2;
    }

    let mut worst: Option<(LocalSet, f64)> = None;
    for &head in &heads {
        let window: Vec<i64> = (head..horizon).filter_map(|k| space.nth(k)).collect();
        match probe_window(f, &window, eps, policy, head as u64, false) {
            Ok(probes) => {
                let mut checkpoints = Vec::new();
                let mut acc = f.zero().clone();
                let mut done = 0usize;
                for h in heads.iter().copied().filter(|&h| h >= head).chain([horizon]) {
                    acc.add_scaled(&prefix_range(f, done, h)?, Complex64::new(1.0, 0.0));
                    done = h;
                    if h < horizon {
                        checkpoints.push((h, acc.clone()));
                    }
                }
                let value = acc;
                let mut trace: Vec<TraceEntry> = checkpoints
                    .into_iter()
                    .map(|(idx, partial)| TraceEntry {
                        set: LocalSet::Prefix(idx),
                        distance: partial.distance(&value, f.norm_kind()),
                    })
                    .collect();
                trace.push(TraceEntry { set: LocalSet::Prefix(horizon), distance: 0.0 });
                return Ok(UIntegralCertificate {
                    value,
                    witness: LocalSet::Prefix(head),
                    epsilon: eps,
                    status: CertificateStatus::Evidence,
                    policy: policy.describe(),
                    trace,
                    probes,
                });
            }
            Err((set, norm, _)) => {
                if worst.as_ref().is_none_or(|(_, w)| norm > *w) {
                    worst = Some((set, norm));
                }
            }
        }
    }
    // every candidate failed: report the largest violation over the first window
    let window: Vec<i64> = (heads[0]..horizon).filter_map(|k| space.nth(k)).collect();
    if let Err((set, norm, _)) = probe_window(f, &window, eps, policy, heads[0] as u64, true) {
        if worst.as_ref().is_none_or(|(_, w)| norm > *w) {
            worst = Some((set, norm));
        }
    }
    let (set, norm) = worst.expect("at least one candidate head");
    Err(Error::CauchyFailure { set: Box::new(set), norm, eps })
}

type ProbeFailure = (LocalSet, f64, Vec<ProbeRecord>);

/// Probe subsets of `window` (which is disjoint from the candidate witness).
/// Cheap random subsets first, then the structured families.
fn probe_window<T: Target>(
    f: &VectorField<T>,
    window: &[i64],
    eps: f64,
    policy: &CertificationPolicy,
    salt: u64,
    exhaustive: bool,
) -> std::result::Result<Vec<ProbeRecord>, ProbeFailure> {
    let mut records = Vec::new();
    if window.is_empty() {
        return Ok(records);
    }
    let kind = f.norm_kind();

    let check = |description: String, points: Vec<i64>, records: &mut Vec<ProbeRecord>| {
        let set = LocalSet::from_points(points);
        let size = f.space().cardinality(&set);
        if size == 0 {
            return Ok(());
        }
        let integral = match &set {
            LocalSet::Points(p) => sum_points(f, p.iter().copied()),
            LocalSet::Prefix(_) => unreachable!(),
        }
        .expect("window values share a shape");
        let norm = integral.norm(kind);
        records.push(ProbeRecord {
            description,
            size,
            norm,
            set: (size <= 64).then(|| set.clone()),
        });
        if norm >= eps {
            Err((set, norm))
        } else {
            Ok(())
        }
    };

    // stop at the first violation unless exhaustive, which keeps the largest
    let mut worst: Option<(LocalSet, f64)> = None;
    let note = |worst: &mut Option<(LocalSet, f64)>, r: std::result::Result<(), (LocalSet, f64)>| {
        if let Err((set, norm)) = r {
            if worst.as_ref().is_none_or(|(_, w)| norm > *w) {
                *worst = Some((set, norm));
            }
        }
        !exhaustive && worst.is_some()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    for i in 0..policy.probe_budget {
        let size = rng.gen_range(1..=window.len().min(64));
        let pts: Vec<i64> = (0..size).map(|_| window[rng.gen_range(0..window.len())]).collect();
        if note(&mut worst, check(format!("random subset #{i}"), pts, &mut records)) {
            break;
        }
    }
    if let (false, Some((set, norm))) = (exhaustive, worst.clone()) {
        return Err((set, norm, records));
    }

    let whole = sum_points(f, window.iter().copied()).expect("window values share a shape");
    let mut families: Vec<(String, Vec<i64>)> = vec![
        (String::from("whole window"), window.to_vec()),
        (String::from("even points"), window.iter().copied().filter(|p| p % 2 == 0).collect()),
        (String::from("odd points"), window.iter().copied().filter(|p| p % 2 != 0).collect()),
    ];
    let mut pos_re = Vec::new();
    let mut neg_re = Vec::new();
    let mut pos_im = Vec::new();
    let mut neg_im = Vec::new();
    for &p in window {
        let v = f.eval(p);
        let z = v.as_scalar().unwrap_or_else(|| v.inner(&whole));
        if z.re >= 0.0 { pos_re.push(p) } else { neg_re.push(p) }
        if z.im >= 0.0 { pos_im.push(p) } else { neg_im.push(p) }
    }
    families.push((String::from("sign-selected re >= 0"), pos_re));
    families.push((String::from("sign-selected re < 0"), neg_re));
    families.push((String::from("sign-selected im >= 0"), pos_im));
    families.push((String::from("sign-selected im < 0"), neg_im));

    for (description, pts) in families {
        if note(&mut worst, check(description, pts, &mut records)) {
            break;
        }
    }
    match worst {
        Some((set, norm)) => Err((set, norm, records)),
        None => Ok(records),
    }
}

/// `max_{L in sample} ||int_L f||`: a lower bound for the pseudo-integrability
/// constant.
pub fn pseudo_bound<T: Target>(f: &VectorField<T>, sample: &[LocalSet]) -> Result<f64> {
    let mut best: f64 = 0.0;
    for set in sample {
        best = best.max(integrate_over(f, set)?.norm(f.norm_kind()));
    }
    Ok(best)
}

/// Closure of `sample` under the splits by sign of real and imaginary part.
pub fn split_closure<T: Target>(f: &VectorField<T>, sample: &[LocalSet]) -> Result<Vec<LocalSet>> {
    let space = f.space();
    let mut out = Vec::with_capacity(sample.len() * 5);
    for set in sample {
        space.check_local(set)?;
        let mut parts: [Vec<i64>; 4] = Default::default();
        let mut err = None;
        space.for_each_point(set, |p| match f.eval(p).as_scalar() {
            Some(z) => {
                parts[if z.re >= 0.0 { 0 } else { 1 }].push(p);
                parts[if z.im >= 0.0 { 2 } else { 3 }].push(p);
            }
            None => err = Some(Error::NotScalar),
        });
        if let Some(e) = err {
            return Err(e);
        }
        out.push(set.clone());
        out.extend(parts.into_iter().map(LocalSet::from_points));
    }
    Ok(out)
}

/// `sup int_L |f|` over the split closure of `sample`, checked against four
/// times the pseudo bound on the same closure.
pub fn scalar_variation_bound<T: Target>(f: &VectorField<T>, sample: &[LocalSet]) -> Result<f64> {
    let closure = split_closure(f, sample)?;
    let space = f.space();
    let mut sup_abs: f64 = 0.0;
    for set in &closure {
        let mut s = 0.0;
        space.for_each_point(set, |p| {
            s += f.eval(p).as_scalar().map_or(0.0, |z| z.norm()) * space.mass(p);
        });
        sup_abs = sup_abs.max(s);
    }
    let pseudo = pseudo_bound(f, &closure)?;
    if sup_abs > 4.0 * pseudo * (1.0 + 1e-12) + 1e-300 {
        return Err(Error::Invariant(format!(
            "variation {sup_abs} exceeds 4 x pseudo bound {pseudo}"
        )));
    }
    Ok(sup_abs)
}

/// `s -> phi(s) f(s)` for a multiplier with declared `sup |phi| <= bound`.
pub fn multiply_linf<T: Target>(
    f: &VectorField<T>,
    phi: impl Fn(i64) -> Complex64 + Send + Sync + 'static,
    bound: Option<f64>,
) -> Result<VectorField<T>> {
    let bound = match bound {
        Some(b) if b.is_finite() && b >= 0.0 => b,
        _ => return Err(Error::UnboundedMultiplier),
    };
    let product = f.pointwise_scaled(Arc::new(phi));
    Ok(match f.tail_oracle() {
        Some(o) => product.with_oracle(o.scaled_by(bound)),
        None => product,
    })
}

/// A local set outside of which `||int_D phi f|| <= eps ||phi||` for all `phi`.
#[derive(Clone, Debug)]
pub struct UniformTail {
    pub set: LocalSet,
    pub bound: f64,
    pub kind: OracleKind,
}

pub fn uniform_tail_set<T: Target>(f: &VectorField<T>, eps: f64) -> Result<UniformTail> {
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::InvalidArgument(format!("eps = {eps} must be nonnegative")));
    }
    let oracle = match f.tail_oracle() {
        Some(o) if o.kind().is_uniform() => o,
        Some(o) => {
            return Err(Error::NoOracle(format!(
                "{:?} oracle does not bound sums of norms",
                o.kind()
            )))
        }
        None => {
            return match f.space().full_set() {
                Some(full) => Ok(UniformTail { set: full, bound: 0.0, kind: OracleKind::FiniteSupport }),
                None => Err(Error::NoOracle(String::from("field carries no tail oracle"))),
            }
        }
    };
    let set = oracle
        .locate(eps)
        .ok_or_else(|| Error::NoOracle(format!("{} cannot reach eps = {eps}", oracle.description())))?;
    f.space().check_local(&set)?;
    let bound = if oracle.kind() == OracleKind::FiniteSupport { 0.0 } else { eps };
    Ok(UniformTail { set, bound, kind: oracle.kind() })
}

/// `f` restricted to the uniform tail set, and the bound on the distance
/// `sup_{L, ||phi|| <= 1} ||int_L phi (f - f_0)||`.
pub fn truncate_to_local<T: Target>(f: &VectorField<T>, eps: f64) -> Result<(VectorField<T>, f64)> {
    let tail = uniform_tail_set(f, eps)?;
    let space = f.space().clone();
    let set = tail.set.clone();
    let inner = f.clone();
    let zero = f.zero().clone();
    let truncated = VectorField::new(space.clone(), zero.clone(), f.norm_kind(), move |p| {
        if space.set_contains(&set, p) {
            inner.eval(p)
        } else {
            zero.clone()
        }
    })
    .with_oracle(TailOracle::finite_support(tail.set.clone()));
    Ok((truncated, tail.bound))
}
