//! Built-in sequence-space instances with known behaviour.

use std::sync::Arc;

use num_complex::Complex64;

use super::field::{TailOracle, VectorField};
use super::seqvec::{Profile, SeqVec};
use super::space::LocalIntegrationSpace;
use super::target::NormKind;

/// Trigamma function for `x > 0`.
pub fn trigamma(x: f64) -> f64 {
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let r = 1.0 / x;
    let r2 = r * r;
    acc + r + r2 / 2.0 + r * r2 * (1.0 / 6.0 - r2 * (1.0 / 30.0 - r2 * (1.0 / 42.0 - r2 * (1.0 / 30.0 - r2 * 5.0 / 66.0))))
}

/// `sum_{n > k} 1/n^2`.
pub fn inverse_square_tail(k: usize) -> f64 {
    trigamma(k as f64 + 1.0)
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `n -> profile(n) e_n` over the naturals. Summing it over the exhaustion
/// indices `lo..hi` is the single run `profile` on `lo+1..=hi`.
pub fn diagonal(profile: Profile, norm_kind: NormKind) -> VectorField<SeqVec> {
    let block_profile = profile.clone();
    VectorField::new(Arc::new(LocalIntegrationSpace::naturals()), SeqVec::zero(), norm_kind, move |n| {
        SeqVec::profile_point(&profile, n)
    })
    .with_block_integral(move |lo, hi| SeqVec::profile_run(&block_profile, lo as i64 + 1, hi as i64, c(1.0)))
}

/// `n -> e_n / n` in l^2 over the naturals, with the orthogonality oracle.
/// Unconditionally but not absolutely integrable.
pub fn basis_over_n() -> VectorField<SeqVec> {
    diagonal(Profile::new(|n| c(1.0 / n as f64)), NormKind::Euclidean).with_oracle(TailOracle::l2_orthogonal(inverse_square_tail))
}

/// `n -> e_n / n^2` in l^2, with the l^1-of-norms oracle.
pub fn basis_over_n_squared() -> VectorField<SeqVec> {
    diagonal(Profile::new(|n| c(1.0 / (n as f64 * n as f64))), NormKind::Euclidean).with_oracle(TailOracle::l1_norms(inverse_square_tail))
}

/// Scalar `n -> (-1)^n / n`: conditionally summable, not u-integrable.
pub fn alternating_harmonic() -> VectorField<Complex64> {
    VectorField::new(Arc::new(LocalIntegrationSpace::naturals()), c(0.0), NormKind::Euclidean, |n| {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        c(sign / n as f64)
    })
}

/// `n -> e_n` in the sup-norm sequence space: pseudo-integrable, not
/// u-integrable.
pub fn sup_norm_basis() -> VectorField<SeqVec> {
    diagonal(Profile::new(|_| c(1.0)), NormKind::Sup)
}

/// Names accepted by [`builtin_description`] and the CLI.
pub const BUILTIN_NAMES: [&str; 3] = ["basis-over-n", "alternating-harmonic", "sup-norm-basis"];

pub fn builtin_description(name: &str) -> Option<&'static str> {
    match name {
        "basis-over-n" => Some("n -> e_n/n in l2(N): u-integrable via orthogonality, not absolutely integrable"),
        "alternating-harmonic" => Some("n -> (-1)^n/n scalar: not u-integrable, even terms diverge"),
        "sup-norm-basis" => Some("n -> e_n in sup-norm sequences: pseudo-integrable with bound 1, not u-integrable"),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trigamma_matches_direct_tail() {
        for k in [0usize, 1, 5, 10, 100] {
            let direct: f64 = ((k + 1)..2_000_000).rev().map(|n| 1.0 / (n as f64 * n as f64)).sum::<f64>() + 1.0 / 2_000_000.0;
            assert!((inverse_square_tail(k) - direct).abs() < 1e-11, "k = {k}");
        }
        assert!((trigamma(1.0) - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-13);
    }
}
