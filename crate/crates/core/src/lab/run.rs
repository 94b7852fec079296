use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::report::{CheckRecord, Report};
use super::scenario::{Scenario, ScenarioKind, Validated, WorldChoice};
use crate::alpha::{self, ActionSystem, Element, GPoint, SparseZOperator};
use crate::error::{Error, Result};
use crate::fell_bundle::{self, convolve, involve, regular_representation, Section, Side};
use crate::group::FiniteAbelianGroup;
use crate::linalg;
use crate::positive_type::{inversion_check, naimark_dilate, random_positive_type, spectral_measure, Analysis};
use crate::ucond::{self, instances, CertificationPolicy, LocalSet, Target};

/// Generator for trial `k`: the global seed with stream `k`, so trials are
/// independent and reproducible on their own.
pub fn trial_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

/// Validates and runs a scenario. Mathematical failures are report data;
/// only invalid parameters are errors.
pub fn run(scenario: &Scenario) -> Result<Report> {
    let v = scenario.validate()?;
    Ok(run_validated(&v))
}

pub fn run_validated(v: &Validated) -> Report {
    let start = Instant::now();
    let checks = match v.kind {
        ScenarioKind::Inversion => run_inversion(v),
        ScenarioKind::Combined => run_combined(v),
        ScenarioKind::Naimark => run_naimark(v),
        ScenarioKind::MainTheorem => run_main_theorem(v),
        ScenarioKind::Alpha => run_alpha(v),
        ScenarioKind::Unconditional => run_unconditional(v),
        ScenarioKind::Laurent => run_laurent(v),
        ScenarioKind::Inequality => run_inequality(v),
        ScenarioKind::Cone => run_cone(v),
    };
    let wall = start.elapsed().as_secs_f64() * 1e3;
    Report::new(v.id.clone(), v.kind.name().to_string(), v.seed, checks, wall)
}

fn group_of(v: &Validated) -> &FiniteAbelianGroup {
    v.group.as_ref().expect("validated kinds carry a group")
}

fn bundle_of(v: &Validated) -> Arc<fell_bundle::FellBundle> {
    Arc::new(v.bundle.as_ref().expect("validated kinds carry a bundle").1.clone())
}

fn sci(x: f64) -> String {
    format!("{x:.6e}")
}

fn run_inversion(v: &Validated) -> Vec<CheckRecord> {
    let g = group_of(v);
    let mut out = Vec::new();
    for k in 0..v.trials {
        let p = random_positive_type(g, v.dim, &mut trial_rng(v.seed, k));
        for t in 0..g.order() {
            let name = format!("trial {k} t={}", g.element(t));
            out.push(match inversion_check(&p, t) {
                Ok(o) => CheckRecord::new(name, o.abs_err, v.tol)
                    .lhs(format!("||inverse transform||_F = {}", sci(linalg::frobenius(&o.value))))
                    .rhs(format!("||p(t)||_F = {}", sci(linalg::frobenius(p.get(t)))))
                    .certificate(o.certificate.summary()),
                Err(e) => CheckRecord::failed(name, v.tol, e.to_string()),
            });
        }
    }
    out
}

fn run_naimark(v: &Validated) -> Vec<CheckRecord> {
    let g = group_of(v);
    let mut out = Vec::new();
    for k in 0..v.trials {
        let p = random_positive_type(g, v.dim, &mut trial_rng(v.seed, k));
        let dil = match naimark_dilate(&p) {
            Ok(d) => d,
            Err(e) => {
                out.push(CheckRecord::failed(format!("trial {k} dilation"), v.tol, e.to_string()));
                continue;
            }
        };
        let dim = format!("dilation dim {}", dil.dilation_dim);
        out.push(CheckRecord::new(format!("trial {k} unitarity"), dil.unitarity_residual(), 1e-10).lhs(dim.clone()));
        out.push(CheckRecord::new(format!("trial {k} homomorphism"), dil.homomorphism_residual(), 1e-10));
        out.push(CheckRecord::new(format!("trial {k} reconstruction"), dil.reconstruction_residual(&p), v.tol));
        out.push(match spectral_measure(&dil) {
            Ok(m) => {
                let r = m
                    .projection_residual()
                    .max(m.orthogonality_residual())
                    .max(m.completeness_residual())
                    .max(m.stone_residual(&dil.rep));
                CheckRecord::new(format!("trial {k} spectral measure"), r, 1e-9)
            }
            Err(e) => CheckRecord::failed(format!("trial {k} spectral measure"), 1e-9, e.to_string()),
        });
    }
    out
}

fn run_combined(v: &Validated) -> Vec<CheckRecord> {
    let g = group_of(v);
    let n = g.order();
    let mut out = Vec::new();
    for k in 0..v.trials {
        let mut rng = trial_rng(v.seed, k);
        let p = random_positive_type(g, v.dim, &mut rng);
        let analysis = match Analysis::new(p) {
            Ok(a) => a,
            Err(e) => {
                out.push(CheckRecord::failed(format!("trial {k} analysis"), v.tol, e.to_string()));
                continue;
            }
        };
        let mut ordering: f64 = 0.0;
        for t in 0..n {
            let mut worst: f64 = 0.0;
            for mask in 0u32..(1 << n) {
                let set: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
                let o = analysis.combined_check(t, &set);
                worst = worst.max(o.abs_err);
                ordering = ordering.max(o.ordering_err);
            }
            out.push(
                CheckRecord::new(format!("trial {k} t={} all {} subsets", g.element(t), 1u64 << n), worst, v.tol),
            );
        }
        out.push(CheckRecord::new(format!("trial {k} operator orderings"), ordering, 1e-12));
        let xi = linalg::random_vector(v.dim, &mut rng);
        let eta = linalg::random_vector(v.dim, &mut rng);
        out.push(match analysis.equal_measures_check(&xi, &eta) {
            Ok(d) => CheckRecord::new(format!("trial {k} measure equality"), d, v.tol),
            Err(e) => CheckRecord::failed(format!("trial {k} measure equality"), v.tol, e.to_string()),
        });
    }
    out
}

fn run_main_theorem(v: &Validated) -> Vec<CheckRecord> {
    let bundle = bundle_of(v);
    let g = bundle.group().clone();
    let n = g.order();
    let mut out = Vec::new();
    for k in 0..v.trials {
        let mut rng = trial_rng(v.seed, k);
        let f = Section::random(bundle.clone(), &mut rng);
        let a = Section::random(bundle.clone(), &mut rng);
        let t = k % n;
        let label = format!("trial {k} t={}", g.element(t));
        match fell_bundle::main_theorem_check(&f, &a, t) {
            Ok(o) => {
                out.push(
                    CheckRecord::new(format!("{label} aP(t) and P(t)a"), o.abs_err, v.tol)
                        .lhs(format!("||lhs|| = {}", sci(o.lhs_left.norm(ucond::NormKind::Operator))))
                        .rhs(format!("||aP(t)|| = {}", sci(o.rhs_left.norm(ucond::NormKind::Operator))))
                        .status(o.status),
                );
                out.push(CheckRecord::new(format!("{label} collapse"), o.collapse_err, v.tol));
            }
            Err(e) => out.push(CheckRecord::failed(format!("{label} main theorem"), v.tol, e.to_string())),
        }
        out.push(match fell_bundle::hat_equals_action_check(&f, t) {
            Ok(d) => CheckRecord::new(format!("trial {k} x={} hat equals action", g.element(t)), d, 1e-11),
            Err(e) => CheckRecord::failed(format!("trial {k} hat equals action"), 1e-11, e.to_string()),
        });
        out.push(match fell_bundle::section_positive_type_check(&f) {
            Ok(verdict) => {
                let err = if verdict.is_positive_type { (-verdict.min_eigenvalue).max(0.0) } else { f64::MAX };
                CheckRecord::new(format!("trial {k} P positive type"), err, 1e-10)
                    .lhs(format!("min eigenvalue {}", sci(verdict.min_eigenvalue)))
            }
            Err(e) => CheckRecord::failed(format!("trial {k} P positive type"), 1e-10, e.to_string()),
        });
    }
    out
}

fn run_alpha(v: &Validated) -> Vec<CheckRecord> {
    let bundle = bundle_of(v);
    let g = bundle.group().clone();
    let n = g.order();
    let sys = ActionSystem::from_bundle_dual_action(&bundle);
    let mut out = vec![CheckRecord::new("action law", sys.action_law_residual(), 1e-12)];
    for k in 0..v.trials {
        let mut rng = trial_rng(v.seed, k);
        let f = Section::random(bundle.clone(), &mut rng);
        let a = Section::random(bundle.clone(), &mut rng);
        let x = k % n;
        out.push(match dual_action_consistency(&sys, &f, x) {
            Ok(d) => CheckRecord::new(format!("trial {k} x={} dual action", g.element(x)), d, v.tol),
            Err(e) => CheckRecord::failed(format!("trial {k} dual action"), v.tol, e.to_string()),
        });
        out.push(match transform_consistency(&sys, &f, &a, x) {
            Ok((d, s)) => {
                CheckRecord::new(format!("trial {k} t={} transform equals aP(t)", g.element(x)), d.max(s), v.tol)
                    .lhs(format!("multiplier discrepancy {}", sci(d)))
                    .rhs(format!("spectral subspace defect {}", sci(s)))
            }
            Err(e) => CheckRecord::failed(format!("trial {k} transform"), v.tol, e.to_string()),
        });
    }
    out
}

/// `Lambda(alpha_x f)` against `alpha_x(Lambda f)`.
pub fn dual_action_consistency(sys: &ActionSystem, f: &Section, x: usize) -> Result<f64> {
    let via_bundle = regular_representation(&fell_bundle::dual_action(x, f));
    let via_world = alpha::alpha_apply(sys, x as i64, &Element::Dense(regular_representation(f)))?;
    Ok(linalg::max_abs_diff(&via_bundle, via_world.as_dense().expect("finite world")))
}

/// `Lambda(a) (Lambda p)^(t)` against `Lambda(a P(t))`, plus the spectral
/// subspace defect of the transform.
pub fn transform_consistency(sys: &ActionSystem, f: &Section, a: &Section, t: usize) -> Result<(f64, f64)> {
    let p = convolve(&involve(f), f)?;
    let m = alpha::fourier_of_element(sys, &Element::Dense(regular_representation(&p)), GPoint::Element(t))?;
    let observed = m.apply(Side::Right, &Element::Dense(regular_representation(a)))?;
    let theorem = fell_bundle::main_theorem_check(f, a, t)?;
    let d = linalg::max_abs_diff(observed.as_dense().expect("finite world"), &regular_representation(&theorem.rhs_left));
    let s = alpha::spectral_subspace_check(sys, &m, GPoint::Element(t))?;
    Ok((d, s))
}

fn run_unconditional(v: &Validated) -> Vec<CheckRecord> {
    let policy = CertificationPolicy { seed: v.seed, ..CertificationPolicy::default() };
    match v.example.as_str() {
        "basis-over-n" => {
            let f = instances::basis_over_n();
            match ucond::u_integrate_with(&f, v.eps, &policy) {
                Ok(cert) => {
                    let err = distance_to_inverse_sequence(&cert.value, &cert.witness);
                    vec![CheckRecord::new("basis-over-n value against (1/n)_n", err, v.tol)
                        .lhs(format!("witness {}", cert.witness.describe()))
                        .certificate(cert.summary())]
                }
                Err(e) => vec![CheckRecord::failed("basis-over-n certificate", v.tol, e.to_string())],
            }
        }
        "alternating-harmonic" => {
            let f = instances::alternating_harmonic();
            vec![match ucond::u_integrate_with(&f, v.eps, &policy) {
                Err(Error::CauchyFailure { set, norm, .. }) => {
                    CheckRecord::predicate("alternating-harmonic Cauchy failure", norm > 1.0)
                        .lhs(format!("violating set {} with |sum| = {}", set.describe(), sci(norm)))
                        .rhs("|sum| > 1")
                }
                Ok(cert) => CheckRecord::predicate("alternating-harmonic Cauchy failure", false)
                    .lhs(format!("unexpected certificate at {}", cert.witness.describe())),
                Err(e) => CheckRecord::failed("alternating-harmonic Cauchy failure", 0.0, e.to_string()),
            }]
        }
        _ => {
            let f = instances::sup_norm_basis();
            let sample = vec![LocalSet::Prefix(1), LocalSet::Prefix(64), LocalSet::from_points([3, 9, 27, 81])];
            let mut out = vec![match ucond::pseudo_bound(&f, &sample) {
                Ok(b) => CheckRecord::new("sup-norm-basis pseudo bound equals 1", (b - 1.0).abs(), 1e-12).lhs(sci(b)),
                Err(e) => CheckRecord::failed("sup-norm-basis pseudo bound", 1e-12, e.to_string()),
            }];
            out.push(match ucond::u_integrate_with(&f, v.eps, &policy) {
                Err(Error::CauchyFailure { set, norm, .. }) => {
                    CheckRecord::predicate("sup-norm-basis Cauchy failure", true)
                        .lhs(format!("violating set {} with norm {}", set.describe(), sci(norm)))
                }
                Ok(_) => CheckRecord::predicate("sup-norm-basis Cauchy failure", false),
                Err(e) => CheckRecord::failed("sup-norm-basis Cauchy failure", 0.0, e.to_string()),
            });
            out
        }
    }
}

/// l^2 distance from a partial integral of `n -> e_n / n` over a prefix to
/// the full sequence `(1/n)_n`.
pub fn distance_to_inverse_sequence(value: &ucond::SeqVec, witness: &LocalSet) -> f64 {
    let mut head = 0.0;
    value.for_each_coordinate(|i, c| head += (c - Complex64::new(1.0 / i as f64, 0.0)).norm_sqr());
    let covered = match witness {
        LocalSet::Prefix(n) => *n,
        LocalSet::Points(p) => p.len(),
    };
    // coordinates not visited are exactly those beyond the prefix
    (head + instances::inverse_square_tail(covered)).sqrt()
}

/// The shift-world elements used by the Laurent grid.
pub fn laurent_elements() -> Vec<(&'static str, SparseZOperator)> {
    vec![
        ("E00", SparseZOperator::unit(0, 0)),
        ("E01", SparseZOperator::unit(0, 1)),
        ("E00+2E13", SparseZOperator::unit(0, 0).add(&SparseZOperator::unit(1, 3).scale(Complex64::new(2.0, 0.0)))),
    ]
}

pub const LAURENT_ANGLES: [(&str, f64); 3] = [("0", 0.0), ("1", 1.0), ("pi", PI)];

fn run_laurent(v: &Validated) -> Vec<CheckRecord> {
    let z = ActionSystem::zshift();
    let mut out = Vec::new();
    for (label, b) in laurent_elements() {
        for (tl, t) in LAURENT_ANGLES {
            let name = format!("{label} t={tl}");
            match alpha::laurent_recovery(&b, t, v.window) {
                Ok(r) => {
                    out.push(
                        CheckRecord::new(format!("{name} direct sum vs closed form"), r.max_err, v.tol)
                            .lhs(format!("interior half-width {}", r.interior)),
                    );
                    if let Some(e) = r.toeplitz_err {
                        out.push(CheckRecord::new(format!("{name} Toeplitz"), e, 0.0));
                    }
                }
                Err(e) => out.push(CheckRecord::failed(format!("{name} recovery"), v.tol, e.to_string())),
            }
            let m = alpha::fourier_of_element(&z, &Element::Sparse(b.clone()), GPoint::Angle(t));
            out.push(match m.and_then(|m| alpha::spectral_subspace_check(&z, &m, GPoint::Angle(t))) {
                Ok(d) => CheckRecord::new(format!("{name} spectral subspace"), d, 1e-14),
                Err(e) => CheckRecord::failed(format!("{name} spectral subspace"), 1e-14, e.to_string()),
            });
        }
    }
    out
}

fn system_for(world: &WorldChoice) -> ActionSystem {
    match world {
        WorldChoice::Shift => ActionSystem::zshift(),
        WorldChoice::Regular(g, d) => ActionSystem::regular(g.clone(), *d),
    }
}

/// Random element: a dense matrix in the finite world, a few entries in
/// `[-3, 3]^2` in the shift world.
pub fn random_element<R: Rng + ?Sized>(sys: &ActionSystem, rng: &mut R) -> Element {
    match sys.dim() {
        Some(d) => Element::Dense(linalg::random_cmat(d, d, rng)),
        None => Element::Sparse(SparseZOperator::from_entries(
            (0..4).map(|_| (rng.gen_range(-3..=3), rng.gen_range(-3..=3), linalg::random_complex(rng))).collect::<Vec<_>>(),
        )),
    }
}

/// Random local set of the acting group.
pub fn random_local_set<R: Rng + ?Sized>(sys: &ActionSystem, rng: &mut R) -> LocalSet {
    match sys.space().len() {
        Some(n) => LocalSet::from_points((0..n as i64).filter(|_| rng.gen_bool(0.6)).collect::<Vec<_>>()),
        None => LocalSet::from_points((0..6).map(|_| rng.gen_range(-6..=6)).collect::<Vec<_>>()),
    }
}

/// Random `0 <= h <= k`: `k = B* B` and `h = B* C B` with `0 <= C <= 1`.
pub fn random_dominated_pair<R: Rng + ?Sized>(sys: &ActionSystem, rng: &mut R) -> (Element, Element) {
    match sys.dim() {
        Some(d) => {
            let b = linalg::random_cmat(d, d, rng);
            let c = linalg::random_psd(d, rng);
            let c = &c / Complex64::new(linalg::op_norm(&c).max(f64::MIN_POSITIVE), 0.0);
            let k = b.adjoint() * &b;
            let h = b.adjoint() * c * &b;
            (Element::Dense(linalg::hermitian_part(&h)), Element::Dense(linalg::hermitian_part(&k)))
        }
        None => {
            let b = SparseZOperator::from_entries(
                (0..4).map(|_| (rng.gen_range(-2..=2), rng.gen_range(-2..=2), linalg::random_complex(rng))).collect::<Vec<_>>(),
            );
            let rows: Vec<i64> = (-2..=2).filter(|_| rng.gen_bool(0.5)).collect();
            let proj = SparseZOperator::from_entries(rows.into_iter().map(|r| (r, r, linalg::ONE)));
            let k = b.adjoint().mul(&b);
            let h = b.adjoint().mul(&proj).mul(&b);
            (Element::Sparse(h), Element::Sparse(k))
        }
    }
}

fn run_inequality(v: &Validated) -> Vec<CheckRecord> {
    let sys = system_for(&v.world());
    let mut out = Vec::new();
    for k in 0..v.trials {
        let mut rng = trial_rng(v.seed, k);
        let els: Vec<Element> = (0..4).map(|_| random_element(&sys, &mut rng)).collect();
        let set = random_local_set(&sys, &mut rng);
        out.push(match alpha::main_inequality_check(&sys, &els[0], &els[1], &els[2], &els[3], &set) {
            Ok(r) => CheckRecord::new(format!("trial {k} square-root form"), (r.lhs - r.rhs_sqrt_form).max(0.0), v.tol)
                .lhs(format!("lhs {}", sci(r.lhs)))
                .rhs(format!(
                    "sqrt form {}, product form {} ({})",
                    sci(r.rhs_sqrt_form),
                    sci(r.rhs_printed_form),
                    if r.printed_form_holds { "holds" } else { "fails" }
                )),
            Err(e) => CheckRecord::failed(format!("trial {k} square-root form"), v.tol, e.to_string()),
        });
    }
    out
}

fn run_cone(v: &Validated) -> Vec<CheckRecord> {
    let sys = system_for(&v.world());
    let exhaustion = sys.space().len().unwrap_or(16);
    let mut out = Vec::new();
    for k in 0..v.trials {
        let mut rng = trial_rng(v.seed, k);
        let (h, kk) = random_dominated_pair(&sys, &mut rng);
        let c = random_element(&sys, &mut rng);
        match alpha::hereditary_cone_check(&sys, &h, &kk, &c, exhaustion, v.eps) {
            Ok(r) => {
                let violation = r
                    .steps
                    .iter()
                    .map(|s| {
                        let scale = 1.0 + s.via_k + s.tail_rhs;
                        ((s.lhs - s.via_h).max(s.via_h - s.via_k).max(s.tail_lhs - s.tail_rhs) / scale).max(0.0)
                    })
                    .fold(0.0, f64::max);
                out.push(
                    CheckRecord::new(format!("trial {k} domination chain"), violation, v.tol)
                        .lhs(format!("{} exhaustion steps, M_k = {}", r.steps.len(), sci(r.m_k))),
                );
                out.push(
                    CheckRecord::new(
                        format!("trial {k} derived certificate"),
                        (r.rerun_epsilon - 2.0 * r.derived_epsilon).max(0.0),
                        0.0,
                    )
                    .lhs(format!("derived eps {}", sci(r.derived_epsilon)))
                    .rhs(format!("measured eps {}", sci(r.rerun_epsilon)))
                    .certificate(r.summary()),
                );
            }
            Err(e) => out.push(CheckRecord::failed(format!("trial {k} hereditary cone"), v.tol, e.to_string())),
        }
    }
    out
}

/// Human-readable certificate or failure for a built-in instance.
pub fn demo_unconditional(example: &str, eps: f64, seed: u64) -> Result<String> {
    let policy = CertificationPolicy { seed, ..CertificationPolicy::default() };
    let describe = |r: Result<ucond::CertificateSummary>| -> Result<String> {
        match r {
            Ok(s) => Ok(format!(
                "certified: status {:?}, epsilon {}, witness {}\npolicy: {}\n",
                s.status, s.epsilon, s.witness, s.policy
            )),
            Err(e @ Error::CauchyFailure { .. }) => Ok(format!("not u-integrable: {e}\n")),
            Err(e) => Err(e),
        }
    };
    let header = format!("{example}: {}\n", instances::builtin_description(example).unwrap_or(""));
    let body = match example {
        "basis-over-n" => describe(ucond::u_integrate_with(&instances::basis_over_n(), eps, &policy).map(|c| c.summary()))?,
        "alternating-harmonic" => {
            describe(ucond::u_integrate_with(&instances::alternating_harmonic(), eps, &policy).map(|c| c.summary()))?
        }
        "sup-norm-basis" => {
            describe(ucond::u_integrate_with(&instances::sup_norm_basis(), eps, &policy).map(|c| c.summary()))?
        }
        _ => return Err(Error::Validation(format!("unknown example {example:?}"))),
    };
    Ok(header + &body)
}
