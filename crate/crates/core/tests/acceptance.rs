use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use ulab::alpha::{self, ActionSystem, Element, GPoint};
use ulab::fell_bundle::{self, Section};
use ulab::group::FiniteAbelianGroup;
use ulab::lab::{self, random_dominated_pair, random_element, random_local_set, trial_rng, Scenario, ScenarioKind};
use ulab::linalg;
use ulab::positive_type::{random_positive_type, Analysis};
use ulab::ucond::{self, instances, CertificateStatus, CertificationPolicy, LocalSet};
use ulab::Error;

const GRID_GROUPS: [&str; 5] = ["2", "3", "4,2", "5", "12"];
const SMALL_GROUPS: [&str; 10] = ["2", "3", "4", "2,2", "5", "6", "7", "8", "4,2", "2,2,2"];

type Criterion = (&'static str, fn() -> Outcome, u64);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn grid_scenario(kind: ScenarioKind, group: &str, dim: usize, trials: usize, tol: f64) -> Scenario {
    Scenario {
        kind: Some(kind),
        group: Some(group.into()),
        dim: Some(dim),
        trials: Some(trials),
        seed: Some(2024),
        tol: Some(tol),
        ..Scenario::default()
    }
}

fn group(s: &str) -> FiniteAbelianGroup {
    s.parse().unwrap()
}

fn inversion() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut all = true;
    for g in GRID_GROUPS {
        for d in 1..=3 {
            let r = lab::run(&grid_scenario(ScenarioKind::Inversion, g, d, 20, 1e-10)).unwrap();
            all &= r.pass;
            worst = r.checks.iter().map(|c| c.abs_err).fold(worst, f64::max);
        }
    }
    outcome(all, format!("max abs_err {worst:.2e} (tol 1e-10)"))
}

fn naimark() -> Outcome {
    let (mut unit, mut recon) = (0.0f64, 0.0f64);
    for g in GRID_GROUPS {
        for d in 1..=3 {
            let r = lab::run(&grid_scenario(ScenarioKind::Naimark, g, d, 20, 1e-8)).unwrap();
            for c in &r.checks {
                if c.name.ends_with("unitarity") || c.name.ends_with("homomorphism") {
                    unit = unit.max(c.abs_err);
                } else if c.name.ends_with("reconstruction") || c.name.ends_with("dilation") {
                    recon = recon.max(c.abs_err);
                }
            }
        }
    }
    outcome(
        unit <= 1e-10 && recon <= 1e-8,
        format!("rep residual {unit:.2e} (tol 1e-10), reconstruction {recon:.2e} (tol 1e-8)"),
    )
}

fn combined() -> Outcome {
    let (mut err, mut ordering) = (0.0f64, 0.0f64);
    for g in SMALL_GROUPS {
        let r = lab::run(&grid_scenario(ScenarioKind::Combined, g, 2, 4, 1e-9)).unwrap();
        for c in &r.checks {
            if c.name.contains("subsets") || c.name.ends_with("analysis") {
                err = err.max(c.abs_err);
            } else if c.name.ends_with("orderings") {
                ordering = ordering.max(c.abs_err);
            }
        }
    }
    outcome(
        err <= 1e-9 && ordering <= 1e-12,
        format!("all subsets max abs_err {err:.2e} (tol 1e-9), orderings {ordering:.2e} (tol 1e-12)"),
    )
}

fn measure_equality() -> Outcome {
    let mut worst: f64 = 0.0;
    for (gi, g) in GRID_GROUPS.iter().enumerate() {
        let g = group(g);
        for k in 0..50 {
            let mut rng = trial_rng(7 + gi as u64, k);
            let d = 1 + k % 3;
            let p = random_positive_type(&g, d, &mut rng);
            let xi = linalg::random_vector(d, &mut rng);
            let eta = linalg::random_vector(d, &mut rng);
            let e = Analysis::new(p).and_then(|a| a.equal_measures_check(&xi, &eta)).unwrap_or(f64::INFINITY);
            worst = worst.max(e);
        }
    }
    outcome(worst <= 1e-9, format!("max discrepancy {worst:.2e} (tol 1e-9)"))
}

fn main_theorem() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut all_exact = true;
    for name in fell_bundle::FIXTURE_NAMES {
        let bundle = Arc::new(fell_bundle::fixture(name).unwrap());
        let n = bundle.group().order();
        for k in 0..100 {
            let mut rng = trial_rng(11, k);
            let f = Section::random(bundle.clone(), &mut rng);
            let a = Section::random(bundle.clone(), &mut rng);
            match fell_bundle::main_theorem_check(&f, &a, k % n) {
                Ok(o) => {
                    worst = worst.max(o.abs_err);
                    all_exact &= o.status == CertificateStatus::Exact && o.epsilon == 0.0;
                }
                Err(_) => worst = f64::INFINITY,
            }
        }
    }
    outcome(
        worst <= 1e-10 && all_exact,
        format!("max abs_err {worst:.2e} over both forms (tol 1e-10), exact certificates: {all_exact}"),
    )
}

fn hat_and_positivity() -> Outcome {
    let (mut hat, mut min_eig) = (0.0f64, f64::INFINITY);
    for name in fell_bundle::FIXTURE_NAMES {
        let bundle = Arc::new(fell_bundle::fixture(name).unwrap());
        let n = bundle.group().order();
        for f in Section::spanning_set(&bundle) {
            for x in 0..n {
                hat = hat.max(fell_bundle::hat_equals_action_check(&f, x).unwrap_or(f64::INFINITY));
            }
        }
        for k in 0..100 {
            let mut rng = trial_rng(13, k);
            let f = Section::random(bundle.clone(), &mut rng);
            hat = hat.max(fell_bundle::hat_equals_action_check(&f, k % n).unwrap_or(f64::INFINITY));
            let v = fell_bundle::section_positive_type_check(&f).map(|v| v.min_eigenvalue).unwrap_or(f64::NEG_INFINITY);
            min_eig = min_eig.min(v);
        }
    }
    outcome(
        hat <= 1e-11 && min_eig >= -1e-10,
        format!("hat residual {hat:.2e} (tol 1e-11), min eigenvalue {min_eig:.2e} (floor -1e-10)"),
    )
}

fn unconditional() -> Outcome {
    let policy = CertificationPolicy::default();
    let (a_ok, a_detail) = match ucond::u_integrate_with(&instances::basis_over_n(), 1e-4, &policy) {
        Ok(c) => {
            let err = lab::distance_to_inverse_sequence(&c.value, &c.witness);
            (c.status == CertificateStatus::Proof && err <= 1e-4, format!("{:?} certificate, l2 error {err:.2e}", c.status))
        }
        Err(e) => (false, e.to_string()),
    };
    let (b_ok, b_detail) = match ucond::u_integrate_with(&instances::alternating_harmonic(), 1e-4, &policy) {
        Err(Error::CauchyFailure { set, norm, .. }) => (norm > 1.0, format!("|sum| {norm:.3} on {}", set.describe())),
        other => (false, format!("{:?}", other.map(|c| c.status))),
    };
    let sample = [LocalSet::Prefix(1), LocalSet::Prefix(1000), LocalSet::from_points([2, 4, 8, 16])];
    let bound = ucond::pseudo_bound(&instances::sup_norm_basis(), &sample).unwrap_or(f64::NAN);
    let c_fail = matches!(
        ucond::u_integrate_with(&instances::sup_norm_basis(), 0.5, &policy),
        Err(Error::CauchyFailure { .. })
    );
    let c_ok = (bound - 1.0).abs() <= 1e-12 && c_fail;
    outcome(
        a_ok && b_ok && c_ok,
        format!("(a) {a_detail}; (b) {b_detail}; (c) pseudo bound {bound}, Cauchy failure {c_fail}"),
    )
}

fn laurent() -> Outcome {
    let r = lab::run(&Scenario { kind: Some(ScenarioKind::Laurent), window: Some(20), ..Scenario::default() }).unwrap();
    let worst = |pat: &str| r.checks.iter().filter(|c| c.name.ends_with(pat)).map(|c| c.abs_err).fold(0.0, f64::max);
    let z = ActionSystem::zshift();
    let mut all_angles = true;
    for (_, b) in lab::laurent_elements() {
        for t in [0.0, 1.0, PI] {
            let m = alpha::fourier_of_element(&z, &Element::Sparse(b.clone()), GPoint::Angle(t)).unwrap();
            all_angles &= alpha::spectral_subspace_check(&z, &m, GPoint::Angle(t)).unwrap() <= 1e-14;
        }
    }
    outcome(
        r.pass && all_angles,
        format!(
            "recovery {:.2e} (tol 1e-12), Toeplitz at t=0 {:.1e}, spectral {:.2e} (tol 1e-14)",
            worst("closed form"),
            worst("Toeplitz"),
            worst("spectral subspace")
        ),
    )
}

fn worlds() -> Vec<(&'static str, ActionSystem)> {
    vec![
        ("shift", ActionSystem::zshift()),
        ("regular Z4 x Z2 on C^2", ActionSystem::regular(group("4,2"), 2)),
        ("regular Z5", ActionSystem::regular(group("5"), 1)),
    ]
}

fn inequality_and_cone() -> Outcome {
    let mut ineq_ok = 0usize;
    let mut cone_ok = 0usize;
    let mut total = 0usize;
    for (wi, (_, sys)) in worlds().into_iter().enumerate() {
        let exhaustion = sys.space().len().unwrap_or(16);
        for k in 0..100 {
            total += 1;
            let mut rng = trial_rng(17 + wi as u64, k);
            let e: Vec<Element> = (0..4).map(|_| random_element(&sys, &mut rng)).collect();
            let set = random_local_set(&sys, &mut rng);
            if alpha::main_inequality_check(&sys, &e[0], &e[1], &e[2], &e[3], &set).is_ok_and(|r| r.ok) {
                ineq_ok += 1;
            }
            let (h, kk) = random_dominated_pair(&sys, &mut rng);
            let c = random_element(&sys, &mut rng);
            if alpha::hereditary_cone_check(&sys, &h, &kk, &c, exhaustion, 1e-6)
                .is_ok_and(|r| r.domination_ok && r.rerun_confirms)
            {
                cone_ok += 1;
            }
        }
    }
    outcome(
        ineq_ok == total && cone_ok == total,
        format!("square-root form {ineq_ok}/{total}, dominated pairs certified {cone_ok}/{total}"),
    )
}

fn cross_module() -> Outcome {
    let mut worst: f64 = 0.0;
    for name in fell_bundle::FIXTURE_NAMES {
        let bundle = Arc::new(fell_bundle::fixture(name).unwrap());
        let sys = ActionSystem::from_bundle_dual_action(&bundle);
        let n = bundle.group().order();
        for k in 0..50 {
            let f = Section::random(bundle.clone(), &mut trial_rng(19, k));
            worst = worst.max(lab::dual_action_consistency(&sys, &f, k % n).unwrap_or(f64::INFINITY));
        }
    }
    outcome(worst <= 1e-10, format!("max discrepancy {worst:.2e} (tol 1e-10)"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("Fourier inversion", inversion, 10),
        ("Naimark dilation", naimark, 10),
        ("combined spectral identity", combined, 30),
        ("measure equality", measure_equality, 5),
        ("dual-action inversion on bundles", main_theorem, 10),
        ("hat identity and positivity of P", hat_and_positivity, 10),
        ("unconditional separations", unconditional, 5),
        ("Laurent recovery", laurent, 2),
        ("square-root inequality and hereditary cone", inequality_and_cone, 10),
        ("bundle and action world agree", cross_module, 5),
    ];
    let mut failed = Vec::new();
    for (i, (name, check, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let pass = o.pass && in_time;
        println!(
            "criterion {:>2} {}: {name}: {} [{:.2} s of {budget} s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        );
        if !pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria pass");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
