use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fell_bundle::{self, FellBundle};
use crate::group::FiniteAbelianGroup;
use crate::io::load_bundle_fixture;
use crate::ucond::instances::BUILTIN_NAMES;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Inversion,
    Combined,
    Naimark,
    MainTheorem,
    Alpha,
    Unconditional,
    Laurent,
    Inequality,
    Cone,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 9] = [
        ScenarioKind::Inversion,
        ScenarioKind::Combined,
        ScenarioKind::Naimark,
        ScenarioKind::MainTheorem,
        ScenarioKind::Alpha,
        ScenarioKind::Unconditional,
        ScenarioKind::Laurent,
        ScenarioKind::Inequality,
        ScenarioKind::Cone,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Inversion => "inversion",
            ScenarioKind::Combined => "combined",
            ScenarioKind::Naimark => "naimark",
            ScenarioKind::MainTheorem => "main-theorem",
            ScenarioKind::Alpha => "alpha",
            ScenarioKind::Unconditional => "unconditional",
            ScenarioKind::Laurent => "laurent",
            ScenarioKind::Inequality => "inequality",
            ScenarioKind::Cone => "cone",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ScenarioKind::Inversion => "Fourier inversion of seeded positive-type functions at every group element",
            ScenarioKind::Combined => "spectral-measure identity over all subsets of the dual group, both orderings, and measure equality",
            ScenarioKind::Naimark => "dilation unitarity, homomorphism, reconstruction and spectral-measure residuals",
            ScenarioKind::MainTheorem => "dual-action inversion on a bundle fixture, plus the hat identity and positivity of P",
            ScenarioKind::Alpha => "bundle dual action against the finite action world, and Fourier transforms of elements",
            ScenarioKind::Unconditional => "certificate or failure for a built-in sequence-space instance",
            ScenarioKind::Laurent => "Laurent recovery, Toeplitz structure and spectral subspaces in the shift world",
            ScenarioKind::Inequality => "square-root form of the main inequality on seeded instances",
            ScenarioKind::Cone => "hereditary cone: domination chain and derived certificates for h <= k",
        }
    }

    /// Parameters accepted by the kind, with defaults.
    pub fn schema(self) -> Vec<ParamSpec> {
        use ParamType::*;
        let p = |name: &'static str, ty: ParamType, default: &'static str| ParamSpec { name, ty, default };
        let seeded = |tol: &'static str| vec![p("trials", Count, "10"), p("seed", Seed, "0"), p("tol", Real, tol)];
        let mut out = match self {
            ScenarioKind::Inversion => vec![p("group", Group, "5"), p("dim", Count, "2")],
            ScenarioKind::Combined => vec![p("group", Group, "4"), p("dim", Count, "2")],
            ScenarioKind::Naimark => vec![p("group", Group, "5"), p("dim", Count, "2")],
            ScenarioKind::MainTheorem | ScenarioKind::Alpha => vec![p("bundle", Bundle, "m2z2")],
            ScenarioKind::Unconditional => {
                return vec![p("example", Example, "basis-over-n"), p("eps", Real, "1e-4"), p("seed", Seed, "0"), p("tol", Real, "eps")]
            }
            ScenarioKind::Laurent => return vec![p("window", Count, "20"), p("tol", Real, "1e-12")],
            ScenarioKind::Inequality => vec![p("group", Group, "none (shift world)"), p("dim", Count, "1")],
            ScenarioKind::Cone => vec![p("group", Group, "none (shift world)"), p("dim", Count, "1"), p("eps", Real, "1e-6")],
        };
        let tol = match self {
            ScenarioKind::Inversion | ScenarioKind::Inequality | ScenarioKind::Cone => "1e-10",
            ScenarioKind::Combined => "1e-9",
            ScenarioKind::Naimark => "1e-8",
            _ => "1e-10",
        };
        out.extend(seeded(tol));
        out
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Validation(format!("unknown scenario kind {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamType {
    Group,
    Count,
    Seed,
    Real,
    Bundle,
    Example,
}

#[derive(Clone, Debug, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    #[serde(rename = "type")]
    pub ty: ParamType,
    pub default: &'static str,
}

/// A scenario file: the kind plus its parameters at top level.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub kind: Option<ScenarioKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub example: Option<String>,
}

pub const MAX_TRIALS: usize = 10_000;
pub const MAX_DIM: usize = 8;
pub const MAX_WINDOW: i64 = 200;
/// Largest group order for the exhaustive subset grid.
pub const MAX_COMBINED_ORDER: usize = 10;
/// Largest `|G| d` for the dilation-based kinds.
pub const MAX_GRAM_BLOCK: usize = 128;

/// The world selected for the inequality and cone kinds.
#[derive(Clone, Debug)]
pub enum WorldChoice {
    Shift,
    Regular(FiniteAbelianGroup, usize),
}

/// A scenario with every parameter resolved and checked.
#[derive(Clone, Debug)]
pub struct Validated {
    pub id: String,
    pub kind: ScenarioKind,
    pub seed: u64,
    pub trials: usize,
    pub tol: f64,
    pub eps: f64,
    pub group: Option<FiniteAbelianGroup>,
    pub dim: usize,
    pub bundle: Option<(String, FellBundle)>,
    pub window: i64,
    pub example: String,
}

impl Validated {
    pub fn world(&self) -> WorldChoice {
        match &self.group {
            Some(g) => WorldChoice::Regular(g.clone(), self.dim),
            None => WorldChoice::Shift,
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

/// A built-in fixture name or a path to a fixture file.
pub fn resolve_bundle(id: &str) -> Result<(String, FellBundle)> {
    if let Some(b) = fell_bundle::fixture(id) {
        return Ok((id.to_string(), b));
    }
    let path = Path::new(id);
    if path.is_file() {
        return load_bundle_fixture(path);
    }
    Err(invalid(format!("unknown bundle fixture {id:?}")))
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| invalid(format!("scenario: {e}")))
    }

    fn present(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        let mut add = |name, set: bool| {
            if set {
                v.push(name)
            }
        };
        add("group", self.group.is_some());
        add("dim", self.dim.is_some());
        add("bundle", self.bundle.is_some());
        add("trials", self.trials.is_some());
        add("seed", self.seed.is_some());
        add("tol", self.tol.is_some());
        add("eps", self.eps.is_some());
        add("window", self.window.is_some());
        add("example", self.example.is_some());
        v
    }

    pub fn validate(&self) -> Result<Validated> {
        let kind = self.kind.ok_or_else(|| invalid("missing scenario kind"))?;
        let schema = kind.schema();
        for name in self.present() {
            if !schema.iter().any(|p| p.name == name) {
                return Err(invalid(format!("parameter {name:?} is not accepted by kind {kind}")));
            }
        }
        let default_of = |name: &str| schema.iter().find(|p| p.name == name).map(|p| p.default);

        let trials = self.trials.unwrap_or(10);
        if trials > MAX_TRIALS {
            return Err(invalid(format!("trials = {trials} exceeds {MAX_TRIALS}")));
        }
        let dim = self.dim.or_else(|| default_of("dim").and_then(|d| d.parse().ok())).unwrap_or(1);
        if dim == 0 || dim > MAX_DIM {
            return Err(invalid(format!("dim = {dim} must lie in 1..={MAX_DIM}")));
        }
        let eps = self.eps.unwrap_or(match kind {
            ScenarioKind::Cone => 1e-6,
            _ => 1e-4,
        });
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(invalid(format!("eps = {eps} must be positive")));
        }
        let tol = match (self.tol, default_of("tol")) {
            (Some(t), _) => t,
            (None, Some("eps")) => eps,
            (None, Some(d)) => d.parse().unwrap_or(1e-10),
            (None, None) => 1e-10,
        };
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(invalid(format!("tol = {tol} must be a nonnegative real")));
        }
        let window = self.window.unwrap_or(20);
        if !(0..=MAX_WINDOW).contains(&window) {
            return Err(invalid(format!("window = {window} must lie in 0..={MAX_WINDOW}")));
        }

        let group_text = self.group.clone().or_else(|| match kind {
            ScenarioKind::Inversion | ScenarioKind::Naimark => Some(String::from("5")),
            ScenarioKind::Combined => Some(String::from("4")),
            _ => None,
        });
        let group = match group_text {
            Some(text) => Some(text.parse::<FiniteAbelianGroup>().map_err(|e| invalid(format!("group {text:?}: {e}")))?),
            None => None,
        };
        if let Some(g) = &group {
            if g.order() * dim > MAX_GRAM_BLOCK {
                return Err(invalid(format!("|G| dim = {} exceeds {MAX_GRAM_BLOCK}", g.order() * dim)));
            }
            if kind == ScenarioKind::Combined && g.order() > MAX_COMBINED_ORDER {
                return Err(invalid(format!("combined grid needs |G| <= {MAX_COMBINED_ORDER}, got {}", g.order())));
            }
        }

        let bundle = match kind {
            ScenarioKind::MainTheorem | ScenarioKind::Alpha => {
                Some(resolve_bundle(self.bundle.as_deref().unwrap_or("m2z2"))?)
            }
            _ => None,
        };
        let example = self.example.clone().unwrap_or_else(|| String::from("basis-over-n"));
        if kind == ScenarioKind::Unconditional && !BUILTIN_NAMES.contains(&example.as_str()) {
            return Err(invalid(format!("unknown example {example:?}; expected one of {BUILTIN_NAMES:?}")));
        }

        Ok(Validated {
            id: self.id.clone().unwrap_or_else(|| kind.name().to_string()),
            kind,
            seed: self.seed.unwrap_or(0),
            trials,
            tol,
            eps,
            group,
            dim,
            bundle,
            window,
            example,
        })
    }
}
