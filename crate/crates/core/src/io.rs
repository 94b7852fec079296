//! JSON formats: complex matrices, bundle fixtures and operator fields.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fell_bundle::FellBundle;
use crate::group::{FiniteAbelianGroup, GroupElement, OperatorField};
use crate::linalg::CMat;

/// Row-major complex matrix: rows of `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMat) -> MatrixJson {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<CMat> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::Validation(String::from("ragged matrix rows")));
    }
    if rows.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Validation(String::from("non-finite matrix entry")));
    }
    Ok(CMat::from_fn(r, c, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

/// Coordinates written `"a,b,..."`.
pub fn element_key(e: &GroupElement) -> String {
    e.0.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

fn parse_key(group: &FiniteAbelianGroup, key: &str) -> Result<usize> {
    let coords: std::result::Result<Vec<u32>, _> = key.split(',').map(|s| s.trim().parse::<u32>()).collect();
    let coords = coords.map_err(|_| Error::Validation(format!("bad element key {key:?}")))?;
    group
        .index_of(&GroupElement(coords))
        .map_err(|_| Error::Validation(format!("element key {key:?} does not fit factors {:?}", group.factors())))
}

/// A bundle fixture file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleFixture {
    pub name: String,
    pub group: Vec<u32>,
    pub ambient_dim: usize,
    /// Spanning matrices of each fiber keyed by element coordinates; missing
    /// keys are zero fibers.
    pub fibers: BTreeMap<String, Vec<MatrixJson>>,
}

impl BundleFixture {
    pub fn from_bundle(name: &str, b: &FellBundle) -> Self {
        let g = b.group();
        let fibers = (0..g.order())
            .map(|t| (element_key(&g.element(t)), b.fiber_basis(t).iter().map(matrix_to_json).collect()))
            .collect();
        BundleFixture { name: name.to_string(), group: g.factors().to_vec(), ambient_dim: b.ambient_dim(), fibers }
    }

    /// Builds the bundle and checks the grading axioms.
    pub fn to_bundle(&self) -> Result<FellBundle> {
        let group = FiniteAbelianGroup::new(self.group.clone()).map_err(|e| Error::Validation(e.to_string()))?;
        let mut spans = vec![Vec::new(); group.order()];
        for (key, mats) in &self.fibers {
            let t = parse_key(&group, key)?;
            spans[t] = mats.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
        }
        let b = FellBundle::new(group, self.ambient_dim, spans).map_err(|e| Error::Validation(e.to_string()))?;
        b.validate().map_err(|e| Error::Validation(e.to_string()))?;
        Ok(b)
    }
}

pub fn load_bundle_fixture(path: &Path) -> Result<(String, FellBundle)> {
    let text = std::fs::read_to_string(path)?;
    let fixture: BundleFixture = serde_json::from_str(&text).map_err(|e| Error::Validation(e.to_string()))?;
    let b = fixture.to_bundle()?;
    Ok((fixture.name, b))
}

/// An operator-valued function on a finite abelian group.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFieldJson {
    pub group: Vec<u32>,
    pub dim: usize,
    pub values: BTreeMap<String, MatrixJson>,
}

impl OperatorFieldJson {
    pub fn from_field(f: &OperatorField) -> Self {
        let g = f.group();
        let values = (0..g.order()).map(|t| (element_key(&g.element(t)), matrix_to_json(f.get(t)))).collect();
        OperatorFieldJson { group: g.factors().to_vec(), dim: f.dim(), values }
    }

    pub fn to_field(&self) -> Result<OperatorField> {
        let group = FiniteAbelianGroup::new(self.group.clone()).map_err(|e| Error::Validation(e.to_string()))?;
        let mut values = vec![crate::linalg::zeros(self.dim, self.dim); group.order()];
        for (key, m) in &self.values {
            values[parse_key(&group, key)?] = matrix_from_json(m)?;
        }
        OperatorField::new(group, self.dim, values)
    }
}
