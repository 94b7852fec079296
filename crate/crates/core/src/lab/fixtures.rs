use std::path::Path;

use serde::Serialize;

use super::scenario::{ParamSpec, ScenarioKind};
use crate::fell_bundle;
use crate::io::load_bundle_fixture;
use crate::ucond::instances;

#[derive(Clone, Debug, Serialize)]
pub struct BundleEntry {
    pub name: String,
    pub source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceEntry {
    pub name: &'static str,
    pub description: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct KindEntry {
    pub kind: &'static str,
    pub description: &'static str,
    pub params: Vec<ParamSpec>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FixtureListing {
    pub bundles: Vec<BundleEntry>,
    pub instances: Vec<InstanceEntry>,
    pub kinds: Vec<KindEntry>,
}

impl FixtureListing {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("listing serializes")
    }
}

/// Built-in fixtures plus every `*.json` bundle file in `dir`. Files that
/// fail to load are listed with a warning.
pub fn list_fixtures(dir: Option<&Path>) -> FixtureListing {
    let mut bundles: Vec<BundleEntry> = fell_bundle::FIXTURE_NAMES
        .iter()
        .filter_map(|&n| fell_bundle::fixture(n).map(|b| (n, b)))
        .map(|(n, b)| BundleEntry {
            name: n.to_string(),
            source: String::from("builtin"),
            group: Some(b.group().factors().to_vec()),
            total_dim: Some(b.total_dim()),
            warning: None,
        })
        .collect();
    if let Some(dir) = dir {
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .into_iter()
            .flatten()
            .flatten()
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        for path in paths {
            let source = path.display().to_string();
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            bundles.push(match load_bundle_fixture(&path) {
                Ok((name, b)) => BundleEntry {
                    name,
                    source,
                    group: Some(b.group().factors().to_vec()),
                    total_dim: Some(b.total_dim()),
                    warning: None,
                },
                Err(e) => BundleEntry { name: stem, source, group: None, total_dim: None, warning: Some(e.to_string()) },
            });
        }
    }
    let instances = instances::BUILTIN_NAMES
        .iter()
        .map(|&name| InstanceEntry { name, description: instances::builtin_description(name).unwrap_or("") })
        .collect();
    let kinds = ScenarioKind::ALL
        .iter()
        .map(|k| KindEntry { kind: k.name(), description: k.description(), params: k.schema() })
        .collect();
    FixtureListing { bundles, instances, kinds }
}
