//! Dataset descriptors, manifests, and builtin synthetic graphs.

use std::fmt;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{generate_ba, generate_er, load_edge_list, planted_cliques, Graph};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphType {
    Social,
    Web,
    Academic,
    Traffic,
    Financial,
    Technology,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatasetSource {
    Path(PathBuf),
    Builtin(String),
}

impl DatasetSource {
    pub fn parse(s: &str) -> Self {
        match s.strip_prefix("builtin:") {
            Some(tag) => DatasetSource::Builtin(tag.to_string()),
            None => DatasetSource::Path(PathBuf::from(s)),
        }
    }
}

impl fmt::Display for DatasetSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetSource::Path(p) => write!(f, "{}", p.display()),
            DatasetSource::Builtin(t) => write!(f, "builtin:{t}"),
        }
    }
}

impl Serialize for DatasetSource {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DatasetSource {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(DatasetSource::parse(&s))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetDescriptor {
    pub name: String,
    pub source: DatasetSource,
    #[serde(default)]
    pub expected_n: Option<u64>,
    #[serde(default)]
    pub expected_m: Option<u64>,
    /// Expected counts are rounded in the literature; check within 2%.
    #[serde(default)]
    pub approximate: bool,
    #[serde(rename = "type")]
    pub type_tag: GraphType,
    /// Seed for builtin generators.
    #[serde(default = "default_builtin_seed")]
    pub seed: u64,
}

fn default_builtin_seed() -> u64 {
    1
}

impl DatasetDescriptor {
    pub fn builtin(tag: &str) -> Result<Self> {
        let (n, m) = builtin_size(tag)
            .ok_or_else(|| Error::Config(format!("unknown builtin dataset {tag:?}")))?;
        Ok(DatasetDescriptor {
            name: tag.to_string(),
            source: DatasetSource::Builtin(tag.to_string()),
            expected_n: Some(n),
            expected_m: m,
            approximate: false,
            type_tag: GraphType::Synthetic,
            seed: default_builtin_seed(),
        })
    }

    /// Loads the graph, resolving relative paths against `base`, and checks
    /// the expected node and edge counts.
    pub fn load(&self, base: Option<&Path>) -> Result<Graph> {
        let g = match &self.source {
            DatasetSource::Builtin(tag) => builtin_graph(tag, self.seed)?,
            DatasetSource::Path(p) => {
                let p = match base {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p.clone(),
                };
                load_edge_list(p)?
            }
        };
        self.check(&g)?;
        Ok(g)
    }

    pub fn check(&self, g: &Graph) -> Result<()> {
        let tol = if self.approximate { 0.02 } else { 0.0 };
        let ok = |expected: Option<u64>, got: usize| match expected {
            None => true,
            Some(e) => (got as f64 - e as f64).abs() <= tol * e as f64,
        };
        if !ok(self.expected_n, g.n()) || !ok(self.expected_m, g.m()) {
            return Err(Error::Config(format!(
                "dataset {}: expected n={:?} m={:?}, loaded n={} m={}",
                self.name,
                self.expected_n,
                self.expected_m,
                g.n(),
                g.m()
            )));
        }
        Ok(())
    }
}

/// A list of datasets, stored as TOML `[[dataset]]` tables.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DatasetManifest {
    #[serde(default, rename = "dataset")]
    pub datasets: Vec<DatasetDescriptor>,
}

impl DatasetManifest {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }
}

/// Builtin tags and their sizes. `m` is `None` when it depends on the seed.
fn builtin_size(tag: &str) -> Option<(u64, Option<u64>)> {
    match tag {
        "er10k" => Some((10_000, None)),
        "ba10k" => Some((10_000, Some(49_975))),
        "twoclique" => Some((300, Some(2 * 11_175 + 1))),
        "ba300" => Some((300, Some(5 * 295))),
        _ => None,
    }
}

pub const BUILTIN_TAGS: [&str; 4] = ["er10k", "ba10k", "twoclique", "ba300"];

/// Generates a builtin dataset.
///
/// * `er10k`: `G(n, p)` with n = 10 000 and expected 250 278 edges
/// * `ba10k`: preferential attachment, n = 10 000, 5 edges per node
/// * `twoclique`: two 150-cliques joined by one edge
/// * `ba300`: preferential attachment, n = 300, 5 edges per node
pub fn builtin_graph(tag: &str, seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match tag {
        "er10k" => generate_er(10_000, 250_278, &mut rng),
        "ba10k" => generate_ba(10_000, 5, &mut rng),
        "twoclique" => Ok(planted_cliques(2, 150, 1)),
        "ba300" => generate_ba(300, 5, &mut rng),
        _ => Err(Error::Config(format!(
            "unknown builtin dataset {tag:?} (known: {})",
            BUILTIN_TAGS.join(", ")
        ))),
    }
}
