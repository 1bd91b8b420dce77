//! TOML run configuration for benchmark sweeps.
//!
//! ```toml
//! [grid]
//! algorithms = ["DP-dK", "TmF", "PrivGraph"]
//! epsilons = [0.1, 1, 10]
//! queries = ["Q1", "triangles", "acc"]
//! repetitions = 3
//! root_seed = 7
//!
//! [[dataset]]
//! name = "twoclique"
//! source = "builtin:twoclique"
//! type = "synthetic"
//!
//! [run]
//! workers = 4
//! out_dir = "results/toy"
//!
//! [synth.tmf]
//! edge_count_fraction = 0.2
//! ```

use std::collections::HashSet;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};

use crate::graph::{DatasetDescriptor, DatasetManifest, DatasetSource};
use crate::metrics::MetricOptions;
use crate::queries::QueryId;
use crate::synth::{Algorithm, DpdkMode, NoiseMode, SynthConfig};
use crate::{Error, Result};

pub const DEFAULT_EPSILONS: [f64; 6] = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0];
pub const DEFAULT_DELTA: f64 = 0.01;
pub const DEFAULT_REPETITIONS: u32 = 10;

fn parse_list<'de, D, T>(d: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: FromStr,
    T::Err: Display,
{
    Vec::<String>::deserialize(d)?
        .iter()
        .map(|s| s.parse().map_err(serde::de::Error::custom))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    #[serde(deserialize_with = "parse_list")]
    pub algorithms: Vec<Algorithm>,
    pub epsilons: Vec<f64>,
    pub delta: f64,
    #[serde(deserialize_with = "parse_list")]
    pub queries: Vec<QueryId>,
    pub repetitions: u32,
    pub root_seed: u64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            algorithms: Algorithm::ALL.to_vec(),
            epsilons: DEFAULT_EPSILONS.to_vec(),
            delta: DEFAULT_DELTA,
            queries: QueryId::ALL.to_vec(),
            repetitions: DEFAULT_REPETITIONS,
            root_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub workers: usize,
    /// Report directory; when unset the caller picks a default.
    pub out_dir: Option<PathBuf>,
    pub log_level: String,
    /// Credit only one algorithm per query on ties (the first in grid order).
    pub strict_ties: bool,
    /// Extra datasets listed in a separate manifest file.
    pub manifest: Option<PathBuf>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            out_dir: None,
            log_level: "info".into(),
            strict_ties: false,
            manifest: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSection,
    #[serde(rename = "dataset")]
    pub datasets: Vec<DatasetDescriptor>,
    pub run: RunSection,
    pub metrics: MetricOptions,
    pub synth: SynthConfig,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads the file, pulls in the dataset manifest if one is named, and
    /// resolves relative paths against the file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        if let Some(m) = cfg.run.manifest.clone() {
            let manifest = DatasetManifest::from_file(cfg.resolve(&m))?;
            cfg.datasets.extend(manifest.datasets);
        }
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(b) if p.is_relative() => b.join(p),
            _ => p.to_path_buf(),
        }
    }

    /// Whether some selected algorithm needs `δ > 0`.
    fn needs_delta(&self) -> Vec<Algorithm> {
        self.grid
            .algorithms
            .iter()
            .copied()
            .filter(|a| match a {
                Algorithm::PrivSkg => true,
                Algorithm::DpDk => self.synth.dpdk.mode == DpdkMode::Dk2 && self.synth.dpdk.noise == NoiseMode::Smooth,
                _ => false,
            })
            .collect()
    }

    /// Every problem with the configuration, one line each.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let g = &self.grid;
        if g.algorithms.is_empty() {
            out.push("grid.algorithms is empty".into());
        }
        if g.queries.is_empty() {
            out.push("grid.queries is empty".into());
        }
        if g.epsilons.is_empty() {
            out.push("grid.epsilons is empty".into());
        }
        for &e in &g.epsilons {
            if !(e > 0.0 && e.is_finite()) {
                out.push(format!("grid.epsilons: {e} is not a positive finite number"));
            }
        }
        if !(0.0..1.0).contains(&g.delta) {
            out.push(format!("grid.delta {} outside [0, 1)", g.delta));
        }
        let needs = self.needs_delta();
        if g.delta == 0.0 && !needs.is_empty() {
            let names: Vec<_> = needs.iter().map(|a| a.name()).collect();
            out.push(format!("grid.delta must be positive for {}", names.join(", ")));
        }
        if g.repetitions == 0 {
            out.push("grid.repetitions must be positive".into());
        }
        if self.run.workers == 0 {
            out.push("run.workers must be positive".into());
        }
        if self.datasets.is_empty() {
            out.push("no [[dataset]] entries".into());
        }
        let mut names = HashSet::new();
        for d in &self.datasets {
            if !names.insert(d.name.as_str()) {
                out.push(format!("dataset name {:?} appears twice", d.name));
            }
            match &d.source {
                DatasetSource::Builtin(tag) => {
                    if !crate::graph::BUILTIN_TAGS.contains(&tag.as_str()) {
                        out.push(format!("dataset {}: unknown builtin {tag:?}", d.name));
                    }
                }
                DatasetSource::Path(p) => {
                    let p = self.resolve(p);
                    if !p.is_file() {
                        out.push(format!("dataset {}: file {} not found", d.name, p.display()));
                    }
                }
            }
        }
        out.extend(self.synth.problems());
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("\n")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_the_grid() {
        let cfg = RunConfig::from_toml(
            r#"
            [[dataset]]
            name = "ba"
            source = "builtin:ba300"
            type = "synthetic"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.grid.epsilons, DEFAULT_EPSILONS);
        assert_eq!(cfg.grid.repetitions, 10);
        assert_eq!(cfg.grid.delta, 0.01);
        assert_eq!(cfg.grid.algorithms.len(), 6);
        assert_eq!(cfg.grid.queries.len(), 15);
        cfg.validate().unwrap();
    }

    #[test]
    fn names_and_codes_are_accepted() {
        let cfg = RunConfig::from_toml(
            r#"
            [grid]
            algorithms = ["dpdk", "PrivGraph", "tmf"]
            queries = ["Q3", "acc", "EVC"]

            [synth.tmf]
            edge_count_fraction = 0.25
            "#,
        )
        .unwrap();
        assert_eq!(cfg.grid.algorithms, vec![Algorithm::DpDk, Algorithm::PrivGraph, Algorithm::TmF]);
        assert_eq!(cfg.grid.queries, vec![QueryId::Q3, QueryId::Q11, QueryId::Q15]);
        assert_eq!(cfg.synth.tmf.edge_count_fraction, 0.25);
    }

    #[test]
    fn unknown_names_fail_to_parse() {
        assert!(RunConfig::from_toml("[grid]\nalgorithms = [\"DER\"]").is_err());
        assert!(RunConfig::from_toml("[grid]\nqueries = [\"Q16\"]").is_err());
        assert!(RunConfig::from_toml("[grid]\nepsilon = [1.0]").is_err());
    }

    #[test]
    fn all_problems_are_listed_together() {
        let cfg = RunConfig::from_toml(
            r#"
            [grid]
            epsilons = [0.0, -1.0, 1.0]
            delta = 0.0
            repetitions = 0

            [[dataset]]
            name = "a"
            source = "builtin:nope"
            type = "synthetic"

            [[dataset]]
            name = "a"
            source = "/definitely/missing.txt"
            type = "social"

            [synth.privhrg]
            dendrogram_fraction = 1.5
            "#,
        )
        .unwrap();
        let problems = cfg.problems();
        // Two bad epsilons, delta for DP-dK and PrivSKG, repetitions, the
        // builtin, the duplicate name, the missing file, the fraction.
        assert_eq!(problems.len(), 8, "{problems:#?}");
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("repetitions") && err.contains("missing.txt"));
    }

    #[test]
    fn pure_budget_is_fine_without_delta_users() {
        let cfg = RunConfig::from_toml(
            r#"
            [grid]
            algorithms = ["TmF", "DGG"]
            delta = 0.0

            [[dataset]]
            name = "t"
            source = "builtin:twoclique"
            type = "synthetic"
            "#,
        )
        .unwrap();
        cfg.validate().unwrap();
    }
}
