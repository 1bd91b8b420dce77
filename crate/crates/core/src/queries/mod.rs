//! The fifteen graph queries, grouped by category.

mod centrality;
mod clustering;
mod counting;
mod paths;

pub use centrality::{eigenvector_centrality, EigenvectorResult};
pub use clustering::{assortativity, average_clustering, global_clustering, local_clustering, triangle_counts};
pub use counting::{average_degree, degree_distribution, degree_variance};
pub use paths::{path_statistics, PathStats, EXACT_PATH_LIMIT, SAMPLED_SOURCES};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::community::{louvain, modularity};
use crate::{Error, Graph, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QueryId {
    Q1,
    Q2,
    Q3,
    Q4,
    Q5,
    Q6,
    Q7,
    Q8,
    Q9,
    Q10,
    Q11,
    Q12,
    Q13,
    Q14,
    Q15,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryCategory {
    Counting,
    Degree,
    Path,
    Topology,
    Centrality,
}

impl QueryId {
    pub const ALL: [QueryId; 15] = [
        QueryId::Q1,
        QueryId::Q2,
        QueryId::Q3,
        QueryId::Q4,
        QueryId::Q5,
        QueryId::Q6,
        QueryId::Q7,
        QueryId::Q8,
        QueryId::Q9,
        QueryId::Q10,
        QueryId::Q11,
        QueryId::Q12,
        QueryId::Q13,
        QueryId::Q14,
        QueryId::Q15,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn code(self) -> &'static str {
        ["Q1", "Q2", "Q3", "Q4", "Q5", "Q6", "Q7", "Q8", "Q9", "Q10", "Q11", "Q12", "Q13", "Q14", "Q15"][self.index()]
    }

    /// Long name accepted on the command line.
    pub fn name(self) -> &'static str {
        [
            "nodes",
            "edges",
            "triangles",
            "avg_degree",
            "degree_variance",
            "degree_distribution",
            "diameter",
            "avg_path",
            "distance_distribution",
            "gcc",
            "acc",
            "community",
            "modularity",
            "assortativity",
            "evc",
        ][self.index()]
    }

    pub fn category(self) -> QueryCategory {
        match self.index() {
            0..=2 => QueryCategory::Counting,
            3..=5 => QueryCategory::Degree,
            6..=8 => QueryCategory::Path,
            9..=13 => QueryCategory::Topology,
            _ => QueryCategory::Centrality,
        }
    }

    /// Whether evaluation depends on a seed (community detection only).
    pub fn is_seeded(self) -> bool {
        matches!(self, QueryId::Q12 | QueryId::Q13)
    }
}

impl fmt::Display for QueryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for QueryId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        QueryId::ALL
            .into_iter()
            .find(|q| q.code().eq_ignore_ascii_case(&lower) || q.name() == lower)
            .ok_or_else(|| Error::Config(format!("unknown query {s:?}")))
    }
}

/// The result of one query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum QueryValue {
    Scalar(f64),
    /// Probabilities indexed by degree or distance; sums to one.
    Distribution(Vec<f64>),
    /// Community label per node, contiguous from zero.
    Partition(Vec<usize>),
    /// One score per node.
    NodeScores(Vec<f64>),
}

impl QueryValue {
    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            QueryValue::Scalar(x) => Some(*x),
            _ => None,
        }
    }
}

/// A query value plus notes such as "approximate" or "not converged".
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: QueryValue,
    pub warnings: Vec<String>,
}

impl Evaluation {
    fn exact(value: QueryValue) -> Self {
        Evaluation {
            value,
            warnings: Vec::new(),
        }
    }
}

fn undefined(query: &'static str, reason: &str) -> Error {
    Error::QueryUndefined {
        query,
        reason: reason.into(),
    }
}

/// Evaluates one query. `seed` drives community detection (Q12, and Q13
/// which scores the detected partition).
pub fn evaluate(q: QueryId, g: &Graph, seed: u64) -> Result<Evaluation> {
    let scalar = |x: f64| Ok(Evaluation::exact(QueryValue::Scalar(x)));
    match q {
        QueryId::Q1 => scalar(g.n() as f64),
        QueryId::Q2 => scalar(g.m() as f64),
        QueryId::Q3 => scalar(triangle_counts(g).1 as f64),
        QueryId::Q4 => scalar(average_degree(g)?),
        QueryId::Q5 => scalar(degree_variance(g)?),
        QueryId::Q6 => Ok(Evaluation::exact(QueryValue::Distribution(degree_distribution(g)?))),
        QueryId::Q7 | QueryId::Q8 | QueryId::Q9 => {
            let stats = path_statistics(g)?;
            let warnings = if stats.exact {
                Vec::new()
            } else {
                vec![format!("approximate: {} sampled BFS sources", stats.sources)]
            };
            let value = match q {
                QueryId::Q7 => QueryValue::Scalar(stats.diameter as f64),
                QueryId::Q8 => QueryValue::Scalar(stats.avg_path),
                _ => QueryValue::Distribution(stats.distribution),
            };
            Ok(Evaluation { value, warnings })
        }
        QueryId::Q10 => scalar(global_clustering(g)?),
        QueryId::Q11 => {
            if g.n() == 0 {
                return Err(undefined("acc", "graph has no nodes"));
            }
            scalar(average_clustering(g))
        }
        QueryId::Q12 => Ok(Evaluation::exact(QueryValue::Partition(community_detection(g, seed)))),
        QueryId::Q13 => scalar(modularity(g, &community_detection(g, seed))?),
        QueryId::Q14 => scalar(assortativity(g)?),
        QueryId::Q15 => {
            let r = eigenvector_centrality(g)?;
            let warnings = if r.converged {
                Vec::new()
            } else {
                vec![format!("power iteration stopped after {} iterations", r.iterations)]
            };
            Ok(Evaluation {
                value: QueryValue::NodeScores(r.scores),
                warnings,
            })
        }
    }
}

/// Louvain partition; an edgeless graph yields singletons.
pub fn community_detection(g: &Graph, seed: u64) -> Vec<usize> {
    louvain(g, seed)
}
