//! Error metrics comparing a query on the true graph with the same query
//! on a synthetic graph.

mod distribution;
mod partition;
mod vector;

pub use distribution::{hellinger, kl_divergence, ks_statistic, KL_SMOOTHING};
pub use partition::{partition_scores, PartitionScores};
pub use vector::{
    mae, mean_relative_error, mse, padded_alignment, relative_error, sorted_alignment, RE_GUARD,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::queries::{QueryId, QueryValue};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetricId {
    #[serde(rename = "RE")]
    Re,
    #[serde(rename = "MRE")]
    Mre,
    #[serde(rename = "KL")]
    Kl,
    #[serde(rename = "HD")]
    Hd,
    #[serde(rename = "KS")]
    Ks,
    #[serde(rename = "Avg-F1")]
    AvgF1,
    #[serde(rename = "MAE")]
    Mae,
    #[serde(rename = "MSE")]
    Mse,
    #[serde(rename = "ARI")]
    Ari,
    #[serde(rename = "AMI")]
    Ami,
    #[serde(rename = "NMI")]
    Nmi,
}

impl MetricId {
    pub const ALL: [MetricId; 11] = [
        MetricId::Re,
        MetricId::Mre,
        MetricId::Kl,
        MetricId::Hd,
        MetricId::Ks,
        MetricId::AvgF1,
        MetricId::Mae,
        MetricId::Mse,
        MetricId::Ari,
        MetricId::Ami,
        MetricId::Nmi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricId::Re => "RE",
            MetricId::Mre => "MRE",
            MetricId::Kl => "KL",
            MetricId::Hd => "HD",
            MetricId::Ks => "KS",
            MetricId::AvgF1 => "Avg-F1",
            MetricId::Mae => "MAE",
            MetricId::Mse => "MSE",
            MetricId::Ari => "ARI",
            MetricId::Ami => "AMI",
            MetricId::Nmi => "NMI",
        }
    }

    /// Agreement scores are better when larger; errors when smaller.
    pub fn higher_is_better(self) -> bool {
        matches!(self, MetricId::Nmi | MetricId::Ari | MetricId::Ami | MetricId::AvgF1)
    }

    /// Value attained when the two inputs are identical.
    pub fn ideal(self) -> f64 {
        if self.higher_is_better() {
            1.0
        } else {
            0.0
        }
    }

    /// Whether `v` lies in the metric's range.
    pub fn in_range(self, v: f64) -> bool {
        match self {
            MetricId::Hd | MetricId::Ks | MetricId::Nmi | MetricId::Ami | MetricId::AvgF1 => {
                (0.0..=1.0).contains(&v)
            }
            MetricId::Ari => v <= 1.0,
            _ => v >= 0.0,
        }
    }

    /// Metric used to rank algorithms on `q`.
    pub fn primary_for(q: QueryId) -> MetricId {
        match q {
            QueryId::Q6 | QueryId::Q9 => MetricId::Kl,
            QueryId::Q12 => MetricId::Nmi,
            QueryId::Q15 => MetricId::Mae,
            _ => MetricId::Re,
        }
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = |x: &str| x.to_ascii_uppercase().replace('-', "");
        MetricId::ALL
            .into_iter()
            .find(|m| norm(m.name()) == norm(s))
            .ok_or_else(|| Error::Config(format!("unknown metric {s:?}")))
    }
}

/// Options that change how metrics are computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricOptions {
    /// Use per-entry relative error in MRE instead of absolute differences.
    #[serde(default)]
    pub mre_relative: bool,
}

/// One metric value with any flags raised while computing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Score {
    pub metric: MetricId,
    pub value: f64,
    pub flags: Vec<String>,
}

impl Score {
    fn new(metric: MetricId, value: f64) -> Self {
        Score {
            metric,
            value,
            flags: Vec::new(),
        }
    }

    fn flagged(mut self, cond: bool, flag: &str) -> Self {
        if cond {
            self.flags.push(flag.to_string());
        }
        self
    }
}

/// Scores `q` on the pair (true, synthetic). The first entry is the
/// primary metric; the rest are supplementary. `per_node` optionally
/// carries node-level values (triangles for Q3, local clustering for Q11)
/// for the MRE column.
pub fn score(
    q: QueryId,
    true_v: &QueryValue,
    syn_v: &QueryValue,
    per_node: Option<(&[f64], &[f64])>,
    opts: MetricOptions,
) -> Result<Vec<Score>> {
    let mismatch = || Error::InvalidArgument(format!("{q}: true and synthetic values have different kinds"));
    let mut out = match (true_v, syn_v) {
        (QueryValue::Scalar(t), QueryValue::Scalar(s)) => {
            let (v, guarded) = relative_error(*t, *s);
            vec![Score::new(MetricId::Re, v).flagged(guarded, "degenerate-denominator")]
        }
        (QueryValue::Distribution(p), QueryValue::Distribution(r)) => vec![
            Score::new(MetricId::Kl, kl_divergence(p, r)),
            Score::new(MetricId::Hd, hellinger(p, r)),
            Score::new(MetricId::Ks, ks_statistic(p, r)),
        ],
        (QueryValue::Partition(a), QueryValue::Partition(b)) => {
            let s = partition_scores(a, b);
            let f = |m, v| Score::new(m, v).flagged(s.truncated, "node-set-mismatch");
            vec![
                f(MetricId::Nmi, s.nmi),
                f(MetricId::Ari, s.ari),
                f(MetricId::Ami, s.ami),
                f(MetricId::AvgF1, s.avg_f1),
            ]
        }
        (QueryValue::NodeScores(a), QueryValue::NodeScores(b)) => {
            let (a, b, padded) = sorted_alignment(a, b);
            if a.is_empty() {
                vec![Score::new(MetricId::Mae, 0.0), Score::new(MetricId::Mse, 0.0)]
            } else {
                vec![
                    Score::new(MetricId::Mae, mae(&a, &b)?).flagged(padded, "zero-padded"),
                    Score::new(MetricId::Mse, mse(&a, &b)?).flagged(padded, "zero-padded"),
                ]
            }
        }
        _ => return Err(mismatch()),
    };
    if let Some((t, s)) = per_node {
        let (t, s, padded) = padded_alignment(t, s);
        if !t.is_empty() {
            out.push(
                Score::new(MetricId::Mre, mean_relative_error(&t, &s, opts.mre_relative)?)
                    .flagged(padded, "zero-padded"),
            );
        }
    }
    debug_assert_eq!(out[0].metric, MetricId::primary_for(q));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eleven_metrics_with_table_names() {
        assert_eq!(MetricId::ALL.len(), 11);
        for m in MetricId::ALL {
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.name()));
            assert_eq!(m.name().parse::<MetricId>().unwrap(), m);
            assert!(m.in_range(m.ideal()));
        }
        assert_eq!("avgf1".parse::<MetricId>().unwrap(), MetricId::AvgF1);
    }

    #[test]
    fn default_map() {
        use QueryId::*;
        for q in [Q1, Q2, Q3, Q4, Q5, Q7, Q8, Q10, Q11, Q13, Q14] {
            assert_eq!(MetricId::primary_for(q), MetricId::Re);
        }
        assert_eq!(MetricId::primary_for(Q6), MetricId::Kl);
        assert_eq!(MetricId::primary_for(Q9), MetricId::Kl);
        assert_eq!(MetricId::primary_for(Q12), MetricId::Nmi);
        assert_eq!(MetricId::primary_for(Q15), MetricId::Mae);
    }

    #[test]
    fn score_of_self_is_ideal() {
        let values = [
            (QueryId::Q1, QueryValue::Scalar(7.0)),
            (QueryId::Q6, QueryValue::Distribution(vec![0.2, 0.8])),
            (QueryId::Q12, QueryValue::Partition(vec![0, 1, 1, 2])),
            (QueryId::Q15, QueryValue::NodeScores(vec![0.6, 0.8])),
        ];
        for (q, v) in values {
            let tri = [1.0, 2.0];
            for s in score(q, &v, &v, Some((&tri, &tri)), MetricOptions::default()).unwrap() {
                assert!((s.value - s.metric.ideal()).abs() < 1e-7, "{q} {}", s.metric);
            }
        }
    }

    #[test]
    fn kind_mismatch_is_an_error() {
        let r = score(
            QueryId::Q1,
            &QueryValue::Scalar(1.0),
            &QueryValue::Distribution(vec![1.0]),
            None,
            MetricOptions::default(),
        );
        assert!(r.is_err());
    }
}
