use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::RawRow;
use crate::metrics::MetricId;
use crate::queries::QueryId;
use crate::synth::Algorithm;
use crate::{Error, Result};

/// Means closer than this count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Mean and spread of one metric over repetitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub algorithm: Algorithm,
    pub dataset: String,
    pub epsilon: f64,
    pub query: QueryId,
    pub metric: MetricId,
    pub mean: f64,
    /// Population standard deviation.
    pub sd: f64,
    /// Repetitions with a finite value.
    pub n: usize,
    /// Repetitions whose value was NaN (query undefined on the output).
    pub undefined: usize,
}

type GroupKey = (Algorithm, String, u64, QueryId, MetricId);

/// Groups rows by (algorithm, dataset, ε, query, metric) in order of first
/// appearance and averages the finite values. Groups with no finite value
/// are left out; rows of failed cells carry no query and are skipped.
pub fn aggregate_means(rows: &[RawRow]) -> Vec<AggregateRow> {
    let mut index: HashMap<GroupKey, usize> = HashMap::new();
    let mut groups: Vec<(GroupKey, Vec<f64>)> = Vec::new();
    for r in rows {
        let (Some(q), Some(m)) = (r.query, r.metric) else {
            continue;
        };
        let key = (r.algorithm, r.dataset.clone(), r.epsilon.to_bits(), q, m);
        let i = *index.entry(key.clone()).or_insert_with(|| {
            groups.push((key, Vec::new()));
            groups.len() - 1
        });
        groups[i].1.push(r.value);
    }
    groups
        .into_iter()
        .filter_map(|((algorithm, dataset, eps, query, metric), values)| {
            let finite: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
            if finite.is_empty() {
                return None;
            }
            let n = finite.len();
            let mean = finite.iter().sum::<f64>() / n as f64;
            let sd = (finite.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
            Some(AggregateRow {
                algorithm,
                dataset,
                epsilon: f64::from_bits(eps),
                query,
                metric,
                mean,
                sd,
                n,
                undefined: values.len() - n,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BestCountOptions {
    /// Credit only the first tied algorithm (in grid order), so every
    /// decided query credits exactly one algorithm.
    pub strict: bool,
    /// Fail when some algorithm has no aggregate for a (dataset, ε, query)
    /// instead of leaving it uncredited.
    pub require_complete: bool,
}

/// Which algorithms won one (dataset, ε, query) on its primary metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Credit {
    pub dataset: String,
    pub epsilon: f64,
    pub query: QueryId,
    pub metric: MetricId,
    pub winners: Vec<Algorithm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestCountTable {
    pub algorithms: Vec<Algorithm>,
    pub datasets: Vec<String>,
    pub epsilons: Vec<f64>,
    pub queries: Vec<QueryId>,
    pub credits: Vec<Credit>,
    /// `algorithm/dataset/ε/query` combinations without an aggregate.
    pub missing: Vec<String>,
    pub strict: bool,
}

impl BestCountTable {
    /// `C_A(G, ε)`: queries on which `alg` was best for this graph and ε.
    pub fn graph_count(&self, alg: Algorithm, dataset: &str, epsilon: f64) -> usize {
        self.credits
            .iter()
            .filter(|c| c.dataset == dataset && c.epsilon == epsilon && c.winners.contains(&alg))
            .count()
    }

    /// `C_A(Q)`: (graph, ε) pairs on which `alg` was best for `query`.
    pub fn query_count(&self, alg: Algorithm, query: QueryId) -> usize {
        self.credits
            .iter()
            .filter(|c| c.query == query && c.winners.contains(&alg))
            .count()
    }

    /// Structural checks: row bounds, at least one winner per decided
    /// query, exactly one in strict mode, and winners that really hold the
    /// best mean in the metric's direction.
    pub fn violations(&self, aggs: &[AggregateRow]) -> Vec<String> {
        let mut out = Vec::new();
        let lookup = primary_lookup(aggs);
        for d in &self.datasets {
            for &e in &self.epsilons {
                let mut total = 0;
                for &a in &self.algorithms {
                    let c = self.graph_count(a, d, e);
                    if c > self.queries.len() {
                        out.push(format!("{a} on {d} at ε={e}: count {c} exceeds {} queries", self.queries.len()));
                    }
                    total += c;
                }
                let decided = self
                    .credits
                    .iter()
                    .filter(|c| &c.dataset == d && c.epsilon == e && !c.winners.is_empty())
                    .count();
                if total < decided || (self.strict && total != decided) {
                    out.push(format!("{d} at ε={e}: {total} credits for {decided} decided queries"));
                }
            }
        }
        for c in &self.credits {
            let values: Vec<(Algorithm, f64)> = self
                .algorithms
                .iter()
                .filter_map(|&a| lookup.get(&(a, c.dataset.as_str(), c.epsilon.to_bits(), c.query)).map(|&v| (a, v)))
                .collect();
            let finite = values.iter().any(|(_, v)| v.is_finite());
            if finite && c.winners.is_empty() {
                out.push(format!("{} ε={} {}: nobody credited", c.dataset, c.epsilon, c.query));
            }
            if self.strict && c.winners.len() > 1 {
                out.push(format!("{} ε={} {}: {} winners in strict mode", c.dataset, c.epsilon, c.query, c.winners.len()));
            }
            let better = |x: f64, y: f64| {
                if c.metric.higher_is_better() {
                    x > y + TIE_TOLERANCE
                } else {
                    x < y - TIE_TOLERANCE
                }
            };
            for w in &c.winners {
                let wv = values.iter().find(|(a, _)| a == w).map_or(f64::NAN, |p| p.1);
                if values.iter().any(|&(_, v)| better(v, wv)) || !wv.is_finite() {
                    out.push(format!("{} ε={} {}: {w} credited without the best value", c.dataset, c.epsilon, c.query));
                }
            }
        }
        out
    }
}

type LookupKey<'a> = (Algorithm, &'a str, u64, QueryId);

fn primary_lookup(aggs: &[AggregateRow]) -> HashMap<LookupKey<'_>, f64> {
    aggs.iter()
        .filter(|r| r.metric == MetricId::primary_for(r.query))
        .map(|r| ((r.algorithm, r.dataset.as_str(), r.epsilon.to_bits(), r.query), r.mean))
        .collect()
}

/// Best-count table over the primary metric of each query, with the
/// direction each metric declares.
pub fn best_counts(aggs: &[AggregateRow], algorithms: &[Algorithm], opts: BestCountOptions) -> Result<BestCountTable> {
    best_counts_by(aggs, algorithms, opts, MetricId::higher_is_better)
}

/// [`best_counts`] with the metric direction supplied by the caller.
pub fn best_counts_by(
    aggs: &[AggregateRow],
    algorithms: &[Algorithm],
    opts: BestCountOptions,
    higher_is_better: impl Fn(MetricId) -> bool,
) -> Result<BestCountTable> {
    let mut datasets: Vec<String> = Vec::new();
    let mut epsilons: Vec<f64> = Vec::new();
    let mut queries: Vec<QueryId> = Vec::new();
    for r in aggs {
        if !datasets.contains(&r.dataset) {
            datasets.push(r.dataset.clone());
        }
        if !epsilons.contains(&r.epsilon) {
            epsilons.push(r.epsilon);
        }
        if !queries.contains(&r.query) {
            queries.push(r.query);
        }
    }
    epsilons.sort_by(f64::total_cmp);
    queries.sort();
    let lookup = primary_lookup(aggs);

    let mut credits = Vec::new();
    let mut missing = Vec::new();
    for d in &datasets {
        for &e in &epsilons {
            for &q in &queries {
                let metric = MetricId::primary_for(q);
                let higher = higher_is_better(metric);
                let mut values = Vec::new();
                for &a in algorithms {
                    match lookup.get(&(a, d.as_str(), e.to_bits(), q)) {
                        Some(&v) if v.is_finite() => values.push((a, v)),
                        Some(_) => {}
                        None => missing.push(format!("{a}/{d}/{e}/{q}")),
                    }
                }
                let best = values
                    .iter()
                    .map(|p| p.1)
                    .reduce(|x, y| if higher { x.max(y) } else { x.min(y) });
                let mut winners: Vec<Algorithm> = match best {
                    Some(b) => values
                        .iter()
                        .filter(|(_, v)| (v - b).abs() <= TIE_TOLERANCE)
                        .map(|p| p.0)
                        .collect(),
                    None => Vec::new(),
                };
                if opts.strict {
                    winners.truncate(1);
                }
                credits.push(Credit {
                    dataset: d.clone(),
                    epsilon: e,
                    query: q,
                    metric,
                    winners,
                });
            }
        }
    }
    if opts.require_complete && !missing.is_empty() {
        return Err(Error::IncompleteCoverage(missing));
    }
    Ok(BestCountTable {
        algorithms: algorithms.to_vec(),
        datasets,
        epsilons,
        queries,
        credits,
        missing,
        strict: opts.strict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn raw(alg: Algorithm, q: QueryId, metric: MetricId, rep: u32, value: f64) -> RawRow {
        RawRow {
            algorithm: alg,
            dataset: "g".into(),
            epsilon: 1.0,
            query: Some(q),
            repetition: rep,
            metric: Some(metric),
            value,
            wall_s: 0.0,
            peak_bytes: None,
            warnings: String::new(),
        }
    }

    fn agg(alg: Algorithm, q: QueryId, mean: f64) -> AggregateRow {
        AggregateRow {
            algorithm: alg,
            dataset: "g".into(),
            epsilon: 1.0,
            query: q,
            metric: MetricId::primary_for(q),
            mean,
            sd: 0.0,
            n: 1,
            undefined: 0,
        }
    }

    #[test]
    fn means_and_spread() {
        let rows = [
            raw(Algorithm::Dgg, QueryId::Q1, MetricId::Re, 0, 0.1),
            raw(Algorithm::Dgg, QueryId::Q1, MetricId::Re, 1, 0.3),
            raw(Algorithm::TmF, QueryId::Q1, MetricId::Re, 0, 0.5),
            raw(Algorithm::TmF, QueryId::Q2, MetricId::Re, 0, f64::NAN),
        ];
        let a = aggregate_means(&rows);
        assert_eq!(a.len(), 2);
        assert!((a[0].mean - 0.2).abs() < 1e-15);
        assert!((a[0].sd - 0.1).abs() < 1e-15);
        assert_eq!((a[1].mean, a[1].sd, a[1].n), (0.5, 0.0, 1));
    }

    #[test]
    fn undefined_values_are_skipped_but_counted() {
        let rows = [
            raw(Algorithm::Dgg, QueryId::Q10, MetricId::Re, 0, f64::NAN),
            raw(Algorithm::Dgg, QueryId::Q10, MetricId::Re, 1, 0.4),
        ];
        let a = aggregate_means(&rows);
        assert_eq!((a[0].mean, a[0].n, a[0].undefined), (0.4, 1, 1));
    }

    #[test]
    fn two_algorithms_three_queries() {
        use QueryId::*;
        let (a, b) = (Algorithm::Dgg, Algorithm::TmF);
        let aggs = [agg(a, Q1, 0.1), agg(b, Q1, 0.2), agg(a, Q2, 0.1), agg(b, Q2, 0.3), agg(a, Q3, 0.5), agg(b, Q3, 0.4)];
        let t = best_counts(&aggs, &[a, b], BestCountOptions::default()).unwrap();
        assert_eq!(t.graph_count(a, "g", 1.0), 2);
        assert_eq!(t.graph_count(b, "g", 1.0), 1);
        assert!(t.violations(&aggs).is_empty());
    }

    #[test]
    fn ties_credit_everyone_unless_strict() {
        let (a, b) = (Algorithm::Dgg, Algorithm::TmF);
        let aggs = [agg(a, QueryId::Q12, 0.7), agg(b, QueryId::Q12, 0.7 + 1e-13)];
        let t = best_counts(&aggs, &[a, b], BestCountOptions::default()).unwrap();
        assert_eq!(t.credits[0].winners, vec![a, b]);
        let strict = BestCountOptions { strict: true, ..Default::default() };
        let t = best_counts(&aggs, &[a, b], strict).unwrap();
        assert_eq!(t.credits[0].winners, vec![a]);
        assert!(t.violations(&aggs).is_empty());
    }

    #[test]
    fn nmi_prefers_higher() {
        let (a, b) = (Algorithm::PrivGraph, Algorithm::TmF);
        let aggs = [agg(a, QueryId::Q12, 0.9), agg(b, QueryId::Q12, 0.2)];
        let t = best_counts(&aggs, &[a, b], BestCountOptions::default()).unwrap();
        assert_eq!(t.credits[0].winners, vec![a]);
    }

    #[test]
    fn missing_coverage() {
        let (a, b) = (Algorithm::Dgg, Algorithm::TmF);
        let aggs = [agg(a, QueryId::Q1, 0.1)];
        let t = best_counts(&aggs, &[a, b], BestCountOptions::default()).unwrap();
        assert_eq!(t.missing, vec!["TmF/g/1/Q1".to_string()]);
        let complete = BestCountOptions { require_complete: true, ..Default::default() };
        match best_counts(&aggs, &[a, b], complete) {
            Err(Error::IncompleteCoverage(m)) => assert_eq!(m.len(), 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn toy_table_matches_enumeration() {
        use QueryId::*;
        let algs = [Algorithm::Dgg, Algorithm::TmF, Algorithm::PrivGraph];
        let table = [
            (Q1, [0.3, 0.1, 0.2]),
            (Q6, [0.05, 0.05, 0.9]),
            (Q12, [0.4, 0.8, 0.8]),
            (Q15, [0.01, 0.02, 0.03]),
        ];
        let aggs: Vec<AggregateRow> = table
            .iter()
            .flat_map(|&(q, vs)| algs.iter().zip(vs).map(move |(&a, v)| agg(a, q, v)))
            .collect();
        // Hand count: Q1 → TmF; Q6 → DGG, TmF; Q12 → TmF, PrivGraph; Q15 → DGG.
        let t = best_counts(&aggs, &algs, BestCountOptions::default()).unwrap();
        let counts: Vec<usize> = algs.iter().map(|&a| t.graph_count(a, "g", 1.0)).collect();
        assert_eq!(counts, vec![2, 3, 1]);
        assert_eq!(t.query_count(Algorithm::TmF, Q6), 1);
        assert_eq!(t.query_count(Algorithm::PrivGraph, Q1), 0);
    }

    proptest! {
        #[test]
        fn negating_and_flipping_direction_changes_nothing(
            values in proptest::collection::vec(0.0f64..1.0, 3 * 15),
        ) {
            let algs = [Algorithm::Dgg, Algorithm::TmF, Algorithm::DpDk];
            let aggs: Vec<AggregateRow> = QueryId::ALL
                .iter()
                .enumerate()
                .flat_map(|(i, &q)| algs.iter().enumerate().map(move |(j, &a)| (i, j, q, a)))
                .map(|(i, j, q, a)| agg(a, q, values[i * 3 + j]))
                .collect();
            let plain = best_counts(&aggs, &algs, BestCountOptions::default()).unwrap();
            prop_assert!(plain.violations(&aggs).is_empty());
            let total: usize = algs.iter().map(|&a| plain.graph_count(a, "g", 1.0)).sum();
            prop_assert!(total >= 15);

            let negated: Vec<AggregateRow> = aggs
                .iter()
                .cloned()
                .map(|mut r| {
                    if !r.metric.higher_is_better() {
                        r.mean = -r.mean;
                    }
                    r
                })
                .collect();
            let flipped = best_counts_by(&negated, &algs, BestCountOptions::default(), |_| true).unwrap();
            prop_assert_eq!(plain.credits, flipped.credits);
        }
    }
}
