use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use super::{ledger_for, Algorithm, Intermediates, RunLog, SynthConfig, SynthesisRecord};
use crate::construct::{sample_kronecker, KroneckerInitiator};
use crate::dp::{
    derive_seed, laplace_sample, smooth_beta, smooth_noise, smooth_sensitivity_upper_bound, stage_rng, DpRng,
    PrivacyBudget,
};
use crate::queries::triangle_counts;
use crate::{Error, Graph, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrivSkgConfig {
    /// Budget shares for (edges, 2-stars, triangles).
    pub fractions: [f64; 3],
    /// Nelder-Mead starts used by the moment fit.
    pub restarts: usize,
}

impl Default for PrivSkgConfig {
    fn default() -> Self {
        PrivSkgConfig {
            fractions: [0.2, 0.4, 0.4],
            restarts: 8,
        }
    }
}

/// Edge, 2-star (wedge) and triangle counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub edges: f64,
    pub two_stars: f64,
    pub triangles: f64,
}

impl Moments {
    pub fn of(g: &Graph) -> Self {
        let two_stars = (0..g.n())
            .map(|u| {
                let d = g.degree(u) as f64;
                d * (d - 1.0) / 2.0
            })
            .sum();
        Moments {
            edges: g.m() as f64,
            two_stars,
            triangles: triangle_counts(g).1 as f64,
        }
    }

    fn as_array(&self) -> [f64; 3] {
        [self.edges, self.two_stars, self.triangles]
    }
}

/// `Σ_{x_1..x_R < n} Π_level w(bits of x_1..x_R at that level)`, by a digit
/// walk from the top bit that tracks which indices still equal the prefix
/// of `n − 1`.
fn tuple_sum<const R: usize>(levels: u32, n: usize, w: impl Fn([usize; R]) -> f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let last = n - 1;
    let states = 1usize << R;
    let mut acc = vec![0.0f64; states];
    acc[states - 1] = 1.0;
    for level in (0..levels).rev() {
        let nb = (last >> level) & 1;
        let mut next = vec![0.0f64; states];
        for (tight, &v) in acc.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            'combo: for combo in 0..states {
                let mut bits = [0usize; R];
                let mut new_tight = 0;
                for (r, bit) in bits.iter_mut().enumerate() {
                    let b = (combo >> r) & 1;
                    *bit = b;
                    if (tight >> r) & 1 == 1 {
                        if b > nb {
                            continue 'combo;
                        }
                        if b == nb {
                            new_tight |= 1 << r;
                        }
                    }
                }
                next[new_tight] += v * w(bits);
            }
        }
        acc = next;
    }
    acc.iter().sum()
}

/// Expected edge, 2-star and triangle counts of the Kronecker graph on
/// nodes `0..n` (no self-loops), computed exactly.
pub fn kronecker_moments(init: &KroneckerInitiator, n: usize) -> Moments {
    let t = init.theta;
    let k = init.levels;
    let p = |a: usize, b: usize| t[a][b];
    let sum_p = tuple_sum::<2>(k, n, |[i, j]| p(i, j));
    let diag = tuple_sum::<1>(k, n, |[i]| p(i, i));
    let row_sq = tuple_sum::<3>(k, n, |[i, j, l]| p(i, j) * p(i, l));
    let row_diag = tuple_sum::<2>(k, n, |[i, j]| p(i, j) * p(i, i));
    let diag_sq = tuple_sum::<1>(k, n, |[i]| p(i, i).powi(2));
    let all_sq = tuple_sum::<2>(k, n, |[i, j]| p(i, j).powi(2));
    let trace3 = tuple_sum::<3>(k, n, |[i, j, l]| p(i, j) * p(j, l) * p(l, i));
    let diag_row_sq = tuple_sum::<2>(k, n, |[i, j]| p(i, i) * p(i, j).powi(2));
    let diag_cube = tuple_sum::<1>(k, n, |[i]| p(i, i).powi(3));
    Moments {
        edges: 0.5 * (sum_p - diag),
        two_stars: 0.5 * (row_sq - 2.0 * row_diag + 2.0 * diag_sq - all_sq),
        triangles: (trace3 - 3.0 * diag_row_sq + 2.0 * diag_cube) / 6.0,
    }
}

fn loss(x: [f64; 3], levels: u32, n: usize, target: &Moments) -> f64 {
    let init = KroneckerInitiator {
        theta: [[x[0], x[1]], [x[1], x[2]]],
        levels,
    };
    let m = kronecker_moments(&init, n).as_array();
    m.iter()
        .zip(target.as_array())
        .map(|(a, b)| ((a - b) / b.max(1.0)).powi(2))
        .sum()
}

fn clamp_box(x: [f64; 3]) -> [f64; 3] {
    x.map(|v| v.clamp(0.0, 1.0))
}

/// Nelder-Mead on the unit cube; trial points are projected onto the box.
fn nelder_mead(f: &impl Fn([f64; 3]) -> f64, start: [f64; 3], iterations: usize) -> ([f64; 3], f64) {
    let mut simplex: Vec<([f64; 3], f64)> = (0..4)
        .map(|i| {
            let mut x = start;
            if i > 0 {
                x[i - 1] += if x[i - 1] > 0.5 { -0.2 } else { 0.2 };
            }
            let x = clamp_box(x);
            (x, f(x))
        })
        .collect();
    let lerp = |a: [f64; 3], b: [f64; 3], t: f64| clamp_box([0, 1, 2].map(|k| a[k] + t * (b[k] - a[k])));
    for _ in 0..iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[3].1 - simplex[0].1 < 1e-14 {
            break;
        }
        let centroid = [0, 1, 2].map(|k| simplex[..3].iter().map(|s| s.0[k]).sum::<f64>() / 3.0);
        let worst = simplex[3];
        let reflected = lerp(centroid, worst.0, -1.0);
        let fr = f(reflected);
        if fr < simplex[0].1 {
            let expanded = lerp(centroid, worst.0, -2.0);
            let fe = f(expanded);
            simplex[3] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[2].1 {
            simplex[3] = (reflected, fr);
        } else {
            let contracted = lerp(centroid, worst.0, 0.5);
            let fc = f(contracted);
            if fc < worst.1 {
                simplex[3] = (contracted, fc);
            } else {
                let best = simplex[0].0;
                for s in simplex.iter_mut().skip(1) {
                    let x = lerp(best, s.0, 0.5);
                    *s = (x, f(x));
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0]
}

/// Fits a symmetric initiator on `[0, 1]³` whose exact expected moments on
/// `n` nodes match `target` in squared relative error. Deterministic for a
/// given `seed`. Returns the initiator, its loss, and whether the optimum
/// lies on the box boundary.
pub fn fit_initiator(target: &Moments, n: usize, restarts: usize, seed: u64) -> (KroneckerInitiator, f64, bool) {
    let levels = KroneckerInitiator::levels_for(n);
    let f = |x: [f64; 3]| loss(x, levels, n, target);
    let mut rng = DpRng::seed_from_u64(seed);
    let mut best = ([0.9, 0.5, 0.2], f64::INFINITY);
    for r in 0..restarts.max(1) {
        let start = if r == 0 {
            [0.9, 0.5, 0.2]
        } else {
            [rng.random(), rng.random(), rng.random()]
        };
        let (x, _) = nelder_mead(&f, start, 400);
        // A second simplex around the first optimum recovers from early
        // collapse.
        let (x, fx) = nelder_mead(&f, x, 400);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    let x = best.0;
    let boundary = x.iter().any(|&v| v <= 1e-6 || v >= 1.0 - 1e-6);
    let init = KroneckerInitiator {
        theta: [[x[0], x[1]], [x[1], x[2]]],
        levels,
    };
    (init, best.1, boundary)
}

/// Largest number of common neighbours over all node pairs.
fn max_common_neighbors(g: &Graph) -> usize {
    let n = g.n();
    let mut count = vec![0usize; n];
    let mut touched = Vec::new();
    let mut best = 0;
    for u in 0..n {
        for &w in g.neighbors(u) {
            for &v in g.neighbors(w) {
                if v > u {
                    if count[v] == 0 {
                        touched.push(v);
                    }
                    count[v] += 1;
                }
            }
        }
        for &v in &touched {
            best = best.max(count[v]);
            count[v] = 0;
        }
        touched.clear();
    }
    best
}

/// Releases the edge count (Laplace), 2-star and triangle counts (smooth
/// sensitivity), fits a Kronecker initiator to them, and samples a graph on
/// exactly `n` nodes.
pub fn privskg_generate(g: &Graph, budget: PrivacyBudget, seed: u64, cfg: &SynthConfig) -> Result<SynthesisRecord> {
    if budget.delta <= 0.0 {
        return Err(Error::Budget("PrivSKG smooth-sensitivity counts need delta > 0".into()));
    }
    let mut ledger = ledger_for(cfg, Algorithm::PrivSkg, budget)?;
    let mut log = RunLog::new();
    let n = g.n();
    let truth = Moments::of(g);
    let d_max = g.max_degree() as f64;
    let a_max = max_common_neighbors(g) as f64;
    let cap = n.saturating_sub(2) as f64;
    log.stage("representation");

    let e = ledger.charge("edges", "laplace, sensitivity 1")?;
    let edges = truth.edges + laplace_sample(1.0 / e.epsilon, &mut stage_rng(seed, "edges"));

    let s = ledger.charge("two_stars", "smooth-sensitivity laplace, local 2*(d_max+t)")?;
    let sb = PrivacyBudget::new(s.epsilon, s.delta)?;
    let bound = smooth_sensitivity_upper_bound(|t| 2.0 * (d_max + t as f64), smooth_beta(&sb)?, n as u64, Some(2.0 * cap));
    let two_stars = truth.two_stars + smooth_noise(&bound, &sb, &mut stage_rng(seed, "two_stars"))?;

    let t = ledger.charge("triangles", "smooth-sensitivity laplace, local a_max+t")?;
    let tb = PrivacyBudget::new(t.epsilon, t.delta)?;
    let bound = smooth_sensitivity_upper_bound(|t| a_max + t as f64, smooth_beta(&tb)?, n as u64, Some(cap));
    let triangles = truth.triangles + smooth_noise(&bound, &tb, &mut stage_rng(seed, "triangles"))?;

    let noisy = Moments {
        edges: edges.max(0.0),
        two_stars: two_stars.max(0.0),
        triangles: triangles.max(0.0),
    };
    log.summary("noisy_edges", noisy.edges);
    log.summary("noisy_two_stars", noisy.two_stars);
    log.summary("noisy_triangles", noisy.triangles);
    log.stage("perturbation");

    let (init, fit_loss, boundary) = fit_initiator(&noisy, n, cfg.privskg.restarts, derive_seed(seed, &["fit"]));
    log.summary("fit_loss", fit_loss);
    if boundary {
        log.warn(format!("initiator fit reached the box boundary: {:?}", init.theta));
    }
    let out = sample_kronecker(&init, n, &mut stage_rng(seed, "construction"))?;
    log.stage("construction");
    let intermediates = Intermediates {
        initiator: Some(init),
        ..Default::default()
    };
    log.finish(Algorithm::PrivSkg, out, ledger, intermediates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_er;

    fn brute(init: &KroneckerInitiator, n: usize) -> Moments {
        let p = |i, j| init.pair_probability(i, j);
        let mut m = Moments {
            edges: 0.0,
            two_stars: 0.0,
            triangles: 0.0,
        };
        for i in 0..n {
            for j in i + 1..n {
                m.edges += p(i, j);
                for l in j + 1..n {
                    m.triangles += p(i, j) * p(j, l) * p(i, l);
                }
            }
            for j in 0..n {
                for l in j + 1..n {
                    if j != i && l != i {
                        m.two_stars += p(i, j) * p(i, l);
                    }
                }
            }
        }
        m
    }

    #[test]
    fn digit_walk_matches_brute_force() {
        for (a, b, c) in [(0.9, 0.5, 0.2), (0.3, 0.7, 0.6), (1.0, 1.0, 1.0)] {
            for n in [1, 2, 3, 5, 8, 11, 16, 21] {
                let init = KroneckerInitiator::new(a, b, c, KroneckerInitiator::levels_for(n)).unwrap();
                let fast = kronecker_moments(&init, n);
                let slow = brute(&init, n);
                for (x, y) in fast.as_array().iter().zip(slow.as_array()) {
                    assert!((x - y).abs() < 1e-9 * y.max(1.0), "n {n}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn k4_moment_fit() {
        let target = Moments {
            edges: 6.0,
            two_stars: 12.0,
            triangles: 4.0,
        };
        let (init, _, _) = fit_initiator(&target, 4, 8, 1);
        let expected = kronecker_moments(&init, 4).edges;
        // Exact pair-probability sum of the fitted initiator.
        let oracle: f64 = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j))).map(|(i, j)| init.pair_probability(i, j)).sum();
        assert!((expected - oracle).abs() < 1e-12);
        let mut rng = DpRng::seed_from_u64(3);
        let total: usize = (0..1000).map(|_| sample_kronecker(&init, 4, &mut rng).unwrap().m()).sum();
        let mean = total as f64 / 1000.0;
        assert!((mean - 6.0).abs() <= 0.15 * 6.0, "mean {mean}");
    }

    #[test]
    fn fit_is_deterministic() {
        let t = Moments {
            edges: 100.0,
            two_stars: 600.0,
            triangles: 30.0,
        };
        assert_eq!(fit_initiator(&t, 60, 4, 9).0, fit_initiator(&t, 60, 4, 9).0);
    }

    #[test]
    fn zero_noise_moments() {
        let g = generate_er(120, 600, &mut DpRng::seed_from_u64(2)).unwrap();
        let rec = privskg_generate(&g, PrivacyBudget::new(1e6, 0.01).unwrap(), 1, &SynthConfig::default()).unwrap();
        let truth = Moments::of(&g);
        let rel = |k: &str, t: f64| (rec.summaries[k] - t).abs() / t;
        assert!(rel("noisy_edges", truth.edges) < 1e-3);
        assert!(rel("noisy_two_stars", truth.two_stars) < 1e-3);
        assert!(rel("noisy_triangles", truth.triangles) < 1e-3);
        assert_eq!(rec.output.n(), 120);
    }

    #[test]
    fn common_neighbors() {
        let g = Graph::from_edges(5, [(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)]).unwrap();
        assert_eq!(max_common_neighbors(&g), 3);
    }
}
