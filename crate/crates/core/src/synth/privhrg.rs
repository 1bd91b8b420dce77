use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ledger_for, Algorithm, Intermediates, RunLog, SynthConfig, SynthesisRecord};
use crate::construct::{sample_from_dendrogram, Child, Dendrogram, InternalNode};
use crate::dp::{laplace_sample, stage_rng, DpRng, PrivacyBudget};
use crate::{Error, Graph, Result};

/// Largest graph PrivHRG accepts; leaf sets are stored as bitsets per
/// internal node, which costs `n²/8` bytes.
pub const MAX_HRG_NODES: usize = 50_000;
/// Adjacency rows are kept as bitsets up to this size.
const ADJ_BITSET_NODES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrivHrgConfig {
    /// Share of ε spent sampling the dendrogram; the rest perturbs the
    /// per-node edge counts.
    pub dendrogram_fraction: f64,
    /// Overrides the step cap `min(10^6, 200·n·⌈log₂ n⌉)`.
    pub max_steps: Option<u64>,
}

impl Default for PrivHrgConfig {
    fn default() -> Self {
        PrivHrgConfig {
            dendrogram_fraction: 0.5,
            max_steps: None,
        }
    }
}

/// `e ln p + (LR − e) ln(1 − p)` with `p = e / LR`; zero at `p ∈ {0, 1}`.
fn node_log_likelihood(e: u64, pairs: u64) -> f64 {
    if e == 0 || e >= pairs {
        return 0.0;
    }
    let (e, pairs) = (e as f64, pairs as f64);
    let p = e / pairs;
    e * p.ln() + (pairs - e) * (-p).ln_1p()
}

/// Log-likelihood of `g` under the dendrogram with maximum-likelihood
/// probabilities, counting each pair at its lowest common ancestor.
pub fn dendrogram_log_likelihood(d: &Dendrogram, g: &Graph) -> f64 {
    let (order, ranges) = d.leaf_layout();
    let mut pos = vec![0usize; d.n_leaves];
    for (i, &u) in order.iter().enumerate() {
        pos[u] = i;
    }
    ranges
        .iter()
        .map(|r| {
            let side = |u: usize| {
                let p = pos[u];
                if (r.start..r.split).contains(&p) {
                    1
                } else if (r.split..r.end).contains(&p) {
                    2
                } else {
                    0
                }
            };
            let e = g
                .edges()
                .iter()
                .filter(|&&(u, v)| side(u) * side(v) == 2)
                .count() as u64;
            node_log_likelihood(e, ((r.split - r.start) * (r.end - r.split)) as u64)
        })
        .sum()
}

/// Mutable dendrogram with per-node leaf bitsets, sizes, volumes and
/// crossing-edge counts.
struct State<'a> {
    g: &'a Graph,
    words: usize,
    children: Vec<[Child; 2]>,
    parent: Vec<usize>,
    leaf_parent: Vec<usize>,
    bits: Vec<u64>,
    size: Vec<usize>,
    vol: Vec<usize>,
    e: Vec<u64>,
    adj_bits: Option<Vec<u64>>,
    root: usize,
}

const NONE: usize = usize::MAX;

impl<'a> State<'a> {
    /// Balanced tree over a random leaf order.
    fn random<R: Rng + ?Sized>(g: &'a Graph, rng: &mut R) -> Self {
        let n = g.n();
        let words = n.div_ceil(64);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let adj_bits = (n <= ADJ_BITSET_NODES).then(|| {
            let mut rows = vec![0u64; n * words];
            for &(u, v) in g.edges() {
                rows[u * words + v / 64] |= 1 << (v % 64);
                rows[v * words + u / 64] |= 1 << (u % 64);
            }
            rows
        });
        let mut s = State {
            g,
            words,
            children: Vec::with_capacity(n - 1),
            parent: Vec::with_capacity(n - 1),
            leaf_parent: vec![NONE; n],
            bits: Vec::with_capacity((n - 1) * words),
            size: Vec::with_capacity(n - 1),
            vol: Vec::with_capacity(n - 1),
            e: Vec::with_capacity(n - 1),
            adj_bits,
            root: NONE,
        };
        let root = s.build(&order);
        s.root = match root {
            Child::Internal(r) => r,
            Child::Leaf(_) => unreachable!("n >= 2"),
        };
        s
    }

    fn build(&mut self, leaves: &[usize]) -> Child {
        if leaves.len() == 1 {
            return Child::Leaf(leaves[0]);
        }
        let mid = leaves.len() / 2;
        let a = self.build(&leaves[..mid]);
        let b = self.build(&leaves[mid..]);
        let r = self.children.len();
        self.children.push([a, b]);
        self.parent.push(NONE);
        self.bits.extend(std::iter::repeat_n(0, self.words));
        self.size.push(0);
        self.vol.push(0);
        self.e.push(0);
        for c in [a, b] {
            self.set_parent(c, r);
        }
        self.refresh(r);
        self.e[r] = self.edges_between(a, b);
        Child::Internal(r)
    }

    fn set_parent(&mut self, c: Child, p: usize) {
        match c {
            Child::Leaf(u) => self.leaf_parent[u] = p,
            Child::Internal(r) => self.parent[r] = p,
        }
    }

    fn size_of(&self, c: Child) -> usize {
        match c {
            Child::Leaf(_) => 1,
            Child::Internal(r) => self.size[r],
        }
    }

    fn vol_of(&self, c: Child) -> usize {
        match c {
            Child::Leaf(u) => self.g.degree(u),
            Child::Internal(r) => self.vol[r],
        }
    }

    fn contains(&self, c: Child, v: usize) -> bool {
        match c {
            Child::Leaf(u) => u == v,
            Child::Internal(r) => (self.bits[r * self.words + v / 64] >> (v % 64)) & 1 == 1,
        }
    }

    fn leaves(&self, c: Child) -> Vec<usize> {
        match c {
            Child::Leaf(u) => vec![u],
            Child::Internal(r) => {
                let row = &self.bits[r * self.words..(r + 1) * self.words];
                let mut out = Vec::with_capacity(self.size[r]);
                for (w, &word) in row.iter().enumerate() {
                    let mut x = word;
                    while x != 0 {
                        out.push(w * 64 + x.trailing_zeros() as usize);
                        x &= x - 1;
                    }
                }
                out
            }
        }
    }

    /// Recomputes the leaf bitset, size and volume of `r` from its children.
    fn refresh(&mut self, r: usize) {
        let w = self.words;
        let mut row = vec![0u64; w];
        for c in self.children[r] {
            match c {
                Child::Leaf(u) => row[u / 64] |= 1 << (u % 64),
                Child::Internal(s) => {
                    for (dst, src) in row.iter_mut().zip(&self.bits[s * w..(s + 1) * w]) {
                        *dst |= src;
                    }
                }
            }
        }
        self.bits[r * w..(r + 1) * w].copy_from_slice(&row);
        let [a, b] = self.children[r];
        self.size[r] = self.size_of(a) + self.size_of(b);
        self.vol[r] = self.vol_of(a) + self.vol_of(b);
    }

    /// Number of edges between two disjoint subtrees, using whichever of
    /// neighbour scans or bitset intersections is cheaper.
    fn edges_between(&self, x: Child, y: Child) -> u64 {
        let (x, y) = if self.vol_of(x) <= self.vol_of(y) { (x, y) } else { (y, x) };
        let scan_cost = self.vol_of(x) + self.size_of(x);
        if let (Some(adj), Child::Internal(ry)) = (&self.adj_bits, y) {
            let bit_cost = self.size_of(x) * self.words;
            if bit_cost < scan_cost {
                let w = self.words;
                let row_y = &self.bits[ry * w..(ry + 1) * w];
                return self
                    .leaves(x)
                    .into_iter()
                    .map(|u| {
                        adj[u * w..(u + 1) * w]
                            .iter()
                            .zip(row_y)
                            .map(|(a, b)| (a & b).count_ones() as u64)
                            .sum::<u64>()
                    })
                    .sum();
            }
        }
        self.leaves(x)
            .into_iter()
            .map(|u| self.g.neighbors(u).iter().filter(|&&v| self.contains(y, v)).count() as u64)
            .sum()
    }

    fn log_likelihood_at(&self, r: usize) -> f64 {
        let [a, b] = self.children[r];
        node_log_likelihood(self.e[r], (self.size_of(a) * self.size_of(b)) as u64)
    }

    fn log_likelihood(&self) -> f64 {
        (0..self.children.len()).map(|r| self.log_likelihood_at(r)).sum()
    }

    /// Proposes exchanging one child of `r` with the sibling of `r`.
    /// Returns the likelihood change and the data needed to apply it.
    fn propose(&self, r: usize, which: usize) -> (f64, Move) {
        let p = self.parent[r];
        let r_slot = if self.children[p][0] == Child::Internal(r) { 0 } else { 1 };
        let u = self.children[p][1 - r_slot];
        let keep = self.children[r][1 - which];
        let moved = self.children[r][which];
        let x = self.edges_between(keep, u);
        let new_er = x;
        let new_ep = self.e[r] + (self.e[p] - x);
        let (sk, su, sm) = (self.size_of(keep), self.size_of(u), self.size_of(moved));
        let delta = node_log_likelihood(new_er, (sk * su) as u64) + node_log_likelihood(new_ep, ((sk + su) * sm) as u64)
            - self.log_likelihood_at(r)
            - self.log_likelihood_at(p);
        (
            delta,
            Move {
                r,
                p,
                r_slot,
                keep,
                moved,
                u,
                new_er,
                new_ep,
            },
        )
    }

    fn apply(&mut self, m: Move) {
        self.children[m.r] = [m.keep, m.u];
        self.children[m.p][1 - m.r_slot] = m.moved;
        self.set_parent(m.u, m.r);
        self.set_parent(m.moved, m.p);
        self.e[m.r] = m.new_er;
        self.e[m.p] = m.new_ep;
        self.refresh(m.r);
    }

    /// Node `i` of `0..2n−1` (leaves first), or of `0..2n−2` skipping the
    /// root when `skip_root` is set.
    fn node(&self, i: usize, skip_root: bool) -> Child {
        let n = self.g.n();
        if i < n {
            return Child::Leaf(i);
        }
        let r = i - n;
        Child::Internal(if skip_root && r >= self.root { r + 1 } else { r })
    }

    fn parent_of(&self, c: Child) -> usize {
        match c {
            Child::Leaf(u) => self.leaf_parent[u],
            Child::Internal(r) => self.parent[r],
        }
    }

    /// Some leaf of the subtree rooted at `c`.
    fn any_leaf(&self, c: Child) -> usize {
        match c {
            Child::Leaf(u) => u,
            Child::Internal(r) => {
                let row = &self.bits[r * self.words..(r + 1) * self.words];
                let (w, word) = row.iter().enumerate().find(|(_, &x)| x != 0).expect("non-empty subtree");
                w * 64 + word.trailing_zeros() as usize
            }
        }
    }

    fn other_child(&self, r: usize, c: Child) -> Child {
        let [a, b] = self.children[r];
        if a == c {
            b
        } else {
            a
        }
    }

    /// Proposes pruning `s` (its parent `q` disappears and the sibling takes
    /// its place) and regrafting it as the sibling of `t` under a new node.
    /// Only targets outside the subtree of `q` that are not ancestors of `q`
    /// are valid; the reverse of a valid move is then valid, which keeps the
    /// proposal symmetric. Returns `None` for invalid targets.
    fn propose_regraft(&self, s: Child, t: Child) -> Option<(f64, Regraft)> {
        let q = self.parent_of(s);
        if q == NONE || self.contains(Child::Internal(q), self.any_leaf(t)) || self.contains(t, self.any_leaf(Child::Internal(q))) {
            return None;
        }
        let size_s = self.size_of(s);
        // Ancestors of `q` up to the root, with the child on the path to `s`.
        let mut old_path: Vec<(usize, Child)> = Vec::new();
        let mut c = Child::Internal(q);
        let mut a = self.parent[q];
        while a != NONE {
            old_path.push((a, c));
            c = Child::Internal(a);
            a = self.parent[a];
        }
        // Climb from `t` to the first node whose leaves include `s`.
        let s_leaf = self.any_leaf(s);
        let mut new_path: Vec<(usize, Child)> = Vec::new();
        let mut c = t;
        let mut b = self.parent_of(t);
        while !self.contains(Child::Internal(b), s_leaf) {
            new_path.push((b, c));
            c = Child::Internal(b);
            b = self.parent[b];
        }
        let lca = b;
        let lca_t_side = c;

        let ll = |e: u64, l: usize, r: usize| node_log_likelihood(e, (l * r) as u64);
        let mut delta = -self.log_likelihood_at(q);
        let mut updates: Vec<(usize, u64)> = Vec::new();
        // Edges from `s` to the rest of the `q`-side child of the LCA.
        let w = self.other_child(q, s);
        let mut s_to_q_side = self.edges_between(s, w);
        for &(a, on_path) in old_path.iter().take_while(|&&(a, _)| a != lca) {
            let other = self.other_child(a, on_path);
            let x = self.edges_between(s, other);
            s_to_q_side += x;
            let e = self.e[a] - x;
            delta += ll(e, self.size_of(on_path) - size_s, self.size_of(other)) - self.log_likelihood_at(a);
            updates.push((a, e));
        }
        let new_e = self.edges_between(s, t);
        delta += ll(new_e, self.size_of(t), size_s);
        for &(b, on_path) in &new_path {
            let other = self.other_child(b, on_path);
            let x = self.edges_between(s, other);
            let e = self.e[b] + x;
            delta += ll(e, self.size_of(on_path) + size_s, self.size_of(other)) - self.log_likelihood_at(b);
            updates.push((b, e));
        }
        let q_side = self.other_child(lca, lca_t_side);
        let e_lca = self.e[lca] - self.edges_between(s, lca_t_side) + s_to_q_side;
        delta += ll(e_lca, self.size_of(q_side) - size_s, self.size_of(lca_t_side) + size_s)
            - self.log_likelihood_at(lca);
        updates.push((lca, e_lca));
        Some((
            delta,
            Regraft {
                s,
                t,
                q,
                new_e,
                updates,
            },
        ))
    }

    fn replace_child(&mut self, p: usize, old: Child, new: Child) {
        let slot = if self.children[p][0] == old { 0 } else { 1 };
        self.children[p][slot] = new;
        self.set_parent(new, p);
    }

    fn apply_regraft(&mut self, m: Regraft) {
        let q = m.q;
        let w = self.other_child(q, m.s);
        let qp = self.parent[q];
        debug_assert_ne!(self.root, q);
        self.replace_child(qp, Child::Internal(q), w);
        let tp = self.parent_of(m.t);
        self.replace_child(tp, m.t, Child::Internal(q));
        self.children[q] = [m.t, m.s];
        self.set_parent(m.t, q);
        self.set_parent(m.s, q);
        self.e[q] = m.new_e;
        self.refresh(q);
        // Updates run bottom-up along the old path, then the new path, and
        // end at the LCA.
        for (a, e) in m.updates {
            self.e[a] = e;
            self.refresh(a);
        }
    }

    fn to_dendrogram(&self, probs: &[f64]) -> Dendrogram {
        Dendrogram {
            n_leaves: self.g.n(),
            nodes: self
                .children
                .iter()
                .zip(probs)
                .map(|(&[left, right], &prob)| InternalNode { left, right, prob })
                .collect(),
            root: Some(self.root),
        }
    }
}

struct Regraft {
    s: Child,
    t: Child,
    q: usize,
    new_e: u64,
    updates: Vec<(usize, u64)>,
}

struct Move {
    r: usize,
    p: usize,
    r_slot: usize,
    keep: Child,
    moved: Child,
    u: Child,
    new_er: u64,
    new_ep: u64,
}

/// Default MCMC step cap for `n` leaves.
pub fn default_step_cap(n: usize) -> u64 {
    let log2 = usize::BITS - n.saturating_sub(1).leading_zeros();
    (200 * n as u64 * log2 as u64).min(1_000_000)
}

/// Samples a dendrogram by Metropolis moves whose stationary law is the
/// exponential mechanism over log-likelihood, releases each internal
/// node's edge count with `Lap(1/ε₂)`, and samples a graph from the noisy
/// probabilities. The node count is preserved.
///
/// Each step proposes, with equal odds, a rotation (a child of some node
/// trades places with that node's sibling) or a prune-and-regraft. Both
/// proposals are symmetric. Rotations alone get trapped when two large
/// blocks are interleaved near the root.
pub fn privhrg_generate(g: &Graph, budget: PrivacyBudget, seed: u64, cfg: &SynthConfig) -> Result<SynthesisRecord> {
    let n = g.n();
    if n < 2 {
        return Err(Error::InvalidArgument("PrivHRG needs at least two nodes".into()));
    }
    if n > MAX_HRG_NODES {
        return Err(Error::InvalidArgument(format!(
            "PrivHRG supports at most {MAX_HRG_NODES} nodes, got {n}"
        )));
    }
    let mut ledger = ledger_for(cfg, Algorithm::PrivHrg, budget)?;
    let mut log = RunLog::new();
    let mut rng = stage_rng(seed, "dendrogram");
    let mut state = State::random(g, &mut rng);
    log.stage("representation");

    let half = (n / 2) as f64;
    let sensitivity = (half.floor() * (n as f64 / 2.0).ceil()).ln() + 1.0;
    let e1 = ledger.charge("dendrogram", "exponential mechanism via MCMC over dendrograms")?;
    let factor = e1.epsilon / (2.0 * sensitivity);
    let cap = cfg.privhrg.max_steps.unwrap_or_else(|| default_step_cap(n));
    let mut current = state.log_likelihood();
    let mut best = current;
    let mut since_best = 0u64;
    let plateau = (n as u64).saturating_mul(n as u64);
    let mut steps = 0u64;
    let mut accepted = 0u64;
    let movable = n - 2;
    let mut converged = movable == 0;
    while !converged && steps < cap {
        steps += 1;
        let accept = |delta: f64, rng: &mut DpRng| (1.0 - rng.random::<f64>()).ln() < factor * delta;
        if rng.random::<bool>() {
            // Internal nodes other than the root.
            let mut r = rng.random_range(0..movable);
            if r >= state.root {
                r += 1;
            }
            let (delta, mv) = state.propose(r, rng.random_range(0..2));
            if accept(delta, &mut rng) {
                state.apply(mv);
                current += delta;
                accepted += 1;
            }
        } else {
            let s = state.node(rng.random_range(0..2 * n - 2), true);
            let t = state.node(rng.random_range(0..2 * n - 1), false);
            if let Some((delta, mv)) = state.propose_regraft(s, t) {
                if accept(delta, &mut rng) {
                    state.apply_regraft(mv);
                    current += delta;
                    accepted += 1;
                }
            }
        }
        if current > best + 1e-6 {
            best = current;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= plateau {
                converged = true;
            }
        }
    }
    log.summary("mcmc_steps", steps as f64);
    log.summary("mcmc_accepted", accepted as f64);
    log.summary("log_likelihood", state.log_likelihood());
    if !converged {
        log.warn(format!("MCMC stopped at the step cap ({cap}) before the likelihood plateaued"));
    }

    let e2 = ledger.charge("probabilities", "laplace, sensitivity 1 per internal node count")?;
    let mut rng = stage_rng(seed, "probabilities");
    let probs: Vec<f64> = (0..state.children.len())
        .map(|r| {
            let [a, b] = state.children[r];
            let pairs = (state.size_of(a) * state.size_of(b)) as f64;
            let noisy = state.e[r] as f64 + laplace_sample(1.0 / e2.epsilon, &mut rng);
            (noisy / pairs).clamp(0.0, 1.0)
        })
        .collect();
    let dendrogram = state.to_dendrogram(&probs);
    log.stage("perturbation");

    let out = sample_from_dendrogram(&dendrogram, &mut stage_rng(seed, "construction"))?;
    log.stage("construction");
    let intermediates = Intermediates {
        dendrogram: Some(dendrogram),
        ..Default::default()
    };
    log.finish(Algorithm::PrivHrg, out, ledger, intermediates)
}
