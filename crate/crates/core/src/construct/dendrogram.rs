use rand::Rng;
use serde::{Deserialize, Serialize};

use super::bernoulli_indices;
use crate::{Error, Graph, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Child {
    Leaf(usize),
    Internal(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InternalNode {
    pub left: Child,
    pub right: Child,
    /// Connection probability for pairs whose lowest common ancestor is
    /// this node.
    pub prob: f64,
}

/// Binary hierarchy over graph nodes: `n` leaves, `n − 1` internal nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub n_leaves: usize,
    pub nodes: Vec<InternalNode>,
    pub root: Option<usize>,
}

/// Leaf range of an internal node in DFS leaf order: left subtree in
/// `start..split`, right subtree in `split..end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeafRange {
    pub start: usize,
    pub split: usize,
    pub end: usize,
}

impl Dendrogram {
    /// A balanced hierarchy over `0..n` (leaves in ID order) with every
    /// probability set to `prob`.
    pub fn balanced(n: usize, prob: f64) -> Self {
        fn build(lo: usize, hi: usize, prob: f64, nodes: &mut Vec<InternalNode>) -> Child {
            if hi - lo == 1 {
                return Child::Leaf(lo);
            }
            let mid = lo + (hi - lo) / 2;
            let left = build(lo, mid, prob, nodes);
            let right = build(mid, hi, prob, nodes);
            nodes.push(InternalNode { left, right, prob });
            Child::Internal(nodes.len() - 1)
        }
        let mut nodes = Vec::with_capacity(n.saturating_sub(1));
        let root = if n == 0 {
            None
        } else {
            match build(0, n, prob, &mut nodes) {
                Child::Internal(r) => Some(r),
                Child::Leaf(_) => None,
            }
        };
        Dendrogram { n_leaves: n, nodes, root }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_leaves;
        let bad = |msg: String| Err(Error::InvalidArgument(format!("invalid dendrogram: {msg}")));
        if self.nodes.len() != n.saturating_sub(1) {
            return bad(format!("{} internal nodes for {n} leaves", self.nodes.len()));
        }
        if n >= 2 && self.root.is_none_or(|r| r >= self.nodes.len()) {
            return bad("missing root".into());
        }
        let mut leaf_seen = vec![false; n];
        let mut node_seen = vec![false; self.nodes.len()];
        let mut stack: Vec<usize> = self.root.into_iter().collect();
        while let Some(r) = stack.pop() {
            if std::mem::replace(&mut node_seen[r], true) {
                return bad(format!("internal node {r} reached twice"));
            }
            let node = &self.nodes[r];
            if !(0.0..=1.0).contains(&node.prob) {
                return bad(format!("probability {} at node {r}", node.prob));
            }
            for c in [node.left, node.right] {
                match c {
                    Child::Leaf(u) if u < n => {
                        if std::mem::replace(&mut leaf_seen[u], true) {
                            return bad(format!("leaf {u} appears twice"));
                        }
                    }
                    Child::Internal(s) if s < self.nodes.len() => stack.push(s),
                    other => return bad(format!("child {other:?} out of range")),
                }
            }
        }
        if n >= 2 && (leaf_seen.contains(&false) || node_seen.contains(&false)) {
            return bad("tree does not cover every node".into());
        }
        Ok(())
    }

    /// DFS leaf order and the leaf range of every internal node.
    pub fn leaf_layout(&self) -> (Vec<usize>, Vec<LeafRange>) {
        let mut order = Vec::with_capacity(self.n_leaves);
        let mut ranges = vec![LeafRange { start: 0, split: 0, end: 0 }; self.nodes.len()];
        enum Visit {
            Enter(Child),
            Split(usize),
            Exit(usize),
        }
        let mut stack: Vec<Visit> = self.root.map(|r| Visit::Enter(Child::Internal(r))).into_iter().collect();
        if self.root.is_none() && self.n_leaves == 1 {
            order.push(0);
        }
        while let Some(v) = stack.pop() {
            match v {
                Visit::Enter(Child::Leaf(u)) => order.push(u),
                Visit::Enter(Child::Internal(r)) => {
                    ranges[r].start = order.len();
                    let node = self.nodes[r];
                    stack.push(Visit::Exit(r));
                    stack.push(Visit::Enter(node.right));
                    stack.push(Visit::Split(r));
                    stack.push(Visit::Enter(node.left));
                }
                Visit::Split(r) => ranges[r].split = order.len(),
                Visit::Exit(r) => ranges[r].end = order.len(),
            }
        }
        (order, ranges)
    }

    /// Expected number of edges, `Σ_r p_r L_r R_r`.
    pub fn expected_edges(&self) -> f64 {
        let (_, ranges) = self.leaf_layout();
        self.nodes
            .iter()
            .zip(&ranges)
            .map(|(node, r)| node.prob * ((r.split - r.start) * (r.end - r.split)) as f64)
            .sum()
    }
}

/// Connects each pair independently with the probability stored at its
/// lowest common ancestor.
pub fn sample_from_dendrogram<R: Rng + ?Sized>(d: &Dendrogram, rng: &mut R) -> Result<Graph> {
    d.validate()?;
    let (order, ranges) = d.leaf_layout();
    let mut edges = Vec::new();
    for (node, r) in d.nodes.iter().zip(&ranges) {
        let right = (r.end - r.split) as u64;
        let total = (r.split - r.start) as u64 * right;
        bernoulli_indices(total, node.prob, rng, |idx| {
            let u = order[r.start + (idx / right) as usize];
            let v = order[r.split + (idx % right) as usize];
            edges.push((u.min(v), u.max(v)));
        });
    }
    Ok(Graph::from_normalized(d.n_leaves, edges))
}
