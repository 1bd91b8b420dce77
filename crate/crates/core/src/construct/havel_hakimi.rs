use std::cmp::Reverse;
use std::collections::BTreeSet;

use crate::{DegreeSequence, Error, Graph, Result};

/// Repairs real-valued (noisy) degrees: round to nearest, clamp to
/// `[0, n − 1]`, then decrement the largest entry if the sum is odd.
pub fn repair_degree_sequence(noisy: &[f64]) -> DegreeSequence {
    let cap = noisy.len().saturating_sub(1) as f64;
    let mut d: Vec<usize> = noisy
        .iter()
        .map(|&x| if x.is_nan() { 0 } else { x.round().clamp(0.0, cap) as usize })
        .collect();
    make_even(&mut d);
    DegreeSequence(d)
}

fn make_even(d: &mut [usize]) {
    if d.iter().sum::<usize>() % 2 == 1 {
        // Largest degree, lowest index on ties.
        let (i, _) = d
            .iter()
            .enumerate()
            .max_by_key(|&(i, &v)| (v, Reverse(i)))
            .expect("odd sum implies non-empty");
        d[i] -= 1;
    }
}

/// Deterministic Havel–Hakimi realization.
///
/// The input is clamped to `[0, n − 1]` and made even first. The node with
/// the largest remaining degree (lowest ID on ties) is connected to the next
/// largest ones. Fails with the repaired sequence if it is not graphical.
pub fn construct_havel_hakimi(degrees: &DegreeSequence) -> Result<Graph> {
    let repaired = clamp_even(degrees);
    let (g, unmet) = realize(&repaired);
    if unmet > 0 {
        return Err(Error::NotGraphical { repaired: repaired.0 });
    }
    Ok(g)
}

/// Havel–Hakimi that skips stubs it cannot place. Returns the graph and the
/// number of unmatched stubs.
pub fn havel_hakimi_best_effort(degrees: &DegreeSequence) -> (Graph, usize) {
    realize(&clamp_even(degrees))
}

fn clamp_even(degrees: &DegreeSequence) -> DegreeSequence {
    let cap = degrees.len().saturating_sub(1);
    let mut d: Vec<usize> = degrees.0.iter().map(|&x| x.min(cap)).collect();
    make_even(&mut d);
    DegreeSequence(d)
}

fn realize(degrees: &DegreeSequence) -> (Graph, usize) {
    let n = degrees.len();
    let mut remaining = degrees.0.clone();
    let mut queue: BTreeSet<(Reverse<usize>, usize)> =
        (0..n).filter(|&i| remaining[i] > 0).map(|i| (Reverse(remaining[i]), i)).collect();
    let mut edges = Vec::with_capacity(degrees.total() / 2);
    let mut unmet = 0;
    let mut picked = Vec::new();
    while let Some((Reverse(d), u)) = queue.pop_first() {
        picked.clear();
        picked.extend(queue.iter().take(d).copied());
        unmet += d - picked.len();
        remaining[u] = 0;
        for &(Reverse(dv), v) in &picked {
            queue.remove(&(Reverse(dv), v));
            edges.push((u.min(v), u.max(v)));
            remaining[v] = dv - 1;
            if dv > 1 {
                queue.insert((Reverse(dv - 1), v));
            }
        }
    }
    (Graph::from_normalized(n, edges), unmet)
}
