use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Graph, Result};

/// Symmetric 2×2 initiator `[[a, b], [b, c]]` raised to `levels` Kronecker
/// powers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KroneckerInitiator {
    pub theta: [[f64; 2]; 2],
    pub levels: u32,
}

/// Bits per lookup-table chunk.
const CHUNK: u32 = 6;

impl KroneckerInitiator {
    pub fn new(a: f64, b: f64, c: f64, levels: u32) -> Result<Self> {
        let init = KroneckerInitiator {
            theta: [[a, b], [b, c]],
            levels,
        };
        init.validate()?;
        Ok(init)
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.theta;
        if t.iter().flatten().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::InvalidArgument(format!("initiator entries outside [0, 1]: {t:?}")));
        }
        if t[0][1] != t[1][0] {
            return Err(Error::InvalidArgument("initiator must be symmetric".into()));
        }
        if self.levels > 40 {
            return Err(Error::InvalidArgument(format!("too many levels: {}", self.levels)));
        }
        Ok(())
    }

    /// Smallest `k` with `2^k ≥ n`.
    pub fn levels_for(n: usize) -> u32 {
        if n <= 1 {
            0
        } else {
            usize::BITS - (n - 1).leading_zeros()
        }
    }

    /// `Π_l θ[bit_l(i)][bit_l(j)]`.
    pub fn pair_probability(&self, i: usize, j: usize) -> f64 {
        (0..self.levels)
            .map(|l| self.theta[(i >> l) & 1][(j >> l) & 1])
            .product()
    }

    /// Lookup tables over `CHUNK`-bit slices of the node IDs.
    fn chunk_tables(&self) -> Vec<(u32, Vec<f64>)> {
        let mut tables = Vec::new();
        let mut shift = 0;
        while shift < self.levels {
            let bits = CHUNK.min(self.levels - shift);
            let size = 1usize << bits;
            let mut table = vec![1.0; size * size];
            for x in 0..size {
                for y in 0..size {
                    table[x * size + y] = (0..bits)
                        .map(|l| self.theta[(x >> l) & 1][(y >> l) & 1])
                        .product();
                }
            }
            tables.push((shift, table));
            shift += bits;
        }
        tables
    }
}

/// Samples a stochastic Kronecker graph restricted to nodes `0..n`.
pub fn sample_kronecker<R: Rng + ?Sized>(init: &KroneckerInitiator, n: usize, rng: &mut R) -> Result<Graph> {
    init.validate()?;
    if init.levels < 64 && (1u64 << init.levels) < n as u64 {
        return Err(Error::InvalidArgument(format!(
            "2^{} nodes cannot hold n = {n}",
            init.levels
        )));
    }
    let tables = init.chunk_tables();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut p = 1.0;
            for (shift, table) in &tables {
                let size = 1usize << CHUNK.min(init.levels - shift);
                let mask = size - 1;
                p *= table[((i >> shift) & mask) * size + ((j >> shift) & mask)];
            }
            if p >= 1.0 || (p > 0.0 && rng.random::<f64>() < p) {
                edges.push((i, j));
            }
        }
    }
    Ok(Graph::from_normalized(n, edges))
}
