use std::collections::HashMap;

/// Agreement scores between two partitions of the same node set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionScores {
    pub nmi: f64,
    pub ari: f64,
    pub ami: f64,
    pub avg_f1: f64,
    /// Set when the partitions had different lengths and only the common
    /// prefix of node IDs was compared.
    pub truncated: bool,
}

struct Contingency {
    n: usize,
    cells: Vec<u64>,
    rows: Vec<u64>,
    cols: Vec<u64>,
    /// (row, col, count) for every nonzero cell.
    entries: Vec<(usize, usize, u64)>,
}

impl Contingency {
    fn new(a: &[usize], b: &[usize]) -> Self {
        let relabel = |p: &[usize]| {
            let mut map = HashMap::new();
            let labels: Vec<usize> = p
                .iter()
                .map(|&x| {
                    let next = map.len();
                    *map.entry(x).or_insert(next)
                })
                .collect();
            (labels, map.len())
        };
        let (a, ra) = relabel(a);
        let (b, rb) = relabel(b);
        let mut rows = vec![0u64; ra];
        let mut cols = vec![0u64; rb];
        let mut map: HashMap<(usize, usize), u64> = HashMap::new();
        for (&x, &y) in a.iter().zip(&b) {
            rows[x] += 1;
            cols[y] += 1;
            *map.entry((x, y)).or_insert(0) += 1;
        }
        let mut entries: Vec<(usize, usize, u64)> = map.into_iter().map(|((x, y), c)| (x, y, c)).collect();
        entries.sort_unstable();
        Contingency {
            n: a.len(),
            cells: entries.iter().map(|e| e.2).collect(),
            rows,
            cols,
            entries,
        }
    }

    fn mutual_information(&self) -> f64 {
        let n = self.n as f64;
        self.entries
            .iter()
            .map(|&(i, j, c)| {
                let c = c as f64;
                c / n * (n * c / (self.rows[i] as f64 * self.cols[j] as f64)).ln()
            })
            .sum::<f64>()
            .max(0.0)
    }
}

fn entropy(sizes: &[u64], n: usize) -> f64 {
    let n = n as f64;
    sizes
        .iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let p = s as f64 / n;
            -p * p.ln()
        })
        .sum()
}

fn comb2(x: u64) -> f64 {
    x as f64 * (x as f64 - 1.0) / 2.0
}

fn adjusted_rand(t: &Contingency) -> f64 {
    let index: f64 = t.cells.iter().map(|&c| comb2(c)).sum();
    let sa: f64 = t.rows.iter().map(|&c| comb2(c)).sum();
    let sb: f64 = t.cols.iter().map(|&c| comb2(c)).sum();
    let total = comb2(t.n as u64);
    if total == 0.0 {
        return 1.0;
    }
    let expected = sa * sb / total;
    let max = 0.5 * (sa + sb);
    if (max - expected).abs() < 1e-12 {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

/// Expected mutual information under the permutation model, with row and
/// column sizes grouped so repeated sizes are evaluated once.
fn expected_mutual_information(t: &Contingency) -> f64 {
    let n = t.n;
    let mut log_fact = vec![0.0f64; n + 1];
    for i in 1..=n {
        log_fact[i] = log_fact[i - 1] + (i as f64).ln();
    }
    let group = |sizes: &[u64]| {
        let mut m: HashMap<u64, u64> = HashMap::new();
        for &s in sizes {
            *m.entry(s).or_insert(0) += 1;
        }
        let mut v: Vec<_> = m.into_iter().collect();
        v.sort_unstable();
        v
    };
    let (rows, cols) = (group(&t.rows), group(&t.cols));
    let nf = n as f64;
    let mut emi = 0.0;
    for &(a, ca) in &rows {
        for &(b, cb) in &cols {
            let (a, b) = (a as usize, b as usize);
            let lo = (a + b).saturating_sub(n).max(1);
            let hi = a.min(b);
            let mut sum = 0.0;
            for k in lo..=hi {
                let log_p = log_fact[a] + log_fact[b] + log_fact[n - a] + log_fact[n - b]
                    - log_fact[n]
                    - log_fact[k]
                    - log_fact[a - k]
                    - log_fact[b - k]
                    - log_fact[n + k - a - b];
                let kf = k as f64;
                sum += kf / nf * (nf * kf / (a as f64 * b as f64)).ln() * log_p.exp();
            }
            emi += sum * (ca * cb) as f64;
        }
    }
    emi
}

fn best_match_f1(t: &Contingency) -> f64 {
    let mut best_row = vec![0.0f64; t.rows.len()];
    let mut best_col = vec![0.0f64; t.cols.len()];
    for &(i, j, c) in &t.entries {
        let f1 = 2.0 * c as f64 / (t.rows[i] + t.cols[j]) as f64;
        best_row[i] = best_row[i].max(f1);
        best_col[j] = best_col[j].max(f1);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    0.5 * (mean(&best_row) + mean(&best_col))
}

/// NMI (arithmetic normalization), ARI, AMI and average best-match F1.
///
/// Two single-community partitions count as identical. AMI is floored at
/// zero, so agreement worse than chance scores the same as chance.
pub fn partition_scores(true_p: &[usize], syn_p: &[usize]) -> PartitionScores {
    let len = true_p.len().min(syn_p.len());
    let truncated = true_p.len() != syn_p.len();
    if len == 0 {
        return PartitionScores {
            nmi: 1.0,
            ari: 1.0,
            ami: 1.0,
            avg_f1: 1.0,
            truncated,
        };
    }
    let t = Contingency::new(&true_p[..len], &syn_p[..len]);
    let (ha, hb) = (entropy(&t.rows, len), entropy(&t.cols, len));
    let mi = t.mutual_information();
    let norm = 0.5 * (ha + hb);
    let trivial = t.rows.len() == t.cols.len() && (t.rows.len() == 1 || t.rows.len() == len);
    let (nmi, ami) = if (trivial && t.entries.len() == t.rows.len()) || norm <= 0.0 {
        (1.0, 1.0)
    } else {
        let emi = expected_mutual_information(&t);
        let denom = norm - emi;
        let ami = if denom.abs() < 1e-15 { 0.0 } else { (mi - emi) / denom };
        ((mi / norm).clamp(0.0, 1.0), ami.clamp(0.0, 1.0))
    };
    PartitionScores {
        nmi,
        ari: adjusted_rand(&t).min(1.0),
        ami,
        avg_f1: best_match_f1(&t).clamp(0.0, 1.0),
        truncated,
    }
}
