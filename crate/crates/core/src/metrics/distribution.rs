/// Additive smoothing applied before [`kl_divergence`].
pub const KL_SMOOTHING: f64 = 1e-9;

fn pad(p: &[f64], q: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let len = p.len().max(q.len());
    let (mut p, mut q) = (p.to_vec(), q.to_vec());
    p.resize(len, 0.0);
    q.resize(len, 0.0);
    (p, q)
}

fn smooth(v: &[f64]) -> Vec<f64> {
    let total: f64 = v.iter().map(|x| x + KL_SMOOTHING).sum();
    v.iter().map(|x| (x + KL_SMOOTHING) / total).collect()
}

/// `KL(p ‖ q)` with `p` the true distribution, after padding both to a
/// common support and smoothing each entry by [`KL_SMOOTHING`].
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    let (p, q) = pad(p, q);
    if p.is_empty() {
        return 0.0;
    }
    let (p, q) = (smooth(&p), smooth(&q));
    let kl: f64 = p.iter().zip(&q).map(|(a, b)| a * (a / b).ln()).sum();
    kl.max(0.0)
}

/// Hellinger distance, in `[0, 1]`.
pub fn hellinger(p: &[f64], q: &[f64]) -> f64 {
    let (p, q) = pad(p, q);
    let ss: f64 = p
        .iter()
        .zip(&q)
        .map(|(a, b)| (a.max(0.0).sqrt() - b.max(0.0).sqrt()).powi(2))
        .sum();
    (ss.sqrt() / std::f64::consts::SQRT_2).min(1.0)
}

/// Largest gap between the two cumulative distributions.
pub fn ks_statistic(p: &[f64], q: &[f64]) -> f64 {
    let (p, q) = pad(p, q);
    let (mut cp, mut cq, mut best) = (0.0f64, 0.0f64, 0.0f64);
    for (a, b) in p.iter().zip(&q) {
        cp += a;
        cq += b;
        best = best.max((cp - cq).abs());
    }
    best.min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn normalize(v: Vec<f64>) -> Vec<f64> {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    }

    fn arb_dist() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.001f64..1.0, 1..20).prop_map(normalize)
    }

    #[test]
    fn examples() {
        let p = [0.2, 0.3, 0.5];
        assert!(kl_divergence(&p, &p).abs() < 1e-7);
        assert!((kl_divergence(&[1.0, 0.0], &[0.5, 0.5]) - 2f64.ln()).abs() < 1e-7);
        assert_eq!(hellinger(&p, &p), 0.0);
        assert_eq!(ks_statistic(&p, &p), 0.0);
        assert!((hellinger(&[1.0, 0.0], &[0.0, 1.0]) - 1.0).abs() < 1e-12);
        assert!((ks_statistic(&[1.0, 0.0], &[0.0, 1.0]) - 1.0).abs() < 1e-12);
        // Padding: [1] against [0, 1] is a pair of disjoint point masses.
        assert!((ks_statistic(&[1.0], &[0.0, 1.0]) - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn properties(p in arb_dist(), q in arb_dist()) {
            prop_assert!(kl_divergence(&p, &q) >= 0.0);
            let h = hellinger(&p, &q);
            prop_assert!((0.0..=1.0).contains(&h));
            prop_assert!((h - hellinger(&q, &p)).abs() < 1e-15);
            let k = ks_statistic(&p, &q);
            prop_assert!((0.0..=1.0).contains(&k));
            prop_assert!((k - ks_statistic(&q, &p)).abs() < 1e-12);
        }

        #[test]
        fn loop_oracles(p in arb_dist(), q in arb_dist()) {
            let len = p.len().max(q.len());
            let at = |v: &Vec<f64>, i: usize| v.get(i).copied().unwrap_or(0.0);
            let mut h = 0.0;
            let mut ks: f64 = 0.0;
            for i in 0..len {
                h += (at(&p, i).sqrt() - at(&q, i).sqrt()).powi(2);
                let cp: f64 = (0..=i).map(|j| at(&p, j)).sum();
                let cq: f64 = (0..=i).map(|j| at(&q, j)).sum();
                ks = ks.max((cp - cq).abs());
            }
            prop_assert!((hellinger(&p, &q) - (h / 2.0).sqrt()).abs() < 1e-12);
            prop_assert!((ks_statistic(&p, &q) - ks).abs() < 1e-12);
        }
    }
}
