use serde::{Deserialize, Serialize};

/// A sensitivity value: global, or β-smooth at the current input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SensitivityBound {
    Global { value: f64 },
    Smooth { value: f64, beta: f64 },
}

impl SensitivityBound {
    pub fn global(value: f64) -> Self {
        SensitivityBound::Global { value }
    }

    pub fn value(&self) -> f64 {
        match *self {
            SensitivityBound::Global { value } | SensitivityBound::Smooth { value, .. } => value,
        }
    }
}

/// Upper bound on the β-smooth sensitivity `max_t local(t)·e^{-βt}`.
///
/// `local(t)` is the largest local sensitivity over inputs at distance `t`
/// and must be non-decreasing in `t`. Distances `0..=t_max` are enumerated;
/// when `cap` bounds `local` everywhere, `cap·e^{-β(t_max+1)}` covers the
/// tail beyond `t_max`.
pub fn smooth_sensitivity_upper_bound<F>(local: F, beta: f64, t_max: u64, cap: Option<f64>) -> SensitivityBound
where
    F: Fn(u64) -> f64,
{
    assert!(beta >= 0.0, "beta must be non-negative");
    let mut best = 0.0f64;
    for t in 0..=t_max {
        let v = local(t) * (-beta * t as f64).exp();
        if v > best {
            best = v;
        }
        // Once the capped envelope falls below the running maximum no later
        // distance can exceed it.
        if let Some(c) = cap {
            if c * (-beta * t as f64).exp() <= best {
                break;
            }
        }
    }
    if let Some(c) = cap {
        best = best.max(c * (-beta * (t_max as f64 + 1.0)).exp());
    }
    SensitivityBound::Smooth { value: best, beta }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_local_sensitivity() {
        let b = smooth_sensitivity_upper_bound(|_| 3.0, 0.5, 20, None);
        assert_eq!(b.value(), 3.0);
    }

    #[test]
    fn linear_local_sensitivity_peaks_at_zero() {
        // (t+1)e^{-t} on t = 0..=10, enumerated directly.
        let oracle = (0..=10u32)
            .map(|t| (t as f64 + 1.0) * (-(t as f64)).exp())
            .fold(0.0, f64::max);
        assert_eq!(oracle, 1.0);
        let b = smooth_sensitivity_upper_bound(|t| t as f64 + 1.0, 1.0, 10, None);
        assert_eq!(b.value(), oracle);
    }

    #[test]
    fn no_decay_takes_far_end() {
        let b = smooth_sensitivity_upper_bound(|t| 2.0 * t as f64 + 1.0, 0.0, 7, None);
        assert_eq!(b.value(), 15.0);
    }

    #[test]
    fn cap_adds_tail() {
        let b = smooth_sensitivity_upper_bound(|t| (t as f64 + 1.0).min(100.0), 0.01, 5, Some(100.0));
        assert!((b.value() - 100.0 * (-0.06f64).exp()).abs() < 1e-12);
    }
}
