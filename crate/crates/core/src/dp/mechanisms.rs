use rand::{Rng, RngCore};

use super::{PrivacyBudget, SensitivityBound};
use crate::{Error, Result};

/// Uniform draw in the open interval (0, 1) from 53 random bits.
fn open_unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// One Laplace(0, `scale`) draw by inverse CDF. Always consumes one `u64`.
pub fn laplace_sample<R: RngCore + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    let u = open_unit(rng);
    if scale == 0.0 {
        return 0.0;
    }
    if u < 0.5 {
        scale * (2.0 * u).ln()
    } else {
        -scale * (2.0 * (1.0 - u)).ln()
    }
}

/// `P[X > x]` for `X ~ Laplace(0, scale)`.
pub fn laplace_survival(x: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        return if x < 0.0 { 1.0 } else { 0.0 };
    }
    if x >= 0.0 {
        0.5 * (-x / scale).exp()
    } else {
        1.0 - 0.5 * (x / scale).exp()
    }
}

/// Inverse of [`laplace_survival`] for `v` in (0, 1).
fn laplace_survival_inverse(v: f64, scale: f64) -> f64 {
    if v <= 0.5 {
        -scale * (2.0 * v).ln()
    } else {
        scale * (2.0 * (1.0 - v)).ln()
    }
}

/// Draws `X ~ Laplace(0, scale)` conditioned on `X > threshold`.
pub fn laplace_tail_sample<R: RngCore + ?Sized>(scale: f64, threshold: f64, rng: &mut R) -> f64 {
    laplace_band_sample(scale, threshold, f64::INFINITY, rng)
}

/// Draws `X ~ Laplace(0, scale)` conditioned on `lo < X ≤ hi`.
pub fn laplace_band_sample<R: RngCore + ?Sized>(scale: f64, lo: f64, hi: f64, rng: &mut R) -> f64 {
    let (s_lo, s_hi) = (laplace_survival(lo, scale), laplace_survival(hi, scale));
    let v = s_hi + open_unit(rng) * (s_lo - s_hi);
    if v <= 0.0 || scale == 0.0 {
        return lo.max(0.0).min(hi);
    }
    laplace_survival_inverse(v, scale).clamp(lo, hi)
}

/// Laplace mechanism noise with scale `Δf / ε`.
pub fn laplace_noise<R: RngCore + ?Sized>(sensitivity: &SensitivityBound, epsilon: f64, rng: &mut R) -> Result<f64> {
    let SensitivityBound::Global { value } = *sensitivity else {
        return Err(Error::InvalidArgument(
            "laplace_noise needs a global sensitivity; use smooth_noise".into(),
        ));
    };
    if !(epsilon > 0.0) {
        return Err(Error::Budget(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(value >= 0.0) {
        return Err(Error::InvalidArgument(format!("negative sensitivity {value}")));
    }
    Ok(laplace_sample(value / epsilon, rng))
}

/// The β for which Laplace noise of scale `2S/ε` is `(ε, δ)`-admissible.
pub fn smooth_beta(budget: &PrivacyBudget) -> Result<f64> {
    if budget.delta <= 0.0 {
        return Err(Error::Budget("smooth sensitivity calibration needs delta > 0".into()));
    }
    Ok(budget.epsilon / (2.0 * (2.0 / budget.delta).ln()))
}

/// Laplace noise with scale `2 S / ε`, where `S` is a β-smooth bound with
/// β no larger than [`smooth_beta`] for this budget.
pub fn smooth_noise<R: RngCore + ?Sized>(bound: &SensitivityBound, budget: &PrivacyBudget, rng: &mut R) -> Result<f64> {
    let SensitivityBound::Smooth { value, beta } = *bound else {
        return Err(Error::InvalidArgument("smooth_noise needs a smooth bound".into()));
    };
    let calibrated = smooth_beta(budget)?;
    if beta > calibrated * (1.0 + 1e-9) {
        return Err(Error::InvalidArgument(format!(
            "smooth bound computed with beta = {beta} but budget admits at most {calibrated}"
        )));
    }
    Ok(laplace_sample(2.0 * value / budget.epsilon, rng))
}

/// Exponential mechanism: returns index `i` with probability proportional to
/// `exp(ε q_i / (2 Δq))`, sampled as a Gumbel-max.
pub fn exponential_select<R: Rng + ?Sized>(scores: &[f64], delta_q: f64, epsilon: f64, rng: &mut R) -> Result<usize> {
    if scores.is_empty() {
        return Err(Error::InvalidArgument("exponential mechanism over no candidates".into()));
    }
    if !(delta_q > 0.0) || !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "exponential mechanism needs delta_q > 0 and epsilon > 0 (got {delta_q}, {epsilon})"
        )));
    }
    let factor = epsilon / (2.0 * delta_q);
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (i, &q) in scores.iter().enumerate() {
        let gumbel = -(-open_unit(rng).ln()).ln();
        let key = factor * q + gumbel;
        if key > best.0 {
            best = (key, i);
        }
    }
    Ok(best.1)
}
