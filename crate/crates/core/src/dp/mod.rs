//! Differential-privacy building blocks: budgets, sensitivity bounds,
//! Laplace and exponential mechanisms, and seeded RNG streams.

mod budget;
mod mechanisms;
mod rng;
mod sensitivity;

pub use budget::{split_budget, BudgetLedger, LedgerStage, PrivacyBudget, StageBudget};
pub use mechanisms::{
    exponential_select, laplace_noise, laplace_sample, laplace_band_sample, laplace_survival, laplace_tail_sample,
    smooth_beta, smooth_noise,
};
pub use rng::{derive_seed, stage_rng, DpRng};
pub use sensitivity::{smooth_sensitivity_upper_bound, SensitivityBound};
