//! Non-private graph constructors that turn (perturbed) summaries into
//! simple graphs.

mod bter;
mod chung_lu;
mod dendrogram;
mod dk2;
mod havel_hakimi;
mod kronecker;

pub use bter::{construct_bter, DEFAULT_TARGET_ACC};
pub use chung_lu::{calibrate_chung_lu_weights, chung_lu_expected_degrees, construct_chung_lu};
pub use dendrogram::{sample_from_dendrogram, Child, Dendrogram, InternalNode};
pub use dk2::{construct_dk2, Dk2Outcome, Dk2Report, JointDegreeMatrix};
pub use havel_hakimi::{construct_havel_hakimi, havel_hakimi_best_effort, repair_degree_sequence};
pub use kronecker::{sample_kronecker, KroneckerInitiator};

use rand::Rng;

/// Calls `f(i)` for each `i < total` independently with probability `p`,
/// using geometric skips so the cost is proportional to the hits.
pub(crate) fn bernoulli_indices<R: Rng + ?Sized>(total: u64, p: f64, rng: &mut R, mut f: impl FnMut(u64)) {
    if total == 0 || !(p > 0.0) {
        return;
    }
    if p >= 1.0 {
        (0..total).for_each(f);
        return;
    }
    let log_q = (-p).ln_1p();
    let mut idx: i64 = -1;
    loop {
        let r: f64 = 1.0 - rng.random::<f64>();
        let skip = (r.ln() / log_q).floor();
        if skip >= (total as i64 - idx) as f64 {
            break;
        }
        idx += 1 + skip as i64;
        if idx as u64 >= total {
            break;
        }
        f(idx as u64);
    }
}
