use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

/// Generator used for every randomized step.
pub type DpRng = ChaCha20Rng;

/// Derives a child seed from a parent seed and a path of labels.
///
/// Hashing the labels (rather than drawing from a shared stream) keeps each
/// stage's randomness independent of how many values other stages consume.
pub fn derive_seed(parent: u64, labels: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(parent.to_le_bytes());
    for l in labels {
        h.update([0xff]);
        h.update(l.as_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 has 32 bytes"))
}

pub fn stage_rng(seed: u64, label: &str) -> DpRng {
    DpRng::seed_from_u64(derive_seed(seed, &[label]))
}
