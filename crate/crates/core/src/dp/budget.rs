use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// An `(ε, δ)` pair. `δ = 0` means pure ε-DP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    pub epsilon: f64,
    pub delta: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Budget(format!("epsilon must be positive and finite, got {epsilon}")));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::Budget(format!("delta must lie in [0, 1), got {delta}")));
        }
        Ok(PrivacyBudget { epsilon, delta })
    }

    pub fn pure(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageBudget {
    pub epsilon: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerStage {
    pub label: String,
    pub fraction: f64,
    pub epsilon: f64,
    pub delta: f64,
    /// Mechanism description recorded when the stage is charged.
    pub mechanism: Option<String>,
}

/// Sequential-composition ledger: each stage owns a share of the total and
/// is charged exactly once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetLedger {
    pub total: PrivacyBudget,
    pub stages: Vec<LedgerStage>,
}

/// Splits `total` into labelled stages proportionally to `shares`.
///
/// Fractions must be positive and sum to one within `1e-12`. The last
/// stage receives the remainder so that the shares add up to the total.
pub fn split_budget(total: PrivacyBudget, shares: &[(&str, f64)]) -> Result<BudgetLedger> {
    if shares.is_empty() {
        return Err(Error::Budget("no stages given".into()));
    }
    if let Some((l, f)) = shares.iter().find(|(_, f)| !(*f > 0.0 && f.is_finite())) {
        return Err(Error::Budget(format!("stage {l:?} has non-positive fraction {f}")));
    }
    let sum: f64 = shares.iter().map(|(_, f)| f).sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::Budget(format!("stage fractions sum to {sum}, expected 1")));
    }
    for (i, (l, _)) in shares.iter().enumerate() {
        if shares[..i].iter().any(|(o, _)| o == l) {
            return Err(Error::Budget(format!("duplicate stage label {l:?}")));
        }
    }

    let mut stages = Vec::with_capacity(shares.len());
    let (mut eps_used, mut delta_used) = (0.0, 0.0);
    for (i, &(label, fraction)) in shares.iter().enumerate() {
        let (epsilon, delta) = if i + 1 == shares.len() {
            (total.epsilon - eps_used, (total.delta - delta_used).max(0.0))
        } else {
            (fraction * total.epsilon, fraction * total.delta)
        };
        eps_used += epsilon;
        delta_used += delta;
        stages.push(LedgerStage {
            label: label.to_string(),
            fraction,
            epsilon,
            delta,
            mechanism: None,
        });
    }
    Ok(BudgetLedger { total, stages })
}

impl BudgetLedger {
    pub fn single(total: PrivacyBudget, label: &str) -> Self {
        split_budget(total, &[(label, 1.0)]).expect("single stage always valid")
    }

    /// Charges a stage and returns its share. Each stage may be charged once.
    pub fn charge(&mut self, label: &str, mechanism: impl Into<String>) -> Result<StageBudget> {
        let stage = self
            .stages
            .iter_mut()
            .find(|s| s.label == label)
            .ok_or_else(|| Error::Budget(format!("no ledger stage {label:?}")))?;
        if stage.mechanism.is_some() {
            return Err(Error::Budget(format!("stage {label:?} charged twice")));
        }
        stage.mechanism = Some(mechanism.into());
        Ok(StageBudget {
            epsilon: stage.epsilon,
            delta: stage.delta,
        })
    }

    pub fn epsilon_sum(&self) -> f64 {
        self.stages.iter().map(|s| s.epsilon).sum()
    }

    pub fn delta_sum(&self) -> f64 {
        self.stages.iter().map(|s| s.delta).sum()
    }

    /// Sum of stage ε equals the total (relative `1e-12`) and the δ shares
    /// do not exceed the total δ.
    pub fn is_balanced(&self) -> bool {
        let eps = self.total.epsilon;
        (self.epsilon_sum() - eps).abs() <= 1e-12 * eps.max(1.0)
            && self.delta_sum() <= self.total.delta * (1.0 + 1e-12) + 1e-15
    }

    pub fn all_charged(&self) -> bool {
        self.stages.iter().all(|s| s.mechanism.is_some())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halves() {
        let l = split_budget(PrivacyBudget::pure(1.0).unwrap(), &[("a", 0.5), ("b", 0.5)]).unwrap();
        assert_eq!(l.stages[0].epsilon, 0.5);
        assert_eq!(l.stages[1].epsilon, 0.5);
        assert!(l.is_balanced());
    }

    #[test]
    fn thirds_sum_to_total() {
        let t = 1.0 / 3.0;
        let l = split_budget(PrivacyBudget::pure(3.0).unwrap(), &[("a", t), ("b", t), ("c", t)]).unwrap();
        for s in &l.stages {
            assert!((s.epsilon - 1.0).abs() < 1e-12);
        }
        assert!((l.epsilon_sum() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn delta_is_split_proportionally() {
        let l = split_budget(PrivacyBudget::new(0.1, 0.01).unwrap(), &[("a", 0.2), ("b", 0.8)]).unwrap();
        assert!((l.stages[0].delta - 0.002).abs() < 1e-15);
        assert!((l.stages[1].delta - 0.008).abs() < 1e-15);
        assert!(l.is_balanced());
    }

    #[test]
    fn rejects_bad_fractions() {
        let b = PrivacyBudget::pure(1.0).unwrap();
        assert!(split_budget(b, &[("a", 0.5), ("b", 0.4)]).is_err());
        assert!(split_budget(b, &[("a", 1.5), ("b", -0.5)]).is_err());
        assert!(split_budget(b, &[("a", 0.5), ("a", 0.5)]).is_err());
        assert!(split_budget(b, &[]).is_err());
    }

    #[test]
    fn rejects_bad_budget() {
        assert!(PrivacyBudget::new(0.0, 0.0).is_err());
        assert!(PrivacyBudget::new(1.0, 1.0).is_err());
        assert!(PrivacyBudget::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn charge_once() {
        let mut l = BudgetLedger::single(PrivacyBudget::pure(2.0).unwrap(), "all");
        assert!(!l.all_charged());
        assert_eq!(l.charge("all", "laplace").unwrap().epsilon, 2.0);
        assert!(l.charge("all", "laplace").is_err());
        assert!(l.charge("other", "x").is_err());
        assert!(l.all_charged());
    }
}
