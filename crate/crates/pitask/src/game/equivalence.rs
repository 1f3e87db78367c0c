use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{HermitianMatrix, QuantumModel, Subset, WEIGHT_TOL};
use crate::{Error, Result};

/// Reference to one effect: (measurement label, outcome label).
pub type EffectRef = (Subset, u8);

/// An operational equivalence: two convex combinations (of preparations or
/// of effects) required to give identical statistics. Weights on each side
/// are nonnegative and sum to 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperationalEquivalence {
    Preparation {
        side_a: BTreeMap<Subset, f64>,
        side_b: BTreeMap<Subset, f64>,
    },
    Effect {
        side_a: BTreeMap<EffectRef, f64>,
        side_b: BTreeMap<EffectRef, f64>,
    },
}

fn check_weights<K: std::fmt::Debug>(side: &BTreeMap<K, f64>, name: &str) -> Result<()> {
    if side.is_empty() {
        return Err(Error::Constraint(format!("equivalence {name} side is empty")));
    }
    let mut sum = 0.0;
    for (k, w) in side {
        if *w < 0.0 {
            return Err(Error::Constraint(format!(
                "negative weight {w} on {k:?} in equivalence {name} side"
            )));
        }
        sum += w;
    }
    if (sum - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::Constraint(format!(
            "weights on {name} side sum to {sum}, expected 1"
        )));
    }
    Ok(())
}

impl OperationalEquivalence {
    pub fn preparation(
        side_a: BTreeMap<Subset, f64>,
        side_b: BTreeMap<Subset, f64>,
    ) -> Result<Self> {
        check_weights(&side_a, "preparation a")?;
        check_weights(&side_b, "preparation b")?;
        Ok(OperationalEquivalence::Preparation { side_a, side_b })
    }

    /// Convenience: equal-weight preparation equivalence between two label
    /// groups, e.g. `{a1, a2} ~ {a3, a4}` with weight 1/2 each.
    pub fn preparation_uniform(lhs: &[Subset], rhs: &[Subset]) -> Result<Self> {
        let spread = |labels: &[Subset]| -> BTreeMap<Subset, f64> {
            let w = 1.0 / labels.len() as f64;
            labels.iter().cloned().map(|l| (l, w)).collect()
        };
        Self::preparation(spread(lhs), spread(rhs))
    }

    pub fn effect(
        side_a: BTreeMap<EffectRef, f64>,
        side_b: BTreeMap<EffectRef, f64>,
    ) -> Result<Self> {
        check_weights(&side_a, "effect a")?;
        check_weights(&side_b, "effect b")?;
        Ok(OperationalEquivalence::Effect { side_a, side_b })
    }

    pub fn is_preparation(&self) -> bool {
        matches!(self, OperationalEquivalence::Preparation { .. })
    }

    /// Signed weight per preparation label (`side_a` minus `side_b`);
    /// empty for effect equivalences.
    pub fn prep_signed_weights(&self) -> BTreeMap<Subset, f64> {
        let mut out: BTreeMap<Subset, f64> = BTreeMap::new();
        if let OperationalEquivalence::Preparation { side_a, side_b } = self {
            for (l, w) in side_a {
                *out.entry(l.clone()).or_insert(0.0) += w;
            }
            for (l, w) in side_b {
                *out.entry(l.clone()).or_insert(0.0) -= w;
            }
        }
        out
    }

    /// Signed weight per effect reference; empty for preparation
    /// equivalences.
    pub fn effect_signed_weights(&self) -> BTreeMap<EffectRef, f64> {
        let mut out: BTreeMap<EffectRef, f64> = BTreeMap::new();
        if let OperationalEquivalence::Effect { side_a, side_b } = self {
            for (l, w) in side_a {
                *out.entry(l.clone()).or_insert(0.0) += w;
            }
            for (l, w) in side_b {
                *out.entry(l.clone()).or_insert(0.0) -= w;
            }
        }
        out
    }
}

/// Whether the model satisfies the equivalence: the two weighted operator
/// sums must agree entrywise within `tol`.
pub fn check_equivalence(
    model: &QuantumModel,
    eq: &OperationalEquivalence,
    tol: f64,
) -> Result<bool> {
    let d = model.dimension();
    let mut acc = HermitianMatrix::zeros(d);
    match eq {
        OperationalEquivalence::Preparation { side_a, side_b } => {
            for (label, w) in side_a {
                acc = acc.add(&model.state(label)?.scale(*w));
            }
            for (label, w) in side_b {
                acc = acc.sub(&model.state(label)?.scale(*w));
            }
        }
        OperationalEquivalence::Effect { side_a, side_b } => {
            for ((meas, outcome), w) in side_a {
                acc = acc.add(&model.effect(meas, *outcome)?.scale(*w));
            }
            for ((meas, outcome), w) in side_b {
                acc = acc.sub(&model.effect(meas, *outcome)?.scale(*w));
            }
        }
    }
    Ok(acc.max_abs_diff(&HermitianMatrix::zeros(d)) <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::fixtures;

    #[test]
    fn weights_must_be_convex() {
        let a = Subset::new([0]).unwrap();
        let b = Subset::new([1]).unwrap();
        let mut bad = BTreeMap::new();
        bad.insert(a.clone(), 0.7);
        let mut ok = BTreeMap::new();
        ok.insert(b.clone(), 1.0);
        assert!(OperationalEquivalence::preparation(bad, ok).is_err());
    }

    #[test]
    fn identical_sides_always_hold() {
        let model = fixtures::t31_qubit_model();
        let lhs = [Subset::new([0]).unwrap(), Subset::new([1]).unwrap()];
        let eq = OperationalEquivalence::preparation_uniform(&lhs, &lhs).unwrap();
        assert!(check_equivalence(&model, &eq, 1e-12).unwrap());
    }

    #[test]
    fn trine_states_are_not_pairwise_equivalent() {
        let model = fixtures::t31_qubit_model();
        let eq = OperationalEquivalence::preparation_uniform(
            &[Subset::new([0]).unwrap()],
            &[Subset::new([1]).unwrap()],
        )
        .unwrap();
        assert!(!check_equivalence(&model, &eq, 1e-6).unwrap());
    }
}
