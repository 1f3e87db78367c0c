use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{enumerate_scenarios, Behavior, Subset, TaskSpec};
use crate::Result;

/// Key of one metric term: (preparation, measurement, outcome).
pub type MetricKey = (Subset, Subset, u8);

/// A linear functional over behaviors:
/// `sum_terms weight * p(outcome | prep, meas) + constant_offset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessMetric {
    weights: BTreeMap<MetricKey, f64>,
    constant_offset: f64,
}

impl SuccessMetric {
    pub fn new(weights: BTreeMap<MetricKey, f64>, constant_offset: f64) -> Self {
        SuccessMetric { weights, constant_offset }
    }

    pub fn weights(&self) -> &BTreeMap<MetricKey, f64> {
        &self.weights
    }

    pub fn constant_offset(&self) -> f64 {
        self.constant_offset
    }

    /// Checks that every referenced label exists in the task's universe.
    pub fn validate_against(&self, task: &TaskSpec) -> Result<()> {
        let labels = task.labels();
        for (prep, meas, outcome) in self.weights.keys() {
            let j = labels.meas_index(meas)?;
            labels.prep_index(prep)?;
            labels.outcome_index(j, *outcome)?;
        }
        Ok(())
    }

    /// Evaluates the metric on a behavior; every referenced label must be
    /// present.
    pub fn evaluate(&self, behavior: &Behavior) -> Result<f64> {
        let mut total = self.constant_offset;
        for ((prep, meas, outcome), w) in &self.weights {
            total += w * behavior.probability(prep, meas, *outcome)?;
        }
        Ok(total)
    }
}

/// The canonical positive success metric: weight 1 on `(a, b, s)` for every
/// scenario row. Its maximum attainable value is the row count.
pub fn canonical_metric(task: &TaskSpec) -> SuccessMetric {
    let mut weights = BTreeMap::new();
    for row in enumerate_scenarios(task) {
        weights.insert((row.a, row.b, row.s), 1.0);
    }
    SuccessMetric::new(weights, 0.0)
}

/// The signed `T_{4,1}` metric written over first effects only: for each
/// measurement with outcome pair `{j, k}` (j < k) it carries `+1` on
/// `p(j | a={k})` and `-1` on `p(j | a={j})`. For binary POVMs its value is
/// the canonical metric's value minus 6 on any behavior.
pub fn signed_metric_t41() -> SuccessMetric {
    let task = TaskSpec::new(4, 1).expect("T_{4,1} is valid");
    let labels = task.labels();
    let mut weights = BTreeMap::new();
    for (jdx, b) in labels.measurements().iter().enumerate() {
        let outs = labels.outcomes(jdx);
        let (j, k) = (outs[0], outs[1]);
        let prep_k = Subset::new([k]).unwrap();
        let prep_j = Subset::new([j]).unwrap();
        weights.insert((prep_k, b.clone(), j), 1.0);
        weights.insert((prep_j, b.clone(), j), -1.0);
    }
    SuccessMetric::new(weights, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn canonical_t41_has_12_unit_weights() {
        let task = TaskSpec::new(4, 1).unwrap();
        let metric = canonical_metric(&task);
        assert_eq!(metric.weights().len(), 12);
        assert!(metric.weights().values().all(|&w| w == 1.0));
        metric.validate_against(&task).unwrap();
    }

    #[test]
    fn canonical_t31_has_6_unit_weights() {
        let task = TaskSpec::new(3, 1).unwrap();
        let metric = canonical_metric(&task);
        assert_eq!(metric.weights().len(), 6);
    }

    #[test]
    fn canonical_on_uniform_behavior() {
        // all outcomes 1/(m+1) -> value = row_count/(m+1)
        for (n, m) in [(3u8, 1u8), (4, 1), (4, 2)] {
            let task = TaskSpec::new(n, m).unwrap();
            let labels = task.labels();
            let p = 1.0 / task.outcome_count() as f64;
            let mut map = BTreeMap::new();
            for prep in labels.preparations() {
                for (j, meas) in labels.measurements().iter().enumerate() {
                    for &k in labels.outcomes(j) {
                        map.insert((prep.clone(), meas.clone(), k), p);
                    }
                }
            }
            let behavior = Behavior::new(map).unwrap();
            let metric = canonical_metric(&task);
            let rows = enumerate_scenarios(&task).len() as f64;
            assert_abs_diff_eq!(
                metric.evaluate(&behavior).unwrap(),
                rows * p,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn signed_t41_has_12_terms_of_unit_magnitude() {
        let metric = signed_metric_t41();
        assert_eq!(metric.weights().len(), 12);
        assert!(metric.weights().values().all(|&w| w == 1.0 || w == -1.0));
        let positives = metric.weights().values().filter(|&&w| w > 0.0).count();
        assert_eq!(positives, 6);
        metric
            .validate_against(&TaskSpec::new(4, 1).unwrap())
            .unwrap();
    }

    #[test]
    fn signed_t41_vanishes_on_coin_flip_behavior() {
        let task = TaskSpec::new(4, 1).unwrap();
        let labels = task.labels();
        let mut map = BTreeMap::new();
        for prep in labels.preparations() {
            for (j, meas) in labels.measurements().iter().enumerate() {
                for &k in labels.outcomes(j) {
                    map.insert((prep.clone(), meas.clone(), k), 0.5);
                }
            }
        }
        let behavior = Behavior::new(map).unwrap();
        assert_abs_diff_eq!(
            signed_metric_t41().evaluate(&behavior).unwrap(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn zero_metric_evaluates_to_zero() {
        let metric = SuccessMetric::new(BTreeMap::new(), 0.0);
        let behavior = Behavior::new(BTreeMap::new()).unwrap();
        assert_eq!(metric.evaluate(&behavior).unwrap(), 0.0);
    }

    #[test]
    fn missing_label_is_a_lookup_error() {
        let task = TaskSpec::new(3, 1).unwrap();
        let metric = canonical_metric(&task);
        let behavior = Behavior::new(BTreeMap::new()).unwrap();
        assert!(matches!(
            metric.evaluate(&behavior),
            Err(crate::Error::Lookup(_))
        ));
    }
}
