//! Communication matrices and the `lambda_max` dimension witness.
//!
//! `lambda_max` (the sum of column maxima of a row-stochastic matrix) lower
//! bounds the positive semidefinite rank, and a d-dimensional quantum
//! implementation forces `rank_psd <= d`. A communication matrix with
//! `lambda_max > d` therefore excludes dimension d. The psd rank itself is
//! never computed; only this witness is used.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::game::{Behavior, Subset, SuccessMetric, TaskSpec};
use crate::{Error, Result};

/// Outcome distributions of one measurement, one row per preparation.
#[derive(Clone, Debug, Serialize)]
pub struct CommunicationMatrix {
    pub preparations: Vec<Subset>,
    pub outcomes: Vec<u8>,
    #[serde(serialize_with = "serialize_rows")]
    pub entries: DMatrix<f64>,
}

fn serialize_rows<S: serde::Serializer>(
    m: &DMatrix<f64>,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect();
    serde::Serialize::serialize(&rows, ser)
}

impl CommunicationMatrix {
    fn validate(&self) -> Result<()> {
        for i in 0..self.entries.nrows() {
            let mut sum = 0.0;
            for j in 0..self.entries.ncols() {
                let v = self.entries[(i, j)];
                if v < -1e-10 {
                    return Err(Error::Constraint(format!(
                        "negative entry {v:.3e} in communication matrix"
                    )));
                }
                sum += v;
            }
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Constraint(format!(
                    "row {i} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(())
    }

    /// Renders the tabular layout with the given `(row, column)` cells
    /// marked, mirroring the highlighted metric entries.
    pub fn render(&self, task: &TaskSpec, highlight: &[(usize, usize)]) -> String {
        let n = task.n();
        let mut out = String::new();
        out.push_str("        ");
        for k in &self.outcomes {
            out.push_str(&format!("      k={k}"));
        }
        out.push('\n');
        for (i, prep) in self.preparations.iter().enumerate() {
            out.push_str(&format!("  {}", prep.to_bitstring(n)));
            for j in 0..self.outcomes.len() {
                let mark = if highlight.contains(&(i, j)) { "*" } else { " " };
                out.push_str(&format!("  {:.4}{mark}", self.entries[(i, j)]));
            }
            out.push('\n');
        }
        out
    }
}

/// Extracts the communication matrix of one measurement from a behavior.
pub fn comm_matrix(
    behavior: &Behavior,
    task: &TaskSpec,
    measurement: &Subset,
) -> Result<CommunicationMatrix> {
    let labels = task.labels();
    let j = labels.meas_index(measurement)?;
    let outcomes: Vec<u8> = labels.outcomes(j).to_vec();
    let preparations: Vec<Subset> = labels.preparations().to_vec();
    let mut entries = DMatrix::zeros(preparations.len(), outcomes.len());
    for (i, prep) in preparations.iter().enumerate() {
        for (c, &k) in outcomes.iter().enumerate() {
            entries[(i, c)] = behavior.probability(prep, measurement, k)?;
        }
    }
    let m = CommunicationMatrix { preparations, outcomes, entries };
    m.validate()?;
    Ok(m)
}

/// Sum of column maxima.
pub fn lambda_max(a: &CommunicationMatrix) -> f64 {
    let mut total = 0.0;
    for j in 0..a.entries.ncols() {
        let mut best = f64::NEG_INFINITY;
        for i in 0..a.entries.nrows() {
            best = best.max(a.entries[(i, j)]);
        }
        total += best;
    }
    total
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WitnessVerdict {
    /// `lambda_max <= d`: no obstruction (existence is not claimed).
    Consistent,
    /// `lambda_max > d`: no d-dimensional quantum implementation exists.
    Excluded,
}

/// Tests a communication matrix against dimension `d` via
/// `rank_psd >= lambda_max`.
pub fn dimension_witness(a: &CommunicationMatrix, d: usize) -> WitnessVerdict {
    if lambda_max(a) > d as f64 + 1e-9 {
        WitnessVerdict::Excluded
    } else {
        WitnessVerdict::Consistent
    }
}

/// The `lambda_max`-based upper bound on a canonical-form metric for
/// dimension-d implementations: per measurement the targeted columns
/// contribute at most `min(d, #columns)`.
///
/// Eligibility is strict: every weight must be 1, terms must target
/// distinct (preparation, measurement) pairs, and no two terms may share a
/// (measurement, outcome) column.
pub fn metric_bound_via_lambda(
    task: &TaskSpec,
    metric: &SuccessMetric,
    d: usize,
) -> Result<f64> {
    metric.validate_against(task)?;
    if metric.constant_offset() != 0.0 {
        return Err(Error::MetricShape(
            "constant offset not allowed in canonical positive form".into(),
        ));
    }
    let mut prep_meas_seen = std::collections::BTreeSet::new();
    let mut columns_per_meas: std::collections::BTreeMap<Subset, Vec<u8>> =
        std::collections::BTreeMap::new();
    for ((prep, meas, outcome), w) in metric.weights() {
        if *w != 1.0 {
            return Err(Error::MetricShape(format!(
                "weight {w} on ({prep},{meas},{outcome}); canonical form needs 1"
            )));
        }
        if !prep_meas_seen.insert((prep.clone(), meas.clone())) {
            return Err(Error::MetricShape(format!(
                "two terms target preparation {prep} with measurement {meas}"
            )));
        }
        let cols = columns_per_meas.entry(meas.clone()).or_default();
        if cols.contains(outcome) {
            return Err(Error::MetricShape(format!(
                "two terms share column ({meas},{outcome})"
            )));
        }
        cols.push(*outcome);
    }
    let mut bound = 0.0;
    for cols in columns_per_meas.values() {
        bound += d.min(cols.len()) as f64;
    }
    Ok(bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{optimal_classical, strategy_behavior};
    use crate::game::{behavior_of, canonical_metric, fixtures};
    use approx::assert_abs_diff_eq;

    #[test]
    fn deterministic_strategy_gives_01_matrix() {
        let task = TaskSpec::new(3, 1).unwrap();
        let (_, strategy) = optimal_classical(&task, 1).unwrap();
        let behavior = strategy_behavior(&task, &strategy).unwrap();
        let meas = Subset::new([0]).unwrap();
        let a = comm_matrix(&behavior, &task, &meas).unwrap();
        for i in 0..a.entries.nrows() {
            for j in 0..a.entries.ncols() {
                let v = a.entries[(i, j)];
                assert!(v == 0.0 || v == 1.0);
            }
        }
    }

    #[test]
    fn uniform_behavior_gives_constant_matrix() {
        let task = TaskSpec::new(4, 2).unwrap();
        let behavior = fixtures::uniform_behavior(&task);
        let meas = Subset::new([0]).unwrap();
        let a = comm_matrix(&behavior, &task, &meas).unwrap();
        for i in 0..a.entries.nrows() {
            for j in 0..a.entries.ncols() {
                assert_abs_diff_eq!(a.entries[(i, j)], 1.0 / 3.0, epsilon = 1e-12);
            }
        }
        assert_abs_diff_eq!(lambda_max(&a), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn identity_matrix_lambda_is_dimension() {
        let task = TaskSpec::new(4, 2).unwrap();
        let behavior = behavior_of(&fixtures::t42_perfect_d4_model()).unwrap();
        let meas = Subset::new([0]).unwrap();
        let a = comm_matrix(&behavior, &task, &meas).unwrap();
        // three pairs of identical rows, three distinguishable columns
        assert_abs_diff_eq!(lambda_max(&a), 3.0, epsilon = 1e-9);
        assert_eq!(dimension_witness(&a, 2), WitnessVerdict::Excluded);
        assert_eq!(dimension_witness(&a, 3), WitnessVerdict::Consistent);
    }

    #[test]
    fn any_matrix_is_consistent_at_column_count() {
        let task = TaskSpec::new(3, 1).unwrap();
        let behavior = behavior_of(&fixtures::t31_qubit_model()).unwrap();
        for meas in task.labels().measurements() {
            let a = comm_matrix(&behavior, &task, meas).unwrap();
            assert_eq!(dimension_witness(&a, a.outcomes.len()), WitnessVerdict::Consistent);
        }
    }

    #[test]
    fn lambda_invariant_under_permutations() {
        let task = TaskSpec::new(3, 1).unwrap();
        let behavior = behavior_of(&fixtures::t31_qubit_model()).unwrap();
        let meas = Subset::new([1]).unwrap();
        let a = comm_matrix(&behavior, &task, &meas).unwrap();
        let base = lambda_max(&a);
        let mut permuted = a.clone();
        permuted.entries.swap_rows(0, 2);
        assert_abs_diff_eq!(lambda_max(&permuted), base, epsilon = 1e-12);
        permuted.entries.swap_columns(0, 1);
        assert_abs_diff_eq!(lambda_max(&permuted), base, epsilon = 1e-12);
    }

    #[test]
    fn metric_bound_values() {
        let t42 = TaskSpec::new(4, 2).unwrap();
        let metric = canonical_metric(&t42);
        assert_eq!(metric_bound_via_lambda(&t42, &metric, 2).unwrap(), 8.0);
        assert_eq!(metric_bound_via_lambda(&t42, &metric, 3).unwrap(), 12.0);
        let t41 = TaskSpec::new(4, 1).unwrap();
        let metric = canonical_metric(&t41);
        assert_eq!(metric_bound_via_lambda(&t41, &metric, 2).unwrap(), 12.0);
    }

    #[test]
    fn shape_check_rejects_signed_metric() {
        let t41 = TaskSpec::new(4, 1).unwrap();
        let metric = crate::game::signed_metric_t41();
        assert!(matches!(
            metric_bound_via_lambda(&t41, &metric, 2),
            Err(Error::MetricShape(_))
        ));
    }
}
