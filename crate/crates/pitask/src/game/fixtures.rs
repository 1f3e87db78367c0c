//! Hand-built reference strategies plus seeded random models and
//! behaviors, used by tests, examples and the reproduction report.

use std::collections::BTreeMap;

use nalgebra::{Complex, DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Behavior, HermitianMatrix, QuantumModel, Subset, TaskSpec};

type C64 = Complex<f64>;

fn real(d: usize, entries: &[f64]) -> HermitianMatrix {
    HermitianMatrix::from_real(DMatrix::from_row_slice(d, d, entries))
        .expect("fixture matrices are Hermitian")
}

fn sub(v: &[u8]) -> Subset {
    Subset::new(v.iter().copied()).expect("fixture labels are valid")
}

/// The optimal qubit strategy for `T_{3,1}`: trine states at 120 degrees in
/// the xz-plane and the binary POVMs that discriminate them pairwise. Every
/// correct outcome has probability `(1 + sqrt(3)/2)/2 ~ 0.933013`.
pub fn t31_qubit_model() -> QuantumModel {
    let s3 = 3f64.sqrt();
    let states = BTreeMap::from([
        (sub(&[0]), real(2, &[1.0, 0.0, 0.0, 0.0])),
        (sub(&[1]), real(2, &[0.25, 0.25 * s3, 0.25 * s3, 0.75])),
        (sub(&[2]), real(2, &[0.25, -0.25 * s3, -0.25 * s3, 0.75])),
    ]);
    let h = s3 / 2.0;
    let povms = BTreeMap::from([
        (
            sub(&[0]),
            BTreeMap::from([
                (1u8, real(2, &[0.5, -0.5, -0.5, 0.5])),
                (2u8, real(2, &[0.5, 0.5, 0.5, 0.5])),
            ]),
        ),
        (
            sub(&[1]),
            BTreeMap::from([
                (0u8, real(2, &[(1.0 - h) / 2.0, -0.25, -0.25, (1.0 + h) / 2.0])),
                (2u8, real(2, &[(1.0 + h) / 2.0, 0.25, 0.25, (1.0 - h) / 2.0])),
            ]),
        ),
        (
            sub(&[2]),
            BTreeMap::from([
                (0u8, real(2, &[(1.0 - h) / 2.0, 0.25, 0.25, (1.0 + h) / 2.0])),
                (1u8, real(2, &[(1.0 + h) / 2.0, -0.25, -0.25, (1.0 - h) / 2.0])),
            ]),
        ),
    ]);
    QuantumModel::new(2, states, povms).expect("reference model is valid")
}

/// A perfect `T_{4,2}` strategy in dimension 4: complementary preparation
/// pairs share a basis vector, so each ternary measurement distinguishes
/// its three candidate states exactly. The canonical metric evaluates to 12.
pub fn t42_perfect_d4_model() -> QuantumModel {
    let basis = |g: usize| {
        let mut e = vec![0.0; 16];
        e[g * 4 + g] = 1.0;
        real(4, &e)
    };
    // Complementary pairs {a, comp(a)} map to one of three basis vectors,
    // indexed by the partner of 0 in whichever pair contains it.
    let group = |a: &Subset| -> usize {
        let pair: Vec<u8> = if a.contains(0) {
            a.iter().collect()
        } else {
            a.complement(4).iter().collect()
        };
        usize::from(pair[1]) - 1
    };

    let task = TaskSpec::new(4, 2).unwrap();
    let labels = task.labels();
    let states: BTreeMap<Subset, HermitianMatrix> = labels
        .preparations()
        .iter()
        .map(|a| (a.clone(), basis(group(a))))
        .collect();

    let mut povms = BTreeMap::new();
    for (j, b) in labels.measurements().iter().enumerate() {
        let k = b.as_slice()[0];
        let mut effects: BTreeMap<u8, HermitianMatrix> = BTreeMap::new();
        for &s in labels.outcomes(j) {
            let a = Subset::new([s, k]).unwrap().complement(4);
            effects.insert(s, basis(group(&a)));
        }
        // park the unused fourth dimension on the smallest outcome
        let first = *effects.keys().next().unwrap();
        let padded = effects.get(&first).unwrap().add(&basis(3));
        effects.insert(first, padded);
        povms.insert(b.clone(), effects);
    }
    QuantumModel::new(4, states, povms).expect("reference model is valid")
}

/// The optimal qubit strategy for the signed `T_{4,1}` metric under the
/// preparation equivalence `rho_0 + rho_1 ~ rho_2 + rho_3`: Bloch vectors
/// at the corners of a square (+x, -x, +z, -z) with the discriminating
/// binary measurements. The signed metric evaluates to `2 + 2*sqrt(2)`.
pub fn t41_square_model() -> QuantumModel {
    let bloch = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)];
    let density = |x: f64, z: f64| {
        real(2, &[
            (1.0 + z) / 2.0,
            x / 2.0,
            x / 2.0,
            (1.0 - z) / 2.0,
        ])
    };
    let task = TaskSpec::new(4, 1).unwrap();
    let labels = task.labels();
    let states: BTreeMap<Subset, HermitianMatrix> = labels
        .preparations()
        .iter()
        .map(|a| {
            let i = usize::from(a.as_slice()[0]);
            (a.clone(), density(bloch[i].0, bloch[i].1))
        })
        .collect();

    let mut povms = BTreeMap::new();
    for (jdx, b) in labels.measurements().iter().enumerate() {
        let outs = labels.outcomes(jdx);
        let (j, k) = (usize::from(outs[0]), usize::from(outs[1]));
        let (dx, dz) = (bloch[k].0 - bloch[j].0, bloch[k].1 - bloch[j].1);
        let norm = (dx * dx + dz * dz).sqrt();
        let first = density(dx / norm, dz / norm);
        let second = HermitianMatrix::identity(2).sub(&first);
        povms.insert(
            b.clone(),
            BTreeMap::from([(outs[0], first), (outs[1], second)]),
        );
    }
    QuantumModel::new(2, states, povms).expect("reference model is valid")
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn random_unit_vector(rng: &mut ChaCha8Rng, d: usize) -> DVector<C64> {
    let mut v = DVector::from_element(d, C64::new(0.0, 0.0));
    for i in 0..d {
        v[i] = C64::new(standard_normal(rng), standard_normal(rng));
    }
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

/// A random d-dimensional model: Haar-random pure states and POVMs built by
/// normalizing random positive operators (`E_k = S^-1/2 A_k S^-1/2` with
/// `S = sum A_k`). Deterministic given the seed.
pub fn random_model(task: &TaskSpec, d: usize, seed: u64) -> QuantumModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = task.labels();
    let states: BTreeMap<Subset, HermitianMatrix> = labels
        .preparations()
        .iter()
        .map(|a| (a.clone(), HermitianMatrix::projector(&random_unit_vector(&mut rng, d))))
        .collect();

    let mut povms = BTreeMap::new();
    for (j, b) in labels.measurements().iter().enumerate() {
        let outcomes = labels.outcomes(j);
        let raw: Vec<DMatrix<C64>> = outcomes
            .iter()
            .map(|_| {
                let g = DMatrix::from_fn(d, d, |_, _| {
                    C64::new(standard_normal(&mut rng), standard_normal(&mut rng))
                });
                &g * g.adjoint()
            })
            .collect();
        let total = raw.iter().fold(DMatrix::zeros(d, d), |acc, a| acc + a);
        let inv_sqrt = hermitian_inv_sqrt(&total);
        let mut effects = BTreeMap::new();
        for (&k, a) in outcomes.iter().zip(&raw) {
            let e = &inv_sqrt * a * &inv_sqrt;
            effects.insert(k, HermitianMatrix::new_with_tol(e, 1e-9).expect("effect is Hermitian"));
        }
        povms.insert(b.clone(), effects);
    }
    QuantumModel::new_with_tol(d, states, povms, 1e-7).expect("construction is valid")
}

fn hermitian_inv_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = m.clone().symmetric_eigen();
    let mut diag = DMatrix::zeros(m.nrows(), m.ncols());
    for (i, &ev) in eig.eigenvalues.iter().enumerate() {
        diag[(i, i)] = C64::new(1.0 / ev.max(1e-12).sqrt(), 0.0);
    }
    &eig.eigenvectors * diag * eig.eigenvectors.adjoint()
}

/// A random behavior: every (preparation, measurement) row is a uniform
/// sample from the outcome simplex. Deterministic given the seed.
pub fn random_behavior(task: &TaskSpec, seed: u64) -> Behavior {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = task.labels();
    let mut map = BTreeMap::new();
    for prep in labels.preparations() {
        for (j, meas) in labels.measurements().iter().enumerate() {
            let draws: Vec<f64> = labels
                .outcomes(j)
                .iter()
                .map(|_| -(1.0 - rng.random::<f64>()).ln())
                .collect();
            let total: f64 = draws.iter().sum();
            for (&k, x) in labels.outcomes(j).iter().zip(&draws) {
                map.insert((prep.clone(), meas.clone(), k), x / total);
            }
        }
    }
    Behavior::new(map).expect("simplex samples are normalized")
}

/// The behavior where every outcome of every measurement is uniformly
/// likely, for all preparations of the task.
pub fn uniform_behavior(task: &TaskSpec) -> Behavior {
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
    Behavior::new(map).expect("uniform behavior is normalized")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{behavior_of, canonical_metric, check_equivalence, signed_metric_t41};
    use crate::game::OperationalEquivalence;
    use approx::assert_abs_diff_eq;

    #[test]
    fn t42_model_wins_every_round() {
        let task = TaskSpec::new(4, 2).unwrap();
        let behavior = behavior_of(&t42_perfect_d4_model()).unwrap();
        let value = canonical_metric(&task).evaluate(&behavior).unwrap();
        assert_abs_diff_eq!(value, 12.0, epsilon = 1e-9);
    }

    #[test]
    fn t31_model_scores_six_times_trine_overlap() {
        let task = TaskSpec::new(3, 1).unwrap();
        let behavior = behavior_of(&t31_qubit_model()).unwrap();
        let value = canonical_metric(&task).evaluate(&behavior).unwrap();
        assert_abs_diff_eq!(value, 6.0 * 0.5 * (1.0 + 3f64.sqrt() / 2.0), epsilon = 1e-9);
    }

    #[test]
    fn square_model_satisfies_equivalence_and_signed_value() {
        let model = t41_square_model();
        let eq = OperationalEquivalence::preparation_uniform(
            &[sub(&[0]), sub(&[1])],
            &[sub(&[2]), sub(&[3])],
        )
        .unwrap();
        assert!(check_equivalence(&model, &eq, 1e-10).unwrap());
        let behavior = behavior_of(&model).unwrap();
        let value = signed_metric_t41().evaluate(&behavior).unwrap();
        assert_abs_diff_eq!(value, 2.0 + 2.0 * 2f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn random_models_validate_and_are_seeded() {
        let task = TaskSpec::new(4, 2).unwrap();
        let a = random_model(&task, 3, 9);
        let b = random_model(&task, 3, 9);
        let c = random_model(&task, 3, 10);
        let key = Subset::new([0, 1]).unwrap();
        assert_eq!(a.state(&key).unwrap().matrix(), b.state(&key).unwrap().matrix());
        assert_ne!(a.state(&key).unwrap().matrix(), c.state(&key).unwrap().matrix());
        behavior_of(&a).unwrap();
    }

    #[test]
    fn random_behaviors_are_normalized() {
        let task = TaskSpec::new(4, 1).unwrap();
        let b = random_behavior(&task, 3);
        assert_eq!(b.len(), 4 * 6 * 2);
    }

    #[test]
    fn signed_equals_positive_minus_six_on_square_model() {
        let task = TaskSpec::new(4, 1).unwrap();
        let behavior = behavior_of(&t41_square_model()).unwrap();
        let pos = canonical_metric(&task).evaluate(&behavior).unwrap();
        let signed = signed_metric_t41().evaluate(&behavior).unwrap();
        assert_abs_diff_eq!(signed, pos - 6.0, epsilon = 1e-9);
    }
}
