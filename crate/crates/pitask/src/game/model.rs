use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Behavior, HermitianMatrix, Subset, IMAG_TOL, MODEL_TOL};
use crate::{Error, Result};

/// Explicit quantum strategy of a fixed dimension: one density matrix per
/// preparation label and one POVM per measurement label, with effects keyed
/// by outcome label.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuantumModel {
    dimension: usize,
    states: BTreeMap<Subset, HermitianMatrix>,
    povms: BTreeMap<Subset, BTreeMap<u8, HermitianMatrix>>,
}

impl QuantumModel {
    pub fn new(
        dimension: usize,
        states: BTreeMap<Subset, HermitianMatrix>,
        povms: BTreeMap<Subset, BTreeMap<u8, HermitianMatrix>>,
    ) -> Result<Self> {
        Self::new_with_tol(dimension, states, povms, MODEL_TOL)
    }

    pub fn new_with_tol(
        dimension: usize,
        states: BTreeMap<Subset, HermitianMatrix>,
        povms: BTreeMap<Subset, BTreeMap<u8, HermitianMatrix>>,
        tol: f64,
    ) -> Result<Self> {
        for (label, rho) in &states {
            if rho.dim() != dimension {
                return Err(Error::ModelValidation(format!(
                    "state {label} has dimension {}, expected {dimension}",
                    rho.dim()
                )));
            }
            let min_ev = rho.min_eigenvalue();
            if min_ev < -tol {
                return Err(Error::ModelValidation(format!(
                    "state {label} has negative eigenvalue {min_ev:.3e}"
                )));
            }
            if (rho.trace() - 1.0).abs() > tol {
                return Err(Error::ModelValidation(format!(
                    "state {label} has trace {}, expected 1",
                    rho.trace()
                )));
            }
        }
        for (label, povm) in &povms {
            if povm.is_empty() {
                return Err(Error::ModelValidation(format!(
                    "measurement {label} has no effects"
                )));
            }
            let mut sum = HermitianMatrix::zeros(dimension);
            for (outcome, effect) in povm {
                if effect.dim() != dimension {
                    return Err(Error::ModelValidation(format!(
                        "effect ({label},{outcome}) has dimension {}, expected {dimension}",
                        effect.dim()
                    )));
                }
                let min_ev = effect.min_eigenvalue();
                if min_ev < -tol {
                    return Err(Error::ModelValidation(format!(
                        "effect ({label},{outcome}) has negative eigenvalue {min_ev:.3e}"
                    )));
                }
                sum = sum.add(effect);
            }
            let dev = sum.max_abs_diff(&HermitianMatrix::identity(dimension));
            if dev > tol {
                return Err(Error::ModelValidation(format!(
                    "effects of {label} sum to identity only within {dev:.3e}"
                )));
            }
        }
        Ok(QuantumModel { dimension, states, povms })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn states(&self) -> &BTreeMap<Subset, HermitianMatrix> {
        &self.states
    }

    pub fn povms(&self) -> &BTreeMap<Subset, BTreeMap<u8, HermitianMatrix>> {
        &self.povms
    }

    pub fn state(&self, prep: &Subset) -> Result<&HermitianMatrix> {
        self.states
            .get(prep)
            .ok_or_else(|| Error::Lookup(format!("model has no state {prep}")))
    }

    pub fn effect(&self, meas: &Subset, outcome: u8) -> Result<&HermitianMatrix> {
        self.povms
            .get(meas)
            .and_then(|p| p.get(&outcome))
            .ok_or_else(|| Error::Lookup(format!("model has no effect ({meas},{outcome})")))
    }
}

/// The behavior induced by a model: `p(k | prep, meas) = tr(rho E)`.
/// Imaginary parts above tolerance are rejected as validation failures.
pub fn behavior_of(model: &QuantumModel) -> Result<Behavior> {
    let mut map = BTreeMap::new();
    for (prep, rho) in model.states() {
        for (meas, povm) in model.povms() {
            for (outcome, effect) in povm {
                let z = (rho.matrix() * effect.matrix()).trace();
                if z.im.abs() > IMAG_TOL {
                    return Err(Error::ModelValidation(format!(
                        "tr(rho E) for ({prep},{meas},{outcome}) has imaginary part {:.3e}",
                        z.im
                    )));
                }
                map.insert((prep.clone(), meas.clone(), *outcome), z.re.clamp(0.0, 1.0));
            }
        }
    }
    Behavior::new_with_tol(map, 1e-7)
}
