use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Subset, BEHAVIOR_NORM_TOL};
use crate::{Error, Result};

/// The full probability table `p(k | preparation, measurement)` of a
/// prepare-and-measure experiment.
///
/// For every (preparation, measurement) pair present, outcome probabilities
/// must sum to 1 within tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, f64>", into = "BTreeMap<String, f64>")]
pub struct Behavior {
    probabilities: BTreeMap<(Subset, Subset, u8), f64>,
}

impl Behavior {
    pub fn new(probabilities: BTreeMap<(Subset, Subset, u8), f64>) -> Result<Self> {
        Self::new_with_tol(probabilities, BEHAVIOR_NORM_TOL)
    }

    pub fn new_with_tol(
        probabilities: BTreeMap<(Subset, Subset, u8), f64>,
        tol: f64,
    ) -> Result<Self> {
        let mut sums: BTreeMap<(&Subset, &Subset), f64> = BTreeMap::new();
        for ((prep, meas, k), p) in &probabilities {
            if !(-tol..=1.0 + tol).contains(p) {
                return Err(Error::Constraint(format!(
                    "probability p({k}|{prep},{meas}) = {p} outside [0,1]"
                )));
            }
            *sums.entry((prep, meas)).or_insert(0.0) += p;
        }
        for ((prep, meas), sum) in sums {
            if (sum - 1.0).abs() > tol {
                return Err(Error::Constraint(format!(
                    "outcomes of ({prep},{meas}) sum to {sum}, expected 1"
                )));
            }
        }
        Ok(Behavior { probabilities })
    }

    pub fn probability(&self, prep: &Subset, meas: &Subset, outcome: u8) -> Result<f64> {
        self.probabilities
            .get(&(prep.clone(), meas.clone(), outcome))
            .copied()
            .ok_or_else(|| {
                Error::Lookup(format!(
                    "behavior has no entry for p({outcome}|{prep},{meas})"
                ))
            })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Subset, Subset, u8), f64)> {
        self.probabilities.iter().map(|(k, v)| (k, *v))
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }
}

fn key_to_string(prep: &Subset, meas: &Subset, outcome: u8) -> String {
    format!("{prep}|{meas}|{outcome}")
}

fn key_from_string(s: &str) -> Result<(Subset, Subset, u8)> {
    let parts: Vec<&str> = s.split('|').collect();
    if parts.len() != 3 {
        return Err(Error::Constraint(format!("malformed behavior key {s:?}")));
    }
    let parse_set = |t: &str| -> Result<Subset> {
        let inner = t
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| Error::Constraint(format!("malformed label {t:?}")))?;
        if inner.is_empty() {
            return Ok(Subset::empty());
        }
        Subset::new(
            inner
                .split(',')
                .map(|x| x.parse::<u8>().map_err(|_| {
                    Error::Constraint(format!("malformed label {t:?}"))
                }))
                .collect::<Result<Vec<u8>>>()?,
        )
    };
    let outcome = parts[2]
        .parse::<u8>()
        .map_err(|_| Error::Constraint(format!("malformed outcome in {s:?}")))?;
    Ok((parse_set(parts[0])?, parse_set(parts[1])?, outcome))
}

impl TryFrom<BTreeMap<String, f64>> for Behavior {
    type Error = Error;
    fn try_from(m: BTreeMap<String, f64>) -> Result<Self> {
        let mut probabilities = BTreeMap::new();
        for (key, value) in m {
            probabilities.insert(key_from_string(&key)?, value);
        }
        Behavior::new(probabilities)
    }
}

impl From<Behavior> for BTreeMap<String, f64> {
    fn from(b: Behavior) -> Self {
        b.probabilities
            .into_iter()
            .map(|((p, m, k), v)| (key_to_string(&p, &m, k), v))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sub(v: &[u8]) -> Subset {
        Subset::new(v.iter().copied()).unwrap()
    }

    #[test]
    fn rejects_unnormalized() {
        let mut m = BTreeMap::new();
        m.insert((sub(&[0]), sub(&[1]), 2u8), 0.9);
        m.insert((sub(&[0]), sub(&[1]), 0u8), 0.2);
        assert!(Behavior::new(m).is_err());
    }

    #[test]
    fn accepts_and_round_trips() {
        let mut m = BTreeMap::new();
        m.insert((sub(&[0]), sub(&[1]), 2u8), 0.25);
        m.insert((sub(&[0]), sub(&[1]), 0u8), 0.75);
        m.insert((sub(&[2]), Subset::empty(), 1u8), 1.0);
        let b = Behavior::new(m).unwrap();
        let text = serde_json::to_string(&b).unwrap();
        let back: Behavior = serde_json::from_str(&text).unwrap();
        assert_eq!(b, back);
    }
}
