use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A sorted set of bit-string indices, used as preparation and measurement
/// labels. `{0, 2}` over length 4 renders as the bit string `"1010"`.
///
/// Labels are kept as canonical sorted index sets internally; bit-string
/// rendering is a formatting concern at the CLI/JSON boundary.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct Subset(Vec<u8>);

impl Subset {
    /// Builds a subset from arbitrary indices, sorting and rejecting
    /// duplicates.
    pub fn new(indices: impl IntoIterator<Item = u8>) -> Result<Self> {
        let mut v: Vec<u8> = indices.into_iter().collect();
        v.sort_unstable();
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Constraint(format!(
                "duplicate index in subset {v:?}"
            )));
        }
        Ok(Subset(v))
    }

    pub fn empty() -> Self {
        Subset(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, idx: u8) -> bool {
        self.0.binary_search(&idx).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    /// Indices in `0..n` not contained in this subset.
    pub fn complement(&self, n: u8) -> Self {
        Subset((0..n).filter(|i| !self.contains(*i)).collect())
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        Self::new(self.iter().chain(other.iter()))
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.iter().all(|i| !other.contains(i))
    }

    /// Renders as a bit string of length `n` with 1s at the member indices.
    pub fn to_bitstring(&self, n: u8) -> String {
        (0..n)
            .map(|i| if self.contains(i) { '1' } else { '0' })
            .collect()
    }

    /// Parses a bit string such as `"0110"` into the set of 1-positions.
    pub fn from_bitstring(s: &str) -> Result<Self> {
        let mut idx = Vec::new();
        for (i, c) in s.chars().enumerate() {
            match c {
                '1' => idx.push(u8::try_from(i).map_err(|_| {
                    Error::Constraint(format!("bit string too long: {s}"))
                })?),
                '0' => {}
                _ => {
                    return Err(Error::Constraint(format!(
                        "invalid character {c:?} in bit string {s:?}"
                    )))
                }
            }
        }
        Ok(Subset(idx))
    }
}

impl TryFrom<Vec<u8>> for Subset {
    type Error = Error;
    fn try_from(v: Vec<u8>) -> Result<Self> {
        Subset::new(v)
    }
}

impl From<Subset> for Vec<u8> {
    fn from(s: Subset) -> Vec<u8> {
        s.0
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","))
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}
