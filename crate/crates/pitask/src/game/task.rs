use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::Subset;
use crate::{Error, Result};

/// The combinatorial task `T_{n,m}`: the referee hides a 1 in an n-bit
/// string, reveals `m` zero positions to Alice and the remaining `n-1-m`
/// zero positions to Bob.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TaskSpec {
    n: u8,
    m: u8,
}

impl TaskSpec {
    /// Validates `1 <= m <= n-1`; Bob's outcome set (size `m+1`) must be
    /// nonempty and the game informationally complete.
    pub fn new(n: u8, m: u8) -> Result<Self> {
        if n < 2 {
            return Err(Error::Constraint(format!("need n >= 2, got n={n}")));
        }
        if m < 1 || m > n - 1 {
            return Err(Error::Constraint(format!(
                "need 1 <= m <= n-1, got n={n}, m={m}"
            )));
        }
        Ok(TaskSpec { n, m })
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn m(&self) -> u8 {
        self.m
    }

    /// Number of outcomes of each measurement.
    pub fn outcome_count(&self) -> usize {
        usize::from(self.m) + 1
    }

    pub fn labels(&self) -> TaskLabels {
        TaskLabels::new(*self)
    }
}

impl std::fmt::Display for TaskSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "T_{{{},{}}}", self.n, self.m)
    }
}

/// One game instance: `s` is the position of the 1, `a` the zero positions
/// revealed to Alice, `b` the zero positions revealed to Bob. The three
/// parts partition `{0, .., n-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub s: u8,
    pub a: Subset,
    pub b: Subset,
}

/// Enumerates all scenario rows of a task in lexicographic order of
/// `(s, a)`. The row count is `n * C(n-1, m)`.
pub fn enumerate_scenarios(task: &TaskSpec) -> Vec<ScenarioRow> {
    let n = task.n();
    let m = usize::from(task.m());
    let mut rows = Vec::new();
    for s in 0..n {
        let zeros: Vec<u8> = (0..n).filter(|&i| i != s).collect();
        for a in zeros.iter().copied().combinations(m) {
            let a = Subset::new(a).expect("combinations are duplicate-free");
            let b = Subset::new(
                zeros.iter().copied().filter(|i| !a.contains(*i)),
            )
            .expect("complement is duplicate-free");
            rows.push(ScenarioRow { s, a, b });
        }
    }
    rows
}

/// The ordered label universe of a task: every m-subset is a preparation
/// label, every (n-1-m)-subset a measurement label, and the outcome set of
/// a measurement `b` consists of the `m+1` indices outside `b`.
#[derive(Clone, Debug)]
pub struct TaskLabels {
    task: TaskSpec,
    preps: Vec<Subset>,
    meas: Vec<Subset>,
    outcomes: Vec<Vec<u8>>,
}

impl TaskLabels {
    pub fn new(task: TaskSpec) -> Self {
        let n = task.n();
        let preps = subsets_of_size(n, usize::from(task.m()));
        let meas = subsets_of_size(n, usize::from(n - 1 - task.m()));
        let outcomes = meas
            .iter()
            .map(|b| b.complement(n).iter().collect())
            .collect();
        TaskLabels { task, preps, meas, outcomes }
    }

    pub fn task(&self) -> &TaskSpec {
        &self.task
    }

    pub fn preparations(&self) -> &[Subset] {
        &self.preps
    }

    pub fn measurements(&self) -> &[Subset] {
        &self.meas
    }

    /// Outcome labels of measurement index `j`, ascending.
    pub fn outcomes(&self, j: usize) -> &[u8] {
        &self.outcomes[j]
    }

    pub fn prep_index(&self, a: &Subset) -> Result<usize> {
        self.preps
            .binary_search(a)
            .map_err(|_| Error::Lookup(format!("preparation {a} not in {}", self.task)))
    }

    pub fn meas_index(&self, b: &Subset) -> Result<usize> {
        self.meas
            .binary_search(b)
            .map_err(|_| Error::Lookup(format!("measurement {b} not in {}", self.task)))
    }

    pub fn outcome_index(&self, j: usize, k: u8) -> Result<usize> {
        self.outcomes[j]
            .binary_search(&k)
            .map_err(|_| {
                Error::Lookup(format!(
                    "outcome {k} not available for measurement {}",
                    self.meas[j]
                ))
            })
    }
}

fn subsets_of_size(n: u8, size: usize) -> Vec<Subset> {
    if size == 0 {
        return vec![Subset::empty()];
    }
    (0..n)
        .combinations(size)
        .map(|c| Subset::new(c).expect("combinations are duplicate-free"))
        .collect()
}
