//! Exhaustive search over deterministic classical strategies with a c-bit
//! message.
//!
//! The search enumerates encodings only (`2^(c * |preparations|)` of them)
//! and fills each decoding cell `(measurement, message)` with the majority
//! answer, which is independently optimal per cell. Ties break to the
//! smallest outcome index and encodings are visited in lexicographic order,
//! so results are reproducible.

use std::collections::BTreeMap;

use num_rational::Rational64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::game::{enumerate_scenarios, Behavior, Subset, TaskSpec};
use crate::{Error, Result};

/// Default ceiling on the number of encodings visited.
pub const DEFAULT_BUDGET: u64 = 1 << 24;

/// A deterministic strategy: Alice's message per preparation and Bob's
/// guess per (measurement, message) cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalStrategy {
    pub message_bits: u32,
    pub encoding: BTreeMap<Subset, u32>,
    pub decoding: BTreeMap<(Subset, u32), u8>,
}

impl ClassicalStrategy {
    /// Checks labels, message range and that every decoding output lies in
    /// the outcome set of its measurement.
    pub fn validate_against(&self, task: &TaskSpec) -> Result<()> {
        let labels = task.labels();
        let max_msg = 1u32 << self.message_bits;
        for prep in labels.preparations() {
            let msg = self.encoding.get(prep).ok_or_else(|| {
                Error::Lookup(format!("encoding missing preparation {prep}"))
            })?;
            if *msg >= max_msg {
                return Err(Error::Constraint(format!(
                    "message {msg} outside 0..{max_msg}"
                )));
            }
        }
        for ((meas, msg), outcome) in &self.decoding {
            let j = labels.meas_index(meas)?;
            if *msg >= max_msg {
                return Err(Error::Constraint(format!(
                    "decoding cell message {msg} outside 0..{max_msg}"
                )));
            }
            labels.outcome_index(j, *outcome)?;
        }
        Ok(())
    }

    pub fn guess(&self, meas: &Subset, message: u32) -> Result<u8> {
        self.decoding
            .get(&(meas.clone(), message))
            .copied()
            .ok_or_else(|| Error::Lookup(format!("no decoding for ({meas}, {message})")))
    }

    /// Renders the three-table layout: encoding, decoding, and the scenario
    /// table with erroneous guesses marked `*`.
    pub fn render(&self, task: &TaskSpec) -> String {
        let n = task.n();
        let labels = task.labels();
        let mut out = String::new();
        out.push_str("a -> r(a)\n");
        for prep in labels.preparations() {
            let msg = self.encoding.get(prep).copied().unwrap_or(0);
            out.push_str(&format!("  {}  {}\n", prep.to_bitstring(n), msg));
        }
        out.push_str("\nb | g(b, r)\n");
        let max_msg = 1u32 << self.message_bits;
        for meas in labels.measurements() {
            out.push_str(&format!("  {}", meas.to_bitstring(n)));
            for msg in 0..max_msg {
                match self.decoding.get(&(meas.clone(), msg)) {
                    Some(k) => out.push_str(&format!("  {k}")),
                    None => out.push_str("  -"),
                }
            }
            out.push('\n');
        }
        out.push_str("\ns     a     b     r  g\n");
        for row in enumerate_scenarios(task) {
            let msg = self.encoding.get(&row.a).copied().unwrap_or(0);
            let guess = self.decoding.get(&(row.b.clone(), msg)).copied();
            let mark = if guess == Some(row.s) { " " } else { "*" };
            let s_set = Subset::new([row.s]).expect("singleton");
            out.push_str(&format!(
                "  {}  {}  {}  {}  {}{}\n",
                s_set.to_bitstring(n),
                row.a.to_bitstring(n),
                row.b.to_bitstring(n),
                msg,
                guess.map_or("-".to_string(), |g| g.to_string()),
                mark,
            ));
        }
        out
    }
}

struct SearchSpace {
    preps: Vec<Subset>,
    meas: Vec<Subset>,
    outcomes: Vec<Vec<u8>>,
    /// per row: (prep index, meas index, outcome position)
    row_index: Vec<(usize, usize, usize)>,
}

impl SearchSpace {
    fn new(task: &TaskSpec) -> Self {
        let labels = task.labels();
        let rows = enumerate_scenarios(task);
        let row_index = rows
            .iter()
            .map(|r| {
                let p = labels.prep_index(&r.a).expect("scenario labels exist");
                let j = labels.meas_index(&r.b).expect("scenario labels exist");
                let k = labels.outcome_index(j, r.s).expect("scenario labels exist");
                (p, j, k)
            })
            .collect();
        SearchSpace {
            preps: labels.preparations().to_vec(),
            meas: labels.measurements().to_vec(),
            outcomes: (0..labels.measurements().len())
                .map(|j| labels.outcomes(j).to_vec())
                .collect(),
            row_index,
        }
    }

    /// Score of one encoding with cell-wise majority decoding.
    fn score_encoding(&self, enc: &[u32], messages: u32) -> (u32, Vec<Vec<usize>>) {
        let n_meas = self.meas.len();
        let n_out = self.outcomes[0].len();
        // tally[j][msg][k] = number of rows answered correctly by outcome k
        let mut tally = vec![0u32; n_meas * messages as usize * n_out];
        for &(p, j, k) in &self.row_index {
            let msg = enc[p] as usize;
            tally[(j * messages as usize + msg) * n_out + k] += 1;
        }
        let mut total = 0u32;
        let mut cells = vec![vec![0usize; messages as usize]; n_meas];
        for j in 0..n_meas {
            for msg in 0..messages as usize {
                let base = (j * messages as usize + msg) * n_out;
                let mut best_k = 0usize;
                let mut best = tally[base];
                for k in 1..n_out {
                    if tally[base + k] > best {
                        best = tally[base + k];
                        best_k = k;
                    }
                }
                total += best;
                cells[j][msg] = best_k;
            }
        }
        (total, cells)
    }
}

/// Exact maximum over all deterministic strategies of the number of
/// scenario rows guessed correctly, with an optimal strategy attaining it.
pub fn optimal_classical(
    task: &TaskSpec,
    message_bits: u32,
) -> Result<(u32, ClassicalStrategy)> {
    optimal_classical_with_budget(task, message_bits, DEFAULT_BUDGET)
}

pub fn optimal_classical_with_budget(
    task: &TaskSpec,
    message_bits: u32,
    budget: u64,
) -> Result<(u32, ClassicalStrategy)> {
    if message_bits == 0 {
        return Err(Error::Constraint("need message_bits >= 1".into()));
    }
    let space = SearchSpace::new(task);
    let n_preps = space.preps.len();
    let messages: u32 = 1 << message_bits;
    let total_encodings = (u64::from(messages))
        .checked_pow(n_preps as u32)
        .filter(|&t| t <= budget)
        .ok_or_else(|| {
            Error::Budget(format!(
                "{messages}^{n_preps} encodings exceed budget {budget}"
            ))
        })?;

    let decode_encoding = |mut index: u64| -> Vec<u32> {
        // first preparation is the most significant digit, so increasing
        // index order is lexicographic order of encodings
        let mut enc = vec![0u32; n_preps];
        for slot in (0..n_preps).rev() {
            enc[slot] = (index % u64::from(messages)) as u32;
            index /= u64::from(messages);
        }
        enc
    };

    let best = (0..total_encodings)
        .into_par_iter()
        .map(|idx| {
            let enc = decode_encoding(idx);
            let (score, _) = space.score_encoding(&enc, messages);
            (score, idx)
        })
        .reduce(
            || (0, u64::MAX),
            |a, b| {
                // max score; ties prefer the lexicographically smallest encoding
                match a.0.cmp(&b.0) {
                    std::cmp::Ordering::Greater => a,
                    std::cmp::Ordering::Less => b,
                    std::cmp::Ordering::Equal => {
                        if a.1 <= b.1 {
                            a
                        } else {
                            b
                        }
                    }
                }
            },
        );

    let enc = decode_encoding(best.1);
    let (score, cells) = space.score_encoding(&enc, messages);
    debug_assert_eq!(score, best.0);

    let encoding: BTreeMap<Subset, u32> = space
        .preps
        .iter()
        .cloned()
        .zip(enc.iter().copied())
        .collect();
    let mut decoding = BTreeMap::new();
    for (j, meas) in space.meas.iter().enumerate() {
        for msg in 0..messages {
            decoding.insert(
                (meas.clone(), msg),
                space.outcomes[j][cells[j][msg as usize]],
            );
        }
    }
    let strategy = ClassicalStrategy { message_bits, encoding, decoding };
    strategy.validate_against(task)?;
    Ok((score, strategy))
}

/// The deterministic behavior induced by a strategy:
/// `p(k | a, b) = 1` iff `k = g(b, r(a))`.
pub fn strategy_behavior(task: &TaskSpec, strategy: &ClassicalStrategy) -> Result<Behavior> {
    strategy.validate_against(task)?;
    let labels = task.labels();
    let mut map = BTreeMap::new();
    for prep in labels.preparations() {
        let msg = strategy.encoding[prep];
        for (j, meas) in labels.measurements().iter().enumerate() {
            let guess = strategy.guess(meas, msg)?;
            for &k in labels.outcomes(j) {
                map.insert(
                    (prep.clone(), meas.clone(), k),
                    if k == guess { 1.0 } else { 0.0 },
                );
            }
        }
    }
    Behavior::new(map)
}

/// Minimum over scenario rows of the correctness indicator; 0 or 1 for
/// deterministic strategies.
pub fn worst_case_success(task: &TaskSpec, strategy: &ClassicalStrategy) -> Result<Rational64> {
    strategy.validate_against(task)?;
    for row in enumerate_scenarios(task) {
        let msg = strategy.encoding[&row.a];
        if strategy.guess(&row.b, msg)? != row.s {
            return Ok(Rational64::new(0, 1));
        }
    }
    Ok(Rational64::new(1, 1))
}

/// Number of rows a strategy answers correctly.
pub fn correct_count(task: &TaskSpec, strategy: &ClassicalStrategy) -> Result<u32> {
    strategy.validate_against(task)?;
    let mut count = 0;
    for row in enumerate_scenarios(task) {
        let msg = strategy.encoding[&row.a];
        if strategy.guess(&row.b, msg)? == row.s {
            count += 1;
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::canonical_metric;

    #[test]
    fn t31_one_bit_scores_five_of_six() {
        let task = TaskSpec::new(3, 1).unwrap();
        let (count, strategy) = optimal_classical(&task, 1).unwrap();
        assert_eq!(count, 5);
        assert_eq!(correct_count(&task, &strategy).unwrap(), 5);
    }

    #[test]
    fn t41_one_bit_scores_ten_of_twelve() {
        let task = TaskSpec::new(4, 1).unwrap();
        let (count, _) = optimal_classical(&task, 1).unwrap();
        assert_eq!(count, 10);
    }

    #[test]
    fn t42_one_bit_scores_eight_of_twelve() {
        let task = TaskSpec::new(4, 2).unwrap();
        let (count, _) = optimal_classical(&task, 1).unwrap();
        assert_eq!(count, 8);
    }

    #[test]
    fn t41_two_bits_is_perfect() {
        let task = TaskSpec::new(4, 1).unwrap();
        let (count, strategy) = optimal_classical(&task, 2).unwrap();
        assert_eq!(count, 12);
        assert_eq!(worst_case_success(&task, &strategy).unwrap(), Rational64::new(1, 1));
    }

    #[test]
    fn one_bit_worst_case_is_zero() {
        let task = TaskSpec::new(3, 1).unwrap();
        let (_, strategy) = optimal_classical(&task, 1).unwrap();
        assert_eq!(worst_case_success(&task, &strategy).unwrap(), Rational64::new(0, 1));
    }

    #[test]
    fn behavior_matches_count() {
        for (n, m, expect) in [(3u8, 1u8, 5.0), (4, 1, 10.0), (4, 2, 8.0)] {
            let task = TaskSpec::new(n, m).unwrap();
            let (_, strategy) = optimal_classical(&task, 1).unwrap();
            let behavior = strategy_behavior(&task, &strategy).unwrap();
            let value = canonical_metric(&task).evaluate(&behavior).unwrap();
            assert!((value - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn budget_guard_trips() {
        let task = TaskSpec::new(4, 2).unwrap();
        assert!(matches!(
            optimal_classical_with_budget(&task, 1, 16),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn monotone_in_message_bits_until_perfect() {
        let task = TaskSpec::new(3, 1).unwrap();
        let (c1, _) = optimal_classical(&task, 1).unwrap();
        let (c2, _) = optimal_classical(&task, 2).unwrap();
        assert!(c2 >= c1);
        // ceil(log2 C(3,1)) = 2 bits identify Alice's input exactly
        assert_eq!(c2, 6);
    }

    #[test]
    fn t31_brute_force_oracle_agrees() {
        // full enumeration over encodings AND decodings for T_{3,1}, 1 bit
        let task = TaskSpec::new(3, 1).unwrap();
        let labels = task.labels();
        let rows = enumerate_scenarios(&task);
        let mut best = 0u32;
        for enc_bits in 0u32..8 {
            let enc: Vec<u32> = (0..3).map(|p| (enc_bits >> p) & 1).collect();
            // each of 3 measurements has 2 cells with 2 outcome choices: 4^3
            for dec_bits in 0u32..4096 {
                let mut score = 0u32;
                for row in &rows {
                    let p = labels.prep_index(&row.a).unwrap();
                    let j = labels.meas_index(&row.b).unwrap();
                    let msg = enc[p];
                    let cell = 2 * j as u32 + msg;
                    let choice = (dec_bits >> (2 * cell)) & 1;
                    let outcome = labels.outcomes(j)[choice as usize];
                    if outcome == row.s {
                        score += 1;
                    }
                }
                best = best.max(score);
            }
        }
        let (count, _) = optimal_classical(&task, 1).unwrap();
        assert_eq!(count, best);
    }

    #[test]
    fn majority_cells_resist_perturbation() {
        // replacing any decoding cell never increases the count
        let task = TaskSpec::new(4, 1).unwrap();
        let labels = task.labels();
        let (count, strategy) = optimal_classical(&task, 1).unwrap();
        for (j, meas) in labels.measurements().iter().enumerate() {
            for msg in 0..2u32 {
                for &alt in labels.outcomes(j) {
                    let mut perturbed = strategy.clone();
                    perturbed.decoding.insert((meas.clone(), msg), alt);
                    assert!(correct_count(&task, &perturbed).unwrap() <= count);
                }
            }
        }
    }

    #[test]
    fn render_marks_errors() {
        let task = TaskSpec::new(3, 1).unwrap();
        let (_, strategy) = optimal_classical(&task, 1).unwrap();
        let table = strategy.render(&task);
        assert_eq!(table.matches('*').count(), 1);
    }
}
