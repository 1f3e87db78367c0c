//! Dimension-independent outer bounds from the first level of the unitary
//! moment-matrix hierarchy.
//!
//! Every binary effect decomposes as `M(1) = id/2 + (U + U')/4` for some
//! unitary `U`; measurements with more outcomes get one unitary per
//! outcome. One moment matrix per preparation is indexed by the monomials
//! `{id} + {U, U'}` over all modeled unitaries and constrained to be PSD
//! with unit diagonal. Probabilities enter as `4 (p(k|i,j) - 1/2)` through
//! the first row; the resulting SDP bounds every quantum behavior
//! satisfying the declared operational equivalences, at any Hilbert-space
//! dimension.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::conic::{HermitianBlockSdp, LinExpr, Sense, SolveStatus, SolverOptions};
use crate::game::{Behavior, OperationalEquivalence, Subset, SuccessMetric, TaskLabels, TaskSpec};
use crate::{Error, Result};

/// One monomial of the level-1 basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Monomial {
    Identity,
    Unitary { meas: Subset, outcome: u8, adjoint: bool },
}

impl std::fmt::Display for Monomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Monomial::Identity => write!(f, "id"),
            Monomial::Unitary { meas, outcome, adjoint } => {
                write!(f, "U[{meas};{outcome}]{}", if *adjoint { "'" } else { "" })
            }
        }
    }
}

/// Ordered monomial basis: identity first, then `U, U'` per modeled
/// unitary. The order is stable and extensible to longer monomials.
#[derive(Clone, Debug, Serialize)]
pub struct MonomialBasis {
    pub monomials: Vec<Monomial>,
}

impl MonomialBasis {
    fn for_task(task: &TaskSpec) -> Self {
        let labels = task.labels();
        let mut monomials = vec![Monomial::Identity];
        for (j, meas) in labels.measurements().iter().enumerate() {
            for &outcome in modeled_outcomes(labels.outcomes(j)) {
                for adjoint in [false, true] {
                    monomials.push(Monomial::Unitary {
                        meas: meas.clone(),
                        outcome,
                        adjoint,
                    });
                }
            }
        }
        MonomialBasis { monomials }
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }
}

/// Binary measurements are modeled by a single unitary attached to the
/// first outcome; larger outcome sets get one unitary each.
fn modeled_outcomes(outcomes: &[u8]) -> &[u8] {
    if outcomes.len() == 2 {
        &outcomes[..1]
    } else {
        outcomes
    }
}

/// Assembled level-1 program, kept for audit: basis labels, block owners
/// and the constraint count of the underlying SDP.
#[derive(Clone, Debug, Serialize)]
pub struct MomentMatrixProgram {
    pub basis_labels: Vec<String>,
    pub preparations: Vec<Subset>,
    pub side: usize,
    pub constraint_count: usize,
}

/// Number of moment blocks and their side length for a task.
pub fn moment_size(task: &TaskSpec) -> (usize, usize) {
    let labels = task.labels();
    let blocks = labels.preparations().len();
    let side = MonomialBasis::for_task(task).len();
    (blocks, side)
}

struct Assembly {
    builder: HermitianBlockSdp,
    basis: MonomialBasis,
    preps: Vec<Subset>,
    blocks: Vec<usize>,
    /// (meas index, outcome) -> basis index of the non-adjoint unitary
    unitary_index: BTreeMap<(usize, u8), usize>,
}

impl Assembly {
    fn probability_expr(
        &self,
        labels: &TaskLabels,
        prep_block: usize,
        j: usize,
        k: u8,
    ) -> Result<LinExpr> {
        let outcomes = labels.outcomes(j);
        let mut expr = LinExpr::new();
        if outcomes.len() == 2 && k == outcomes[1] {
            // second effect of a binary POVM: p = 1 - p_first
            let first = self.probability_expr(labels, prep_block, j, outcomes[0])?;
            expr.constant = 1.0;
            expr.add(&first, -1.0);
            return Ok(expr);
        }
        let u = *self.unitary_index.get(&(j, k)).ok_or_else(|| {
            Error::Lookup(format!("no modeled unitary for measurement {j} outcome {k}"))
        })?;
        expr.constant = 0.5;
        expr.add(&self.builder.re(prep_block, 0, u), 0.25);
        expr.add(&self.builder.re(prep_block, 0, u + 1), 0.25);
        Ok(expr)
    }
}

fn assemble(
    task: &TaskSpec,
    prep_equivalences: &[OperationalEquivalence],
    effect_equivalences: &[OperationalEquivalence],
) -> Result<Assembly> {
    let labels = task.labels();
    let basis = MonomialBasis::for_task(task);
    let side = basis.len();

    let mut unitary_index = BTreeMap::new();
    for (idx, mono) in basis.monomials.iter().enumerate() {
        if let Monomial::Unitary { meas, outcome, adjoint: false } = mono {
            unitary_index.insert((labels.meas_index(meas)?, *outcome), idx);
        }
    }

    let mut builder = HermitianBlockSdp::new(Sense::Maximize);
    let preps: Vec<Subset> = labels.preparations().to_vec();
    let blocks: Vec<usize> = preps.iter().map(|_| builder.add_block(side)).collect();

    for &b in &blocks {
        // unit diagonal
        for t in 0..side {
            builder.push_eq(builder.re(b, t, t), 1.0);
        }
        // probability entries are real: Im(G_{id,U} + G_{id,U'}) = 0
        for &u in unitary_index.values() {
            let mut imag = builder.im(b, 0, u);
            imag.add(&builder.im(b, 0, u + 1), 1.0);
            builder.push_eq(imag, 0.0);
        }
        // POVM completeness for measurements modeled with one unitary per
        // outcome: sum_k (U_k + U_k') = (4 - 2K) id, paired against every
        // row monomial
        for (j, _) in labels.measurements().iter().enumerate() {
            let outcomes = labels.outcomes(j);
            if outcomes.len() == 2 {
                continue;
            }
            let factor = 4.0 - 2.0 * outcomes.len() as f64;
            for row in 0..side {
                let mut re = LinExpr::new();
                let mut im = LinExpr::new();
                for &k in outcomes {
                    let u = unitary_index[&(j, k)];
                    re.add(&builder.re(b, row, u), 1.0);
                    re.add(&builder.re(b, row, u + 1), 1.0);
                    im.add(&builder.im(b, row, u), 1.0);
                    im.add(&builder.im(b, row, u + 1), 1.0);
                }
                re.add(&builder.re(b, row, 0), -factor);
                im.add(&builder.im(b, row, 0), -factor);
                builder.push_eq(re, 0.0);
                builder.push_eq(im, 0.0);
            }
        }
    }

    // preparation equivalences: signed combinations of whole blocks vanish
    for eq in prep_equivalences {
        if !eq.is_preparation() {
            return Err(Error::Constraint(
                "prep_equivalences must contain preparation equivalences".into(),
            ));
        }
        let weighted: Vec<(usize, f64)> = eq
            .prep_signed_weights()
            .iter()
            .map(|(label, w)| Ok((blocks[labels.prep_index(label)?], *w)))
            .collect::<Result<_>>()?;
        builder.constrain_block_combination(&weighted);
    }

    // effect equivalences: expand each effect through its unitary
    // parametrization and pair against every row monomial of every block
    for eq in effect_equivalences {
        if eq.is_preparation() {
            return Err(Error::Constraint(
                "effect_equivalences must contain effect equivalences".into(),
            ));
        }
        let mut id_coeff = 0.0;
        let mut unit_coeffs: BTreeMap<usize, f64> = BTreeMap::new();
        for ((meas, outcome), w) in eq.effect_signed_weights() {
            let j = labels.meas_index(&meas)?;
            let outcomes = labels.outcomes(j);
            labels.outcome_index(j, outcome)?;
            id_coeff += 0.5 * w;
            if outcomes.len() == 2 && outcome == outcomes[1] {
                let u = unitary_index[&(j, outcomes[0])];
                *unit_coeffs.entry(u).or_insert(0.0) -= 0.25 * w;
            } else {
                let u = unitary_index[&(j, outcome)];
                *unit_coeffs.entry(u).or_insert(0.0) += 0.25 * w;
            }
        }
        for &b in &blocks {
            for row in 0..side {
                let mut re = LinExpr::new();
                let mut im = LinExpr::new();
                re.add(&builder.re(b, row, 0), id_coeff);
                im.add(&builder.im(b, row, 0), id_coeff);
                for (&u, &c) in &unit_coeffs {
                    re.add(&builder.re(b, row, u), c);
                    re.add(&builder.re(b, row, u + 1), c);
                    im.add(&builder.im(b, row, u), c);
                    im.add(&builder.im(b, row, u + 1), c);
                }
                builder.push_eq(re, 0.0);
                builder.push_eq(im, 0.0);
            }
        }
    }

    Ok(Assembly { builder, basis, preps, blocks, unitary_index })
}

/// Level-1 outer bound on a success metric: the SDP optimum over all
/// moment matrices consistent with the task and the declared equivalences.
/// Returns the bound together with the audited program description.
pub fn outer_bound_u1(
    task: &TaskSpec,
    metric: &SuccessMetric,
    prep_equivalences: &[OperationalEquivalence],
    effect_equivalences: &[OperationalEquivalence],
    opts: &SolverOptions,
) -> Result<(f64, MomentMatrixProgram)> {
    metric.validate_against(task)?;
    let labels = task.labels();
    let mut assembly = assemble(task, prep_equivalences, effect_equivalences)?;

    let mut objective = LinExpr::new();
    objective.constant = metric.constant_offset();
    for ((prep, meas, outcome), w) in metric.weights() {
        let i = labels.prep_index(prep)?;
        let j = labels.meas_index(meas)?;
        let p = assembly.probability_expr(&labels, assembly.blocks[i], j, *outcome)?;
        objective.add(&p, *w);
    }
    assembly.builder.set_objective(objective);

    let report = assembly.builder.solve(opts)?;
    let program = MomentMatrixProgram {
        basis_labels: assembly.basis.monomials.iter().map(|m| m.to_string()).collect(),
        preparations: assembly.preps.clone(),
        side: assembly.basis.len(),
        constraint_count: assembly.builder.program().eqs.len(),
    };
    match report.status {
        SolveStatus::Optimal => Ok((report.value, program)),
        SolveStatus::Infeasible => Err(Error::InfeasibleConstraints(
            "moment-matrix constraints are infeasible".into(),
        )),
        other => Err(Error::SolverFailure {
            status: format!("{other:?} ({})", report.raw_status),
            detail: "hierarchy solve failed".into(),
        }),
    }
}

/// Feasibility witness: pins the probability entries to a concrete
/// behavior and checks that a level-1 moment matrix family exists. Every
/// behavior of a valid quantum model satisfying the equivalences must pass.
pub fn outer_feasible(
    task: &TaskSpec,
    behavior: &Behavior,
    prep_equivalences: &[OperationalEquivalence],
    effect_equivalences: &[OperationalEquivalence],
    opts: &SolverOptions,
) -> Result<bool> {
    let labels = task.labels();
    let mut assembly = assemble(task, prep_equivalences, effect_equivalences)?;
    for (i, prep) in labels.preparations().iter().enumerate() {
        for (j, meas) in labels.measurements().iter().enumerate() {
            for &k in modeled_outcomes(labels.outcomes(j)) {
                let expr = assembly.probability_expr(&labels, assembly.blocks[i], j, k)?;
                let p = behavior.probability(prep, meas, k)?;
                let mut pinned = expr;
                pinned.constant -= p;
                assembly.builder.push_eq(pinned, 0.0);
            }
        }
    }
    assembly.builder.set_objective(LinExpr::new());
    let report = assembly.builder.solve(opts)?;
    match report.status {
        SolveStatus::Optimal => Ok(true),
        SolveStatus::Infeasible => Ok(false),
        other => Err(Error::SolverFailure {
            status: format!("{other:?} ({})", report.raw_status),
            detail: "hierarchy feasibility check failed".into(),
        }),
    }
}
