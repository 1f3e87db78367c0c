//! Solver-neutral canonical forms for linear and semidefinite programs,
//! plus the real embedding used to hand complex Hermitian blocks to a
//! real-symmetric backend. All other modules express their problems in
//! these forms; the backend is swappable behind [`solve_lp`] / [`solve_sdp`].

mod backend;
pub mod hermitian;

pub use hermitian::{hermitian_embed, HermitianBlockSdp};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cmp {
    Le,
    Ge,
}

/// A sparse linear row over scalar variables.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct LinRow {
    pub coeffs: Vec<(usize, f64)>,
}

impl LinRow {
    pub fn new(coeffs: Vec<(usize, f64)>) -> Self {
        LinRow { coeffs }
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|(i, c)| c * x[*i]).sum()
    }
}

/// Canonical-form linear program.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub sense: Sense,
    /// Sparse objective coefficients plus a constant offset.
    pub objective: Vec<(usize, f64)>,
    pub objective_constant: f64,
    pub eq: Vec<(LinRow, f64)>,
    pub ineq: Vec<(LinRow, f64, Cmp)>,
    /// Per-variable `(lower, upper)`; an empty vector means all free.
    pub bounds: Vec<(Option<f64>, Option<f64>)>,
}

impl LinearProgram {
    pub fn new(num_vars: usize, sense: Sense) -> Self {
        LinearProgram {
            num_vars,
            sense,
            objective: Vec::new(),
            objective_constant: 0.0,
            eq: Vec::new(),
            ineq: Vec::new(),
            bounds: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check_row = |row: &LinRow| -> Result<()> {
            for (i, c) in &row.coeffs {
                if *i >= self.num_vars {
                    return Err(Error::Constraint(format!(
                        "row references variable {i} of {}",
                        self.num_vars
                    )));
                }
                if !c.is_finite() {
                    return Err(Error::Constraint("non-finite coefficient".into()));
                }
            }
            Ok(())
        };
        for (i, _) in &self.objective {
            if *i >= self.num_vars {
                return Err(Error::Constraint(format!(
                    "objective references variable {i} of {}",
                    self.num_vars
                )));
            }
        }
        for (row, rhs) in &self.eq {
            check_row(row)?;
            if !rhs.is_finite() {
                return Err(Error::Constraint("non-finite rhs".into()));
            }
        }
        for (row, rhs, _) in &self.ineq {
            check_row(row)?;
            if !rhs.is_finite() {
                return Err(Error::Constraint("non-finite rhs".into()));
            }
        }
        if !self.bounds.is_empty() && self.bounds.len() != self.num_vars {
            return Err(Error::Constraint(format!(
                "bounds vector has length {}, expected {} or 0",
                self.bounds.len(),
                self.num_vars
            )));
        }
        Ok(())
    }
}

/// Reference to one entry of a symmetric matrix block. `(row, col)` and
/// `(col, row)` address the same variable; a coefficient multiplies the
/// entry value once.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryRef {
    pub block: usize,
    pub row: usize,
    pub col: usize,
}

/// An affine expression over matrix-block entries and free scalar
/// variables.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct LinExpr {
    pub entries: Vec<(EntryRef, f64)>,
    pub scalars: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        LinExpr::default()
    }

    pub fn push_entry(&mut self, block: usize, row: usize, col: usize, coeff: f64) {
        if coeff != 0.0 {
            self.entries.push((EntryRef { block, row, col }, coeff));
        }
    }

    pub fn push_scalar(&mut self, index: usize, coeff: f64) {
        if coeff != 0.0 {
            self.scalars.push((index, coeff));
        }
    }

    pub fn add(&mut self, other: &LinExpr, scale: f64) {
        for (e, c) in &other.entries {
            self.entries.push((*e, c * scale));
        }
        for (s, c) in &other.scalars {
            self.scalars.push((*s, c * scale));
        }
        self.constant += other.constant * scale;
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty() && self.scalars.is_empty()
    }
}

/// Canonical-form semidefinite program: symmetric PSD matrix blocks with
/// declared sizes, free scalar variables, a linear objective and affine
/// equality constraints over entries.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SemidefiniteProgram {
    pub block_sizes: Vec<usize>,
    pub num_scalars: usize,
    pub sense: Sense,
    pub objective: LinExpr,
    pub eqs: Vec<(LinExpr, f64)>,
}

impl SemidefiniteProgram {
    pub fn new(block_sizes: Vec<usize>, num_scalars: usize, sense: Sense) -> Self {
        SemidefiniteProgram {
            block_sizes,
            num_scalars,
            sense,
            objective: LinExpr::new(),
            eqs: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |expr: &LinExpr| -> Result<()> {
            for (e, c) in &expr.entries {
                let size = *self.block_sizes.get(e.block).ok_or_else(|| {
                    Error::Constraint(format!("expression references block {}", e.block))
                })?;
                if e.row >= size || e.col >= size {
                    return Err(Error::Constraint(format!(
                        "entry ({},{}) outside block of size {size}",
                        e.row, e.col
                    )));
                }
                if !c.is_finite() {
                    return Err(Error::Constraint("non-finite coefficient".into()));
                }
            }
            for (s, _) in &expr.scalars {
                if *s >= self.num_scalars {
                    return Err(Error::Constraint(format!(
                        "expression references scalar {s} of {}",
                        self.num_scalars
                    )));
                }
            }
            Ok(())
        };
        check(&self.objective)?;
        for (expr, rhs) in &self.eqs {
            check(expr)?;
            if !rhs.is_finite() {
                return Err(Error::Constraint("non-finite rhs".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

/// Solver tolerances attached to every report.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SolverOptions {
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub max_iter: u32,
    pub verbose: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            feas_tol: 1e-8,
            gap_tol: 1e-8,
            max_iter: 200,
            verbose: false,
        }
    }
}

/// Outcome of one solve. For LPs, `primal` holds the variable vector and
/// `dual` one multiplier per emitted constraint row (equalities, then
/// inequalities, then bound rows). For SDPs, `blocks` holds the primal
/// matrix blocks and `scalars` the free scalars.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub value: f64,
    pub primal: Vec<f64>,
    pub blocks: Vec<DMatrix<f64>>,
    pub scalars: Vec<f64>,
    pub dual: Option<Vec<f64>>,
    pub dual_value: Option<f64>,
    pub dual_ray: Option<Vec<f64>>,
    pub options: SolverOptions,
    pub raw_status: String,
}

impl SolveReport {
    /// Errors unless the solve reached (near-)optimality.
    pub fn require_optimal(self) -> Result<SolveReport> {
        match self.status {
            SolveStatus::Optimal => Ok(self),
            other => Err(Error::SolverFailure {
                status: format!("{other:?} ({})", self.raw_status),
                detail: "expected an optimal solution".into(),
            }),
        }
    }
}

/// Solves a linear program with default options.
pub fn solve_lp(p: &LinearProgram) -> Result<SolveReport> {
    solve_lp_with(p, &SolverOptions::default())
}

pub fn solve_lp_with(p: &LinearProgram, opts: &SolverOptions) -> Result<SolveReport> {
    p.validate()?;
    backend::solve_lp(p, opts)
}

/// Solves a semidefinite program with default options.
pub fn solve_sdp(p: &SemidefiniteProgram) -> Result<SolveReport> {
    solve_sdp_with(p, &SolverOptions::default())
}

pub fn solve_sdp_with(p: &SemidefiniteProgram, opts: &SolverOptions) -> Result<SolveReport> {
    p.validate()?;
    backend::solve_sdp(p, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn lp_box_maximum() {
        // max x s.t. x <= 1, x >= 0
        let mut p = LinearProgram::new(1, Sense::Maximize);
        p.objective = vec![(0, 1.0)];
        p.bounds = vec![(Some(0.0), Some(1.0))];
        let r = solve_lp(&p).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(r.primal[0], 1.0, epsilon = 1e-7);
    }

    #[test]
    fn lp_infeasible_surfaces_dual_ray() {
        // x >= 0, x <= -1
        let mut p = LinearProgram::new(1, Sense::Maximize);
        p.objective = vec![(0, 1.0)];
        p.ineq = vec![(LinRow::new(vec![(0, 1.0)]), -1.0, Cmp::Le)];
        p.bounds = vec![(Some(0.0), None)];
        let r = solve_lp(&p).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(r.dual_ray.is_some());
    }

    #[test]
    fn lp_unbounded() {
        let mut p = LinearProgram::new(1, Sense::Maximize);
        p.objective = vec![(0, 1.0)];
        p.bounds = vec![(Some(0.0), None)];
        let r = solve_lp(&p).unwrap();
        assert_eq!(r.status, SolveStatus::Unbounded);
    }

    #[test]
    fn lp_strong_duality() {
        // max 3x + 2y s.t. x + y <= 4, x <= 2, x,y >= 0  -> 3*2 + 2*2 = 10
        let mut p = LinearProgram::new(2, Sense::Maximize);
        p.objective = vec![(0, 3.0), (1, 2.0)];
        p.ineq = vec![
            (LinRow::new(vec![(0, 1.0), (1, 1.0)]), 4.0, Cmp::Le),
            (LinRow::new(vec![(0, 1.0)]), 2.0, Cmp::Le),
        ];
        p.bounds = vec![(Some(0.0), None), (Some(0.0), None)];
        let r = solve_lp(&p).unwrap();
        assert_abs_diff_eq!(r.value, 10.0, epsilon = 1e-6);
        let dual_value = r.dual_value.unwrap();
        assert_abs_diff_eq!(r.value, dual_value, epsilon = 1e-7 * 10.0);
    }

    #[test]
    fn sdp_trace_maximum() {
        // max tr(X), X psd 2x2, X11 + X22 = 1  -> 1
        let mut p = SemidefiniteProgram::new(vec![2], 0, Sense::Maximize);
        p.objective.push_entry(0, 0, 0, 1.0);
        p.objective.push_entry(0, 1, 1, 1.0);
        let mut row = LinExpr::new();
        row.push_entry(0, 0, 0, 1.0);
        row.push_entry(0, 1, 1, 1.0);
        p.eqs.push((row, 1.0));
        let r = solve_sdp(&p).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-7);
        let x = &r.blocks[0];
        assert_abs_diff_eq!(x[(0, 0)] + x[(1, 1)], 1.0, epsilon = 1e-7);
    }

    #[test]
    fn sdp_off_diagonal_is_psd_bounded() {
        // max X12 s.t. X11 = X22 = 1, X psd  -> 1 at X = ones
        let mut p = SemidefiniteProgram::new(vec![2], 0, Sense::Maximize);
        p.objective.push_entry(0, 0, 1, 1.0);
        let mut r1 = LinExpr::new();
        r1.push_entry(0, 0, 0, 1.0);
        let mut r2 = LinExpr::new();
        r2.push_entry(0, 1, 1, 1.0);
        p.eqs.push((r1, 1.0));
        p.eqs.push((r2, 1.0));
        let r = solve_sdp(&p).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(r.blocks[0][(0, 1)], 1.0, epsilon = 1e-6);
    }

    #[test]
    fn sdp_scalar_variables_participate() {
        // max t s.t. t = X11, X11 + X22 = 1, X psd -> 1
        let mut p = SemidefiniteProgram::new(vec![2], 1, Sense::Maximize);
        p.objective.push_scalar(0, 1.0);
        let mut link = LinExpr::new();
        link.push_scalar(0, 1.0);
        link.push_entry(0, 0, 0, -1.0);
        p.eqs.push((link, 0.0));
        let mut tr = LinExpr::new();
        tr.push_entry(0, 0, 0, 1.0);
        tr.push_entry(0, 1, 1, 1.0);
        p.eqs.push((tr, 1.0));
        let r = solve_sdp(&p).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(r.scalars[0], 1.0, epsilon = 1e-6);
    }
}
