//! Lowering of the canonical forms onto the Clarabel interior-point solver.
//!
//! Clarabel solves `min q'x  s.t.  Ax + s = b, s in K`. Equality rows map
//! to the zero cone, inequalities and bounds to the nonnegative cone, and
//! each symmetric block to a scaled-triangle PSD cone.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use nalgebra::DMatrix;

use super::{
    Cmp, LinearProgram, SemidefiniteProgram, Sense, SolveReport, SolveStatus, SolverOptions,
};
use crate::{Error, Result};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Triplet accumulator for a CSC matrix; duplicate entries are summed.
struct TripletMatrix {
    nrows: usize,
    ncols: usize,
    triplets: Vec<(usize, usize, f64)>,
}

impl TripletMatrix {
    fn new(ncols: usize) -> Self {
        TripletMatrix { nrows: 0, ncols, triplets: Vec::new() }
    }

    fn push_row(&mut self, coeffs: impl IntoIterator<Item = (usize, f64)>) -> usize {
        let row = self.nrows;
        for (col, val) in coeffs {
            if val != 0.0 {
                self.triplets.push((row, col, val));
            }
        }
        self.nrows += 1;
        row
    }

    fn into_csc(mut self) -> CscMatrix<f64> {
        self.triplets
            .sort_unstable_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
        let mut colptr = vec![0usize; self.ncols + 1];
        let mut rowval: Vec<usize> = Vec::with_capacity(self.triplets.len());
        let mut nzval: Vec<f64> = Vec::with_capacity(self.triplets.len());
        let mut cur_col = 0usize;
        for (row, col, val) in self.triplets {
            while cur_col < col {
                cur_col += 1;
                colptr[cur_col] = rowval.len();
            }
            if rowval.len() > colptr[cur_col] && rowval.last() == Some(&row) {
                *nzval.last_mut().expect("rowval and nzval stay in sync") += val;
                continue;
            }
            rowval.push(row);
            nzval.push(val);
        }
        while cur_col < self.ncols {
            cur_col += 1;
            colptr[cur_col] = rowval.len();
        }
        CscMatrix::new(self.nrows, self.ncols, colptr, rowval, nzval)
    }
}

fn settings(opts: &SolverOptions) -> clarabel::solver::DefaultSettings<f64> {
    DefaultSettingsBuilder::default()
        .verbose(opts.verbose)
        .max_iter(opts.max_iter)
        .tol_feas(opts.feas_tol)
        .tol_gap_abs(opts.gap_tol)
        .tol_gap_rel(opts.gap_tol)
        .presolve_enable(false)
        .build()
        .expect("static solver settings are valid")
}

fn map_status(s: SolverStatus) -> (SolveStatus, String) {
    let raw = format!("{s:?}");
    let mapped = match s {
        SolverStatus::Solved | SolverStatus::AlmostSolved => SolveStatus::Optimal,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            SolveStatus::Infeasible
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
            SolveStatus::Unbounded
        }
        _ => SolveStatus::NumericalFailure,
    };
    (mapped, raw)
}

pub fn solve_lp(p: &LinearProgram, opts: &SolverOptions) -> Result<SolveReport> {
    let n = p.num_vars;
    let mut a = TripletMatrix::new(n);
    let mut b = Vec::new();

    for (row, rhs) in &p.eq {
        a.push_row(row.coeffs.iter().copied());
        b.push(*rhs);
    }
    let n_eq = b.len();
    for (row, rhs, cmp) in &p.ineq {
        match cmp {
            Cmp::Le => {
                a.push_row(row.coeffs.iter().copied());
                b.push(*rhs);
            }
            Cmp::Ge => {
                a.push_row(row.coeffs.iter().map(|(i, c)| (*i, -c)));
                b.push(-rhs);
            }
        }
    }
    for (i, (lo, hi)) in p.bounds.iter().enumerate() {
        if let Some(hi) = hi {
            a.push_row([(i, 1.0)]);
            b.push(*hi);
        }
        if let Some(lo) = lo {
            a.push_row([(i, -1.0)]);
            b.push(-lo);
        }
    }
    let n_noneg = b.len() - n_eq;

    let mut q = vec![0.0; n];
    let sign = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    for (i, c) in &p.objective {
        q[*i] += sign * c;
    }

    let mut cones = Vec::new();
    if n_eq > 0 {
        cones.push(SupportedConeT::ZeroConeT(n_eq));
    }
    if n_noneg > 0 {
        cones.push(SupportedConeT::NonnegativeConeT(n_noneg));
    }

    let pmat = CscMatrix::<f64>::zeros((n, n));
    let amat = a.into_csc();
    let mut solver = DefaultSolver::new(&pmat, &q, &amat, &b, &cones, settings(opts))
        .map_err(|e| Error::SolverFailure {
            status: "setup".into(),
            detail: format!("{e:?}"),
        })?;
    solver.solve();

    let (status, raw_status) = map_status(solver.solution.status);
    let primal = solver.solution.x.clone();
    let z = solver.solution.z.clone();
    let internal_value = solver.solution.obj_val;
    let value = match status {
        SolveStatus::Optimal => sign * internal_value + p.objective_constant,
        _ => f64::NAN,
    };
    let internal_dual = -b.iter().zip(&z).map(|(bi, zi)| bi * zi).sum::<f64>();
    let (dual, dual_value, dual_ray) = match status {
        SolveStatus::Optimal => (
            Some(z),
            Some(sign * internal_dual + p.objective_constant),
            None,
        ),
        SolveStatus::Infeasible => (None, None, Some(z)),
        _ => (None, None, None),
    };

    Ok(SolveReport {
        status,
        value,
        primal,
        blocks: Vec::new(),
        scalars: Vec::new(),
        dual,
        dual_value,
        dual_ray,
        options: *opts,
        raw_status,
    })
}

/// Offset of each block's svec segment plus the total variable count.
fn svec_layout(block_sizes: &[usize], num_scalars: usize) -> (Vec<usize>, usize) {
    let mut offsets = Vec::with_capacity(block_sizes.len());
    let mut total = 0usize;
    for &s in block_sizes {
        offsets.push(total);
        total += s * (s + 1) / 2;
    }
    (offsets, total + num_scalars)
}

/// Column index and de-scaling coefficient of entry (i, j) of a block.
fn svec_index(offset: usize, i: usize, j: usize) -> (usize, f64) {
    let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
    let idx = offset + hi * (hi + 1) / 2 + lo;
    if lo == hi {
        (idx, 1.0)
    } else {
        (idx, 1.0 / SQRT2)
    }
}

pub fn solve_sdp(p: &SemidefiniteProgram, opts: &SolverOptions) -> Result<SolveReport> {
    let (offsets, n) = svec_layout(&p.block_sizes, p.num_scalars);
    let scalar_base = n - p.num_scalars;

    let expr_coeffs = |expr: &super::LinExpr| -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(expr.entries.len() + expr.scalars.len());
        for (e, c) in &expr.entries {
            let (idx, scale) = svec_index(offsets[e.block], e.row, e.col);
            out.push((idx, c * scale));
        }
        for (s, c) in &expr.scalars {
            out.push((scalar_base + s, *c));
        }
        out
    };

    let mut a = TripletMatrix::new(n);
    let mut b = Vec::new();
    for (expr, rhs) in &p.eqs {
        a.push_row(expr_coeffs(expr));
        b.push(rhs - expr.constant);
    }
    let n_eq = b.len();

    // PSD cones: s_block = svec(X) >= 0 via  -x_block + s = 0
    for (bi, &size) in p.block_sizes.iter().enumerate() {
        let len = size * (size + 1) / 2;
        for k in 0..len {
            a.push_row([(offsets[bi] + k, -1.0)]);
            b.push(0.0);
        }
    }

    let sign = match p.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut q = vec![0.0; n];
    for (idx, c) in expr_coeffs(&p.objective) {
        q[idx] += sign * c;
    }

    let mut cones = Vec::new();
    if n_eq > 0 {
        cones.push(SupportedConeT::ZeroConeT(n_eq));
    }
    for &size in &p.block_sizes {
        cones.push(SupportedConeT::PSDTriangleConeT(size));
    }

    let pmat = CscMatrix::<f64>::zeros((n, n));
    let amat = a.into_csc();
    let mut solver = DefaultSolver::new(&pmat, &q, &amat, &b, &cones, settings(opts))
        .map_err(|e| Error::SolverFailure {
            status: "setup".into(),
            detail: format!("{e:?}"),
        })?;
    solver.solve();

    let (status, raw_status) = map_status(solver.solution.status);
    let x = &solver.solution.x;
    let mut blocks = Vec::with_capacity(p.block_sizes.len());
    for (bi, &size) in p.block_sizes.iter().enumerate() {
        let mut m = DMatrix::zeros(size, size);
        for j in 0..size {
            for i in 0..=j {
                let (idx, scale) = svec_index(offsets[bi], i, j);
                let v = x[idx] * scale;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        blocks.push(m);
    }
    let scalars = x[scalar_base..].to_vec();
    let value = match status {
        SolveStatus::Optimal => sign * solver.solution.obj_val + p.objective.constant,
        _ => f64::NAN,
    };

    Ok(SolveReport {
        status,
        value,
        primal: x.clone(),
        blocks,
        scalars,
        dual: None,
        dual_value: None,
        dual_ray: match status {
            SolveStatus::Infeasible => Some(solver.solution.z.clone()),
            _ => None,
        },
        options: *opts,
        raw_status,
    })
}
