//! Real embedding of complex Hermitian matrices and a builder for SDPs
//! whose variables are Hermitian blocks.
//!
//! A Hermitian `H = A + iB` embeds as the real symmetric matrix
//! `[[A, -B], [B, A]]`; the embedding is linear, `H >= 0` iff
//! `embed(H) >= 0`, and traces double. All complex SDPs in this crate go
//! through this embedding so the backend only ever sees real symmetric
//! blocks.

use nalgebra::{Complex, DMatrix};

use super::{LinExpr, SemidefiniteProgram, Sense, SolveReport, SolverOptions};
use crate::game::HermitianMatrix;
use crate::{Error, Result};

/// Embeds a complex Hermitian `d x d` matrix as a real symmetric `2d x 2d`
/// matrix `[[Re H, -Im H], [Im H, Re H]]`.
pub fn hermitian_embed(h: &HermitianMatrix) -> DMatrix<f64> {
    let d = h.dim();
    DMatrix::from_fn(2 * d, 2 * d, |r, c| {
        let (i, ri) = (r % d, r / d);
        let (j, rj) = (c % d, c / d);
        match (ri, rj) {
            (0, 0) | (1, 1) => h.re(i, j),
            (0, 1) => -h.im(i, j),
            _ => h.im(i, j),
        }
    })
}

/// An SDP over complex Hermitian matrix blocks, lowered to real symmetric
/// blocks through [`hermitian_embed`]. Expressions address the real and
/// imaginary parts of block entries; the embedding structure (equal
/// diagonal copies, antisymmetric off-diagonal copy) is enforced with
/// equality constraints.
pub struct HermitianBlockSdp {
    sdp: SemidefiniteProgram,
    dims: Vec<usize>,
}

impl HermitianBlockSdp {
    pub fn new(sense: Sense) -> Self {
        HermitianBlockSdp {
            sdp: SemidefiniteProgram::new(Vec::new(), 0, sense),
            dims: Vec::new(),
        }
    }

    /// Declares a Hermitian block of complex dimension `dim`; returns its
    /// handle.
    pub fn add_block(&mut self, dim: usize) -> usize {
        let block = self.dims.len();
        self.dims.push(dim);
        self.sdp.block_sizes.push(2 * dim);
        // real part appears twice: X[i,j] = X[d+i, d+j]
        for i in 0..dim {
            for j in i..dim {
                let mut expr = LinExpr::new();
                expr.push_entry(block, i, j, 1.0);
                expr.push_entry(block, dim + i, dim + j, -1.0);
                self.sdp.eqs.push((expr, 0.0));
            }
        }
        // imaginary part is antisymmetric: X[i, d+j] = -X[j, d+i]
        for i in 0..dim {
            let mut diag = LinExpr::new();
            diag.push_entry(block, i, dim + i, 1.0);
            self.sdp.eqs.push((diag, 0.0));
            for j in (i + 1)..dim {
                let mut expr = LinExpr::new();
                expr.push_entry(block, i, dim + j, 1.0);
                expr.push_entry(block, j, dim + i, 1.0);
                self.sdp.eqs.push((expr, 0.0));
            }
        }
        block
    }

    pub fn block_dim(&self, block: usize) -> usize {
        self.dims[block]
    }

    /// Expression for `Re X_ij` of a Hermitian block.
    pub fn re(&self, block: usize, i: usize, j: usize) -> LinExpr {
        let mut expr = LinExpr::new();
        expr.push_entry(block, i.min(j), i.max(j), 1.0);
        expr
    }

    /// Expression for `Im X_ij` of a Hermitian block (zero when `i == j`).
    pub fn im(&self, block: usize, i: usize, j: usize) -> LinExpr {
        let d = self.dims[block];
        let mut expr = LinExpr::new();
        match i.cmp(&j) {
            std::cmp::Ordering::Less => expr.push_entry(block, i, d + j, -1.0),
            std::cmp::Ordering::Greater => expr.push_entry(block, j, d + i, 1.0),
            std::cmp::Ordering::Equal => {}
        }
        expr
    }

    /// Expression for the Hilbert-Schmidt pairing `tr(C X)` with a constant
    /// Hermitian `C`.
    pub fn pair(&self, block: usize, c: &HermitianMatrix) -> LinExpr {
        let d = self.dims[block];
        assert_eq!(c.dim(), d, "pairing matrix must match block dimension");
        let mut expr = LinExpr::new();
        for i in 0..d {
            expr.add(&self.re(block, i, i), c.re(i, i));
            for j in (i + 1)..d {
                expr.add(&self.re(block, i, j), 2.0 * c.re(i, j));
                expr.add(&self.im(block, i, j), 2.0 * c.im(i, j));
            }
        }
        expr
    }

    /// Expression for `tr(X)`.
    pub fn trace(&self, block: usize) -> LinExpr {
        let d = self.dims[block];
        let mut expr = LinExpr::new();
        for i in 0..d {
            expr.add(&self.re(block, i, i), 1.0);
        }
        expr
    }

    pub fn push_eq(&mut self, expr: LinExpr, rhs: f64) {
        if !expr.is_empty() || rhs != 0.0 {
            self.sdp.eqs.push((expr, rhs));
        }
    }

    /// Constrains a signed combination of whole blocks to vanish:
    /// `sum_b weight_b X_b = 0`, entrywise over real and imaginary parts.
    pub fn constrain_block_combination(&mut self, weighted: &[(usize, f64)]) {
        if weighted.is_empty() {
            return;
        }
        let d = self.dims[weighted[0].0];
        for i in 0..d {
            for j in i..d {
                let mut re = LinExpr::new();
                let mut im = LinExpr::new();
                for (b, w) in weighted {
                    re.add(&self.re(*b, i, j), *w);
                    im.add(&self.im(*b, i, j), *w);
                }
                self.push_eq(re, 0.0);
                if i != j {
                    self.push_eq(im, 0.0);
                }
            }
        }
    }

    /// Constrains `sum_b X_b = identity` over the given blocks.
    pub fn constrain_sum_to_identity(&mut self, blocks: &[usize]) {
        if blocks.is_empty() {
            return;
        }
        let d = self.dims[blocks[0]];
        for i in 0..d {
            for j in i..d {
                let mut re = LinExpr::new();
                let mut im = LinExpr::new();
                for &b in blocks {
                    re.add(&self.re(b, i, j), 1.0);
                    im.add(&self.im(b, i, j), 1.0);
                }
                self.push_eq(re, if i == j { 1.0 } else { 0.0 });
                if i != j {
                    self.push_eq(im, 0.0);
                }
            }
        }
    }

    pub fn set_objective(&mut self, expr: LinExpr) {
        self.sdp.objective = expr;
    }

    pub fn program(&self) -> &SemidefiniteProgram {
        &self.sdp
    }

    pub fn solve(&self, opts: &SolverOptions) -> Result<SolveReport> {
        super::solve_sdp_with(&self.sdp, opts)
    }

    /// Recovers the complex Hermitian content of a block from a solve
    /// report, symmetrizing away solver noise.
    pub fn extract(&self, report: &SolveReport, block: usize) -> Result<HermitianMatrix> {
        let d = self.dims[block];
        let x = report.blocks.get(block).ok_or_else(|| Error::SolverFailure {
            status: "missing block".into(),
            detail: format!("no primal block {block} in report"),
        })?;
        let m = DMatrix::from_fn(d, d, |i, j| {
            let re = 0.5 * (x[(i, j)] + x[(d + i, d + j)]);
            let im = 0.5 * (x[(d + i, j)] - x[(i, d + j)]);
            Complex::new(re, im)
        });
        HermitianMatrix::new_with_tol(m, 1e-5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::Complex;

    fn pauli_y() -> HermitianMatrix {
        HermitianMatrix::new(DMatrix::from_row_slice(2, 2, &[
            Complex::new(0.0, 0.0),
            Complex::new(0.0, -1.0),
            Complex::new(0.0, 1.0),
            Complex::new(0.0, 0.0),
        ]))
        .unwrap()
    }

    #[test]
    fn identity_embeds_to_identity() {
        let e = hermitian_embed(&HermitianMatrix::identity(2));
        assert_eq!(e, DMatrix::identity(4, 4));
    }

    #[test]
    fn pauli_y_embedding_spectrum() {
        let e = hermitian_embed(&pauli_y());
        assert_abs_diff_eq!(e[(0, 1)], 0.0);
        assert_abs_diff_eq!(e[(0, 3)], 1.0);
        assert_abs_diff_eq!(e[(1, 2)], -1.0);
        let mut ev: Vec<f64> = e.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (got, want) in ev.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn embedded_pairing_halves_to_trace_product() {
        let a = pauli_y();
        let b = HermitianMatrix::new(DMatrix::from_row_slice(2, 2, &[
            Complex::new(0.7, 0.0),
            Complex::new(0.2, 0.4),
            Complex::new(0.2, -0.4),
            Complex::new(-0.1, 0.0),
        ]))
        .unwrap();
        let ea = hermitian_embed(&a);
        let eb = hermitian_embed(&b);
        let lhs = (ea * eb).trace() / 2.0;
        assert_abs_diff_eq!(lhs, a.pair(&b), epsilon = 1e-12);
    }

    #[test]
    fn hermitian_sdp_recovers_complex_optimum() {
        // max Re X01 + Im X01 s.t. diag(X) = (1, 1), X psd (complex 2x2).
        // Optimum is sqrt(2) at X01 = (1 + i)/sqrt(2).
        let mut builder = HermitianBlockSdp::new(Sense::Maximize);
        let b = builder.add_block(2);
        builder.push_eq(builder.re(b, 0, 0), 1.0);
        builder.push_eq(builder.re(b, 1, 1), 1.0);
        let mut obj = builder.re(b, 0, 1);
        obj.add(&builder.im(b, 0, 1), 1.0);
        builder.set_objective(obj);
        let report = builder.solve(&SolverOptions::default()).unwrap();
        assert_abs_diff_eq!(report.value, 2f64.sqrt(), epsilon = 1e-6);
        let x = builder.extract(&report, b).unwrap();
        assert_abs_diff_eq!(x.re(0, 1), 0.5f64.sqrt(), epsilon = 1e-5);
        assert_abs_diff_eq!(x.im(0, 1), 0.5f64.sqrt(), epsilon = 1e-5);
    }
}
