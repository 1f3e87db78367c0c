use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::HERMITICITY_TOL;
use crate::{Error, Result};

pub type C64 = Complex<f64>;

/// A complex Hermitian matrix, the carrier for states, effects and other
/// operators. Construction symmetrizes the input and rejects deviations
/// from Hermiticity beyond a tolerance.
///
/// Serialized as a nested array of `[re, im]` pairs so the JSON form is a
/// plain `d x d` grid of complex entries.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<[f64; 2]>>", into = "Vec<Vec<[f64; 2]>>")]
pub struct HermitianMatrix {
    data: DMatrix<C64>,
}

impl HermitianMatrix {
    /// Symmetrizes `m` to `(m + m†)/2`, rejecting deviations larger than
    /// the default tolerance.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        Self::new_with_tol(m, HERMITICITY_TOL)
    }

    pub fn new_with_tol(m: DMatrix<C64>, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Constraint(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        let sym = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        let dev = (&m - &sym).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > tol {
            return Err(Error::Constraint(format!(
                "matrix deviates from Hermiticity by {dev:.3e} (tol {tol:.1e})"
            )));
        }
        Ok(HermitianMatrix { data: sym })
    }

    /// Builds from separate real and imaginary parts.
    pub fn from_parts(re: DMatrix<f64>, im: DMatrix<f64>) -> Result<Self> {
        if re.shape() != im.shape() {
            return Err(Error::Constraint(
                "real and imaginary parts have different shapes".into(),
            ));
        }
        let m = DMatrix::from_fn(re.nrows(), re.ncols(), |i, j| {
            C64::new(re[(i, j)], im[(i, j)])
        });
        Self::new(m)
    }

    pub fn from_real(re: DMatrix<f64>) -> Result<Self> {
        let d = re.nrows();
        Self::from_parts(re, DMatrix::zeros(d, d))
    }

    pub fn zeros(d: usize) -> Self {
        HermitianMatrix { data: DMatrix::zeros(d, d) }
    }

    pub fn identity(d: usize) -> Self {
        HermitianMatrix { data: DMatrix::identity(d, d) }
    }

    /// Rank-1 projector `v v†` onto a (not necessarily normalized) vector.
    pub fn projector(v: &DVector<C64>) -> Self {
        let norm = v.norm();
        let u = v / C64::new(norm, 0.0);
        HermitianMatrix { data: &u * u.adjoint() }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn re(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)].re
    }

    pub fn im(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)].im
    }

    /// Trace; the imaginary part vanishes for Hermitian matrices.
    pub fn trace(&self) -> f64 {
        self.data.trace().re
    }

    /// Hilbert-Schmidt pairing `tr(A B)`, real for Hermitian A, B.
    pub fn pair(&self, other: &Self) -> f64 {
        // tr(AB) = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij)
        self.data
            .iter()
            .zip(other.data.transpose().iter().map(|z| *z))
            .map(|(a, bt)| (a * bt).re)
            .sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .data
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Eigenvector of the largest eigenvalue, together with that eigenvalue.
    pub fn top_eigenpair(&self) -> (f64, DVector<C64>) {
        let eig = self.data.clone().symmetric_eigen();
        let mut best = 0;
        for i in 1..eig.eigenvalues.len() {
            if eig.eigenvalues[i] > eig.eigenvalues[best] {
                best = i;
            }
        }
        (eig.eigenvalues[best], eig.eigenvectors.column(best).into_owned())
    }

    pub fn scale(&self, c: f64) -> Self {
        HermitianMatrix { data: &self.data * C64::new(c, 0.0) }
    }

    pub fn add(&self, other: &Self) -> Self {
        HermitianMatrix { data: &self.data + &other.data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        HermitianMatrix { data: &self.data - &other.data }
    }

    /// Entrywise max-norm distance.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.data - &other.data)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

impl std::fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "HermitianMatrix({}x{})", self.dim(), self.dim())
    }
}

impl TryFrom<Vec<Vec<[f64; 2]>>> for HermitianMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<[f64; 2]>>) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Constraint("ragged matrix rows".into()));
        }
        let m = DMatrix::from_fn(d, d, |i, j| C64::new(rows[i][j][0], rows[i][j][1]));
        HermitianMatrix::new(m)
    }
}

impl From<HermitianMatrix> for Vec<Vec<[f64; 2]>> {
    fn from(h: HermitianMatrix) -> Self {
        (0..h.dim())
            .map(|i| (0..h.dim()).map(|j| [h.re(i, j), h.im(i, j)]).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(2, 2, &[
            C64::new(1.0, 0.0),
            C64::new(0.5, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        ]);
        assert!(HermitianMatrix::new(m).is_err());
    }

    #[test]
    fn symmetrizes_small_noise() {
        let m = DMatrix::from_row_slice(2, 2, &[
            C64::new(1.0, 0.0),
            C64::new(0.5, 1e-12),
            C64::new(0.5, 0.0),
            C64::new(0.0, 0.0),
        ]);
        let h = HermitianMatrix::new(m).unwrap();
        assert_abs_diff_eq!(h.im(0, 1), 5e-13, epsilon = 1e-13);
        assert_abs_diff_eq!(h.im(1, 0), -5e-13, epsilon = 1e-13);
    }

    #[test]
    fn pair_matches_trace_product() {
        let a = HermitianMatrix::from_parts(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.25, 0.25, -0.5]),
            DMatrix::from_row_slice(2, 2, &[0.0, 0.5, -0.5, 0.0]),
        )
        .unwrap();
        let b = HermitianMatrix::from_parts(
            DMatrix::from_row_slice(2, 2, &[0.5, -1.0, -1.0, 2.0]),
            DMatrix::from_row_slice(2, 2, &[0.0, 0.25, -0.25, 0.0]),
        )
        .unwrap();
        let prod = a.matrix() * b.matrix();
        assert_abs_diff_eq!(a.pair(&b), prod.trace().re, epsilon = 1e-12);
        assert!(prod.trace().im.abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let a = HermitianMatrix::from_parts(
            DMatrix::from_row_slice(2, 2, &[0.1, 0.7, 0.7, -0.3]),
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0 / 3.0, -1.0 / 3.0, 0.0]),
        )
        .unwrap();
        let text = serde_json::to_string(&a).unwrap();
        let back: HermitianMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(a.matrix(), back.matrix());
    }
}
