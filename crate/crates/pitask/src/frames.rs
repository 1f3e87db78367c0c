//! Frame-theoretic analytics: maximal frame correlation, the Welch bound,
//! equiangularity checks, ambiguous two-state discrimination and the
//! closed-form `T_{4,1}` bounds they imply.

use nalgebra::{Complex, DVector};

use crate::game::{QuantumModel, Subset};
use crate::{Error, Result};

type C64 = Complex<f64>;

/// A finite family of unit vectors in a d-dimensional inner-product space.
/// The real/complex flag only affects the documented attainability
/// thresholds of the Welch bound; computations are field-agnostic.
#[derive(Clone, Debug)]
pub struct UnitFrame {
    dimension: usize,
    vectors: Vec<DVector<C64>>,
    real: bool,
}

impl UnitFrame {
    pub fn new(dimension: usize, vectors: Vec<DVector<C64>>, real: bool) -> Result<Self> {
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dimension {
                return Err(Error::Constraint(format!(
                    "vector {i} has length {}, expected {dimension}",
                    v.len()
                )));
            }
            if (v.norm() - 1.0).abs() > 1e-10 {
                return Err(Error::Constraint(format!(
                    "vector {i} has norm {}, expected 1",
                    v.norm()
                )));
            }
        }
        Ok(UnitFrame { dimension, vectors, real })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn overlap(&self, i: usize, j: usize) -> f64 {
        self.vectors[i].dotc(&self.vectors[j]).norm()
    }
}

/// Largest pairwise overlap `|<f_j, f_k>|` over distinct vectors.
pub fn max_frame_correlation(frame: &UnitFrame) -> Result<f64> {
    if frame.len() < 2 {
        return Err(Error::Constraint(
            "frame correlation needs at least two vectors".into(),
        ));
    }
    let mut best: f64 = 0.0;
    for i in 0..frame.len() {
        for j in (i + 1)..frame.len() {
            best = best.max(frame.overlap(i, j));
        }
    }
    Ok(best)
}

/// The Welch lower bound `sqrt((n-d)/(d(n-1)))` on the maximal frame
/// correlation of `n` unit vectors in dimension `d`. Attained exactly by
/// tight equiangular frames, which require `n <= d^2` over the complex
/// numbers and `n <= d(d+1)/2` over the reals.
pub fn welch_bound(n: usize, d: usize) -> Result<f64> {
    if d < 1 || n < d {
        return Err(Error::Constraint(format!(
            "welch bound needs n >= d >= 1, got n={n}, d={d}"
        )));
    }
    Ok((((n - d) as f64) / ((d * (n - 1)) as f64)).sqrt())
}

/// Optimal success probability for discriminating two pure states with the
/// given overlap magnitude: `(1 + sqrt(1 - overlap^2)) / 2`.
pub fn ambiguous_psuc(overlap: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&overlap) {
        return Err(Error::Constraint(format!(
            "overlap {overlap} outside [0, 1]"
        )));
    }
    Ok(0.5 * (1.0 + (1.0 - overlap * overlap).sqrt()))
}

/// Closed-form maximum of the canonical `T_{4,1}` metric for dimension-d
/// strategies: twelve rounds of pairwise discrimination at the Welch-bound
/// overlap, `12 * psuc` with `overlap^2 = (4-d)/(3d)`.
pub fn t41_analytic_bound(d: usize) -> Result<f64> {
    if !(2..=4).contains(&d) {
        return Err(Error::Constraint(format!(
            "analytic bound defined for 2 <= d <= 4, got {d}"
        )));
    }
    let overlap_sq = (4.0 - d as f64) / (3.0 * d as f64);
    let psuc = 0.5 * (1.0 + (1.0 - overlap_sq).sqrt());
    Ok((12.0 * psuc).min(12.0))
}

/// Whether all pairwise overlap magnitudes agree within `tol`.
pub fn verify_equiangular(frame: &UnitFrame, tol: f64) -> Result<bool> {
    if frame.len() < 2 {
        return Err(Error::Constraint(
            "equiangularity needs at least two vectors".into(),
        ));
    }
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for i in 0..frame.len() {
        for j in (i + 1)..frame.len() {
            let o = frame.overlap(i, j);
            lo = lo.min(o);
            hi = hi.max(o);
        }
    }
    Ok(hi - lo <= tol)
}

/// Converts model states (in preparation-label order) to a unit frame by
/// taking dominant eigenvectors. Returns the frame together with each
/// state's top eigenvalue; values below `1 - 1e-4` flag a non-pure optimum.
pub fn frame_from_states(model: &QuantumModel) -> Result<(UnitFrame, Vec<(Subset, f64)>)> {
    let mut vectors = Vec::new();
    let mut purities = Vec::new();
    let mut real = true;
    for (label, rho) in model.states() {
        let (top, mut v) = rho.top_eigenpair();
        let norm = v.norm();
        v /= C64::new(norm, 0.0);
        if v.iter().any(|z| z.im.abs() > 1e-9) {
            real = false;
        }
        purities.push((label.clone(), top));
        vectors.push(v);
    }
    Ok((UnitFrame::new(model.dimension(), vectors, real)?, purities))
}
