//! Noncontextual-model analysis: vertex enumeration of the
//! measurement-assignment polytope, optimal noncontextual values, LP
//! feasibility of behaviors, and violated noncontextuality inequalities via
//! the Farkas dual.

mod dd;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::conic::{solve_lp_with, Cmp, LinRow, LinearProgram, Sense, SolveStatus, SolverOptions};
use crate::game::{Behavior, OperationalEquivalence, Subset, SuccessMetric, TaskSpec};
use crate::{Error, Result};

/// Default ceiling on enumerated vertices.
pub const DEFAULT_VERTEX_LIMIT: usize = 1_000_000;
/// Default feasibility tolerance for noncontextual-model reconstruction.
pub const DEFAULT_FEAS_TOL: f64 = 1e-6;

/// The extremal response functions of the measurement-assignment polytope:
/// every vertex assigns each (measurement, outcome) a probability, subject
/// to positivity, per-measurement normalization and the declared effect
/// equivalences. Kept exact; a float view is derived for LP assembly.
#[derive(Clone, Debug)]
pub struct VertexSet {
    task: TaskSpec,
    meas: Vec<Subset>,
    outcomes: Vec<Vec<u8>>,
    coord_of: BTreeMap<(Subset, u8), usize>,
    vertices_exact: Vec<Vec<BigRational>>,
    vertices: Vec<Vec<f64>>,
}

impl VertexSet {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn task(&self) -> &TaskSpec {
        &self.task
    }

    pub fn coordinates(&self) -> usize {
        self.coord_of.len()
    }

    /// Response value of a vertex at one (measurement, outcome) coordinate.
    pub fn response(&self, vertex: usize, meas: &Subset, outcome: u8) -> Result<f64> {
        let coord = self
            .coord_of
            .get(&(meas.clone(), outcome))
            .ok_or_else(|| Error::Lookup(format!("no coordinate for ({meas},{outcome})")))?;
        Ok(self.vertices[vertex][*coord])
    }

    pub fn exact(&self, vertex: usize) -> &[BigRational] {
        &self.vertices_exact[vertex]
    }

    fn coord(&self, meas: &Subset, outcome: u8) -> Result<usize> {
        self.coord_of
            .get(&(meas.clone(), outcome))
            .copied()
            .ok_or_else(|| Error::Lookup(format!("no coordinate for ({meas},{outcome})")))
    }
}

/// Enumerates the vertices of the measurement-assignment polytope. With no
/// effect equivalences these are exactly the deterministic outcome
/// assignments (one per product choice); otherwise the polytope is cut by
/// the equivalence hyperplanes and enumerated exactly over rationals.
pub fn enumerate_vertices(
    task: &TaskSpec,
    effect_equivalences: &[OperationalEquivalence],
) -> Result<VertexSet> {
    enumerate_vertices_with_limit(task, effect_equivalences, DEFAULT_VERTEX_LIMIT)
}

pub fn enumerate_vertices_with_limit(
    task: &TaskSpec,
    effect_equivalences: &[OperationalEquivalence],
    limit: usize,
) -> Result<VertexSet> {
    let labels = task.labels();
    let meas: Vec<Subset> = labels.measurements().to_vec();
    let outcomes: Vec<Vec<u8>> = (0..meas.len()).map(|j| labels.outcomes(j).to_vec()).collect();
    let mut coord_of = BTreeMap::new();
    let mut coord_count = 0usize;
    for (j, b) in meas.iter().enumerate() {
        for &k in &outcomes[j] {
            coord_of.insert((b.clone(), k), coord_count);
            coord_count += 1;
        }
    }

    let vertices_exact: Vec<Vec<BigRational>> = if effect_equivalences.is_empty() {
        let total: usize = outcomes.iter().map(|o| o.len()).try_fold(1usize, |acc, k| {
            acc.checked_mul(k).filter(|&t| t <= limit)
        })
        .ok_or_else(|| {
            Error::Budget(format!("deterministic assignments exceed limit {limit}"))
        })?;
        // odometer over measurements, first measurement most significant
        (0..total)
            .map(|mut idx| {
                let mut choice = vec![0usize; meas.len()];
                for j in (0..meas.len()).rev() {
                    choice[j] = idx % outcomes[j].len();
                    idx /= outcomes[j].len();
                }
                let mut v = vec![BigRational::zero(); coord_count];
                let mut base = 0usize;
                for j in 0..meas.len() {
                    v[base + choice[j]] = BigRational::from(BigInt::from(1));
                    base += outcomes[j].len();
                }
                v
            })
            .collect()
    } else {
        let mut equalities: Vec<(Vec<BigRational>, BigRational)> = Vec::new();
        // per-measurement normalization
        let mut base = 0usize;
        for j in 0..meas.len() {
            let mut row = vec![BigRational::zero(); coord_count];
            for k in 0..outcomes[j].len() {
                row[base + k] = BigRational::from(BigInt::from(1));
            }
            equalities.push((row, BigRational::from(BigInt::from(1))));
            base += outcomes[j].len();
        }
        // effect-equivalence hyperplanes, with weights converted exactly
        for eq in effect_equivalences {
            if eq.is_preparation() {
                return Err(Error::Constraint(
                    "effect_equivalences must contain effect equivalences".into(),
                ));
            }
            let mut row = vec![BigRational::zero(); coord_count];
            for ((m, k), w) in eq.effect_signed_weights() {
                let coord = *coord_of.get(&(m.clone(), k)).ok_or_else(|| {
                    Error::Lookup(format!("equivalence references unknown effect ({m},{k})"))
                })?;
                row[coord] += BigRational::from_f64(w).ok_or_else(|| {
                    Error::Constraint(format!("weight {w} is not finite"))
                })?;
            }
            equalities.push((row, BigRational::zero()));
        }
        dd::polytope_vertices(coord_count, &equalities, limit)?
    };

    let vertices: Vec<Vec<f64>> = vertices_exact
        .iter()
        .map(|v| {
            v.iter()
                .map(|r| r.to_f64().expect("vertex coordinates fit in f64"))
                .collect()
        })
        .collect();

    Ok(VertexSet { task: *task, meas, outcomes, coord_of, vertices_exact, vertices })
}

/// A noncontextual ontological model over an enumerated vertex set: one
/// epistemic distribution per preparation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NCModel {
    pub weights: BTreeMap<Subset, Vec<f64>>,
}

impl NCModel {
    /// Validates positivity, normalization and the preparation
    /// equivalences (vertexwise) within `tol`.
    pub fn validate(
        &self,
        vertices: &VertexSet,
        prep_equivalences: &[OperationalEquivalence],
        tol: f64,
    ) -> Result<()> {
        for (prep, nu) in &self.weights {
            if nu.len() != vertices.len() {
                return Err(Error::Constraint(format!(
                    "distribution for {prep} has {} entries, expected {}",
                    nu.len(),
                    vertices.len()
                )));
            }
            if nu.iter().any(|&x| x < -tol) {
                return Err(Error::Constraint(format!(
                    "negative epistemic weight for {prep}"
                )));
            }
            let sum: f64 = nu.iter().sum();
            if (sum - 1.0).abs() > tol {
                return Err(Error::Constraint(format!(
                    "epistemic weights of {prep} sum to {sum}"
                )));
            }
        }
        for eq in prep_equivalences {
            let signed = eq.prep_signed_weights();
            for kappa in 0..vertices.len() {
                let mut acc = 0.0;
                for (label, w) in &signed {
                    let nu = self.weights.get(label).ok_or_else(|| {
                        Error::Lookup(format!("model lacks preparation {label}"))
                    })?;
                    acc += w * nu[kappa];
                }
                if acc.abs() > tol {
                    return Err(Error::Constraint(format!(
                        "preparation equivalence violated at vertex {kappa} by {acc:.3e}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The behavior generated by the model:
    /// `p(k|i,j) = sum_kappa xi(k|j,kappa) nu_i(kappa)`.
    pub fn induced_behavior(&self, vertices: &VertexSet) -> Result<Behavior> {
        let mut map = BTreeMap::new();
        for (prep, nu) in &self.weights {
            for (j, meas) in vertices.meas.iter().enumerate() {
                for &k in &vertices.outcomes[j] {
                    let coord = vertices.coord(meas, k)?;
                    let p: f64 = nu
                        .iter()
                        .enumerate()
                        .map(|(kappa, w)| w * vertices.vertices[kappa][coord])
                        .sum();
                    map.insert((prep.clone(), meas.clone(), k), p.clamp(0.0, 1.0));
                }
            }
        }
        Behavior::new_with_tol(map, 1e-7)
    }

    /// Point-mass model: preparation `i` sits entirely on vertex
    /// `assignment[i]` (in preparation label order).
    pub fn point_masses(
        task: &TaskSpec,
        assignment: &[usize],
        vertices: &VertexSet,
        prep_equivalences: &[OperationalEquivalence],
        tol: f64,
    ) -> Result<NCModel> {
        let labels = task.labels();
        if assignment.len() != labels.preparations().len() {
            return Err(Error::Constraint(format!(
                "assignment length {} does not match {} preparations",
                assignment.len(),
                labels.preparations().len()
            )));
        }
        let mut weights = BTreeMap::new();
        for (prep, &kappa) in labels.preparations().iter().zip(assignment) {
            let mut nu = vec![0.0; vertices.len()];
            nu[kappa] = 1.0;
            weights.insert(prep.clone(), nu);
        }
        let model = NCModel { weights };
        model.validate(vertices, prep_equivalences, tol)?;
        Ok(model)
    }
}

/// A violated noncontextuality inequality extracted from the Farkas dual:
/// every noncontextual behavior satisfies `sum coeff * p <= bound`, while
/// the tested behavior achieves `achieved > bound`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FarkasCertificate {
    #[serde(with = "coeff_map")]
    pub coefficients: BTreeMap<(Subset, Subset, u8), f64>,
    pub bound: f64,
    pub achieved: f64,
}

impl FarkasCertificate {
    pub fn violation_ratio(&self) -> f64 {
        self.achieved / self.bound
    }

    pub fn evaluate(&self, behavior: &Behavior) -> Result<f64> {
        let mut total = 0.0;
        for ((prep, meas, k), c) in &self.coefficients {
            total += c * behavior.probability(prep, meas, *k)?;
        }
        Ok(total)
    }

    /// Formats the inequality one measurement per line, mirroring the usual
    /// tabular presentation.
    pub fn render(&self, task: &TaskSpec) -> String {
        let n = task.n();
        let mut by_meas: BTreeMap<&Subset, Vec<String>> = BTreeMap::new();
        for ((prep, meas, k), c) in &self.coefficients {
            by_meas.entry(meas).or_default().push(format!(
                "{} {:.6}*p({}|{},{})",
                if *c >= 0.0 { "+" } else { "-" },
                c.abs(),
                k,
                prep.to_bitstring(n),
                meas.to_bitstring(n),
            ));
        }
        let mut out = String::new();
        for (_, terms) in by_meas {
            out.push_str("  ");
            out.push_str(&terms.join(" "));
            out.push('\n');
        }
        out.push_str(&format!(
            "  <= {:.6}   (achieved {:.9})\n",
            self.bound, self.achieved
        ));
        out
    }
}

mod coeff_map {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<(Subset, Subset, u8), f64>,
        ser: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let flat: BTreeMap<String, f64> = map
            .iter()
            .map(|((p, m, k), v)| (format!("{p}|{m}|{k}"), *v))
            .collect();
        serde::Serialize::serialize(&flat, ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> std::result::Result<BTreeMap<(Subset, Subset, u8), f64>, D::Error> {
        let flat: BTreeMap<String, f64> = serde::Deserialize::deserialize(de)?;
        let mut out = BTreeMap::new();
        for (key, value) in flat {
            let mut parts = key.split('|');
            let parse_set = |s: Option<&str>| -> std::result::Result<Subset, D::Error> {
                let s = s.ok_or_else(|| serde::de::Error::custom("malformed key"))?;
                let inner = s
                    .strip_prefix('{')
                    .and_then(|s| s.strip_suffix('}'))
                    .ok_or_else(|| serde::de::Error::custom("malformed label"))?;
                let idx: Vec<u8> = if inner.is_empty() {
                    Vec::new()
                } else {
                    inner
                        .split(',')
                        .map(|x| x.parse().map_err(serde::de::Error::custom))
                        .collect::<std::result::Result<_, _>>()?
                };
                Subset::new(idx).map_err(serde::de::Error::custom)
            };
            let p = parse_set(parts.next())?;
            let m = parse_set(parts.next())?;
            let k: u8 = parts
                .next()
                .ok_or_else(|| serde::de::Error::custom("malformed key"))?
                .parse()
                .map_err(serde::de::Error::custom)?;
            out.insert((p, m, k), value);
        }
        Ok(out)
    }
}

/// Outcome of a noncontextual feasibility test.
#[derive(Clone, Debug)]
pub enum NcFeasibility {
    Feasible(NCModel),
    Infeasible(FarkasCertificate),
}

struct LpRows {
    /// data rows: (prep, meas, outcome) in reduced form (last outcome of
    /// each measurement dropped as redundant with normalization)
    data_keys: Vec<(Subset, Subset, u8)>,
    /// per data row: coefficients over (prep index, vertex) variables
    preps: Vec<Subset>,
}

fn reduced_data_keys(task: &TaskSpec) -> LpRows {
    let labels = task.labels();
    let mut data_keys = Vec::new();
    for prep in labels.preparations() {
        for (j, meas) in labels.measurements().iter().enumerate() {
            let outs = labels.outcomes(j);
            for &k in &outs[..outs.len() - 1] {
                data_keys.push((prep.clone(), meas.clone(), k));
            }
        }
    }
    LpRows { data_keys, preps: labels.preparations().to_vec() }
}

fn prep_equivalence_rows(
    preps: &[Subset],
    prep_equivalences: &[OperationalEquivalence],
) -> Result<Vec<Vec<(usize, f64)>>> {
    let mut rows = Vec::new();
    for eq in prep_equivalences {
        if !eq.is_preparation() {
            return Err(Error::Constraint(
                "prep_equivalences must contain preparation equivalences".into(),
            ));
        }
        let mut signed = Vec::new();
        for (label, w) in eq.prep_signed_weights() {
            let i = preps
                .iter()
                .position(|p| *p == label)
                .ok_or_else(|| Error::Lookup(format!("unknown preparation {label}")))?;
            signed.push((i, w));
        }
        rows.push(signed);
    }
    Ok(rows)
}

/// Exact LP maximum of a metric over all behaviors generated by
/// noncontextual models on the given vertex set.
pub fn nc_max(
    task: &TaskSpec,
    metric: &SuccessMetric,
    vertices: &VertexSet,
    prep_equivalences: &[OperationalEquivalence],
) -> Result<f64> {
    nc_max_with(task, metric, vertices, prep_equivalences, &SolverOptions::default())
}

pub fn nc_max_with(
    task: &TaskSpec,
    metric: &SuccessMetric,
    vertices: &VertexSet,
    prep_equivalences: &[OperationalEquivalence],
    opts: &SolverOptions,
) -> Result<f64> {
    metric.validate_against(task)?;
    let labels = task.labels();
    let preps = labels.preparations();
    let nv = vertices.len();
    let num_vars = preps.len() * nv;
    let var = |i: usize, kappa: usize| i * nv + kappa;

    let mut lp = LinearProgram::new(num_vars, Sense::Maximize);
    lp.objective_constant = metric.constant_offset();
    let mut objective = vec![0.0; num_vars];
    for ((prep, meas, outcome), w) in metric.weights() {
        let i = labels.prep_index(prep)?;
        let coord = vertices.coord(meas, *outcome)?;
        for kappa in 0..nv {
            objective[var(i, kappa)] += w * vertices.vertices[kappa][coord];
        }
    }
    lp.objective = objective
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c != 0.0)
        .collect();

    for i in 0..preps.len() {
        lp.eq.push((
            LinRow::new((0..nv).map(|kappa| (var(i, kappa), 1.0)).collect()),
            1.0,
        ));
    }
    for signed in prep_equivalence_rows(preps, prep_equivalences)? {
        for kappa in 0..nv {
            lp.eq.push((
                LinRow::new(signed.iter().map(|(i, w)| (var(*i, kappa), *w)).collect()),
                0.0,
            ));
        }
    }
    lp.bounds = vec![(Some(0.0), None); num_vars];

    let report = solve_lp_with(&lp, opts)?.require_optimal()?;
    Ok(report.value)
}

/// Decides whether a behavior admits a noncontextual model over the vertex
/// set. Feasible behaviors return a reconstructed model; infeasible ones a
/// maximally violated inequality from the Farkas dual.
pub fn nc_feasibility(
    behavior: &Behavior,
    vertices: &VertexSet,
    prep_equivalences: &[OperationalEquivalence],
) -> Result<NcFeasibility> {
    nc_feasibility_with(
        behavior,
        vertices,
        prep_equivalences,
        DEFAULT_FEAS_TOL,
        &SolverOptions::default(),
    )
}

pub fn nc_feasibility_with(
    behavior: &Behavior,
    vertices: &VertexSet,
    prep_equivalences: &[OperationalEquivalence],
    feas_tol: f64,
    opts: &SolverOptions,
) -> Result<NcFeasibility> {
    let task = vertices.task();
    let labels = task.labels();
    // reject behaviors that violate their own normalization upfront
    for prep in labels.preparations() {
        for (j, meas) in labels.measurements().iter().enumerate() {
            let mut sum = 0.0;
            for &k in labels.outcomes(j) {
                sum += behavior.probability(prep, meas, k)?;
            }
            if (sum - 1.0).abs() > 1e-7 {
                return Err(Error::Constraint(format!(
                    "behavior outcomes of ({prep},{meas}) sum to {sum}"
                )));
            }
        }
    }

    let rows = reduced_data_keys(task);
    let preps = &rows.preps;
    let nv = vertices.len();
    let nprep = preps.len();
    let var = |i: usize, kappa: usize| i * nv + kappa;
    let eq_rows = prep_equivalence_rows(preps, prep_equivalences)?;

    // Phase 1: minimize the worst equation residual t over nonnegative
    // models; the behavior is noncontextual iff t* vanishes.
    let num_vars = nprep * nv + 1;
    let t_var = nprep * nv;
    let mut lp = LinearProgram::new(num_vars, Sense::Minimize);
    lp.objective = vec![(t_var, 1.0)];
    let push_abs_row = |lp: &mut LinearProgram, coeffs: Vec<(usize, f64)>, rhs: f64| {
        let mut le = coeffs.clone();
        le.push((t_var, -1.0));
        lp.ineq.push((LinRow::new(le), rhs, Cmp::Le));
        let mut ge = coeffs;
        ge.push((t_var, 1.0));
        lp.ineq.push((LinRow::new(ge), rhs, Cmp::Ge));
    };
    for (prep, meas, k) in &rows.data_keys {
        let i = labels.prep_index(prep)?;
        let coord = vertices.coord(meas, *k)?;
        let coeffs: Vec<(usize, f64)> = (0..nv)
            .map(|kappa| (var(i, kappa), vertices.vertices[kappa][coord]))
            .filter(|(_, c)| *c != 0.0)
            .collect();
        push_abs_row(&mut lp, coeffs, behavior.probability(prep, meas, *k)?);
    }
    for i in 0..nprep {
        push_abs_row(
            &mut lp,
            (0..nv).map(|kappa| (var(i, kappa), 1.0)).collect(),
            1.0,
        );
    }
    for signed in &eq_rows {
        for kappa in 0..nv {
            push_abs_row(
                &mut lp,
                signed.iter().map(|(i, w)| (var(*i, kappa), *w)).collect(),
                0.0,
            );
        }
    }
    let mut bounds = vec![(Some(0.0), None); num_vars];
    bounds[t_var] = (Some(0.0), None);
    lp.bounds = bounds;

    let report = solve_lp_with(&lp, opts)?.require_optimal()?;
    if report.value <= feas_tol {
        let mut weights = BTreeMap::new();
        for (i, prep) in preps.iter().enumerate() {
            let nu: Vec<f64> = (0..nv)
                .map(|kappa| report.primal[var(i, kappa)].max(0.0))
                .collect();
            weights.insert(prep.clone(), nu);
        }
        let model = NCModel { weights };
        model.validate(vertices, prep_equivalences, 10.0 * feas_tol.max(1e-7))?;
        return Ok(NcFeasibility::Feasible(model));
    }

    // Phase 2: Farkas dual  min b*'y  s.t.  M'y >= 0, with the multipliers
    // of the all-ones normalization rows summing to 1 so the certificate
    // reads "<= 1".
    let certificate = farkas_certificate(behavior, vertices, &rows, &eq_rows, opts)?;
    Ok(NcFeasibility::Infeasible(certificate))
}

fn farkas_certificate(
    behavior: &Behavior,
    vertices: &VertexSet,
    rows: &LpRows,
    eq_rows: &[Vec<(usize, f64)>],
    opts: &SolverOptions,
) -> Result<FarkasCertificate> {
    let task = vertices.task();
    let labels = task.labels();
    let nv = vertices.len();
    let nprep = rows.preps.len();
    let n_data = rows.data_keys.len();
    let n_norm = nprep;
    let n_equiv = eq_rows.len() * nv;
    let n_rows = n_data + n_norm + n_equiv;

    // column of M per variable (i, kappa): data coefficients, then the
    // normalization indicator, then equivalence coefficients
    let column = |i: usize, kappa: usize| -> Result<Vec<(usize, f64)>> {
        let mut col = Vec::new();
        for (r, (prep, meas, k)) in rows.data_keys.iter().enumerate() {
            if labels.prep_index(prep)? == i {
                let coord = vertices.coord(meas, *k)?;
                let xi = vertices.vertices[kappa][coord];
                if xi != 0.0 {
                    col.push((r, xi));
                }
            }
        }
        col.push((n_data + i, 1.0));
        for (e, signed) in eq_rows.iter().enumerate() {
            for (ii, w) in signed {
                if *ii == i && *w != 0.0 {
                    col.push((n_data + n_norm + e * nv + kappa, *w));
                }
            }
        }
        Ok(col)
    };

    let mut rhs = Vec::with_capacity(n_rows);
    for (prep, meas, k) in &rows.data_keys {
        rhs.push(behavior.probability(prep, meas, *k)?);
    }
    rhs.extend(std::iter::repeat_n(1.0, n_norm));
    rhs.extend(std::iter::repeat_n(0.0, n_equiv));

    let build = |normalized: bool| -> Result<LinearProgram> {
        let mut lp = LinearProgram::new(n_rows, Sense::Minimize);
        lp.objective = rhs
            .iter()
            .enumerate()
            .filter(|(_, b)| **b != 0.0)
            .map(|(r, b)| (r, *b))
            .collect();
        for i in 0..nprep {
            for kappa in 0..nv {
                lp.ineq.push((LinRow::new(column(i, kappa)?), 0.0, Cmp::Ge));
            }
        }
        if normalized {
            lp.eq.push((
                LinRow::new((0..n_norm).map(|i| (n_data + i, 1.0)).collect()),
                1.0,
            ));
        } else {
            lp.bounds = vec![(Some(-1.0), Some(1.0)); n_rows];
        }
        Ok(lp)
    };

    let report = solve_lp_with(&build(true)?, opts)?;
    let y = match report.status {
        SolveStatus::Optimal => report.primal,
        // degenerate normalization: fall back to box constraints and
        // rescale the certificate afterward
        _ => {
            let fallback = solve_lp_with(&build(false)?, opts)?.require_optimal()?;
            fallback.primal
        }
    };

    let mut bound: f64 = y[n_data..n_data + n_norm].iter().sum();
    let mut coefficients = BTreeMap::new();
    let mut achieved = 0.0;
    for (r, key) in rows.data_keys.iter().enumerate() {
        let c = -y[r];
        achieved += c * rhs[r];
        coefficients.insert(key.clone(), c);
    }
    // normalize the inequality to "<= 1" when the constant part allows it
    if (bound - 1.0).abs() > 1e-9 && bound > 1e-9 {
        for c in coefficients.values_mut() {
            *c /= bound;
        }
        achieved /= bound;
        bound = 1.0;
    }
    Ok(FarkasCertificate { coefficients, bound, achieved })
}

/// LP maximum of a metric over raw behaviors subject only to outcome
/// normalization, positivity, and the behavior-level consequences of the
/// preparation equivalences. A sound upper bound for every operational
/// theory satisfying the equivalences.
pub fn behavior_lp_bound(
    task: &TaskSpec,
    metric: &SuccessMetric,
    prep_equivalences: &[OperationalEquivalence],
) -> Result<f64> {
    behavior_lp_bound_with(task, metric, prep_equivalences, &SolverOptions::default())
}

pub fn behavior_lp_bound_with(
    task: &TaskSpec,
    metric: &SuccessMetric,
    prep_equivalences: &[OperationalEquivalence],
    opts: &SolverOptions,
) -> Result<f64> {
    metric.validate_against(task)?;
    let labels = task.labels();
    let preps = labels.preparations();
    let mut index = BTreeMap::new();
    for (i, _prep) in preps.iter().enumerate() {
        for (j, _meas) in labels.measurements().iter().enumerate() {
            for &k in labels.outcomes(j) {
                let next = index.len();
                index.insert((i, j, k), next);
            }
        }
    }

    let mut lp = LinearProgram::new(index.len(), Sense::Maximize);
    lp.objective_constant = metric.constant_offset();
    lp.objective = metric
        .weights()
        .iter()
        .map(|((prep, meas, k), w)| {
            let i = labels.prep_index(prep)?;
            let j = labels.meas_index(meas)?;
            Ok((index[&(i, j, *k)], *w))
        })
        .collect::<Result<_>>()?;
    for (i, _) in preps.iter().enumerate() {
        for (j, _) in labels.measurements().iter().enumerate() {
            lp.eq.push((
                LinRow::new(
                    labels.outcomes(j).iter().map(|&k| (index[&(i, j, k)], 1.0)).collect(),
                ),
                1.0,
            ));
        }
    }
    for signed in prep_equivalence_rows(preps, prep_equivalences)? {
        for (j, _) in labels.measurements().iter().enumerate() {
            for &k in labels.outcomes(j) {
                lp.eq.push((
                    LinRow::new(signed.iter().map(|(i, w)| (index[&(*i, j, k)], *w)).collect()),
                    0.0,
                ));
            }
        }
    }
    lp.bounds = vec![(Some(0.0), Some(1.0)); index.len()];

    let report = solve_lp_with(&lp, opts)?.require_optimal()?;
    Ok(report.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{behavior_of, canonical_metric, fixtures, signed_metric_t41};
    use approx::assert_abs_diff_eq;

    fn sub(v: &[u8]) -> Subset {
        Subset::new(v.iter().copied()).unwrap()
    }

    fn t41_equivalence() -> OperationalEquivalence {
        OperationalEquivalence::preparation_uniform(
            &[sub(&[0]), sub(&[1])],
            &[sub(&[2]), sub(&[3])],
        )
        .unwrap()
    }

    fn c42_equivalences() -> Vec<OperationalEquivalence> {
        vec![
            OperationalEquivalence::preparation_uniform(
                &[sub(&[0, 1]), sub(&[0, 2])],
                &[sub(&[0, 3]), sub(&[1, 2])],
            )
            .unwrap(),
            OperationalEquivalence::preparation_uniform(
                &[sub(&[0, 3]), sub(&[1, 2])],
                &[sub(&[1, 3]), sub(&[2, 3])],
            )
            .unwrap(),
        ]
    }

    #[test]
    fn t41_has_64_vertices() {
        let task = TaskSpec::new(4, 1).unwrap();
        let vs = enumerate_vertices(&task, &[]).unwrap();
        assert_eq!(vs.len(), 64);
    }

    #[test]
    fn t42_has_81_vertices() {
        let task = TaskSpec::new(4, 2).unwrap();
        let vs = enumerate_vertices(&task, &[]).unwrap();
        assert_eq!(vs.len(), 81);
    }

    #[test]
    fn single_binary_measurement_has_two_vertices() {
        // T_{2,1}: one preparation set of size 1... n=2, m=1: b empty, one
        // measurement with 2 outcomes
        let task = TaskSpec::new(2, 1).unwrap();
        let vs = enumerate_vertices(&task, &[]).unwrap();
        assert_eq!(vs.len(), 2);
    }

    #[test]
    fn dd_path_matches_product_when_unconstrained() {
        // force the DD path with a vacuous equivalence: a measurement's
        // first effect equivalent to itself
        let task = TaskSpec::new(3, 1).unwrap();
        let meas = sub(&[0]);
        let eq = OperationalEquivalence::effect(
            BTreeMap::from([((meas.clone(), 1u8), 1.0)]),
            BTreeMap::from([((meas.clone(), 1u8), 1.0)]),
        )
        .unwrap();
        let constrained = enumerate_vertices(&task, &[eq]).unwrap();
        let product = enumerate_vertices(&task, &[]).unwrap();
        assert_eq!(constrained.len(), product.len());
        let mut lhs = constrained.vertices_exact.clone();
        let mut rhs = product.vertices_exact.clone();
        lhs.sort();
        rhs.sort();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn effect_equivalence_cuts_vertices() {
        // identify the first effects of two measurements of T_{3,1}:
        // xi(1|{0}) = xi(1|{1})... outcomes of {0} are {1,2}, of {1} are
        // {0,2}; equate outcome 1 of meas {0} with outcome 0 of meas {1}
        let task = TaskSpec::new(3, 1).unwrap();
        let eq = OperationalEquivalence::effect(
            BTreeMap::from([((sub(&[0]), 1u8), 1.0)]),
            BTreeMap::from([((sub(&[1]), 0u8), 1.0)]),
        )
        .unwrap();
        let vs = enumerate_vertices(&task, &[eq]).unwrap();
        // the tie leaves two free binary choices: a 2-parameter square
        assert_eq!(vs.len(), 4);
        for kappa in 0..vs.len() {
            let a = vs.response(kappa, &sub(&[0]), 1).unwrap();
            let b = vs.response(kappa, &sub(&[1]), 0).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn nc_max_contextual_t41_is_four() {
        let task = TaskSpec::new(4, 1).unwrap();
        let vs = enumerate_vertices(&task, &[]).unwrap();
        let value = nc_max(&task, &signed_metric_t41(), &vs, &[t41_equivalence()]).unwrap();
        assert_abs_diff_eq!(value, 4.0, epsilon = 1e-6);
    }

    #[test]
    fn nc_max_contextual_t42_is_eight() {
        let task = TaskSpec::new(4, 2).unwrap();
        let vs = enumerate_vertices(&task, &[]).unwrap();
        let metric = canonical_metric(&task);
        let value = nc_max(&task, &metric, &vs, &c42_equivalences()).unwrap();
        assert_abs_diff_eq!(value, 8.0, epsilon = 1e-6);
    }

    #[test]
    fn zero_metric_nc_max_is_zero() {
        let task = TaskSpec::new(3, 1).unwrap();
        let vs = enumerate_vertices(&task, &[]).unwrap();
        let metric = SuccessMetric::new(BTreeMap::new(), 0.0);
        let value = nc_max(&task, &metric, &vs, &[]).unwrap();
        assert_abs_diff_eq!(value, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn uniform_behavior_is_feasible() {
        let task = TaskSpec::new(4, 1).unwrap();
        let vs = enumerate_vertices(&task, &[]).unwrap();
        let behavior = fixtures::uniform_behavior(&task);
        match nc_feasibility(&behavior, &vs, &[t41_equivalence()]).unwrap() {
            NcFeasibility::Feasible(model) => {
                let induced = model.induced_behavior(&vs).unwrap();
                for ((p, m, k), v) in behavior.iter() {
                    assert_abs_diff_eq!(
                        induced.probability(p, m, *k).unwrap(),
                        v,
                        epsilon = 1e-5
                    );
                }
            }
            NcFeasibility::Infeasible(_) => panic!("uniform behavior must be noncontextual"),
        }
    }

    #[test]
    fn square_model_behavior_is_contextual_with_sqrt2_ratio() {
        let task = TaskSpec::new(4, 1).unwrap();
        let vs = enumerate_vertices(&task, &[]).unwrap();
        let behavior = behavior_of(&fixtures::t41_square_model()).unwrap();
        match nc_feasibility(&behavior, &vs, &[t41_equivalence()]).unwrap() {
            NcFeasibility::Infeasible(cert) => {
                assert_abs_diff_eq!(cert.violation_ratio(), 2f64.sqrt(), epsilon = 1e-3);
                assert_abs_diff_eq!(cert.bound, 1.0, epsilon = 1e-9);
                assert_abs_diff_eq!(
                    cert.evaluate(&behavior).unwrap(),
                    cert.achieved,
                    epsilon = 1e-9
                );
            }
            NcFeasibility::Feasible(_) => panic!("square-model behavior must be contextual"),
        }
    }

    #[test]
    fn behavior_lp_bound_t42_is_eight() {
        let task = TaskSpec::new(4, 2).unwrap();
        let metric = canonical_metric(&task);
        let bound = behavior_lp_bound(&task, &metric, &c42_equivalences()).unwrap();
        assert_abs_diff_eq!(bound, 8.0, epsilon = 1e-6);
    }

    #[test]
    fn behavior_lp_bound_without_equivalences_saturates() {
        let task = TaskSpec::new(4, 2).unwrap();
        let metric = canonical_metric(&task);
        let bound = behavior_lp_bound(&task, &metric, &[]).unwrap();
        assert_abs_diff_eq!(bound, 12.0, epsilon = 1e-6);
    }

    #[test]
    fn behavior_lp_dominates_signed_quantum_value() {
        let task = TaskSpec::new(4, 1).unwrap();
        let bound =
            behavior_lp_bound(&task, &signed_metric_t41(), &[t41_equivalence()]).unwrap();
        assert!(bound >= 2.0 + 2.0 * 2f64.sqrt() - 1e-6);
    }

    #[test]
    fn point_mass_models_respect_equivalences() {
        let task = TaskSpec::new(4, 1).unwrap();
        let vs = enumerate_vertices(&task, &[]).unwrap();
        let eq = t41_equivalence();
        // nu_0 = d_3, nu_1 = d_7, nu_2 = d_3, nu_3 = d_7 satisfies the
        // equivalence; swapping one side's vertex breaks it
        assert!(NCModel::point_masses(&task, &[3, 7, 3, 7], &vs, &[eq.clone()], 1e-9).is_ok());
        assert!(NCModel::point_masses(&task, &[3, 7, 3, 8], &vs, &[eq], 1e-9).is_err());
    }
}
