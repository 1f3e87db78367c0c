//! Configuration-driven experiment runner and the reproduction matrix that
//! re-derives the reference numbers end to end.
//!
//! [`run`] executes the requested methods in dependency order (see-saw
//! models feed the contextuality, frame and witness analyses) and collects
//! everything into a serializable [`Report`]; failures are recorded as
//! per-method markers rather than aborting the run. [`paper_reproduction`]
//! runs the fixed acceptance matrix and reports one pass/fail line per
//! check.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::classical::{optimal_classical, strategy_behavior, worst_case_success};
use crate::contextuality::{
    behavior_lp_bound, enumerate_vertices, nc_feasibility, nc_max, FarkasCertificate,
    NcFeasibility,
};
use crate::frames::{
    frame_from_states, max_frame_correlation, t41_analytic_bound, verify_equiangular, welch_bound,
};
use crate::game::{
    behavior_of, canonical_metric, fixtures, signed_metric_t41, OperationalEquivalence,
    QuantumModel, Subset, SuccessMetric, TaskSpec,
};
use crate::hierarchy::outer_bound_u1;
use crate::seesaw::{seesaw, SeesawConfig, SeesawResult};
use crate::witness::{comm_matrix, lambda_max, metric_bound_via_lambda};
use crate::{conic::SolverOptions, Error, Result};

/// Which metric the experiment optimizes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricChoice {
    #[default]
    Canonical,
    SignedT41,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Classical,
    Seesaw,
    Outer,
    Contextual,
    Frames,
    Witness,
}

pub const ALL_METHODS: [Method; 6] = [
    Method::Classical,
    Method::Seesaw,
    Method::Outer,
    Method::Contextual,
    Method::Frames,
    Method::Witness,
];

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::Classical => "classical",
            Method::Seesaw => "seesaw",
            Method::Outer => "outer",
            Method::Contextual => "contextual",
            Method::Frames => "frames",
            Method::Witness => "witness",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(Method::Classical),
            "seesaw" => Ok(Method::Seesaw),
            "outer" => Ok(Method::Outer),
            "contextual" => Ok(Method::Contextual),
            "frames" => Ok(Method::Frames),
            "witness" => Ok(Method::Witness),
            other => Err(Error::Config(format!(
                "unknown method {other:?}; expected classical|seesaw|outer|contextual|frames|witness|all"
            ))),
        }
    }
}

/// Declared operational equivalence with bit-string labels, as written in
/// config files. Preparations are keyed by bit strings (`"1100"`); effects
/// by (measurement bit string, outcome index).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EquivalenceDecl {
    Preparation {
        side_a: BTreeMap<String, f64>,
        side_b: BTreeMap<String, f64>,
    },
    Effect {
        side_a: Vec<EffectWeight>,
        side_b: Vec<EffectWeight>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EffectWeight {
    pub measurement: String,
    pub outcome: u8,
    pub weight: f64,
}

impl EquivalenceDecl {
    pub fn resolve(&self) -> Result<OperationalEquivalence> {
        match self {
            EquivalenceDecl::Preparation { side_a, side_b } => {
                let convert = |side: &BTreeMap<String, f64>| -> Result<BTreeMap<Subset, f64>> {
                    side.iter()
                        .map(|(bits, w)| Ok((Subset::from_bitstring(bits)?, *w)))
                        .collect()
                };
                OperationalEquivalence::preparation(convert(side_a)?, convert(side_b)?)
            }
            EquivalenceDecl::Effect { side_a, side_b } => {
                let convert =
                    |side: &Vec<EffectWeight>| -> Result<BTreeMap<(Subset, u8), f64>> {
                        side.iter()
                            .map(|e| {
                                Ok((
                                    (Subset::from_bitstring(&e.measurement)?, e.outcome),
                                    e.weight,
                                ))
                            })
                            .collect()
                    };
                OperationalEquivalence::effect(convert(side_a)?, convert(side_b)?)
            }
        }
    }
}

fn default_dims() -> Vec<usize> {
    vec![2]
}

fn default_restarts() -> usize {
    20
}

fn default_epsilon() -> f64 {
    1e-9
}

fn default_max_rounds() -> usize {
    200
}

fn default_message_bits() -> u32 {
    1
}

/// One experiment: a task, the methods to run and their knobs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// `(n, m)` of the task.
    pub task: (u8, u8),
    /// Methods to run; an empty list yields an empty-but-valid report.
    #[serde(default)]
    pub methods: Vec<Method>,
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    #[serde(default)]
    pub metric: MetricChoice,
    #[serde(default)]
    pub prep_equivalences: Vec<EquivalenceDecl>,
    #[serde(default)]
    pub effect_equivalences: Vec<EquivalenceDecl>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: usize,
    #[serde(default = "default_message_bits")]
    pub message_bits: u32,
}

impl ExperimentConfig {
    pub fn new(n: u8, m: u8) -> Self {
        ExperimentConfig {
            task: (n, m),
            methods: ALL_METHODS.to_vec(),
            dims: default_dims(),
            metric: MetricChoice::default(),
            prep_equivalences: Vec::new(),
            effect_equivalences: Vec::new(),
            seed: 0,
            restarts: default_restarts(),
            epsilon: default_epsilon(),
            max_rounds: default_max_rounds(),
            message_bits: default_message_bits(),
        }
    }

    fn task_spec(&self) -> Result<TaskSpec> {
        TaskSpec::new(self.task.0, self.task.1)
    }

    fn metric_for(&self, task: &TaskSpec) -> Result<SuccessMetric> {
        match self.metric {
            MetricChoice::Canonical => Ok(canonical_metric(task)),
            MetricChoice::SignedT41 => {
                if self.task != (4, 1) {
                    return Err(Error::Config(
                        "signed_t41 metric only applies to task (4,1)".into(),
                    ));
                }
                Ok(signed_metric_t41())
            }
        }
    }

    fn resolved_preps(&self) -> Result<Vec<OperationalEquivalence>> {
        self.prep_equivalences.iter().map(|d| d.resolve()).collect()
    }

    fn resolved_effects(&self) -> Result<Vec<OperationalEquivalence>> {
        self.effect_equivalences.iter().map(|d| d.resolve()).collect()
    }
}

/// Results of one method: scalar values keyed by name, optional attached
/// model/certificate, rendered tables, and a failure marker on error.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: String,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default)]
    pub values: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<QuantumModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<FarkasCertificate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tables: Vec<String>,
    pub wall_clock_seconds: f64,
}

/// A full experiment report: config echo, toolkit version, per-method
/// results.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub toolkit_version: String,
    pub config: ExperimentConfig,
    pub results: Vec<MethodResult>,
    pub wall_clock_seconds: f64,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.results.iter().all(|r| r.ok)
    }

    /// Human-readable summary, one section per method.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "task T_{{{},{}}}  metric {:?}  seed {}\n",
            self.config.task.0, self.config.task.1, self.config.metric, self.config.seed
        ));
        for r in &self.results {
            out.push_str(&format!("\n== {} ==\n", r.method));
            if let Some(err) = &r.error {
                out.push_str(&format!("  FAILED: {err}\n"));
                continue;
            }
            for (k, v) in &r.values {
                out.push_str(&format!("  {k} = {v:.9}\n"));
            }
            for t in &r.tables {
                out.push('\n');
                out.push_str(t);
            }
        }
        out
    }
}

fn solver_opts() -> SolverOptions {
    SolverOptions { feas_tol: 1e-9, gap_tol: 1e-9, ..SolverOptions::default() }
}

/// Executes the configured methods in dependency order. Method errors are
/// captured as failure markers; the report is always produced.
pub fn run(config: &ExperimentConfig) -> Report {
    let started = Instant::now();
    let mut results = Vec::new();
    let mut seesaw_models: BTreeMap<usize, SeesawResult> = BTreeMap::new();

    let ordered: Vec<Method> = ALL_METHODS
        .iter()
        .copied()
        .filter(|m| config.methods.contains(m))
        .collect();

    for method in ordered {
        match method {
            Method::Seesaw => {
                for &d in &config.dims {
                    let t0 = Instant::now();
                    let outcome = run_seesaw_method(config, d);
                    results.push(finish(
                        format!("seesaw d={d}"),
                        t0,
                        outcome.map(|(values, res)| {
                            let model = res.model.clone();
                            seesaw_models.insert(d, res);
                            (values, Some(model), None, Vec::new())
                        }),
                    ));
                }
            }
            other => {
                let t0 = Instant::now();
                let outcome = run_simple_method(config, other, &seesaw_models);
                results.push(finish(other.to_string(), t0, outcome));
            }
        }
    }

    Report {
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        results,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    }
}

type MethodPayload = (
    BTreeMap<String, f64>,
    Option<QuantumModel>,
    Option<FarkasCertificate>,
    Vec<String>,
);

fn finish(method: String, t0: Instant, outcome: Result<MethodPayload>) -> MethodResult {
    match outcome {
        Ok((values, model, certificate, tables)) => MethodResult {
            method,
            ok: true,
            error: None,
            values,
            model,
            certificate,
            tables,
            wall_clock_seconds: t0.elapsed().as_secs_f64(),
        },
        Err(e) => MethodResult {
            method,
            ok: false,
            error: Some(e.to_string()),
            values: BTreeMap::new(),
            model: None,
            certificate: None,
            tables: Vec::new(),
            wall_clock_seconds: t0.elapsed().as_secs_f64(),
        },
    }
}

fn run_seesaw_method(
    config: &ExperimentConfig,
    d: usize,
) -> Result<(BTreeMap<String, f64>, SeesawResult)> {
    let task = config.task_spec()?;
    let metric = config.metric_for(&task)?;
    let mut cfg = SeesawConfig::new(d)
        .with_seed(config.seed)
        .with_restarts(config.restarts)
        .with_prep_equivalences(config.resolved_preps()?)
        .with_effect_equivalences(config.resolved_effects()?);
    cfg.epsilon = config.epsilon;
    cfg.max_rounds = config.max_rounds;
    let res = seesaw(&task, &metric, &cfg)?;
    let mut values = BTreeMap::new();
    values.insert("value".into(), res.best_value);
    values.insert("converged".into(), if res.converged { 1.0 } else { 0.0 });
    values.insert(
        "rounds".into(),
        res.traces[res.best_restart].rounds as f64,
    );
    Ok((values, res))
}

fn run_simple_method(
    config: &ExperimentConfig,
    method: Method,
    seesaw_models: &BTreeMap<usize, SeesawResult>,
) -> Result<MethodPayload> {
    let task = config.task_spec()?;
    let metric = config.metric_for(&task)?;
    let preps = config.resolved_preps()?;
    let effects = config.resolved_effects()?;
    let mut values = BTreeMap::new();
    let mut tables = Vec::new();
    let mut certificate = None;

    match method {
        Method::Classical => {
            let (count, strategy) = optimal_classical(&task, config.message_bits)?;
            let behavior = strategy_behavior(&task, &strategy)?;
            let worst = worst_case_success(&task, &strategy)?;
            values.insert("correct_count".into(), f64::from(count));
            values.insert(
                "row_count".into(),
                crate::game::enumerate_scenarios(&task).len() as f64,
            );
            values.insert(
                "metric_value".into(),
                metric.evaluate(&behavior).unwrap_or(f64::NAN),
            );
            values.insert(
                "worst_case".into(),
                *worst.numer() as f64 / *worst.denom() as f64,
            );
            tables.push(strategy.render(&task));
        }
        Method::Outer => {
            let (bound, program) = outer_bound_u1(&task, &metric, &preps, &effects, &solver_opts())?;
            values.insert("bound".into(), bound);
            values.insert("moment_side".into(), program.side as f64);
        }
        Method::Contextual => {
            let vertices = enumerate_vertices(&task, &effects)?;
            values.insert("vertex_count".into(), vertices.len() as f64);
            values.insert("nc_max".into(), nc_max(&task, &metric, &vertices, &preps)?);
            values.insert(
                "behavior_lp_bound".into(),
                behavior_lp_bound(&task, &metric, &preps)?,
            );
            for (&d, res) in seesaw_models {
                let behavior = behavior_of(&res.model)?;
                match nc_feasibility(&behavior, &vertices, &preps)? {
                    NcFeasibility::Feasible(_) => {
                        values.insert(format!("noncontextual d={d}"), 1.0);
                    }
                    NcFeasibility::Infeasible(cert) => {
                        values.insert(format!("noncontextual d={d}"), 0.0);
                        values.insert(
                            format!("violation_ratio d={d}"),
                            cert.violation_ratio(),
                        );
                        tables.push(cert.render(&task));
                        certificate = Some(cert);
                    }
                }
            }
        }
        Method::Frames => {
            if config.task == (4, 1) {
                for d in 2..=4usize {
                    values.insert(
                        format!("t41_analytic d={d}"),
                        t41_analytic_bound(d)?,
                    );
                }
            }
            for (&d, res) in seesaw_models {
                let (frame, purities) = frame_from_states(&res.model)?;
                if frame.len() >= 2 {
                    values.insert(
                        format!("correlation d={d}"),
                        max_frame_correlation(&frame)?,
                    );
                    values.insert(
                        format!("equiangular_1e-3 d={d}"),
                        if verify_equiangular(&frame, 1e-3)? { 1.0 } else { 0.0 },
                    );
                    if frame.len() >= frame.dimension() {
                        values.insert(
                            format!("welch d={d}"),
                            welch_bound(frame.len(), frame.dimension())?,
                        );
                    }
                }
                let min_purity = purities.iter().map(|(_, p)| *p).fold(1.0, f64::min);
                values.insert(format!("min_purity d={d}"), min_purity);
            }
        }
        Method::Witness => {
            if let Ok(bound) = metric_bound_via_lambda(&task, &metric, 2) {
                values.insert("metric_bound_lambda d=2".into(), bound);
            }
            if let Ok(bound) = metric_bound_via_lambda(&task, &metric, 3) {
                values.insert("metric_bound_lambda d=3".into(), bound);
            }
            for (&d, res) in seesaw_models {
                let behavior = behavior_of(&res.model)?;
                let mut worst: f64 = 0.0;
                for meas in task.labels().measurements() {
                    let a = comm_matrix(&behavior, &task, meas)?;
                    worst = worst.max(lambda_max(&a));
                }
                values.insert(format!("lambda_max d={d}"), worst);
            }
        }
        Method::Seesaw => unreachable!("handled by the caller"),
    }
    Ok((values, None, certificate, tables))
}

// ---------------------------------------------------------------------------
// reproduction matrix
// ---------------------------------------------------------------------------

/// One check of the reproduction matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckResult {
    pub criterion: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub pass: bool,
    #[serde(default)]
    pub skipped: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReproductionReport {
    pub toolkit_version: String,
    pub seed: u64,
    pub restarts: usize,
    pub checks: Vec<CheckResult>,
    /// Wall-clock timings of the obviously expensive stages, in seconds.
    pub timings: std::collections::BTreeMap<String, f64>,
    pub wall_clock_seconds: f64,
}

impl ReproductionReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass || c.skipped)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = if c.skipped {
                "SKIP"
            } else if c.pass {
                "PASS"
            } else {
                "FAIL"
            };
            out.push_str(&format!("[{tag}] {}: {}", c.criterion, c.name));
            if let (Some(obs), Some(exp)) = (c.observed, c.expected) {
                out.push_str(&format!(" = {obs:.9} (expected {exp:.9}"));
                if let Some(tol) = c.tolerance {
                    out.push_str(&format!(" +- {tol:.1e}"));
                }
                out.push(')');
            }
            if !c.note.is_empty() {
                out.push_str(&format!("  [{}]", c.note));
            }
            out.push('\n');
        }
        out.push_str(&format!(
            "\n{} checks, {} failed, {} skipped ({:.1} s)\n",
            self.checks.len(),
            self.checks.iter().filter(|c| !c.pass && !c.skipped).count(),
            self.checks.iter().filter(|c| c.skipped).count(),
            self.wall_clock_seconds,
        ));
        out
    }
}

struct Checks(Vec<CheckResult>);

impl Checks {
    fn value(
        &mut self,
        criterion: &str,
        name: &str,
        observed: f64,
        expected: f64,
        tolerance: f64,
    ) {
        self.0.push(CheckResult {
            criterion: criterion.into(),
            name: name.into(),
            expected: Some(expected),
            observed: Some(observed),
            tolerance: Some(tolerance),
            pass: (observed - expected).abs() <= tolerance,
            skipped: false,
            note: String::new(),
        });
    }

    fn claim(&mut self, criterion: &str, name: &str, pass: bool, note: &str) {
        self.0.push(CheckResult {
            criterion: criterion.into(),
            name: name.into(),
            expected: None,
            observed: None,
            tolerance: None,
            pass,
            skipped: false,
            note: note.into(),
        });
    }

    fn skip(&mut self, criterion: &str, name: &str, note: &str) {
        self.0.push(CheckResult {
            criterion: criterion.into(),
            name: name.into(),
            expected: None,
            observed: None,
            tolerance: None,
            pass: true,
            skipped: true,
            note: note.into(),
        });
    }
}

fn t41_contextual_equivalence() -> OperationalEquivalence {
    let s = |v: &[u8]| Subset::new(v.iter().copied()).expect("fixed labels");
    OperationalEquivalence::preparation_uniform(
        &[s(&[0]), s(&[1])],
        &[s(&[2]), s(&[3])],
    )
    .expect("uniform weights")
}

fn t42_contextual_equivalences() -> Vec<OperationalEquivalence> {
    let s = |v: &[u8]| Subset::new(v.iter().copied()).expect("fixed labels");
    vec![
        OperationalEquivalence::preparation_uniform(
            &[s(&[0, 1]), s(&[0, 2])],
            &[s(&[0, 3]), s(&[1, 2])],
        )
        .expect("uniform weights"),
        OperationalEquivalence::preparation_uniform(
            &[s(&[0, 3]), s(&[1, 2])],
            &[s(&[1, 3]), s(&[2, 3])],
        )
        .expect("uniform weights"),
    ]
}

fn seesaw_quick(
    task: &TaskSpec,
    metric: &SuccessMetric,
    d: usize,
    seed: u64,
    restarts: usize,
    preps: Vec<OperationalEquivalence>,
) -> Result<SeesawResult> {
    let cfg = SeesawConfig::new(d)
        .with_seed(seed)
        .with_restarts(restarts)
        .with_prep_equivalences(preps);
    seesaw(task, metric, &cfg)
}

/// Runs the full reproduction matrix: classical exact counts, the see-saw
/// table, hierarchy and LP bounds, contextuality analyses, frame analytics,
/// dimension witnesses and the numeric property suites.
pub fn paper_reproduction(seed: u64, restarts: usize) -> Result<ReproductionReport> {
    let started = Instant::now();
    let mut checks = Checks(Vec::new());
    let mut timings = BTreeMap::new();
    let opts = solver_opts();

    let t31 = TaskSpec::new(3, 1)?;
    let t41 = TaskSpec::new(4, 1)?;
    let t42 = TaskSpec::new(4, 2)?;
    let m31 = canonical_metric(&t31);
    let m41 = canonical_metric(&t41);
    let m42 = canonical_metric(&t42);
    let signed = signed_metric_t41();

    // 1. classical exact values
    for (task, metric, expect, name) in [
        (&t31, &m31, 5u32, "classical T_{3,1} 1 bit"),
        (&t41, &m41, 10, "classical T_{4,1} 1 bit"),
        (&t42, &m42, 8, "classical T_{4,2} 1 bit"),
    ] {
        let t0 = Instant::now();
        let (count, strategy) = optimal_classical(task, 1)?;
        timings.insert(format!("{name} seconds"), t0.elapsed().as_secs_f64());
        let behavior = strategy_behavior(task, &strategy)?;
        let consistent = (metric.evaluate(&behavior)? - f64::from(count)).abs() < 1e-12;
        checks.value("1", name, f64::from(count), f64::from(expect), 0.0);
        checks.claim(
            "1",
            &format!("{name}: strategy table consistent"),
            consistent,
            "",
        );
    }

    // 2. see-saw reference table
    let tab7_started = Instant::now();
    let mut tab7_t41: BTreeMap<usize, SeesawResult> = BTreeMap::new();
    for (d, expect) in [(2usize, 10.898_979_46), (3, 11.656_854_25), (4, 12.0)] {
        let res = seesaw_quick(&t41, &m41, d, seed, restarts, Vec::new())?;
        checks.value("2", &format!("see-saw T_{{4,1}} d={d}"), res.best_value, expect, 1e-5);
        tab7_t41.insert(d, res);
    }
    let mut tab7_t42: BTreeMap<usize, SeesawResult> = BTreeMap::new();
    for (d, expect) in [(2usize, 8.0), (3, 12.0)] {
        let res = seesaw_quick(&t42, &m42, d, seed, restarts, Vec::new())?;
        checks.value("2", &format!("see-saw T_{{4,2}} d={d}"), res.best_value, expect, 1e-5);
        tab7_t42.insert(d, res);
    }
    timings.insert(
        "see-saw reference table seconds".into(),
        tab7_started.elapsed().as_secs_f64(),
    );

    // 3. T_{3,1} qubit value
    let t31_res = seesaw_quick(&t31, &m31, 2, seed, restarts, Vec::new())?;
    checks.value("3", "see-saw T_{3,1} d=2", t31_res.best_value, 5.598_076, 1e-5);

    // 4. contextual T_{4,1}: inner, outer, ordering
    let ctx41 = seesaw_quick(
        &t41,
        &signed,
        2,
        seed,
        restarts,
        vec![t41_contextual_equivalence()],
    )?;
    checks.value("4", "contextual T_{4,1} see-saw d=2", ctx41.best_value, 4.828_427, 1e-5);
    let (outer41, _) =
        outer_bound_u1(&t41, &signed, &[t41_contextual_equivalence()], &[], &opts)?;
    checks.value("4", "contextual T_{4,1} level-1 outer bound", outer41, 4.828_427_123, 1e-6);
    checks.claim(
        "4",
        "contextual T_{4,1}: inner <= outer",
        ctx41.best_value <= outer41 + 1e-5,
        &format!("inner {} outer {}", ctx41.best_value, outer41),
    );

    // 5. noncontextual T_{4,1}
    let vertices41 = enumerate_vertices(&t41, &[])?;
    checks.value("5", "T_{4,1} vertex count", vertices41.len() as f64, 64.0, 0.0);
    let nc41 = nc_max(&t41, &signed, &vertices41, &[t41_contextual_equivalence()])?;
    checks.value("5", "noncontextual maximum of signed T_{4,1}", nc41, 4.0, 1e-6);
    let ctx41_behavior = behavior_of(&ctx41.model)?;
    let feas41 = nc_feasibility(&ctx41_behavior, &vertices41, &[t41_contextual_equivalence()])?;
    let mut certificate41: Option<FarkasCertificate> = None;
    match feas41 {
        NcFeasibility::Infeasible(cert) => {
            checks.claim("5", "optimal quantum T_{4,1} behavior is contextual", true, "");
            checks.value(
                "5",
                "certificate violation ratio",
                cert.violation_ratio(),
                std::f64::consts::SQRT_2,
                1e-3,
            );
            certificate41 = Some(cert);
        }
        NcFeasibility::Feasible(_) => {
            checks.claim(
                "5",
                "optimal quantum T_{4,1} behavior is contextual",
                false,
                "feasibility returned a noncontextual model",
            );
        }
    }

    // 6. contextual T_{4,2}
    let vertices42 = enumerate_vertices(&t42, &[])?;
    let nc42 = nc_max(&t42, &m42, &vertices42, &t42_contextual_equivalences())?;
    checks.value("6", "noncontextual maximum of T_{4,2}", nc42, 8.0, 1e-6);
    let lp42 = behavior_lp_bound(&t42, &m42, &t42_contextual_equivalences())?;
    checks.value("6", "behavior-level LP bound of T_{4,2}", lp42, 8.0, 1e-6);
    let mut ctx42_d2: Option<SeesawResult> = None;
    for d in [2usize, 3] {
        let res = seesaw_quick(
            &t42,
            &m42,
            d,
            seed,
            restarts,
            t42_contextual_equivalences(),
        )?;
        checks.value(
            "6",
            &format!("contextual T_{{4,2}} see-saw d={d}"),
            res.best_value,
            8.0,
            1e-5,
        );
        if d == 2 {
            ctx42_d2 = Some(res);
        }
    }
    let ctx42_behavior = behavior_of(&ctx42_d2.as_ref().expect("d=2 ran").model)?;
    match nc_feasibility(&ctx42_behavior, &vertices42, &t42_contextual_equivalences())? {
        NcFeasibility::Feasible(model) => {
            let valid = model
                .validate(&vertices42, &t42_contextual_equivalences(), 1e-5)
                .is_ok();
            checks.claim("6", "optimal qubit T_{4,2} behavior is noncontextual", valid, "");
        }
        NcFeasibility::Infeasible(_) => {
            checks.claim(
                "6",
                "optimal qubit T_{4,2} behavior is noncontextual",
                false,
                "unexpected infeasibility",
            );
        }
    }

    // 7. frame analytics
    let analytic = [
        (2usize, 10.898_979_49),
        (3, 11.656_854_25),
        (4, 12.0),
    ];
    for (d, expect) in analytic {
        let bound = t41_analytic_bound(d)?;
        checks.value("7", &format!("analytic T_{{4,1}} bound d={d}"), bound, expect, 1e-6);
        let seen = tab7_t41[&d].best_value;
        checks.value(
            "7",
            &format!("analytic bound matches see-saw d={d}"),
            bound - seen,
            0.0,
            1e-4,
        );
    }
    for d in [2usize, 3] {
        let (frame, _) = frame_from_states(&tab7_t41[&d].model)?;
        let corr = max_frame_correlation(&frame)?;
        checks.value(
            "7",
            &format!("see-saw T_{{4,1}} d={d} frame correlation vs Welch"),
            corr,
            welch_bound(4, d)?,
            1e-4,
        );
        checks.claim(
            "7",
            &format!("see-saw T_{{4,1}} d={d} states equiangular at 1e-3"),
            verify_equiangular(&frame, 1e-3)?,
            "",
        );
    }

    // 8. dimension witness
    checks.value(
        "8",
        "lambda_max metric bound for T_{4,2} at d=2",
        metric_bound_via_lambda(&t42, &m42, 2)?,
        8.0,
        0.0,
    );
    let mut witness_violations = 0usize;
    let mut max_excess: f64 = f64::NEG_INFINITY;
    for d in [2usize, 3] {
        for i in 0..250u64 {
            let model = fixtures::random_model(&t42, d, seed ^ (d as u64) << 32 ^ i);
            let behavior = behavior_of(&model)?;
            for meas in t42.labels().measurements() {
                let a = comm_matrix(&behavior, &t42, meas)?;
                let excess = lambda_max(&a) - d as f64;
                max_excess = max_excess.max(excess);
                if excess > 1e-6 {
                    witness_violations += 1;
                }
            }
        }
    }
    checks.claim(
        "8",
        "lambda_max <= d over 500 random models (d in {2,3})",
        witness_violations == 0,
        &format!("max excess {max_excess:.2e}"),
    );

    // 9. property suites
    let mut monotone = true;
    for res in tab7_t41.values().chain(tab7_t42.values()).chain([&ctx41, &t31_res]) {
        for trace in &res.traces {
            for w in trace.values.windows(2) {
                if w[1] < w[0] - 1e-7 {
                    monotone = false;
                }
            }
        }
    }
    checks.claim("9", "see-saw value sequences are monotone per restart", monotone, "");

    let mut sound = true;
    let mut worst_slack: f64 = f64::NEG_INFINITY;
    for i in 0..1000u64 {
        let model = random_nc_model_t41(&vertices41, seed ^ 0x9c_0000 ^ i);
        let behavior = model.induced_behavior(&vertices41)?;
        let value = signed.evaluate(&behavior)?;
        worst_slack = worst_slack.max(value - nc41);
        if value > nc41 + 1e-7 {
            sound = false;
        }
    }
    checks.claim(
        "9",
        "nc_max dominates 1000 random noncontextual models",
        sound,
        &format!("worst slack {worst_slack:.2e}"),
    );

    if let Some(cert) = &certificate41 {
        let mut valid = true;
        let mut worst: f64 = f64::NEG_INFINITY;
        let nv = vertices41.len();
        for k1 in 0..nv {
            for k2 in 0..nv {
                for swap in [false, true] {
                    let assign = if swap { [k1, k2, k2, k1] } else { [k1, k2, k1, k2] };
                    let model = crate::contextuality::NCModel::point_masses(
                        &t41,
                        &assign,
                        &vertices41,
                        &[t41_contextual_equivalence()],
                        1e-9,
                    )
                    .expect("matched point masses satisfy the equivalence");
                    let behavior = model.induced_behavior(&vertices41)?;
                    let value = cert.evaluate(&behavior)?;
                    worst = worst.max(value - cert.bound);
                    if value > cert.bound + 1e-7 {
                        valid = false;
                    }
                }
            }
        }
        checks.claim(
            "9",
            "Farkas certificate holds on all consistent deterministic models",
            valid,
            &format!("worst slack {worst:.2e}"),
        );
    } else {
        checks.claim(
            "9",
            "Farkas certificate holds on all consistent deterministic models",
            false,
            "no certificate was produced by criterion 5",
        );
    }

    let mut offset_ok = true;
    for i in 0..1000u64 {
        let behavior = fixtures::random_behavior(&t41, seed ^ 0x0ff5e7 ^ i);
        let pos = m41.evaluate(&behavior)?;
        let sgn = signed.evaluate(&behavior)?;
        if (pos - sgn - 6.0).abs() > 1e-9 {
            offset_ok = false;
        }
    }
    checks.claim(
        "9",
        "signed metric = positive metric - 6 on 1000 random behaviors",
        offset_ok,
        "",
    );

    checks.claim(
        "9",
        "Hermitian embedding doubles the spectrum on random matrices",
        embedding_spectrum_holds(seed),
        "",
    );

    // 10. documented exclusions
    checks.skip(
        "10",
        "exact Farkas coefficients",
        "degenerate dual face; only the violation ratio is asserted",
    );
    checks.skip(
        "10",
        "tight T_{4,2} level-1 hierarchy value",
        "level 1 is loose for ternary measurements; the LP bound covers this task",
    );
    checks.skip(
        "10",
        "worst-case quantum success for T_{4,2}",
        "open problem; only average-case optimization is implemented",
    );

    Ok(ReproductionReport {
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        restarts,
        checks: checks.0,
        timings,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    })
}

/// A random noncontextual model satisfying `nu_0 + nu_1 = nu_2 + nu_3`
/// vertexwise: draw two distributions and hand each side a random convex
/// remixing of them.
fn random_nc_model_t41(
    vertices: &crate::contextuality::VertexSet,
    seed: u64,
) -> crate::contextuality::NCModel {
    use rand::{RngExt, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let nv = vertices.len();
    let simplex = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
        let draws: Vec<f64> = (0..nv).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let total: f64 = draws.iter().sum();
        draws.into_iter().map(|x| x / total).collect()
    };
    let mu1 = simplex(&mut rng);
    let mu2 = simplex(&mut rng);
    let mix = |alpha: f64, a: &[f64], b: &[f64]| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| alpha * x + (1.0 - alpha) * y).collect()
    };
    let alpha: f64 = rng.random();
    let s = |v: &[u8]| Subset::new(v.iter().copied()).expect("fixed labels");
    let mut weights = BTreeMap::new();
    weights.insert(s(&[0]), mu1.clone());
    weights.insert(s(&[1]), mu2.clone());
    weights.insert(s(&[2]), mix(alpha, &mu1, &mu2));
    weights.insert(s(&[3]), mix(1.0 - alpha, &mu1, &mu2));
    crate::contextuality::NCModel { weights }
}

fn embedding_spectrum_holds(seed: u64) -> bool {
    use crate::conic::hermitian_embed;
    use crate::game::HermitianMatrix;
    use nalgebra::{Complex, DMatrix};
    use rand::{RngExt, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xed6e);
    for _ in 0..100 {
        let d = 2 + (rng.random::<u32>() % 3) as usize;
        let raw = DMatrix::from_fn(d, d, |_, _| {
            Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let h = HermitianMatrix::new_with_tol((&raw + raw.adjoint()) * Complex::new(0.5, 0.0), 1e-9)
            .expect("symmetrized matrix is Hermitian");
        let mut doubled: Vec<f64> = h
            .eigenvalues()
            .into_iter()
            .flat_map(|ev| [ev, ev])
            .collect();
        doubled.sort_by(f64::total_cmp);
        let embedded = hermitian_embed(&h);
        let mut spectrum: Vec<f64> = embedded.symmetric_eigen().eigenvalues.iter().copied().collect();
        spectrum.sort_by(f64::total_cmp);
        for (a, b) in doubled.iter().zip(&spectrum) {
            if (a - b).abs() > 1e-9 {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_methods_give_empty_valid_report() {
        let mut cfg = ExperimentConfig::new(3, 1);
        cfg.methods = Vec::new();
        let report = run(&cfg);
        assert!(report.ok());
        assert!(report.results.is_empty());
    }

    #[test]
    fn classical_only_run() {
        let mut cfg = ExperimentConfig::new(3, 1);
        cfg.methods = vec![Method::Classical];
        let report = run(&cfg);
        assert!(report.ok());
        assert_eq!(report.results.len(), 1);
        assert_eq!(report.results[0].values["correct_count"], 5.0);
        assert_eq!(report.results[0].values["row_count"], 6.0);
    }

    #[test]
    fn bad_config_is_marked_not_panicked() {
        let mut cfg = ExperimentConfig::new(3, 1);
        cfg.metric = MetricChoice::SignedT41;
        cfg.methods = vec![Method::Classical];
        let report = run(&cfg);
        assert!(!report.ok());
        assert!(report.results[0].error.is_some());
    }

    #[test]
    fn report_json_round_trips_deterministically() {
        let mut cfg = ExperimentConfig::new(3, 1);
        cfg.methods = vec![Method::Classical, Method::Contextual];
        let mut a = run(&cfg);
        let mut b = run(&cfg);
        // blank out wall-clock fields before comparing
        a.wall_clock_seconds = 0.0;
        b.wall_clock_seconds = 0.0;
        for r in a.results.iter_mut().chain(b.results.iter_mut()) {
            r.wall_clock_seconds = 0.0;
        }
        let ja = serde_json::to_string(&a).unwrap();
        let jb = serde_json::to_string(&b).unwrap();
        assert_eq!(ja, jb);
        let back: Report = serde_json::from_str(&ja).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), ja);
    }

    #[test]
    fn equivalence_decl_resolves_bitstrings() {
        let decl = EquivalenceDecl::Preparation {
            side_a: BTreeMap::from([("1000".into(), 0.5), ("0100".into(), 0.5)]),
            side_b: BTreeMap::from([("0010".into(), 0.5), ("0001".into(), 0.5)]),
        };
        let eq = decl.resolve().unwrap();
        assert!(eq.is_preparation());
        let signed = eq.prep_signed_weights();
        assert_eq!(signed.len(), 4);
    }
}
