//! Acceptance suite: runs the full reproduction matrix once and asserts
//! every reference value at its stated tolerance, printing one line per
//! check (use `--nocapture` to see them all).
//!
//! Expected values, tolerances and runtime budgets are pinned here:
//!
//! 1.  classical exact counts 5/6, 10/12, 8/12, each found in < 1 s
//! 2.  see-saw table: T_{4,1} 10.89897946 / 11.65685425 / 12.0 for
//!     d = 2/3/4 and T_{4,2} 8.0 / 12.0 for d = 2/3, tol 1e-5, 20
//!     restarts, < 60 s total
//! 3.  T_{3,1} see-saw d=2 = 5.598076, tol 1e-5
//! 4.  contextual T_{4,1}: see-saw 4.828427 (1e-5), level-1 outer bound
//!     4.828427123 (1e-6), inner <= outer
//! 5.  noncontextual T_{4,1}: 64 vertices exactly, maximum 4 (1e-6),
//!     quantum behavior infeasible with violation ratio sqrt(2) (1e-3)
//! 6.  contextual T_{4,2}: noncontextual max 8 (1e-6), behavior LP bound 8
//!     (1e-6), see-saw with equivalences 8 at d = 2 and 3 (1e-5), optimal
//!     qubit behavior noncontextual
//! 7.  frame analytics: analytic T_{4,1} bounds 10.89897949 / 11.65685425
//!     / 12 (1e-6) matching see-saw within 1e-4; see-saw states
//!     equiangular at 1e-3 with correlation at the Welch bound within 1e-4
//! 8.  lambda_max witness: metric bound 8 at d=2 exactly; 500 random
//!     models stay within lambda_max <= d + 1e-6
//! 9.  property suites: see-saw monotonicity, nc_max soundness on 1000
//!     random noncontextual models, certificate validity on all consistent
//!     deterministic models, the signed/positive offset identity on 1000
//!     random behaviors, and the embedding spectrum property
//! 10. documented exclusions (reported as SKIP)

use std::sync::LazyLock;

use pitask::report::{paper_reproduction, ReproductionReport};

static REPORT: LazyLock<ReproductionReport> =
    LazyLock::new(|| paper_reproduction(7, 20).expect("reproduction matrix completes"));

fn assert_criterion(tag: &str) {
    let checks: Vec<_> = REPORT
        .checks
        .iter()
        .filter(|c| c.criterion == tag)
        .collect();
    assert!(!checks.is_empty(), "no checks tagged criterion {tag}");
    let mut failed = Vec::new();
    for c in &checks {
        let status = if c.skipped {
            "SKIP"
        } else if c.pass {
            "PASS"
        } else {
            "FAIL"
        };
        match (c.observed, c.expected, c.tolerance) {
            (Some(obs), Some(exp), Some(tol)) => println!(
                "[{status}] criterion {tag}: {} = {obs:.9} (expected {exp:.9} +- {tol:.1e})",
                c.name
            ),
            _ => println!("[{status}] criterion {tag}: {} {}", c.name, c.note),
        }
        if !c.pass && !c.skipped {
            failed.push(c.name.clone());
        }
    }
    assert!(failed.is_empty(), "criterion {tag} failed checks: {failed:?}");
}

#[test]
fn criterion_1_classical_exact_values() {
    assert_criterion("1");
    for (name, seconds) in &REPORT.timings {
        if name.starts_with("classical") {
            println!("[time] {name} = {seconds:.3}");
            assert!(*seconds < 1.0, "{name} took {seconds:.3}s, budget 1s");
        }
    }
}

#[test]
fn criterion_2_seesaw_reference_table() {
    assert_criterion("2");
    let seconds = REPORT.timings["see-saw reference table seconds"];
    println!("[time] see-saw reference table = {seconds:.1}s");
    assert!(seconds < 60.0, "see-saw table took {seconds:.1}s, budget 60s");
}

#[test]
fn criterion_3_t31_quantum_value() {
    assert_criterion("3");
}

#[test]
fn criterion_4_contextual_t41_bounds() {
    assert_criterion("4");
}

#[test]
fn criterion_5_noncontextual_t41() {
    assert_criterion("5");
}

#[test]
fn criterion_6_contextual_t42() {
    assert_criterion("6");
}

#[test]
fn criterion_7_frame_analytics() {
    assert_criterion("7");
}

#[test]
fn criterion_8_dimension_witness() {
    assert_criterion("8");
}

#[test]
fn criterion_9_property_suites() {
    assert_criterion("9");
}

#[test]
fn criterion_10_documented_exclusions() {
    // exclusions are reported, never asserted as values
    let checks: Vec<_> = REPORT
        .checks
        .iter()
        .filter(|c| c.criterion == "10")
        .collect();
    assert_eq!(checks.len(), 3);
    for c in checks {
        println!("[SKIP] criterion 10: {} [{}]", c.name, c.note);
        assert!(c.skipped);
    }
}

#[test]
fn full_matrix_passes() {
    assert!(
        REPORT.passed(),
        "reproduction matrix failed:\n{}",
        REPORT.render()
    );
}
