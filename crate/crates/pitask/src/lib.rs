//! Solver toolkit for partial-ignorance communication tasks `T_{n,m}`.
//!
//! In a task `T_{n,m}` a referee hides a single 1 in an n-bit string,
//! reveals `m` of the zero positions to the sender (Alice) and the remaining
//! `n-1-m` zero positions to the receiver (Bob). Alice encodes her input into
//! a bounded message (a bit string or a qudit), and Bob must guess the
//! position of the 1. The crate computes bounds on how well the two can do:
//!
//! * [`classical`] — exact brute force over deterministic bit strategies,
//! * [`seesaw`] — alternating-SDP inner bounds for fixed Hilbert dimension,
//! * [`hierarchy`] — dimension-independent outer bounds from the first level
//!   of the unitary moment-matrix hierarchy,
//! * [`contextuality`] — noncontextual-model feasibility, optimal
//!   noncontextual values and violated inequalities via Farkas duality,
//! * [`frames`] — Grassmannian-frame analytics (Welch bound, ambiguous
//!   state discrimination) giving closed-form bounds,
//! * [`witness`] — communication matrices and the `lambda_max` dimension
//!   witness.
//!
//! [`game`] holds the shared domain types (tasks, behaviors, quantum models,
//! operational equivalences) and [`conic`] the solver-neutral LP/SDP layer.
//! [`report`] drives whole experiments from a JSON config and reproduces the
//! reference tables; the `pitask` binary exposes it on the command line.

pub mod classical;
pub mod conic;
pub mod contextuality;
pub mod frames;
pub mod game;
pub mod hierarchy;
pub mod report;
pub mod seesaw;
pub mod witness;

mod error;

pub use error::{Error, Result};
