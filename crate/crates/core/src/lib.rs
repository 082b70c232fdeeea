//! Interval-valued projection and sound abstraction of conditional
//! probabilistic actions, plus a decision-theoretic refinement planner that
//! prunes candidate plans by expected-utility intervals.
//!
//! The crate is organized around a small pipeline:
//!
//! - [`worldmodel`]: finite fluent vocabularies, states, sentences, model
//!   enumeration and the 0/1 lower/upper probability operators.
//! - [`actions`]: concrete and abstract conditional probabilistic action
//!   descriptions and their validation.
//! - [`chronicle`]: discrete-time effect application with STRIPS persistence
//!   and enumeration of plan chronicles.
//! - [`projection`]: exact projection of concrete actions and interval
//!   projection of abstract actions.
//! - [`abstraction`]: the two intra-action and two inter-action abstraction
//!   constructions, including effect weakening.
//! - [`planner`]: best-first refinement search over an
//!   abstraction/decomposition network with dominance pruning.
//! - [`oracle`]: brute-force soundness and admissibility checkers used by the
//!   test suite and the `verify` CLI command.
//! - [`domain`]: the line-oriented domain-file format (parser + serializer).
//! - [`netgen`]: synthetic network generators for benchmarks and tests.

pub mod abstraction;
pub mod actions;
pub mod chronicle;
pub mod domain;
pub mod exec;
pub mod netgen;
pub mod oracle;
pub mod planner;
pub mod projection;
pub mod worldmodel;

/// Comparison tolerance for probabilities and expected utilities.
pub const EPS: f64 = 1e-9;

/// Bundled example domain: tomato delivery over a mountain or valley road.
pub const TOMATO_DOMAIN: &str = include_str!("../assets/tomato.domain");

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("domain overflow for fluent `{fluent}`: value {value} outside its domain")]
    DomainOverflow { fluent: String, value: String },
    #[error("degenerate effect: empty state set")]
    DegenerateEffect,
    #[error("state at step {step} satisfies no condition of action `{action}`")]
    Incomplete { action: String, step: usize },
    #[error("nothing to refine: plan is fully concrete")]
    NothingToRefine,
    #[error("bound exceeded: {0}")]
    Bound(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status for the CLI: 1 usage/parse, 2 validation, 3 verification.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Io(_) => 1,
            Error::Verification(_) => 3,
            _ => 2,
        }
    }
}
