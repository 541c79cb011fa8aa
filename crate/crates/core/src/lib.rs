//! Values of the `m`-player Hypercube game.
//!
//! Each player labels one facet of the `m`-cube with `±1`; the labels must satisfy
//! a parity rule and agree where facets meet. This crate computes the classical
//! value exactly, simulates the GHZ quantum strategy, builds the perfect
//! no-signalling correlation, and checks the inequalities behind the quantum value.

pub mod classical;
pub mod error;
pub mod game;
pub mod inequalities;
pub mod linalg;
pub mod nosignalling;
pub mod quantum;
pub mod report;
pub mod search;
pub mod suites;

pub use classical::{
    brute_force_classical_value, classical_value_formula, ClassicalOptimum, DeterministicStrategy, Rational,
};
pub use error::{Error, Result};
pub use game::{predicate, relaxed_predicate, Answer, FacetAssignment, Game, Question, Vertex};
pub use inequalities::{ConstrainedPair, EdgeObservable};
pub use linalg::{ComplexMatrix, StateVector, C64};
pub use nosignalling::{build_ns_correlation, SparseCorrelation};
pub use quantum::{maximize_r, quantum_value, QuantumStrategy, QuantumValue, RMaximum};
pub use report::{CheckRecord, ValueRow, VerificationReport};
pub use suites::{run_suite, SuiteOptions};
