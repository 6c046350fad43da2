//! Simulation of sequential projective measurements on finite-dimensional
//! systems under two rival models of what a measurement projects onto:
//! every eigenvalue of a complete commuting pair `(A, B)` ("separate"), or
//! only the value of a degenerate function `f(A, B)` ("functional").
//!
//! The crate computes exact outcome distributions for measurement chains,
//! samples them with seeded Monte Carlo, and sizes and runs the statistical
//! test that tells the two models apart.

pub mod discriminate;
pub mod error;
pub mod exec;
pub mod hilbert;
pub mod measurement;
pub mod observables;
pub mod sampling;

pub use discriminate::{
    likelihood_ratio_test, required_samples, run_discrimination, total_variation, Decision, Discriminator, Hypothesis,
    HypothesisTestReport,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use hilbert::{inner_product, project, tensor, Amplitude, Projector, StateVector, PROB_ZERO, TOL_NORM};
pub use measurement::{
    marginal, run_chain_analytic, step_outcomes, Label, MeasurementStep, Model, OutcomeDistribution, OutcomeSequence,
    Scenario,
};
pub use observables::{
    co_measurement_basis, eigenspace_projectors, function_observable, function_observable_with, pair_from_locals,
    pauli_direction, pauli_pair, CommutingPair, FunctionObservable, JointEigenvector, JointFunction,
    SpectralObservable, TableEntry, EIG_SEP,
};
pub use sampling::{sample_chain, sample_chain_with, SampleCounts};
