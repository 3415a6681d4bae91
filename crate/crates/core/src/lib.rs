//! Quantum hypothesis testing with an inconclusive outcome.
//!
//! When a discriminator may abstain and errors are measured conditional on a
//! conclusive answer, the optimal errors have closed forms in two projective
//! metrics: the Hilbert metric `D_Ω` (asymmetric setting) and the Thompson
//! metric `D_Ξ` (symmetric setting). This crate evaluates those closed forms
//! for states, channels, convex sets of alternatives and general cone models,
//! builds the measurements that attain them, and ships the numerical oracles
//! used to check them.

// `!(x > 0.0)` style guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asym;
pub mod channels;
pub mod composite;
pub mod divergence;
pub mod error;
pub mod gpt;
pub mod linalg;
pub mod oracle;
pub mod povm;
pub mod random;
pub mod simulate;
pub mod sym;

pub use asym::{optimal_povm_asym, postselected_beta, postselected_beta_ncopy, AsymReport};
pub use channels::QuantumChannel;
pub use composite::{composite_beta, omega_min, CompositeReport, ConvexStateSet};
pub use divergence::{dmax, omega, xi, ExtendedReal, WeightedPair};
pub use error::{Error, Result};
pub use linalg::{DensityMatrix, HermitianMatrix};
pub use povm::{Outcome, ThreeOutcomePovm};
pub use sym::{optimal_povm_sym, postselected_perr, SymReport};
