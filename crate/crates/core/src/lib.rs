//! Noisy joint measurements of two incompatible qubit observables.
//!
//! The crate builds the unbiased joint POVM for a noisy simultaneous
//! observation of `σ_X` and `σ_Y`, computes the observed joint statistics
//! and their Kolmogorov-Bayes conditionals, and decides whether a density
//! operator `ρ_y` exists that reproduces `p(x|y)` through the Born rule.
//!
//! Modules, bottom up:
//!
//! - [`qubit`]: Bloch vectors, Pauli decompositions, dense Hermitian
//!   operators and the positivity oracle.
//! - [`povm`]: the joint POVM, its marginals and the joint distribution.
//! - [`conditional`]: Bayes conditionals and the conditional-state problem.
//! - [`nonclassical`]: noise kernels, inversion to the noise-free
//!   quasi-distribution and the per-instance theorem checks.
//! - [`dilation`]: the two-qubit interferometer realization (partial
//!   traces, Kraus operators, Lüders states).
//! - [`homodyne`]: one-photon double-homodyne statistics and Gaussian
//!   deconvolution.
//! - [`sampler`]: Monte Carlo measurement records and their analysis.
//! - [`audit`]: randomized and grid audits over many instances.

pub mod audit;
pub mod conditional;
pub mod dilation;
mod error;
pub mod homodyne;
pub mod nonclassical;
pub mod povm;
pub mod qubit;
pub mod sampler;
pub mod tolerance;

pub use error::{Error, Result};
pub use povm::{JointDistribution, NoisyJointPovm, Outcome, OutcomeTable};
pub use qubit::{BlochVector, HermitianOp, PauliDecomp};

/// Library version embedded in every emitted report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
