//! Mean-field Blume-Emery-Griffiths model toolkit.
//!
//! The model lives on {-1,0,+1}^N with energy
//! `H(sigma) = -sum sigma_j^2 + (K/N) (sum sigma_j)^2`
//! and Gibbs weights proportional to `exp(+beta * H)` (note the sign: larger
//! H means larger weight). Because H depends on a configuration only through
//! the pair (S, R) = (total magnetization, number of nonzero spins), every
//! chain of interest lumps exactly onto the macrostate space of (s, r) pairs,
//! which is what makes exact spectral analysis feasible at desk scale.
//!
//! Crate layout:
//! - [`model`]: Hamiltonian, macrostate lumping, exact partition functions,
//!   the free-energy density and temperature ladders.
//! - [`landscape`]: critical points of the free energy, critical curves,
//!   phase classification, stripe sets.
//! - [`chains`]: Metropolis / simulated-tempering / swapping kernels, both
//!   as spin-level simulation steps and as exact lumped transition matrices,
//!   plus the auxiliary walks used for comparison bounds.
//! - [`spectral`]: spectral gaps, conductance, Dirichlet-form comparisons,
//!   aggregation/restriction, mixing profiles.
//! - [`partition`]: sign decomposition, signatures, the temperature-dependent
//!   global/local mode split and trace vectors.
//! - [`verify`]: the registered numerical checks behind `begmc verify`.
//!
//! All core math is generic over the scalar type via [`scalar::Scalar`];
//! the aliases below pin the f64 instantiations used by the CLI and the
//! acceptance suite.

pub mod chains;
pub mod export;
pub mod landscape;
pub mod model;
pub mod partition;
pub mod rng;
pub mod scalar;
pub mod spectral;
pub mod study;
pub mod verify;

pub use scalar::Scalar;

/// Default working precision for the CLI and the acceptance suite.
pub type F = f64;

pub type Kernel64 = chains::Kernel<f64>;
pub type Kernel32 = chains::Kernel<f32>;
pub type PhasePoint64 = model::PhasePoint<f64>;
pub type LadderSpec64 = model::LadderSpec<f64>;
pub type TypeVector64 = model::TypeVector<f64>;
pub type CriticalPoint64 = landscape::CriticalPoint<f64>;
pub type GapReport64 = spectral::GapReport<f64>;
