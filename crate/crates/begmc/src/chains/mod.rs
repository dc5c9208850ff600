//! Markov kernels: spin-level simulation steps and exact lumped transition
//! matrices for Metropolis, simulated tempering, and swapping, plus the
//! auxiliary chains used in the comparison arguments.

pub mod coloring;
pub mod kernel;
pub mod metropolis;
pub mod swapping;
pub mod tempering;
pub mod walks;

pub use kernel::{half_space_states, Kernel, KernelError, StateLabels};
pub use metropolis::{
    base_proposal, half_space_metropolis, lumped_metropolis, lumped_metropolis_raw,
    metropolis_step, microstate_metropolis, SpinState,
};
pub use swapping::{
    lumped_swapping, sign_walk_kernel, swap_acceptance, swapping_step, ReplicaState, SwapPhase,
    SwappingKernels,
};
pub use tempering::{tempering_kernels, TemperingKernels};
pub use walks::{binomial_walk, rw1_path_certificate, trace_walks, TraceWalks};
pub use coloring::{coloring_step, coupled_coloring_step, coupling_time, ColoringState};
