//! Pulse design: multi-level Hadamard search and resonant Grover selection.

mod grover;
mod hadamard;
pub mod nelder_mead;
mod objective;

pub use grover::{
    grover_detuning, grover_period, phase_locked_selection, plan_grover, resonance_residual, GroverDetuning,
    GroverOptions, GroverPlan,
};
pub use hadamard::{
    evaluate_hadamard, find_hadamard, HadamardBounds, HadamardSearch, HadamardSolution, ParamRange, RangeSpec,
};
pub use objective::{circular_phase_variance, population_variance, superposition_objective};
