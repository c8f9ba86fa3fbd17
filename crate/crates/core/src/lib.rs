//! Simulation and pulse design for multi-level spin qudits with unequal
//! level spacing.
//!
//! The crate is organised bottom-up:
//!
//! * [`spin_model`] turns a diagonal level model into transition frequencies.
//! * [`frame`] builds time-independent rotating-frame Hamiltonians for
//!   multichromatic square pulses.
//! * [`propagator`] evolves states exactly by spectral decomposition.
//! * [`gate`] searches Hadamard pulse parameters and plans resonant Grover
//!   selection pulses.
//! * [`experiment`] emulates repeated initialise/drive/read-out cycles.
//! * [`waveform`] renders the lab-frame AWG sample stream.
//!
//! Units: frequencies of transitions in GHz, Rabi rates and detunings in MHz,
//! durations in ns at every public boundary. Hamiltonians are stored as the
//! matrix `M` in `H = πħM`, so that `U(t) = exp(-iπMt)` with `t` in µs.

pub mod error;
pub mod experiment;
pub mod format;
pub mod frame;
pub mod gate;
pub mod propagator;
pub mod spin_model;
pub mod waveform;

pub use error::{Error, Result};
pub use experiment::{
    detuning_map, run_cycles, transition_probability, visibility, CycleConfig, DetuningMap, MapOptions,
    TransitionCounts, VisibilityMode,
};
pub use frame::{
    build_qubit_hamiltonian, build_qudit_hamiltonian, frame_offsets, DriveTone, FrameHamiltonian, SegmentSpec,
};
pub use gate::{
    circular_phase_variance, find_hadamard, grover_detuning, grover_period, plan_grover, population_variance,
    superposition_objective, GroverDetuning, GroverOptions, GroverPlan, HadamardBounds, HadamardSearch,
    HadamardSolution, ParamRange,
};
pub use propagator::{evolve_sequence, population_trace, propagate, PopulationTrace, Propagator, StateVector};
pub use spin_model::{default_tb_qudit, fit_level_model, transition_frequencies, LevelModel, QuditSpec};
pub use waveform::{export_waveform, synthesize, AwgConfig, WaveformFormat, WaveformSamples};

/// Conversion factor from nanoseconds (API) to microseconds (internal).
pub(crate) const NS_TO_US: f64 = 1e-3;
