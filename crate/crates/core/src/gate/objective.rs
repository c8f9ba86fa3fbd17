use num_complex::Complex64;

use crate::propagator::StateVector;

/// Variance of the target-level populations.
pub fn population_variance(state: &StateVector, targets: &[usize]) -> f64 {
    if targets.is_empty() {
        return 0.0;
    }
    let pops: Vec<f64> = targets.iter().map(|&k| state.amplitude(k).norm_sqr()).collect();
    let mean = pops.iter().sum::<f64>() / pops.len() as f64;
    pops.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / pops.len() as f64
}

/// `1 − |mean unit phasor|` over the target amplitudes. Gauge invariant;
/// empty amplitudes contribute a zero phasor.
pub fn circular_phase_variance(state: &StateVector, targets: &[usize]) -> f64 {
    if targets.is_empty() {
        return 0.0;
    }
    let sum: Complex64 = targets
        .iter()
        .map(|&k| {
            let c = state.amplitude(k);
            if c.norm() < 1e-12 {
                Complex64::ZERO
            } else {
                c / c.norm()
            }
        })
        .sum();
    (1.0 - sum.norm() / targets.len() as f64).max(0.0)
}

/// Zero exactly when the targets carry equal populations and equal phases.
pub fn superposition_objective(state: &StateVector, targets: &[usize], phase_weight: f64) -> f64 {
    population_variance(state, targets) + phase_weight * circular_phase_variance(state, targets)
}
