//! Reference implementations shared by the integration tests. None of this
//! goes through the crate's propagator.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use qudit_sim::{DriveTone, SegmentSpec};
use rand::Rng;

/// Fine-step RK4 in the frame rotating at the bare transition frequencies.
///
/// There the Hamiltonian has no diagonal and couples `k−1, k` with
/// `π·Ω_k·exp(i(φ_k − 2π·δ_k·t))`, so segment boundaries need no special
/// handling. Time in ns, amplitudes in and out in that same frame.
pub fn rk4_transition_frame(sequence: &[SegmentSpec], start: &[Complex64], dt_ns: f64) -> Vec<Complex64> {
    let n = start.len();
    let mut psi = start.to_vec();
    let mut t0 = 0.0;
    for seg in sequence {
        let steps = (seg.duration_ns / dt_ns).ceil().max(1.0) as usize;
        let h = seg.duration_ns / steps as f64;
        for i in 0..steps {
            let t = t0 + i as f64 * h;
            psi = rk4_step(&seg.tones, n, &psi, t, h);
        }
        t0 += seg.duration_ns;
    }
    psi
}

/// `dψ/dt` in the transition frame, per ns.
fn derivative(tones: &[DriveTone], n: usize, psi: &[Complex64], t_ns: f64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let t_us = t_ns * 1e-3;
    for tone in tones {
        let k = tone.transition;
        let coupling = Complex64::from_polar(
            PI * tone.rabi_mhz * 1e-3,
            tone.phase_rad - 2.0 * PI * tone.detuning_mhz * t_us,
        );
        // −i·H·ψ with H[k−1][k] = coupling, H[k][k−1] = conj.
        out[k - 1] += -Complex64::i() * coupling * psi[k];
        out[k] += -Complex64::i() * coupling.conj() * psi[k - 1];
    }
    out
}

fn rk4_step(tones: &[DriveTone], n: usize, psi: &[Complex64], t: f64, h: f64) -> Vec<Complex64> {
    let add = |a: &[Complex64], b: &[Complex64], s: f64| -> Vec<Complex64> {
        a.iter().zip(b).map(|(x, y)| x + y * s).collect()
    };
    let k1 = derivative(tones, n, psi, t);
    let k2 = derivative(tones, n, &add(psi, &k1, h / 2.0), t + h / 2.0);
    let k3 = derivative(tones, n, &add(psi, &k2, h / 2.0), t + h / 2.0);
    let k4 = derivative(tones, n, &add(psi, &k3, h), t + h);
    (0..n)
        .map(|i| psi[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0))
        .collect()
}

/// Rabi formula for a two-level system, `t` in ns.
pub fn rabi_transfer(rabi_mhz: f64, detuning_mhz: f64, t_ns: f64) -> f64 {
    let w2 = rabi_mhz * rabi_mhz + detuning_mhz * detuning_mhz;
    if w2 == 0.0 {
        return 0.0;
    }
    rabi_mhz * rabi_mhz / w2 * (PI * w2.sqrt() * t_ns * 1e-3).sin().powi(2)
}

pub fn basis(n: usize, level: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    v[level] = Complex64::new(1.0, 0.0);
    v
}

/// A tone on every transition with moderate random parameters.
pub fn random_tones<R: Rng>(rng: &mut R, n_levels: usize) -> Vec<DriveTone> {
    (1..n_levels)
        .map(|k| {
            DriveTone::new(k, rng.random_range(0.0..8.0), rng.random_range(-8.0..8.0))
                .with_phase(rng.random_range(-PI..PI))
        })
        .collect()
}

/// Three-level Hadamard from the middle level: `τ = 1/(2√3·Ω)`.
pub fn three_level_hadamard(rabi_mhz: f64) -> SegmentSpec {
    SegmentSpec::new(
        vec![
            DriveTone::new(1, rabi_mhz, rabi_mhz),
            DriveTone::new(2, rabi_mhz, -rabi_mhz),
        ],
        1000.0 / (2.0 * 3f64.sqrt() * rabi_mhz),
    )
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Runs `prefix`, then integrates `scan` for its full duration, returning
/// the populations every `record_ns` of the scan segment (first entry at
/// the scan start).
pub fn rk4_population_scan(
    prefix: &[SegmentSpec],
    scan: &SegmentSpec,
    start: &[Complex64],
    dt_ns: f64,
    record_ns: f64,
) -> Vec<(f64, Vec<f64>)> {
    let n = start.len();
    let mut psi = rk4_transition_frame(prefix, start, dt_ns);
    let t0: f64 = prefix.iter().map(|s| s.duration_ns).sum();
    let per_record = (record_ns / dt_ns).round().max(1.0) as usize;
    let h = record_ns / per_record as f64;
    let records = (scan.duration_ns / record_ns).floor() as usize;
    let pops = |p: &[Complex64]| p.iter().map(|a| a.norm_sqr()).collect::<Vec<f64>>();
    let mut out = vec![(0.0, pops(&psi))];
    for r in 0..records {
        for i in 0..per_record {
            let t = t0 + r as f64 * record_ns + i as f64 * h;
            psi = rk4_step(&scan.tones, n, &psi, t, h);
        }
        out.push(((r + 1) as f64 * record_ns, pops(&psi)));
    }
    out
}
