//! Exact time evolution under piecewise-constant rotating-frame Hamiltonians.
//!
//! `U(t) = exp(−iπMt)` is evaluated through the eigendecomposition of the
//! Hermitian `M`, which is exact for the small dense matrices used here.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::f12;
use crate::frame::{FrameHamiltonian, SegmentSpec};
use crate::spin_model::QuditSpec;
use crate::NS_TO_US;

const NORM_TOL: f64 = 1e-10;
/// Amplitudes smaller than this carry no meaningful phase.
const PHASE_FLOOR: f64 = 1e-12;

/// Normalised qudit wavefunction in a rotating frame.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::from_vector(DVector::from_vec(amplitudes))
    }

    pub fn from_vector(amplitudes: DVector<Complex64>) -> Result<Self> {
        let norm_sqr = amplitudes.norm_squared();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { amplitudes })
    }

    /// `|level⟩` in an `n`-level space.
    pub fn basis(n_levels: usize, level: usize) -> Result<Self> {
        if level >= n_levels {
            return Err(Error::LevelOutOfRange { level, n_levels });
        }
        let mut v = DVector::zeros(n_levels);
        v[level] = Complex64::ONE;
        Ok(Self { amplitudes: v })
    }

    /// Equal-amplitude, equal-phase superposition over `levels`.
    pub fn uniform(n_levels: usize, levels: &[usize]) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidArgument("empty level set".into()));
        }
        let mut v = DVector::zeros(n_levels);
        let a = Complex64::new(1.0 / (levels.len() as f64).sqrt(), 0.0);
        for &l in levels {
            if l >= n_levels {
                return Err(Error::LevelOutOfRange { level: l, n_levels });
            }
            v[l] = a;
        }
        Self::from_vector(v)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, level: usize) -> Complex64 {
        self.amplitudes[level]
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    /// Index of the amplitude used as phase reference: level 0 unless it is
    /// (numerically) empty, then the first populated level.
    pub fn gauge_level(&self) -> usize {
        self.amplitudes
            .iter()
            .position(|c| c.norm() >= PHASE_FLOOR)
            .unwrap_or(0)
    }

    /// `arg(c_n) − arg(c_ref)` wrapped to `(−π, π]`; zero for empty levels.
    pub fn relative_phases(&self) -> Vec<f64> {
        let reference = self.amplitudes[self.gauge_level()];
        let unit = if reference.norm() >= PHASE_FLOOR {
            reference.conj() / reference.norm()
        } else {
            Complex64::ONE
        };
        self.amplitudes
            .iter()
            .map(|c| if c.norm() < PHASE_FLOOR { 0.0 } else { (c * unit).arg() })
            .collect()
    }

    /// Multiplies each amplitude by `e^{iθ_k}`.
    pub fn apply_phases(&self, phases: &[f64]) -> Self {
        let amplitudes = DVector::from_iterator(
            self.dim(),
            self.amplitudes
                .iter()
                .zip(phases)
                .map(|(c, p)| c * Complex64::from_polar(1.0, *p)),
        );
        Self { amplitudes }
    }

    /// `|⟨self|other⟩|`, insensitive to global phase.
    pub fn overlap(&self, other: &StateVector) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm()
    }

    pub(crate) fn from_unchecked(amplitudes: DVector<Complex64>) -> Self {
        Self { amplitudes }
    }
}

/// Spectral decomposition of a frame Hamiltonian, reusable across times.
#[derive(Debug, Clone)]
pub struct Propagator {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl Propagator {
    pub fn new(h: &FrameHamiltonian) -> Result<Self> {
        let scale = h.matrix().iter().map(|z| z.norm()).fold(1.0, f64::max);
        let deviation = h.hermiticity_error();
        if deviation > 1e-12 * scale {
            return Err(Error::NotHermitian { deviation });
        }
        let eig = h.matrix().clone().symmetric_eigen();
        Ok(Self {
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues of `M`, MHz.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `exp(−iπMt)` for `t_ns` nanoseconds.
    pub fn unitary(&self, t_ns: f64) -> DMatrix<Complex64> {
        let t_us = t_ns * NS_TO_US;
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, e) in self.eigenvalues.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -std::f64::consts::PI * e * t_us);
            for i in 0..self.dim() {
                scaled[(i, j)] *= phase;
            }
        }
        &scaled * v.adjoint()
    }

    pub fn apply(&self, state: &StateVector, t_ns: f64) -> Result<StateVector> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: state.dim(),
            });
        }
        if !(t_ns.is_finite() && t_ns >= 0.0) {
            return Err(Error::InvalidDuration(t_ns));
        }
        let t_us = t_ns * NS_TO_US;
        // V · diag(e^{−iπλt}) · V† · ψ without forming U.
        let mut coeffs = self.eigenvectors.adjoint() * state.amplitudes();
        for (c, e) in coeffs.iter_mut().zip(&self.eigenvalues) {
            *c *= Complex64::from_polar(1.0, -std::f64::consts::PI * e * t_us);
        }
        Ok(StateVector::from_unchecked(&self.eigenvectors * coeffs))
    }
}

/// `exp(−iπMt)·state`.
pub fn propagate(h: &FrameHamiltonian, state: &StateVector, t_ns: f64) -> Result<StateVector> {
    Propagator::new(h)?.apply(state, t_ns)
}

/// Phases `−2π(D_new − D_old)·t` that carry a rotating-frame state across a
/// change of drive frequencies at absolute time `t_ns`, keeping the state
/// continuous in the fixed transition-frequency frame.
pub fn realignment_phases(old_offsets: &[f64], new_offsets: &[f64], t_ns: f64) -> Vec<f64> {
    let t_us = t_ns * NS_TO_US;
    old_offsets
        .iter()
        .zip(new_offsets)
        .map(|(old, new)| -2.0 * std::f64::consts::PI * (new - old) * t_us)
        .collect()
}

/// Expresses a rotating-frame state (frame offsets `offsets`) in the frame
/// rotating at the bare transition frequencies, at absolute time `t_ns`.
pub fn to_transition_frame(state: &StateVector, offsets: &[f64], t_ns: f64) -> StateVector {
    let zeros = vec![0.0; offsets.len()];
    state.apply_phases(&realignment_phases(offsets, &zeros, t_ns))
}

/// Applies `segments` in order starting at absolute time zero. The returned
/// state is expressed in the rotating frame of the last segment (the
/// transition frame if the sequence is empty).
pub fn evolve_sequence(segments: &[SegmentSpec], qudit: &QuditSpec, initial: &StateVector) -> Result<StateVector> {
    Ok(SequenceRun::new(qudit, initial)?.run(segments)?.state)
}

/// Incremental sequence evolution tracking the absolute clock and the
/// current frame.
#[derive(Debug, Clone)]
pub struct SequenceRun {
    n_levels: usize,
    pub state: StateVector,
    pub elapsed_ns: f64,
    pub offsets: Vec<f64>,
}

impl SequenceRun {
    pub fn new(qudit: &QuditSpec, initial: &StateVector) -> Result<Self> {
        qudit.validate()?;
        if initial.dim() != qudit.n_levels {
            return Err(Error::DimensionMismatch {
                expected: qudit.n_levels,
                found: initial.dim(),
            });
        }
        Ok(Self {
            n_levels: qudit.n_levels,
            state: initial.clone(),
            elapsed_ns: 0.0,
            offsets: vec![0.0; qudit.n_levels],
        })
    }

    /// Moves the state into the frame of `segment` at the current time.
    pub fn enter(&mut self, segment: &SegmentSpec) -> Result<()> {
        segment.validate(self.n_levels)?;
        let offsets = segment.frame_offsets(self.n_levels)?;
        if offsets != self.offsets {
            let phases = realignment_phases(&self.offsets, &offsets, self.elapsed_ns);
            self.state = self.state.apply_phases(&phases);
            self.offsets = offsets;
        }
        Ok(())
    }

    pub fn step(&mut self, segment: &SegmentSpec) -> Result<()> {
        self.enter(segment)?;
        if segment.duration_ns > 0.0 {
            let h = segment.hamiltonian(self.n_levels)?;
            self.state = propagate(&h, &self.state, segment.duration_ns)?;
            self.elapsed_ns += segment.duration_ns;
        }
        Ok(())
    }

    pub fn run(mut self, segments: &[SegmentSpec]) -> Result<Self> {
        for seg in segments {
            self.step(seg)?;
        }
        Ok(self)
    }
}

/// Populations and gauge-fixed phases on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationTrace {
    pub times_ns: Vec<f64>,
    pub populations: Vec<Vec<f64>>,
    pub phases_rad: Vec<Vec<f64>>,
}

impl PopulationTrace {
    pub fn n_levels(&self) -> usize {
        self.populations.first().map_or(0, Vec::len)
    }

    pub fn level(&self, level: usize) -> Vec<f64> {
        self.populations.iter().map(|row| row[level]).collect()
    }

    /// `t_ns,p0,…,p{N−1},phi0,…,phi{N−1}` with 12 significant digits.
    pub fn to_csv(&self) -> String {
        let n = self.n_levels();
        let mut out = String::from("t_ns");
        for k in 0..n {
            out.push_str(&format!(",p{k}"));
        }
        for k in 0..n {
            out.push_str(&format!(",phi{k}"));
        }
        out.push('\n');
        for ((t, pops), phases) in self.times_ns.iter().zip(&self.populations).zip(&self.phases_rad) {
            out.push_str(&f12(*t));
            for v in pops.iter().chain(phases) {
                out.push(',');
                out.push_str(&f12(*v));
            }
            out.push('\n');
        }
        out
    }
}

/// Evolves `initial` under one segment's Hamiltonian and samples it at every
/// time in `t_grid_ns` (pulse lengths; the segment's own duration is ignored).
pub fn population_trace(
    segment: &SegmentSpec,
    qudit: &QuditSpec,
    initial: &StateVector,
    t_grid_ns: &[f64],
) -> Result<PopulationTrace> {
    if t_grid_ns.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    if t_grid_ns
        .windows(2)
        .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
    {
        return Err(Error::InvalidArgument("time grid must be strictly increasing".into()));
    }
    if initial.dim() != qudit.n_levels {
        return Err(Error::DimensionMismatch {
            expected: qudit.n_levels,
            found: initial.dim(),
        });
    }
    segment.validate(qudit.n_levels)?;
    let prop = Propagator::new(&segment.hamiltonian(qudit.n_levels)?)?;
    let states: Vec<StateVector> = t_grid_ns
        .par_iter()
        .map(|&t| prop.apply(initial, t))
        .collect::<Result<_>>()?;
    Ok(PopulationTrace {
        times_ns: t_grid_ns.to_vec(),
        populations: states.iter().map(StateVector::populations).collect(),
        phases_rad: states.iter().map(StateVector::relative_phases).collect(),
    })
}

/// Evenly spaced grid `start, start+step, …` up to and including `stop`
/// (within a half-step tolerance).
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::InvalidArgument(format!(
            "bad grid start={start} stop={stop} step={step}"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| start + i as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{build_qubit_hamiltonian, build_qudit_hamiltonian, DriveTone};
    use crate::spin_model::default_tb_qudit;

    fn qubit() -> QuditSpec {
        QuditSpec::new(vec![3.128]).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let h = build_qubit_hamiltonian(3.1, 0.7).unwrap();
        let s = StateVector::basis(2, 0).unwrap();
        let out = propagate(&h, &s, 0.0).unwrap();
        assert!((out.amplitude(0) - Complex64::ONE).norm() < 1e-15);
    }

    #[test]
    fn resonant_pi_pulse() {
        let om: f64 = 3.1;
        let t = 1000.0 / (2.0 * om);
        assert!((t - 161.290_322_580_645).abs() < 1e-9);
        let h = build_qubit_hamiltonian(om, 0.0).unwrap();
        let out = propagate(&h, &StateVector::basis(2, 0).unwrap(), t).unwrap();
        assert!((out.amplitude(1) - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!(out.amplitude(0).norm() < 1e-12);
    }

    #[test]
    fn detuned_maximum_transfer() {
        let om = 3.1;
        let h = build_qubit_hamiltonian(om, om).unwrap();
        let t_peak = 1000.0 / (2.0 * (2.0 * om * om).sqrt());
        let p = propagate(&h, &StateVector::basis(2, 0).unwrap(), t_peak)
            .unwrap()
            .populations();
        assert!((p[1] - 0.5).abs() < 1e-12);
        // Dense scan never exceeds the closed-form maximum.
        let prop = Propagator::new(&h).unwrap();
        let s0 = StateVector::basis(2, 0).unwrap();
        let best = (0..4000)
            .map(|i| prop.apply(&s0, i as f64 * 0.1).unwrap().populations()[1])
            .fold(0.0, f64::max);
        assert!(best <= 0.5 + 1e-12 && best > 0.4999);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        let h = FrameHamiltonian::from_matrix(m).unwrap();
        assert!(matches!(Propagator::new(&h), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn state_checks() {
        assert!(StateVector::new(vec![Complex64::ONE, Complex64::ONE]).is_err());
        assert!(StateVector::basis(3, 3).is_err());
        let h = build_qubit_hamiltonian(1.0, 0.0).unwrap();
        assert!(propagate(&h, &StateVector::basis(3, 0).unwrap(), 1.0).is_err());
        assert!(propagate(&h, &StateVector::basis(2, 0).unwrap(), -1.0).is_err());
    }

    #[test]
    fn gauge_falls_back_past_empty_level() {
        let s = StateVector::new(vec![
            Complex64::ZERO,
            Complex64::from_polar(0.6, 1.0),
            Complex64::from_polar(0.8, -0.5),
        ])
        .unwrap();
        assert_eq!(s.gauge_level(), 1);
        let ph = s.relative_phases();
        assert_eq!(ph[0], 0.0);
        assert!(ph[1].abs() < 1e-15);
        assert!((ph[2] + 1.5).abs() < 1e-12);
    }

    #[test]
    fn split_segment_matches_whole() {
        let q = default_tb_qudit();
        let tones = vec![DriveTone::new(1, 2.4, 2.4), DriveTone::new(2, 2.4, -2.4)];
        let whole = SegmentSpec::new(tones.clone(), 120.0);
        let a = SegmentSpec::new(tones.clone(), 47.3);
        let b = SegmentSpec::new(tones, 72.7);
        let s0 = StateVector::basis(4, 1).unwrap();
        let x = evolve_sequence(&[whole], &q, &s0).unwrap();
        let y = evolve_sequence(&[a, b], &q, &s0).unwrap();
        assert!((x.amplitudes() - y.amplitudes()).norm() < 1e-10);
    }

    #[test]
    fn zero_duration_tail_is_identity_in_same_frame() {
        let q = default_tb_qudit();
        let tones = vec![DriveTone::new(1, 2.4, 2.4), DriveTone::new(2, 2.4, -2.4)];
        let h = SegmentSpec::new(tones.clone(), 120.3);
        let s0 = StateVector::basis(4, 1).unwrap();
        let x = evolve_sequence(std::slice::from_ref(&h), &q, &s0).unwrap();
        let y = evolve_sequence(&[h, SegmentSpec::new(tones, 0.0)], &q, &s0).unwrap();
        assert!((x.amplitudes() - y.amplitudes()).norm() < 1e-14);
    }

    #[test]
    fn resonant_trace_is_sin_squared() {
        let q = qubit();
        let om = 2.0;
        let seg = SegmentSpec::new(vec![DriveTone::new(1, om, 0.0)], 0.0);
        let grid = linear_grid(0.0, 1000.0, 2.5).unwrap();
        let tr = population_trace(&seg, &q, &StateVector::basis(2, 0).unwrap(), &grid).unwrap();
        for (t, p) in tr.times_ns.iter().zip(tr.level(1)) {
            let want = (std::f64::consts::PI * om * t * 1e-3).sin().powi(2);
            assert!((p - want).abs() < 1e-12);
        }
        for row in &tr.populations {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn idle_trace_is_constant() {
        let q = default_tb_qudit();
        let s = StateVector::uniform(4, &[0, 2]).unwrap();
        let tr = population_trace(&SegmentSpec::idle(0.0), &q, &s, &[0.0, 10.0, 1e4]).unwrap();
        for row in &tr.populations {
            assert_eq!(row, &tr.populations[0]);
        }
    }

    #[test]
    fn four_state_trace_meets_near_quarter() {
        let q = default_tb_qudit();
        let seg = SegmentSpec::new(
            vec![
                DriveTone::new(1, 2.1, 0.0),
                DriveTone::new(2, 4.2, 0.0),
                DriveTone::new(3, 3.1, 0.0),
            ],
            0.0,
        );
        let grid = linear_grid(120.0, 160.0, 0.1).unwrap();
        let tr = population_trace(&seg, &q, &StateVector::basis(4, 2).unwrap(), &grid).unwrap();
        let (t_best, worst) = tr
            .times_ns
            .iter()
            .zip(&tr.populations)
            .map(|(t, row)| (*t, row.iter().map(|p| (p - 0.25).abs()).fold(0.0, f64::max)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert!((t_best - 140.0).abs() < 20.0, "{t_best}");
        assert!(worst < 0.03, "{worst}");
    }

    #[test]
    fn trace_grid_validation() {
        let q = qubit();
        let seg = SegmentSpec::idle(0.0);
        let s = StateVector::basis(2, 0).unwrap();
        assert!(population_trace(&seg, &q, &s, &[]).is_err());
        assert!(population_trace(&seg, &q, &s, &[1.0, 1.0]).is_err());
        let one = population_trace(&seg, &q, &s, &[0.0]).unwrap();
        assert_eq!(one.populations, vec![vec![1.0, 0.0]]);
    }

    #[test]
    fn csv_header_and_rows() {
        let q = qubit();
        let seg = SegmentSpec::new(vec![DriveTone::new(1, 3.1, 0.0)], 0.0);
        let tr = population_trace(&seg, &q, &StateVector::basis(2, 0).unwrap(), &[0.0, 1000.0 / 6.2]).unwrap();
        let csv = tr.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t_ns,p0,p1,phi0,phi1"));
        assert_eq!(lines.next(), Some("0,1,0,0,0"));
        let last: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(last[0], "161.290322581");
        assert_eq!(last[2], "1");
    }

    #[test]
    fn qubit_builder_agrees_with_zero_anchored_frame() {
        // Traceless [[δ,Ω],[Ω,−δ]] is the zero-anchored matrix for −δ shifted
        // by a multiple of the identity: identical dynamics up to global phase.
        for &(om, de) in &[(3.1, 0.0), (2.0, 1.3), (1.5, -4.0)] {
            let traceless = build_qubit_hamiltonian(om, de).unwrap();
            let anchored = build_qudit_hamiltonian(&[DriveTone::new(1, om, -de)], 2).unwrap();
            let s0 = StateVector::basis(2, 0).unwrap();
            for &t in &[13.0, 77.7, 310.0] {
                let a = propagate(&traceless, &s0, t).unwrap();
                let b = propagate(&anchored, &s0, t).unwrap();
                assert!((a.overlap(&b) - 1.0).abs() < 1e-12);
                // Populations agree for either sign of δ.
                let c = propagate(
                    &build_qudit_hamiltonian(&[DriveTone::new(1, om, de)], 2).unwrap(),
                    &s0,
                    t,
                )
                .unwrap();
                assert!((a.populations()[1] - c.populations()[1]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn grid_helper() {
        assert_eq!(linear_grid(0.0, 1.0, 0.25).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(linear_grid(0.0, 0.0, 1.0).unwrap(), vec![0.0]);
        assert!(linear_grid(0.0, 1.0, 0.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn unitary_and_composable((n, tones) in crate::frame::tests::sized_tones(),
                                  t1 in 0.0..500.0f64, t2 in 0.0..500.0f64) {
            let h = build_qudit_hamiltonian(&tones, n).unwrap();
            let p = Propagator::new(&h).unwrap();
            let u = p.unitary(t1);
            let err = (u.adjoint() * &u - DMatrix::<Complex64>::identity(n, n))
                .iter().map(|z| z.norm()).fold(0.0, f64::max);
            proptest::prop_assert!(err < 1e-12, "{err}");
            let s = StateVector::basis(n, n / 2).unwrap();
            let a = p.apply(&p.apply(&s, t1).unwrap(), t2).unwrap();
            let b = p.apply(&s, t1 + t2).unwrap();
            proptest::prop_assert!((a.amplitudes() - b.amplitudes()).norm() < 1e-10);
            proptest::prop_assert!((a.amplitudes().norm_squared() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn detuned_rabi_closed_form(om in 0.1..8.0f64, de in -8.0..8.0f64, t in 0.0..2000.0f64) {
            let h = build_qubit_hamiltonian(om, de).unwrap();
            let p1 = propagate(&h, &StateVector::basis(2, 0).unwrap(), t).unwrap().populations()[1];
            let r = (om * om + de * de).sqrt();
            let want = om * om / (r * r) * (std::f64::consts::PI * r * t * 1e-3).sin().powi(2);
            proptest::prop_assert!((p1 - want).abs() < 1e-9);
        }
    }
}
