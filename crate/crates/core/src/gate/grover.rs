//! Resonant Grover selection.
//!
//! After the Hadamard pulse the band holds the uniform superposition `|u⟩`.
//! Shifting the searched level `s` until `⟨s|M|s⟩ = ⟨u|M|u⟩` (the mean of all
//! band matrix elements) makes `|u⟩` and `|s⟩` resonant, and the population
//! oscillates between them.

use serde::{Deserialize, Serialize};

use super::hadamard::HadamardSolution;
use crate::error::{Error, Result};
use crate::frame::{build_qudit_hamiltonian, detunings_for_offsets, frame_offsets, DriveTone, SegmentSpec};
use crate::propagator::{realignment_phases, Propagator, SequenceRun, StateVector};
use crate::spin_model::QuditSpec;

/// Resonant tone set for one searched level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroverDetuning {
    pub searched_level: usize,
    /// Diagonal shift `δ_s` of the searched level, MHz (`M_ss` moves by `2δ_s`).
    pub shift_mhz: f64,
    /// Lowest and highest level of the driven band.
    pub band: (usize, usize),
    /// Frame offsets of the band levels relative to its lowest level, after
    /// the shift: the per-level detunings appearing on the diagonal.
    pub level_offsets_mhz: Vec<f64>,
    /// Tones realising the shift (per-transition detunings).
    pub tones: Vec<DriveTone>,
}

/// Contiguous block of levels connected to `level` by driven tones.
fn driven_band(tones: &[DriveTone], level: usize) -> Option<(usize, usize)> {
    let driven = |t: usize| tones.iter().any(|x| x.transition == t);
    let mut lo = level;
    while lo > 0 && driven(lo) {
        lo -= 1;
    }
    let mut hi = level;
    while driven(hi + 1) {
        hi += 1;
    }
    (hi > lo).then_some((lo, hi))
}

/// `|⟨s|M|s⟩ − (1/N)·Σ_{m,n} M_mn|` over the band, MHz.
pub fn resonance_residual(tones: &[DriveTone], n_levels: usize, band: (usize, usize), s: usize) -> Result<f64> {
    let h = build_qudit_hamiltonian(tones, n_levels)?;
    let (lo, hi) = band;
    let size = (hi - lo + 1) as f64;
    let mut total = 0.0;
    for m in lo..=hi {
        for n in lo..=hi {
            total += h.entry(m, n).re;
        }
    }
    Ok((h.entry(s, s).re - total / size).abs())
}

/// Solves the resonance condition for the searched level.
///
/// `tones` carry the Rabi rates (and any pre-existing detunings) of the
/// selection pulse. If `s` is the band's frame anchor (its lowest level),
/// the equivalent shift `−δ_s` is applied to every other band level instead.
pub fn grover_detuning(qudit: &QuditSpec, tones: &[DriveTone], searched_level: usize) -> Result<GroverDetuning> {
    let n = qudit.n_levels;
    if searched_level >= n {
        return Err(Error::LevelOutOfRange {
            level: searched_level,
            n_levels: n,
        });
    }
    let h = build_qudit_hamiltonian(tones, n)?;
    let (lo, hi) = driven_band(tones, searched_level).ok_or_else(|| {
        let lo = tones.iter().map(|t| t.transition - 1).min().unwrap_or(0);
        let hi = tones.iter().map(|t| t.transition).max().unwrap_or(0);
        Error::UndrivenSearchedLevel {
            level: searched_level,
            lo,
            hi,
        }
    })?;
    let size = (hi - lo + 1) as f64;
    let total: f64 = (lo..=hi)
        .flat_map(|m| (lo..=hi).map(move |k| (m, k)))
        .map(|(m, k)| h.entry(m, k).re)
        .sum();
    let diag = h.entry(searched_level, searched_level).re;
    // a + 2x = (S + 2x)/N  ⇒  x = (S − N·a) / (2(N − 1))
    let shift = (total - size * diag) / (2.0 * (size - 1.0));

    let mut offsets = frame_offsets(tones, n)?;
    if searched_level == lo {
        for d in offsets.iter_mut().take(hi + 1).skip(lo + 1) {
            *d -= shift;
        }
    } else {
        offsets[searched_level] += shift;
    }
    // Levels above the band keep their detunings relative to the band top.
    let original = frame_offsets(tones, n)?;
    for k in hi + 1..n {
        offsets[k] = offsets[k - 1] + (original[k] - original[k - 1]);
    }
    let driven: Vec<usize> = tones.iter().map(|t| t.transition).collect();
    let detunings = detunings_for_offsets(&offsets, &driven)?;
    let new_tones: Vec<DriveTone> = tones
        .iter()
        .zip(detunings)
        .map(|(t, d)| DriveTone { detuning_mhz: d, ..*t })
        .collect();
    let anchor = offsets[lo];
    Ok(GroverDetuning {
        searched_level,
        shift_mhz: shift,
        band: (lo, hi),
        level_offsets_mhz: offsets[lo..=hi].iter().map(|d| d - anchor).collect(),
        tones: new_tones,
    })
}

/// Half period `√N / (4Ω)` of the uniform ↔ searched oscillation, ns.
pub fn grover_period(n_superposed: usize, rabi_mhz: f64) -> Result<f64> {
    if n_superposed == 0 {
        return Err(Error::InvalidArgument("need at least one superposed level".into()));
    }
    if rabi_mhz.is_nan() || rabi_mhz <= 0.0 {
        return Err(Error::ZeroRabi);
    }
    Ok((n_superposed as f64).sqrt() / (4.0 * rabi_mhz) * 1e3)
}

/// Sets the selection tone phases so that the rotating frame jump at
/// `boundary_ns` (from `previous` to the selection frequencies) leaves the
/// selection Hamiltonian seeing the previous state unchanged.
///
/// With realignment phases `θ_k`, the tone on transition `k` gets
/// `φ_k += θ_{k−1} − θ_k`, i.e. the phase-coherent carrier is re-phased.
pub fn phase_locked_selection(
    previous: &SegmentSpec,
    selection: &SegmentSpec,
    n_levels: usize,
    boundary_ns: f64,
) -> Result<SegmentSpec> {
    let old = previous.frame_offsets(n_levels)?;
    let new = selection.frame_offsets(n_levels)?;
    let theta = realignment_phases(&old, &new, boundary_ns);
    let mut out = selection.clone();
    for tone in &mut out.tones {
        let k = tone.transition;
        let phase = tone.phase_rad + theta[k - 1] - theta[k];
        tone.phase_rad = phase.sin().atan2(phase.cos());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroverOptions {
    /// Dense-scan window as a multiple of the predicted half period.
    pub scan_factor: f64,
    pub scan_step_ns: f64,
    /// Re-phase the selection tones across the frame jump.
    pub phase_lock: bool,
}

impl Default for GroverOptions {
    fn default() -> Self {
        Self {
            scan_factor: 3.0,
            scan_step_ns: 0.1,
            phase_lock: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroverPlan {
    pub searched_level: usize,
    pub hadamard: HadamardSolution,
    pub detuning: GroverDetuning,
    pub selection_segment: SegmentSpec,
    /// Rabi rate entering `√N/(4Ω)`: the mean over the driven band.
    pub mean_rabi_mhz: f64,
    /// `√N/(4Ω)`, ns. Also the selection segment's duration.
    pub predicted_half_period_ns: f64,
    /// First maximum of the searched-level population in the dense scan, ns.
    pub measured_half_period_ns: f64,
    /// `measured / predicted − 1`.
    pub half_period_deviation: f64,
    pub predicted_peak_population: f64,
    pub resonance_residual_mhz: f64,
}

impl GroverPlan {
    pub fn sequence(&self) -> Vec<SegmentSpec> {
        vec![self.hadamard.segment.clone(), self.selection_segment.clone()]
    }

    /// Same plan with the selection pulse lasting `duration_ns`.
    pub fn sequence_with_selection(&self, duration_ns: f64) -> Vec<SegmentSpec> {
        let mut sel = self.selection_segment.clone();
        sel.duration_ns = duration_ns;
        vec![self.hadamard.segment.clone(), sel]
    }
}

/// State at the start of the selection pulse, in the selection frame.
pub(crate) fn state_entering(
    qudit: &QuditSpec,
    hadamard: &SegmentSpec,
    selection: &SegmentSpec,
    initial_level: usize,
) -> Result<StateVector> {
    let mut run = SequenceRun::new(qudit, &StateVector::basis(qudit.n_levels, initial_level)?)?;
    run.step(hadamard)?;
    run.enter(selection)?;
    Ok(run.state)
}

/// Builds the selection pulse after a converged Hadamard.
///
/// The selection pulse keeps the Hadamard's Rabi rates and changes only the
/// drive frequencies.
pub fn plan_grover(
    qudit: &QuditSpec,
    searched_level: usize,
    hadamard: &HadamardSolution,
    options: &GroverOptions,
) -> Result<GroverPlan> {
    let n = qudit.n_levels;
    if searched_level >= n {
        return Err(Error::LevelOutOfRange {
            level: searched_level,
            n_levels: n,
        });
    }
    if !hadamard.converged {
        return Err(Error::InvalidArgument(
            "Hadamard solution did not converge; refusing to plan a selection pulse".into(),
        ));
    }
    if !(options.scan_factor > 0.0 && options.scan_step_ns > 0.0) {
        return Err(Error::InvalidArgument("scan window and step must be positive".into()));
    }
    let base: Vec<DriveTone> = hadamard
        .segment
        .tones
        .iter()
        .map(|t| DriveTone::new(t.transition, t.rabi_mhz, 0.0))
        .collect();
    let detuning = grover_detuning(qudit, &base, searched_level)?;
    let (lo, hi) = detuning.band;
    let band_rates: Vec<f64> = detuning
        .tones
        .iter()
        .filter(|t| t.transition > lo && t.transition <= hi)
        .map(|t| t.rabi_mhz)
        .collect();
    let mean_rabi = band_rates.iter().sum::<f64>() / band_rates.len() as f64;
    let predicted = grover_period(hadamard.target_levels.len(), mean_rabi)?;

    // Phase locking is a diagonal gauge change applied to state and tones
    // alike, so the resonance condition is checked before it.
    let residual = resonance_residual(&detuning.tones, n, detuning.band, searched_level)?;
    let mut selection = SegmentSpec::new(detuning.tones.clone(), predicted);
    if options.phase_lock {
        selection = phase_locked_selection(&hadamard.segment, &selection, n, hadamard.duration_ns())?;
    }

    let entering = state_entering(qudit, &hadamard.segment, &selection, hadamard.initial_level)?;
    let prop = Propagator::new(&selection.hamiltonian(n)?)?;
    let steps = (options.scan_factor * predicted / options.scan_step_ns).ceil() as usize;
    let pops: Vec<f64> = (0..=steps)
        .map(|i| {
            prop.apply(&entering, i as f64 * options.scan_step_ns)
                .map(|s| s.amplitude(searched_level).norm_sqr())
        })
        .collect::<Result<_>>()?;
    let (peak_idx, peak) = first_maximum(&pops);
    let measured = peak_idx as f64 * options.scan_step_ns;

    Ok(GroverPlan {
        searched_level,
        hadamard: hadamard.clone(),
        detuning,
        selection_segment: selection,
        mean_rabi_mhz: mean_rabi,
        predicted_half_period_ns: predicted,
        measured_half_period_ns: measured,
        half_period_deviation: measured / predicted - 1.0,
        predicted_peak_population: peak,
        resonance_residual_mhz: residual,
    })
}

/// First interior local maximum rising above the starting value; the global
/// maximum if there is none.
fn first_maximum(values: &[f64]) -> (usize, f64) {
    let start = values[0];
    for i in 1..values.len().saturating_sub(1) {
        if values[i] > start + 1e-9 && values[i] >= values[i - 1] && values[i] > values[i + 1] {
            return (i, values[i]);
        }
    }
    values
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        .unwrap_or((0, start))
}
