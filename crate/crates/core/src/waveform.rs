//! Lab-frame multichromatic sample stream for an AWG.
//!
//! Each tone becomes `(Ω/κ)·sin(2π·ν_RF·t + φ)` with `ν_RF = ν − δ`, where
//! `t` is absolute time since the start of the sequence, so carriers stay
//! phase-coherent across segment boundaries. Sample `i` sits at
//! `t_i = i / rate` and belongs to the segment whose sample range
//! `[round(rate·t_start), round(rate·t_end))` contains it.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::sig;
use crate::frame::SegmentSpec;
use crate::spin_model::QuditSpec;

/// Tolerance on the summed amplitude before it counts as an overflow.
const AMPLITUDE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AwgConfig {
    #[serde(default = "default_rate")]
    pub sample_rate_gsps: f64,
    /// Rabi rate per unit of waveform amplitude, MHz.
    pub kappa_mhz_per_unit: f64,
}

fn default_rate() -> f64 {
    24.0
}

impl AwgConfig {
    pub fn new(kappa_mhz_per_unit: f64) -> Self {
        Self {
            sample_rate_gsps: default_rate(),
            kappa_mhz_per_unit,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate_gsps > 0.0 && self.sample_rate_gsps.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sample rate {} GS/s must be positive",
                self.sample_rate_gsps
            )));
        }
        if !(self.kappa_mhz_per_unit > 0.0 && self.kappa_mhz_per_unit.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "kappa {} MHz/unit must be positive",
                self.kappa_mhz_per_unit
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformSamples {
    pub samples: Vec<f64>,
    pub sample_rate_gsps: f64,
    pub duration_ns: f64,
}

impl WaveformSamples {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time_ns(&self, index: usize) -> f64 {
        index as f64 / self.sample_rate_gsps
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }
}

/// A tone ready for synthesis: amplitude in full-scale units, lab frequency
/// in GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Carrier {
    pub transition: usize,
    pub amplitude: f64,
    pub freq_ghz: f64,
    pub phase_rad: f64,
}

/// Lab-frame carriers of one segment, with Nyquist and overflow checks.
pub fn segment_carriers(segment: &SegmentSpec, qudit: &QuditSpec, awg: &AwgConfig) -> Result<Vec<Carrier>> {
    awg.validate()?;
    segment.validate(qudit.n_levels)?;
    let mut carriers = Vec::with_capacity(segment.tones.len());
    for tone in &segment.tones {
        let freq_ghz = qudit.transition_freq_ghz(tone.transition)? - tone.detuning_mhz * 1e-3;
        if !(freq_ghz >= 0.0 && awg.sample_rate_gsps > 2.0 * freq_ghz) {
            return Err(Error::Nyquist {
                freq_ghz,
                sample_rate_gsps: awg.sample_rate_gsps,
            });
        }
        carriers.push(Carrier {
            transition: tone.transition,
            amplitude: tone.rabi_mhz / awg.kappa_mhz_per_unit,
            freq_ghz,
            phase_rad: tone.phase_rad,
        });
    }
    let total: f64 = carriers.iter().map(|c| c.amplitude).sum();
    if total > 1.0 + AMPLITUDE_SLACK {
        return Err(Error::AmplitudeOverflow { total });
    }
    Ok(carriers)
}

fn sample_at(carriers: &[Carrier], t_ns: f64) -> f64 {
    carriers
        .iter()
        .map(|c| c.amplitude * (2.0 * PI * c.freq_ghz * t_ns + c.phase_rad).sin())
        .sum()
}

/// Samples `range` (global indices) of `segment` against absolute time.
pub fn synthesize_range(
    segment: &SegmentSpec,
    qudit: &QuditSpec,
    awg: &AwgConfig,
    range: std::ops::Range<usize>,
) -> Result<Vec<f64>> {
    let carriers = segment_carriers(segment, qudit, awg)?;
    let rate = awg.sample_rate_gsps;
    Ok(range
        .into_par_iter()
        .map(|i| sample_at(&carriers, i as f64 / rate))
        .collect())
}

/// Index of the first sample at or after `t_ns`.
fn boundary_index(t_ns: f64, rate: f64) -> usize {
    (t_ns * rate).round() as usize
}

pub fn synthesize(sequence: &[SegmentSpec], qudit: &QuditSpec, awg: &AwgConfig) -> Result<WaveformSamples> {
    awg.validate()?;
    qudit.validate()?;
    let rate = awg.sample_rate_gsps;
    let mut samples = Vec::new();
    let mut elapsed = 0.0;
    for seg in sequence {
        if !(seg.duration_ns >= 0.0 && seg.duration_ns.is_finite()) {
            return Err(Error::InvalidDuration(seg.duration_ns));
        }
        let start = boundary_index(elapsed, rate);
        elapsed += seg.duration_ns;
        let end = boundary_index(elapsed, rate);
        samples.extend(synthesize_range(seg, qudit, awg, start..end)?);
    }
    Ok(WaveformSamples {
        samples,
        sample_rate_gsps: rate,
        duration_ns: elapsed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveformFormat {
    /// One sample per line, 9 significant digits.
    Csv,
    /// Raw little-endian `f32`, no header.
    F32le,
}

impl std::str::FromStr for WaveformFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "f32le" => Ok(Self::F32le),
            other => Err(Error::InvalidArgument(format!("unknown waveform format {other:?}"))),
        }
    }
}

pub fn export_waveform(w: &WaveformSamples, path: &Path, format: WaveformFormat) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let written = match format {
        WaveformFormat::Csv => w.samples.iter().try_for_each(|s| writeln!(out, "{}", sig(*s, 9))),
        WaveformFormat::F32le => w
            .samples
            .iter()
            .try_for_each(|s| out.write_all(&(*s as f32).to_le_bytes())),
    };
    written.and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
}
