//! Emulation of the initialise / drive / read-out cycle.
//!
//! Each accepted shot starts in a basis state, runs the pulse sequence and
//! ends with a projective measurement sampled from `|c_j|²`. A cycle is
//! rejected (and retried) with probability `1 − η`, mimicking a missed
//! read-out event; rejected cycles are counted in `attempted` only.
//!
//! Randomness: ChaCha8 seeded from `seed`, one stream per block of
//! [`SHOTS_PER_BLOCK`] accepted shots (stream `block`, offset by
//! `stream_base` for map pixels). Blocks are independent, so the counts do
//! not depend on how blocks are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::f12;
use crate::frame::SegmentSpec;
use crate::gate::phase_locked_selection;
use crate::propagator::{evolve_sequence, StateVector};
use crate::spin_model::QuditSpec;

pub const SHOTS_PER_BLOCK: u64 = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CycleConfig {
    /// Accepted shots to collect.
    pub shots: u64,
    pub seed: u64,
    /// Probability that a cycle's read-out event is detected.
    pub detection_prob: f64,
    /// Per-shot Gaussian detuning offset shared by all tones, MHz.
    pub quasistatic_detuning_sigma_mhz: f64,
}

impl Default for CycleConfig {
    fn default() -> Self {
        Self {
            shots: 1000,
            seed: 0,
            detection_prob: 1.0,
            quasistatic_detuning_sigma_mhz: 0.0,
        }
    }
}

impl CycleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::InvalidArgument("shots must be at least 1".into()));
        }
        if !(self.detection_prob > 0.0 && self.detection_prob <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "detection_prob {} must lie in (0, 1]",
                self.detection_prob
            )));
        }
        if !(self.quasistatic_detuning_sigma_mhz >= 0.0 && self.quasistatic_detuning_sigma_mhz.is_finite()) {
            return Err(Error::InvalidArgument(
                "noise sigma must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// `counts[i][j]`: events with initial level `i` and final level `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionCounts {
    pub counts: Vec<Vec<u64>>,
    /// All cycles, rejected ones included.
    pub attempted: u64,
}

impl TransitionCounts {
    pub fn zeros(n_levels: usize) -> Self {
        Self {
            counts: vec![vec![0; n_levels]; n_levels],
            attempted: 0,
        }
    }

    pub fn n_levels(&self) -> usize {
        self.counts.len()
    }

    pub fn accepted(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn merge(&mut self, other: &TransitionCounts) {
        for (row, o) in self.counts.iter_mut().zip(&other.counts) {
            for (c, x) in row.iter_mut().zip(o) {
                *c += x;
            }
        }
        self.attempted += other.attempted;
    }

    /// Row-normalised matrix; rows without events are `None`.
    pub fn probability_matrix(&self) -> Vec<Option<Vec<f64>>> {
        (0..self.n_levels())
            .map(|i| {
                (0..self.n_levels())
                    .map(|j| transition_probability(self, i, j))
                    .collect::<Result<Vec<f64>>>()
                    .ok()
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let n = self.n_levels();
        let mut out = String::from("initial");
        for j in 0..n {
            out.push_str(&format!(",n{j}"));
        }
        out.push('\n');
        for (i, row) in self.counts.iter().enumerate() {
            out.push_str(&i.to_string());
            for c in row {
                out.push(',');
                out.push_str(&c.to_string());
            }
            out.push('\n');
        }
        out
    }

    /// Eq.-1 probabilities as CSV; empty rows are left blank.
    pub fn probabilities_csv(&self) -> String {
        let n = self.n_levels();
        let mut out = String::from("initial");
        for j in 0..n {
            out.push_str(&format!(",p{j}"));
        }
        out.push('\n');
        for (i, row) in self.probability_matrix().iter().enumerate() {
            out.push_str(&i.to_string());
            for j in 0..n {
                out.push(',');
                if let Some(r) = row {
                    out.push_str(&f12(r[j]));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// `P_ij = N_ij / Σ_n N_in`.
pub fn transition_probability(counts: &TransitionCounts, i: usize, j: usize) -> Result<f64> {
    let n = counts.n_levels();
    if i >= n || j >= n {
        return Err(Error::LevelOutOfRange {
            level: i.max(j),
            n_levels: n,
        });
    }
    let row: u64 = counts.counts[i].iter().sum();
    if row == 0 {
        return Err(Error::EmptyRow(i));
    }
    Ok(counts.counts[i][j] as f64 / row as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VisibilityMode {
    /// `P_ij + P_ji`.
    Symmetric,
    /// `P_ij`.
    Directed,
}

pub fn visibility(p: &[Vec<f64>], i: usize, j: usize, mode: VisibilityMode) -> f64 {
    match mode {
        VisibilityMode::Symmetric => p[i][j] + p[j][i],
        VisibilityMode::Directed => p[i][j],
    }
}

fn final_probabilities(
    sequence: &[SegmentSpec],
    qudit: &QuditSpec,
    initial: &StateVector,
    offset_mhz: f64,
) -> Result<Vec<f64>> {
    if offset_mhz == 0.0 {
        return Ok(evolve_sequence(sequence, qudit, initial)?.populations());
    }
    let shifted: Vec<SegmentSpec> = sequence.iter().map(|s| s.with_detuning_offset(offset_mhz)).collect();
    Ok(evolve_sequence(&shifted, qudit, initial)?.populations())
}

fn sample_level(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    // Rounding left a sliver above the last cumulative value.
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(probs.len() - 1)
}

/// Runs `config.shots` accepted cycles of `sequence` from `initial_level`.
pub fn run_cycles(
    sequence: &[SegmentSpec],
    qudit: &QuditSpec,
    initial_level: usize,
    config: &CycleConfig,
) -> Result<TransitionCounts> {
    run_cycles_on_stream(sequence, qudit, initial_level, config, 0)
}

pub(crate) fn run_cycles_on_stream(
    sequence: &[SegmentSpec],
    qudit: &QuditSpec,
    initial_level: usize,
    config: &CycleConfig,
    stream_base: u64,
) -> Result<TransitionCounts> {
    config.validate()?;
    qudit.validate()?;
    let n = qudit.n_levels;
    for seg in sequence {
        seg.validate(n)?;
    }
    let initial = StateVector::basis(n, initial_level)?;
    let sigma = config.quasistatic_detuning_sigma_mhz;
    let noiseless = if sigma == 0.0 {
        Some(final_probabilities(sequence, qudit, &initial, 0.0)?)
    } else {
        None
    };
    let noise = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE)).map_err(|e| Error::InvalidArgument(e.to_string()))?;

    let blocks = config.shots.div_ceil(SHOTS_PER_BLOCK);
    let partials: Vec<TransitionCounts> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(stream_base + b);
            let shots = SHOTS_PER_BLOCK.min(config.shots - b * SHOTS_PER_BLOCK);
            let mut out = TransitionCounts::zeros(n);
            for _ in 0..shots {
                loop {
                    out.attempted += 1;
                    if rng.random::<f64>() < config.detection_prob {
                        break;
                    }
                }
                let probs = match &noiseless {
                    Some(p) => p.clone(),
                    None => final_probabilities(sequence, qudit, &initial, noise.sample(&mut rng))?,
                };
                let level = sample_level(&probs, rng.random::<f64>());
                out.counts[initial_level][level] += 1;
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut total = TransitionCounts::zeros(n);
    for p in &partials {
        total.merge(p);
    }
    Ok(total)
}

/// Settings for [`detuning_map`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MapOptions {
    /// Level the Hadamard starts from (also the Eq.-1 initial state).
    pub initial_level: usize,
    /// Re-phase the selection tones at the frame jump for every pixel.
    pub phase_lock: bool,
    /// `None`: exact searched-level population. `Some`: sampled directed
    /// visibility with that many shots per pixel.
    pub sampling: Option<CycleConfig>,
}

impl Default for MapOptions {
    fn default() -> Self {
        Self {
            initial_level: 1,
            phase_lock: true,
            sampling: None,
        }
    }
}

/// Searched-level visibility over a grid of the first two selection
/// detunings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetuningMap {
    pub delta1_mhz: Vec<f64>,
    pub delta2_mhz: Vec<f64>,
    /// `values[i][j]` at `(delta1_mhz[i], delta2_mhz[j])`.
    pub values: Vec<Vec<f64>>,
}

impl DetuningMap {
    /// Grid coordinates and value of the maximum (first in row-major order).
    pub fn argmax(&self) -> (f64, f64, f64) {
        let mut best = (0, 0, f64::NEG_INFINITY);
        for (i, row) in self.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if *v > best.2 {
                    best = (i, j, *v);
                }
            }
        }
        (self.delta1_mhz[best.0], self.delta2_mhz[best.1], best.2)
    }

    /// One row per δ₁; header row lists the δ₂ values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta1_mhz");
        for d in &self.delta2_mhz {
            out.push(',');
            out.push_str(&f12(*d));
        }
        out.push('\n');
        for (d1, row) in self.delta1_mhz.iter().zip(&self.values) {
            out.push_str(&f12(*d1));
            for v in row {
                out.push(',');
                out.push_str(&f12(*v));
            }
            out.push('\n');
        }
        out
    }
}

/// Varies the detunings of the first two selection tones (ascending
/// transition order) over `delta1_grid × delta2_grid`, at a fixed selection
/// duration, recording the searched level's population.
#[allow(clippy::too_many_arguments)]
pub fn detuning_map(
    qudit: &QuditSpec,
    hadamard_segment: &SegmentSpec,
    selection_template: &SegmentSpec,
    delta1_grid: &[f64],
    delta2_grid: &[f64],
    fixed_duration_ns: f64,
    searched_level: usize,
    options: &MapOptions,
) -> Result<DetuningMap> {
    let n = qudit.n_levels;
    if delta1_grid.is_empty() || delta2_grid.is_empty() {
        return Err(Error::InvalidArgument("detuning grids must be non-empty".into()));
    }
    if searched_level >= n {
        return Err(Error::LevelOutOfRange {
            level: searched_level,
            n_levels: n,
        });
    }
    hadamard_segment.validate(n)?;
    selection_template.validate(n)?;
    let mut order: Vec<usize> = (0..selection_template.tones.len()).collect();
    order.sort_by_key(|&i| selection_template.tones[i].transition);
    if order.len() < 2 {
        return Err(Error::InvalidArgument(
            "selection template needs at least two tones".into(),
        ));
    }
    let (first, second) = (order[0], order[1]);
    let initial = StateVector::basis(n, options.initial_level)?;

    let pixels: Vec<(usize, usize)> = (0..delta1_grid.len())
        .flat_map(|i| (0..delta2_grid.len()).map(move |j| (i, j)))
        .collect();
    let values: Vec<f64> = pixels
        .par_iter()
        .map(|&(i, j)| {
            let mut sel = selection_template.clone();
            sel.duration_ns = fixed_duration_ns;
            sel.tones[first].detuning_mhz = delta1_grid[i];
            sel.tones[second].detuning_mhz = delta2_grid[j];
            if options.phase_lock {
                sel = phase_locked_selection(hadamard_segment, &sel, n, hadamard_segment.duration_ns)?;
            }
            let seq = [hadamard_segment.clone(), sel];
            match &options.sampling {
                None => Ok(evolve_sequence(&seq, qudit, &initial)?.populations()[searched_level]),
                Some(cfg) => {
                    let pixel = (i * delta2_grid.len() + j) as u64;
                    let counts = run_cycles_on_stream(&seq, qudit, options.initial_level, cfg, pixel << 32)?;
                    transition_probability(&counts, options.initial_level, searched_level)
                }
            }
        })
        .collect::<Result<_>>()?;

    Ok(DetuningMap {
        delta1_mhz: delta1_grid.to_vec(),
        delta2_mhz: delta2_grid.to_vec(),
        values: values.chunks(delta2_grid.len()).map(<[f64]>::to_vec).collect(),
    })
}
