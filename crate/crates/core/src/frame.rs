//! Rotating-frame Hamiltonians for square multichromatic pulses.
//!
//! Every driven transition `n` carries one tone at `ν_RF,n = ν_n − δ_n`. In
//! the frame co-rotating with the tones the Hamiltonian is time independent:
//!
//! ```text
//! M[k][k]   = 2·D_k,       D_k = Σ_{j≤k} δ_j   (D_0 = 0)
//! M[k][k+1] = Ω_{k+1}·e^{iφ_{k+1}}
//! ```
//!
//! with `H = πħM`. Level 0 is the frame anchor; undriven transitions add
//! nothing to `D_k`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One tone of a multichromatic pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveTone {
    /// 1-based transition index `n`, driving `(n-1) ↔ n`.
    pub transition: usize,
    pub rabi_mhz: f64,
    /// `δ = ν_transition − ν_RF`.
    #[serde(default)]
    pub detuning_mhz: f64,
    #[serde(default)]
    pub phase_rad: f64,
}

impl DriveTone {
    pub fn new(transition: usize, rabi_mhz: f64, detuning_mhz: f64) -> Self {
        Self {
            transition,
            rabi_mhz,
            detuning_mhz,
            phase_rad: 0.0,
        }
    }

    pub fn with_phase(mut self, phase_rad: f64) -> Self {
        self.phase_rad = phase_rad;
        self
    }
}

/// A square pulse: a set of simultaneous tones held for `duration_ns`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    #[serde(default)]
    pub tones: Vec<DriveTone>,
    pub duration_ns: f64,
}

impl SegmentSpec {
    pub fn new(tones: Vec<DriveTone>, duration_ns: f64) -> Self {
        Self { tones, duration_ns }
    }

    /// Free evolution: no tones, so the rotating frame is the transition frame.
    pub fn idle(duration_ns: f64) -> Self {
        Self::new(Vec::new(), duration_ns)
    }

    pub fn validate(&self, n_levels: usize) -> Result<()> {
        if !(self.duration_ns.is_finite() && self.duration_ns >= 0.0) {
            return Err(Error::InvalidDuration(self.duration_ns));
        }
        validate_tones(&self.tones, n_levels)
    }

    pub fn tone(&self, transition: usize) -> Option<&DriveTone> {
        self.tones.iter().find(|t| t.transition == transition)
    }

    pub fn hamiltonian(&self, n_levels: usize) -> Result<FrameHamiltonian> {
        build_qudit_hamiltonian(&self.tones, n_levels)
    }

    pub fn frame_offsets(&self, n_levels: usize) -> Result<Vec<f64>> {
        frame_offsets(&self.tones, n_levels)
    }

    /// Same tones with every detuning shifted by `offset_mhz`.
    pub fn with_detuning_offset(&self, offset_mhz: f64) -> Self {
        let mut out = self.clone();
        for t in &mut out.tones {
            t.detuning_mhz += offset_mhz;
        }
        out
    }
}

fn validate_tones(tones: &[DriveTone], n_levels: usize) -> Result<()> {
    if n_levels < 2 {
        return Err(Error::InvalidArgument(format!(
            "a qudit needs at least 2 levels, got {n_levels}"
        )));
    }
    let mut seen = vec![false; n_levels];
    for tone in tones {
        if tone.transition == 0 || tone.transition >= n_levels {
            return Err(Error::TransitionOutOfRange {
                transition: tone.transition,
                n_levels,
            });
        }
        if seen[tone.transition] {
            return Err(Error::DuplicateTone {
                transition: tone.transition,
            });
        }
        seen[tone.transition] = true;
        if !(tone.rabi_mhz.is_finite() && tone.rabi_mhz >= 0.0) {
            return Err(Error::InvalidTone {
                transition: tone.transition,
                reason: format!("Rabi rate {} MHz must be finite and non-negative", tone.rabi_mhz),
            });
        }
        if !tone.detuning_mhz.is_finite() || !tone.phase_rad.is_finite() {
            return Err(Error::InvalidTone {
                transition: tone.transition,
                reason: "non-finite detuning or phase".into(),
            });
        }
    }
    Ok(())
}

/// The matrix `M` of `H = πħM`, entries in MHz.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameHamiltonian {
    matrix: DMatrix<Complex64>,
}

impl FrameHamiltonian {
    /// Wraps an arbitrary square matrix. Hermiticity is checked where it
    /// matters (by the propagator), not here.
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    /// Largest `|M_ij − conj(M_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_tridiagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i.abs_diff(j) <= 1 || self.matrix[(i, j)] == Complex64::ZERO))
    }
}

/// Two-level Hamiltonian `[[δ, Ω], [Ω, −δ]]` in the traceless convention.
pub fn build_qubit_hamiltonian(rabi_mhz: f64, detuning_mhz: f64) -> Result<FrameHamiltonian> {
    if !(rabi_mhz.is_finite() && rabi_mhz >= 0.0) || !detuning_mhz.is_finite() {
        return Err(Error::InvalidTone {
            transition: 1,
            reason: format!("Ω = {rabi_mhz} MHz, δ = {detuning_mhz} MHz"),
        });
    }
    let c = |x: f64| Complex64::new(x, 0.0);
    let m = DMatrix::from_row_slice(2, 2, &[c(detuning_mhz), c(rabi_mhz), c(rabi_mhz), c(-detuning_mhz)]);
    FrameHamiltonian::from_matrix(m)
}

/// Zero-anchored multichromatic Hamiltonian for `n_levels` levels.
pub fn build_qudit_hamiltonian(tones: &[DriveTone], n_levels: usize) -> Result<FrameHamiltonian> {
    let offsets = frame_offsets(tones, n_levels)?;
    let mut m = DMatrix::<Complex64>::zeros(n_levels, n_levels);
    for (k, d) in offsets.iter().enumerate() {
        m[(k, k)] = Complex64::new(2.0 * d, 0.0);
    }
    for tone in tones {
        let lo = tone.transition - 1;
        let coupling = Complex64::from_polar(tone.rabi_mhz, tone.phase_rad);
        m[(lo, lo + 1)] = coupling;
        m[(lo + 1, lo)] = coupling.conj();
    }
    FrameHamiltonian::from_matrix(m)
}

/// Cumulative frame frequencies `D_k = Σ_{j≤k} δ_j` (MHz), `D_0 = 0`.
pub fn frame_offsets(tones: &[DriveTone], n_levels: usize) -> Result<Vec<f64>> {
    validate_tones(tones, n_levels)?;
    let mut per_transition = vec![0.0; n_levels];
    for tone in tones {
        per_transition[tone.transition] = tone.detuning_mhz;
    }
    let mut acc = 0.0;
    Ok(per_transition
        .into_iter()
        .map(|d| {
            acc += d;
            acc
        })
        .collect())
}

/// Inverse of [`frame_offsets`] restricted to a set of transitions: the
/// per-transition detunings that realise the level offsets `offsets`.
///
/// Offsets of levels joined by an undriven transition must be equal; the
/// first mismatch is reported.
pub fn detunings_for_offsets(offsets: &[f64], driven: &[usize]) -> Result<Vec<f64>> {
    let n = offsets.len();
    let mut out = Vec::with_capacity(driven.len());
    for &tr in driven {
        if tr == 0 || tr >= n {
            return Err(Error::TransitionOutOfRange {
                transition: tr,
                n_levels: n,
            });
        }
        out.push(offsets[tr] - offsets[tr - 1]);
    }
    for tr in 1..n {
        if !driven.contains(&tr) && (offsets[tr] - offsets[tr - 1]).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "levels {} and {tr} have different offsets but transition {tr} is undriven",
                tr - 1
            )));
        }
    }
    Ok(out)
}
