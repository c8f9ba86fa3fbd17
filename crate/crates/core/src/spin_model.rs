//! Static spectrum of the nuclear-spin qudit.
//!
//! The level energies follow `E(m) = a·m + q·m²` (frequency units, GHz). The
//! quadratic term is what makes the transition frequencies unequal and hence
//! individually addressable.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two transitions closer than this (GHz) are considered degenerate: 1 kHz.
pub const DEFAULT_DEGENERACY_TOL_GHZ: f64 = 1e-6;

/// Diagonal hyperfine-plus-quadrupole level model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelModel {
    /// Linear coefficient, GHz per unit m.
    pub a_ghz: f64,
    /// Quadratic coefficient, GHz per unit m².
    pub q_ghz: f64,
    /// Spin projections, strictly increasing in unit steps.
    pub m_values: Vec<f64>,
}

impl LevelModel {
    pub fn new(a_ghz: f64, q_ghz: f64, m_values: Vec<f64>) -> Result<Self> {
        let model = Self { a_ghz, q_ghz, m_values };
        model.validate()?;
        Ok(model)
    }

    /// Model over the `n_levels` projections of a spin `(n_levels - 1) / 2`,
    /// i.e. `-I, -I+1, …, I`.
    pub fn for_spin(a_ghz: f64, q_ghz: f64, n_levels: usize) -> Result<Self> {
        Self::new(a_ghz, q_ghz, centered_projections(n_levels))
    }

    pub fn n_levels(&self) -> usize {
        self.m_values.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_values.len() < 2 {
            return Err(Error::InvalidLevelModel(format!(
                "need at least 2 levels, got {}",
                self.m_values.len()
            )));
        }
        if !self.a_ghz.is_finite() || !self.q_ghz.is_finite() {
            return Err(Error::InvalidLevelModel("non-finite coefficient".into()));
        }
        for w in self.m_values.windows(2) {
            if ((w[1] - w[0]) - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidLevelModel(format!(
                    "m values must increase in unit steps, found {} -> {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }

    pub fn energy_ghz(&self, m: f64) -> f64 {
        self.a_ghz * m + self.q_ghz * m * m
    }
}

pub(crate) fn centered_projections(n_levels: usize) -> Vec<f64> {
    let top = (n_levels as f64 - 1.0) / 2.0;
    (0..n_levels).map(|k| k as f64 - top).collect()
}

/// Level count and the `N-1` transition frequencies; `transition_freqs_ghz[n-1]`
/// drives the `(n-1) ↔ n` transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuditSpec {
    pub n_levels: usize,
    pub transition_freqs_ghz: Vec<f64>,
}

impl QuditSpec {
    pub fn new(transition_freqs_ghz: Vec<f64>) -> Result<Self> {
        let spec = Self {
            n_levels: transition_freqs_ghz.len() + 1,
            transition_freqs_ghz,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Structural checks: level count matches, every frequency positive.
    pub fn validate(&self) -> Result<()> {
        if self.n_levels < 2 {
            return Err(Error::InvalidSpectrum(format!(
                "need at least 2 levels, got {}",
                self.n_levels
            )));
        }
        if self.transition_freqs_ghz.len() + 1 != self.n_levels {
            return Err(Error::InvalidSpectrum(format!(
                "{} levels need {} transition frequencies, got {}",
                self.n_levels,
                self.n_levels - 1,
                self.transition_freqs_ghz.len()
            )));
        }
        if let Some(f) = self.transition_freqs_ghz.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
            return Err(Error::InvalidSpectrum(format!(
                "transition frequency {f} GHz is not positive"
            )));
        }
        Ok(())
    }

    /// First pair of transitions closer than `tol_ghz`, if any.
    pub fn degeneracy(&self, tol_ghz: f64) -> Option<Degeneracy> {
        let f = &self.transition_freqs_ghz;
        for i in 0..f.len() {
            for j in i + 1..f.len() {
                let gap = (f[i] - f[j]).abs();
                if gap <= tol_ghz {
                    return Some(Degeneracy {
                        first: i + 1,
                        second: j + 1,
                        gap_ghz: gap,
                    });
                }
            }
        }
        None
    }

    /// Harmonic spectra cannot be addressed transition by transition, so
    /// gate design refuses them.
    pub fn validate_for_gate_design(&self, tol_ghz: f64) -> Result<()> {
        self.validate()?;
        match self.degeneracy(tol_ghz) {
            Some(d) => Err(Error::InvalidSpectrum(format!(
                "transitions {} and {} are {:e} GHz apart (harmonic spectrum)",
                d.first, d.second, d.gap_ghz
            ))),
            None => Ok(()),
        }
    }

    /// Frequency of transition `n` (1-based).
    pub fn transition_freq_ghz(&self, transition: usize) -> Result<f64> {
        if transition == 0 || transition >= self.n_levels {
            return Err(Error::TransitionOutOfRange {
                transition,
                n_levels: self.n_levels,
            });
        }
        Ok(self.transition_freqs_ghz[transition - 1])
    }
}

/// Two transitions closer than the degeneracy tolerance (1-based indices).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Degeneracy {
    pub first: usize,
    pub second: usize,
    pub gap_ghz: f64,
}

/// Spectrum derived from a level model, with the degeneracy warning if the
/// model is (nearly) harmonic.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedSpectrum {
    pub spec: QuditSpec,
    pub degenerate: Option<Degeneracy>,
}

/// `ν_n = E(m_n) − E(m_{n−1})`.
pub fn transition_frequencies(model: &LevelModel) -> Result<DerivedSpectrum> {
    model.validate()?;
    let freqs: Vec<f64> = model
        .m_values
        .windows(2)
        .map(|w| model.energy_ghz(w[1]) - model.energy_ghz(w[0]))
        .collect();
    let spec = QuditSpec {
        n_levels: model.n_levels(),
        transition_freqs_ghz: freqs,
    };
    // No positivity check here: a model may legitimately produce inverted
    // ordering; QuditSpec::validate is left to the caller.
    let degenerate = spec.degeneracy(DEFAULT_DEGENERACY_TOL_GHZ);
    Ok(DerivedSpectrum { spec, degenerate })
}

/// Result of [`fit_level_model`].
#[derive(Debug, Clone, PartialEq)]
pub struct LevelFit {
    pub model: LevelModel,
    /// Root-mean-square frequency residual, GHz.
    pub residual_ghz: f64,
    pub degenerate: Option<Degeneracy>,
}

/// Least-squares `(a, q)` for measured transition frequencies, assuming
/// centred unit-spaced projections.
pub fn fit_level_model(freqs_ghz: &[f64]) -> Result<LevelFit> {
    if freqs_ghz.len() < 2 {
        return Err(Error::Underdetermined(freqs_ghz.len()));
    }
    let n_levels = freqs_ghz.len() + 1;
    let m = centered_projections(n_levels);
    // ν_n = a + q·(2m_{n-1} + 1)
    let design = DMatrix::from_fn(freqs_ghz.len(), 2, |r, c| match c {
        0 => 1.0,
        _ => 2.0 * m[r] + 1.0,
    });
    let rhs = DVector::from_column_slice(freqs_ghz);
    let coeffs = design
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let residuals = &design * &coeffs - &rhs;
    let residual_ghz = (residuals.norm_squared() / freqs_ghz.len() as f64).sqrt();
    let model = LevelModel::new(coeffs[0], coeffs[1], m)?;
    let degenerate = transition_frequencies(&model)?.degenerate;
    Ok(LevelFit {
        model,
        residual_ghz,
        degenerate,
    })
}

/// The terbium nuclear-spin qudit: four levels, measured transitions
/// 2.452, 3.128 and 3.799 GHz.
pub fn default_tb_qudit() -> QuditSpec {
    QuditSpec {
        n_levels: 4,
        transition_freqs_ghz: vec![2.452, 3.128, 3.799],
    }
}
