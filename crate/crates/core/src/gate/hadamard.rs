//! Multi-level Hadamard search by variance minimisation.
//!
//! A Hadamard pulse maps a basis state onto an equal-population,
//! equal-phase superposition of a band of `K` levels. Its parameters are the
//! `K−1` Rabi rates, `K−1` detunings and the duration; they are found by a
//! coarse grid scan followed by multi-start Nelder–Mead refinement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nelder_mead::{self, Options};
use super::objective::{circular_phase_variance, population_variance, superposition_objective};
use crate::error::{Error, Result};
use crate::frame::{DriveTone, SegmentSpec};
use crate::propagator::{propagate, StateVector};
use crate::spin_model::{QuditSpec, DEFAULT_DEGENERACY_TOL_GHZ};

/// Upper bound on grid cells scanned before refinement.
const MAX_GRID_CELLS: usize = 1 << 20;

/// Closed interval; `min == max` pins the parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct ParamRange {
    pub min: f64,
    pub max: f64,
}

impl ParamRange {
    pub fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn fixed(value: f64) -> Self {
        Self::new(value, value)
    }

    pub fn is_free(&self) -> bool {
        self.max > self.min
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

impl From<[f64; 2]> for ParamRange {
    fn from(v: [f64; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<ParamRange> for [f64; 2] {
    fn from(r: ParamRange) -> Self {
        [r.min, r.max]
    }
}

/// One range for every driven transition, or one per transition (in
/// ascending transition order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RangeSpec {
    Uniform(ParamRange),
    PerTransition(Vec<ParamRange>),
}

impl RangeSpec {
    fn expand(&self, n: usize, what: &str) -> Result<Vec<ParamRange>> {
        match self {
            RangeSpec::Uniform(r) => Ok(vec![*r; n]),
            RangeSpec::PerTransition(v) if v.len() == n => Ok(v.clone()),
            RangeSpec::PerTransition(v) => Err(Error::InvalidArgument(format!(
                "{what}: {} ranges given for {n} driven transitions",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HadamardBounds {
    pub rabi_mhz: RangeSpec,
    pub detuning_mhz: RangeSpec,
    pub duration_ns: ParamRange,
}

impl Default for HadamardBounds {
    fn default() -> Self {
        Self {
            rabi_mhz: RangeSpec::Uniform(ParamRange::new(0.5, 8.0)),
            detuning_mhz: RangeSpec::Uniform(ParamRange::new(-8.0, 8.0)),
            duration_ns: ParamRange::new(1.0, 400.0),
        }
    }
}

/// Search configuration. Defaults: 8 grid points per free axis, 5 refined
/// starts, residual threshold 1e-3, population tolerance 0.02 and phase
/// tolerance 0.05.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HadamardSearch {
    pub bounds: HadamardBounds,
    pub phase_weight: f64,
    pub grid_points: usize,
    pub starts: usize,
    pub seed: u64,
    pub threshold: f64,
    pub population_tolerance: f64,
    pub phase_tolerance: f64,
    pub max_evals: usize,
}

impl Default for HadamardSearch {
    fn default() -> Self {
        Self {
            bounds: HadamardBounds::default(),
            phase_weight: 1.0,
            grid_points: 8,
            starts: 5,
            seed: 0,
            threshold: 1e-3,
            population_tolerance: 0.02,
            phase_tolerance: 0.05,
            max_evals: 4000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HadamardSolution {
    pub segment: SegmentSpec,
    pub initial_level: usize,
    pub target_levels: Vec<usize>,
    /// Search cost at the optimum: objective plus squared leakage out of
    /// the target levels.
    pub residual: f64,
    pub population_variance: f64,
    pub phase_variance: f64,
    pub achieved_populations: Vec<f64>,
    pub achieved_phases: Vec<f64>,
    pub converged: bool,
    pub evaluations: usize,
}

impl HadamardSolution {
    pub fn duration_ns(&self) -> f64 {
        self.segment.duration_ns
    }
}

struct Problem<'a> {
    n_levels: usize,
    initial: StateVector,
    initial_level: usize,
    targets: &'a [usize],
    transitions: Vec<usize>,
    ranges: Vec<ParamRange>,
    phase_weight: f64,
}

impl Problem<'_> {
    fn segment(&self, params: &[f64]) -> SegmentSpec {
        let k = self.transitions.len();
        let tones = self
            .transitions
            .iter()
            .enumerate()
            .map(|(i, &t)| DriveTone::new(t, params[i], params[k + i]))
            .collect();
        SegmentSpec::new(tones, params[2 * k])
    }

    fn cost(&self, params: &[f64]) -> f64 {
        let seg = self.segment(params);
        let h = match seg.hamiltonian(self.n_levels) {
            Ok(h) => h,
            Err(_) => return f64::INFINITY,
        };
        match propagate(&h, &self.initial, seg.duration_ns) {
            Ok(state) => search_cost(&state, self.targets, self.phase_weight),
            Err(_) => f64::INFINITY,
        }
    }

    fn free_axes(&self) -> Vec<usize> {
        (0..self.ranges.len()).filter(|&i| self.ranges[i].is_free()).collect()
    }

    /// Full parameter vector from free coordinates.
    fn embed(&self, free: &[usize], coords: &[f64]) -> Vec<f64> {
        let mut p: Vec<f64> = self.ranges.iter().map(|r| r.min).collect();
        for (&axis, &c) in free.iter().zip(coords) {
            p[axis] = c;
        }
        p
    }
}

fn search_cost(state: &StateVector, targets: &[usize], phase_weight: f64) -> f64 {
    let inside: f64 = targets.iter().map(|&k| state.amplitude(k).norm_sqr()).sum();
    superposition_objective(state, targets, phase_weight) + (1.0 - inside).powi(2)
}

fn normalise_targets(targets: &[usize], n_levels: usize) -> Result<Vec<usize>> {
    if targets.is_empty() {
        return Err(Error::InvalidArgument("target level set is empty".into()));
    }
    let mut t = targets.to_vec();
    t.sort_unstable();
    t.dedup();
    if let Some(&bad) = t.iter().find(|&&l| l >= n_levels) {
        return Err(Error::LevelOutOfRange { level: bad, n_levels });
    }
    Ok(t)
}

/// Evaluates a fixed Hadamard candidate without searching.
pub fn evaluate_hadamard(
    qudit: &QuditSpec,
    segment: &SegmentSpec,
    initial_level: usize,
    target_levels: &[usize],
    search: &HadamardSearch,
) -> Result<HadamardSolution> {
    let targets = normalise_targets(target_levels, qudit.n_levels)?;
    segment.validate(qudit.n_levels)?;
    let initial = StateVector::basis(qudit.n_levels, initial_level)?;
    let state = propagate(&segment.hamiltonian(qudit.n_levels)?, &initial, segment.duration_ns)?;
    Ok(solution_from_state(
        segment.clone(),
        &state,
        initial_level,
        targets,
        search,
        1,
    ))
}

fn solution_from_state(
    segment: SegmentSpec,
    state: &StateVector,
    initial_level: usize,
    targets: Vec<usize>,
    search: &HadamardSearch,
    evaluations: usize,
) -> HadamardSolution {
    let residual = search_cost(state, &targets, search.phase_weight);
    let pops = state.populations();
    let ideal = 1.0 / targets.len() as f64;
    let pop_ok = targets
        .iter()
        .all(|&k| (pops[k] - ideal).abs() <= search.population_tolerance);
    let phase_variance = circular_phase_variance(state, &targets);
    // Phase equality is only demanded when the objective asks for it.
    let phase_ok = search.phase_weight <= 0.0 || phase_variance <= search.phase_tolerance;
    HadamardSolution {
        population_variance: population_variance(state, &targets),
        phase_variance,
        achieved_populations: pops,
        achieved_phases: state.relative_phases(),
        converged: residual <= search.threshold && pop_ok && phase_ok,
        residual,
        segment,
        initial_level,
        target_levels: targets,
        evaluations,
    }
}

/// Searches Hadamard parameters over the band spanned by `initial_level`
/// and `target_levels`.
///
/// Among converged candidates the shortest pulse wins (the objective is
/// periodic in the duration, so later revivals are equally good); otherwise
/// the lowest residual is returned with `converged == false`.
pub fn find_hadamard(
    qudit: &QuditSpec,
    initial_level: usize,
    target_levels: &[usize],
    search: &HadamardSearch,
) -> Result<HadamardSolution> {
    qudit.validate_for_gate_design(DEFAULT_DEGENERACY_TOL_GHZ)?;
    let n = qudit.n_levels;
    let targets = normalise_targets(target_levels, n)?;
    let initial = StateVector::basis(n, initial_level)?;
    let lo = targets[0].min(initial_level);
    let hi = targets[targets.len() - 1].max(initial_level);
    let transitions: Vec<usize> = (lo + 1..=hi).collect();
    let k = transitions.len();

    if k == 0 {
        let seg = SegmentSpec::idle(search.bounds.duration_ns.min.max(0.0));
        return Ok(solution_from_state(seg, &initial, initial_level, targets, search, 0));
    }

    let mut ranges = search.bounds.rabi_mhz.expand(k, "rabi_mhz")?;
    ranges.extend(search.bounds.detuning_mhz.expand(k, "detuning_mhz")?);
    ranges.push(search.bounds.duration_ns);
    for (i, r) in ranges.iter().enumerate() {
        if !(r.min.is_finite() && r.max.is_finite() && r.min <= r.max) {
            return Err(Error::InvalidArgument(format!("bad range [{}, {}]", r.min, r.max)));
        }
        let nonneg = i < k || i == 2 * k;
        if nonneg && (r.min < 0.0 || r.max <= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Rabi and duration ranges must lie in (0, max], got [{}, {}]",
                r.min, r.max
            )));
        }
    }
    if search.grid_points == 0 || search.starts == 0 {
        return Err(Error::InvalidArgument("grid_points and starts must be positive".into()));
    }

    let problem = Problem {
        n_levels: n,
        initial,
        initial_level,
        targets: &targets,
        transitions,
        ranges,
        phase_weight: search.phase_weight,
    };
    let free = problem.free_axes();
    let dims = free.len();

    let mut points = search.grid_points;
    while dims > 0 && points > 1 && points.pow(dims as u32) > MAX_GRID_CELLS {
        points -= 1;
    }
    let cells = if dims == 0 { 1 } else { points.pow(dims as u32) };
    let cell_width: Vec<f64> = free
        .iter()
        .map(|&a| problem.ranges[a].width() / points as f64)
        .collect();
    let cell_center = |idx: usize| -> Vec<f64> {
        let mut rem = idx;
        free.iter()
            .zip(&cell_width)
            .map(|(&a, w)| {
                let i = rem % points;
                rem /= points;
                problem.ranges[a].min + (i as f64 + 0.5) * w
            })
            .collect()
    };

    let grid_costs: Vec<f64> = (0..cells)
        .into_par_iter()
        .map(|idx| problem.cost(&problem.embed(&free, &cell_center(idx))))
        .collect();
    let mut order: Vec<usize> = (0..cells).collect();
    order.sort_by(|&a, &b| grid_costs[a].total_cmp(&grid_costs[b]).then(a.cmp(&b)));
    order.truncate(search.starts.min(cells));

    let bounds: Vec<(f64, f64)> = free
        .iter()
        .map(|&a| (problem.ranges[a].min, problem.ranges[a].max))
        .collect();
    let opts = Options {
        max_evals: search.max_evals,
        ..Options::default()
    };

    let refined: Vec<(Vec<f64>, f64, usize)> = order
        .par_iter()
        .enumerate()
        .map(|(rank, &cell)| {
            let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
            rng.set_stream(rank as u64);
            let x0: Vec<f64> = cell_center(cell)
                .iter()
                .zip(&cell_width)
                .zip(&bounds)
                .map(|((c, w), (lo, hi))| (c + w * rng.random_range(-0.25..0.25)).clamp(*lo, *hi))
                .collect();
            let steps: Vec<f64> = cell_width.iter().map(|w| 0.5 * w).collect();
            let cost = |x: &[f64]| problem.cost(&problem.embed(&free, x));
            let first = nelder_mead::minimize(cost, &x0, &steps, &bounds, opts);
            // Restart from the minimum with a fresh, small simplex.
            let fine: Vec<f64> = cell_width.iter().map(|w| 0.02 * w).collect();
            let second = nelder_mead::minimize(cost, &first.x, &fine, &bounds, opts);
            let evals = first.evals + second.evals;
            let best = if second.value <= first.value { second } else { first };
            (problem.embed(&free, &best.x), best.value, evals)
        })
        .collect();

    let total_evals = cells + refined.iter().map(|r| r.2).sum::<usize>();
    let candidates: Vec<HadamardSolution> = refined
        .into_iter()
        .map(|(params, _, _)| {
            let seg = problem.segment(&params);
            let state = propagate(
                &seg.hamiltonian(n).expect("validated tones"),
                &problem.initial,
                seg.duration_ns,
            )
            .expect("validated duration");
            solution_from_state(seg, &state, problem.initial_level, targets.clone(), search, total_evals)
        })
        .collect();

    let pick = candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.converged)
        .min_by(|(ia, a), (ib, b)| {
            a.duration_ns()
                .total_cmp(&b.duration_ns())
                .then(a.residual.total_cmp(&b.residual))
                .then(ia.cmp(ib))
        })
        .or_else(|| {
            candidates
                .iter()
                .enumerate()
                .min_by(|(ia, a), (ib, b)| a.residual.total_cmp(&b.residual).then(ia.cmp(ib)))
        })
        .map(|(i, _)| i)
        .expect("at least one start");
    Ok(candidates.into_iter().nth(pick).expect("index in range"))
}
