use serde::{Deserialize, Serialize};
use serde_json::json;

use qudit_sim::propagator::SequenceRun;
use qudit_sim::{
    detuning_map, plan_grover, population_trace, CycleConfig, GroverOptions, HadamardSearch, MapOptions, QuditSpec,
    SegmentSpec, StateVector,
};

use super::hadamard::{default_trace, not_converged_message, solve, HadamardConfig};
use super::{check_level, Outputs, Report};
use crate::config::{default_qudit, Grid, TimeGrid};
use crate::error::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroverHadamard {
    pub initial_level: usize,
    #[serde(default = "default_targets")]
    pub target_levels: Vec<usize>,
    #[serde(default)]
    pub search: HadamardSearch,
}

fn default_targets() -> Vec<usize> {
    vec![0, 1, 2]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub delta1_mhz: Grid,
    pub delta2_mhz: Grid,
    /// Selection duration; defaults to the predicted half period.
    #[serde(default)]
    pub duration_ns: Option<f64>,
    #[serde(default = "yes")]
    pub phase_lock: bool,
    /// Sampled visibilities instead of exact populations.
    #[serde(default)]
    pub sampling: Option<CycleConfig>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroverConfig {
    #[serde(default = "default_qudit")]
    pub qudit: QuditSpec,
    pub hadamard: GroverHadamard,
    /// 0-based searched level.
    pub searched_level: usize,
    #[serde(default)]
    pub options: GroverOptions,
    /// Selection pulse lengths for the dynamics; defaults to the scan window.
    #[serde(default)]
    pub trace: Option<TimeGrid>,
    #[serde(default)]
    pub map: Option<MapConfig>,
}

pub fn run(cfg: &GroverConfig, out: &mut Outputs) -> Result<Report> {
    let n = cfg.qudit.n_levels;
    check_level(cfg.searched_level, n, "searched_level")?;
    let had_cfg = HadamardConfig {
        qudit: cfg.qudit.clone(),
        initial_level: cfg.hadamard.initial_level,
        target_levels: cfg.hadamard.target_levels.clone(),
        search: cfg.hadamard.search.clone(),
        trace: None,
    };
    let had = solve(&had_cfg)?;
    if !had.converged {
        out.json("hadamard_solution.json", &had)?;
        return Ok(Report {
            summary: json!({ "hadamard_converged": false, "residual": had.residual }),
            not_converged: Some(not_converged_message(&had)),
        });
    }
    let plan = plan_grover(&cfg.qudit, cfg.searched_level, &had, &cfg.options)?;
    out.json("grover_plan.json", &plan)?;

    let mut run = SequenceRun::new(&cfg.qudit, &StateVector::basis(n, had.initial_level)?)?;
    run.step(&had.segment)?;
    run.enter(&plan.selection_segment)?;
    let grid = cfg
        .trace
        .clone()
        .unwrap_or_else(|| default_trace(cfg.options.scan_factor * plan.predicted_half_period_ns));
    let dynamics = population_trace(&plan.selection_segment, &cfg.qudit, &run.state, &grid.values()?)?;
    out.table("grover_dynamics", || dynamics.to_csv(), &dynamics)?;

    let mut summary = json!({
        "hadamard_duration_ns": had.duration_ns(),
        "selection_tones": plan.selection_segment.tones,
        "predicted_half_period_ns": plan.predicted_half_period_ns,
        "measured_half_period_ns": plan.measured_half_period_ns,
        "half_period_deviation": plan.half_period_deviation,
        "peak_population": plan.predicted_peak_population,
        "resonance_residual_mhz": plan.resonance_residual_mhz,
    });

    if let Some(m) = &cfg.map {
        let template = SegmentSpec::new(plan.detuning.tones.clone(), 0.0);
        let d1 = m.delta1_mhz.values("map.delta1_mhz")?;
        let d2 = m.delta2_mhz.values("map.delta2_mhz")?;
        let duration = m.duration_ns.unwrap_or(plan.predicted_half_period_ns);
        let options = MapOptions {
            initial_level: had.initial_level,
            phase_lock: m.phase_lock,
            sampling: m.sampling.clone(),
        };
        let map = detuning_map(
            &cfg.qudit,
            &had.segment,
            &template,
            &d1,
            &d2,
            duration,
            cfg.searched_level,
            &options,
        )?;
        out.table("grover_map", || map.to_csv(), &map)?;
        let (a, b, v) = map.argmax();
        summary["map"] = json!({
            "duration_ns": duration,
            "argmax_delta1_mhz": a,
            "argmax_delta2_mhz": b,
            "max_value": v,
        });
    }
    Ok(Report::ok(summary))
}
