use serde::{Deserialize, Serialize};
use serde_json::json;

use qudit_sim::{find_hadamard, population_trace, HadamardSearch, HadamardSolution, QuditSpec, StateVector};

use super::{check_level, validate_qudit, Outputs, Report};
use crate::config::{default_qudit, TimeGrid};
use crate::error::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HadamardConfig {
    #[serde(default = "default_qudit")]
    pub qudit: QuditSpec,
    pub initial_level: usize,
    pub target_levels: Vec<usize>,
    #[serde(default)]
    pub search: HadamardSearch,
    /// Pulse lengths for the trace; defaults to 0..2τ in 0.5 ns steps.
    #[serde(default)]
    pub trace: Option<TimeGrid>,
}

pub(crate) fn solve(cfg: &HadamardConfig) -> Result<HadamardSolution> {
    validate_qudit(&cfg.qudit)?;
    check_level(cfg.initial_level, cfg.qudit.n_levels, "initial_level")?;
    for &t in &cfg.target_levels {
        check_level(t, cfg.qudit.n_levels, "target_levels")?;
    }
    Ok(find_hadamard(
        &cfg.qudit,
        cfg.initial_level,
        &cfg.target_levels,
        &cfg.search,
    )?)
}

pub(crate) fn default_trace(stop_ns: f64) -> TimeGrid {
    TimeGrid {
        start_ns: 0.0,
        stop_ns: stop_ns.max(0.5),
        step_ns: 0.5,
    }
}

pub(crate) fn not_converged_message(sol: &HadamardSolution) -> String {
    format!(
        "Hadamard search did not converge (residual {:.3e}, populations {:?})",
        sol.residual, sol.achieved_populations
    )
}

pub fn run(cfg: &HadamardConfig, out: &mut Outputs) -> Result<Report> {
    let sol = solve(cfg)?;
    out.json("hadamard_solution.json", &sol)?;
    let grid = cfg
        .trace
        .clone()
        .unwrap_or_else(|| default_trace(2.0 * sol.duration_ns()));
    let initial = StateVector::basis(cfg.qudit.n_levels, cfg.initial_level)?;
    let trace = population_trace(&sol.segment, &cfg.qudit, &initial, &grid.values()?)?;
    out.table("hadamard_trace", || trace.to_csv(), &trace)?;
    let summary = json!({
        "converged": sol.converged,
        "duration_ns": sol.duration_ns(),
        "residual": sol.residual,
        "tones": sol.segment.tones,
        "achieved_populations": sol.achieved_populations,
    });
    Ok(Report {
        not_converged: (!sol.converged).then(|| not_converged_message(&sol)),
        summary,
    })
}
