use serde::{Deserialize, Serialize};
use serde_json::json;

use qudit_sim::{run_cycles, CycleConfig, QuditSpec, SegmentSpec, TransitionCounts};

use super::{check_level, validate_qudit, Outputs, Report};
use crate::config::default_qudit;
use crate::error::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    #[serde(default = "default_qudit")]
    pub qudit: QuditSpec,
    #[serde(default)]
    pub sequence: Vec<SegmentSpec>,
    /// Rows of the count matrix to fill.
    #[serde(default = "ground")]
    pub initial_levels: Vec<usize>,
    #[serde(default)]
    pub cycles: CycleConfig,
}

fn ground() -> Vec<usize> {
    vec![0]
}

pub fn run(cfg: &SampleConfig, out: &mut Outputs) -> Result<Report> {
    validate_qudit(&cfg.qudit)?;
    let n = cfg.qudit.n_levels;
    let mut counts = TransitionCounts::zeros(n);
    for &level in &cfg.initial_levels {
        check_level(level, n, "initial_levels")?;
        // Each row draws from its own seed so rows are independent.
        let row_cfg = CycleConfig {
            seed: cfg.cycles.seed.wrapping_add(level as u64),
            ..cfg.cycles.clone()
        };
        counts.merge(&run_cycles(&cfg.sequence, &cfg.qudit, level, &row_cfg)?);
    }
    out.table("sample_counts", || counts.to_csv(), &counts)?;
    let probs = counts.probability_matrix();
    out.table("sample_probabilities", || counts.probabilities_csv(), &probs)?;
    Ok(Report::ok(json!({
        "accepted": counts.accepted(),
        "attempted": counts.attempted,
        "probabilities": probs,
    })))
}
