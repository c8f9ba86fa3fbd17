use serde::{Deserialize, Serialize};
use serde_json::json;

use qudit_sim::format::f12;
use qudit_sim::{population_trace, DriveTone, QuditSpec, SegmentSpec, StateVector};

use super::{check_level, validate_qudit, Outputs, Report};
use crate::config::{default_qudit, Grid, TimeGrid};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RabiConfig {
    #[serde(default = "default_qudit")]
    pub qudit: QuditSpec,
    /// 1-based transition index.
    pub transition: usize,
    pub rabi_mhz: f64,
    #[serde(default)]
    pub detuning_mhz: f64,
    #[serde(default)]
    pub phase_rad: f64,
    /// Defaults to the lower level of the driven transition.
    #[serde(default)]
    pub initial_level: Option<usize>,
    pub t_grid: TimeGrid,
    #[serde(default)]
    pub detuning_grid_mhz: Option<Grid>,
    #[serde(default)]
    pub amplitude_grid: Option<Grid>,
    #[serde(default)]
    pub kappa_mhz_per_unit: Option<f64>,
}

#[derive(Serialize)]
struct DetuningRow {
    detuning_mhz: f64,
    t_ns: f64,
    p_transfer: f64,
    visibility: f64,
}

#[derive(Serialize)]
struct ResonanceRow {
    detuning_mhz: f64,
    max_transfer: f64,
    t_at_max_ns: f64,
}

#[derive(Serialize)]
struct PowerRow {
    amplitude: f64,
    rabi_mhz: f64,
    t_ns: f64,
    p_transfer: f64,
}

struct Drive<'a> {
    cfg: &'a RabiConfig,
    times: Vec<f64>,
    from: usize,
    to: usize,
}

impl Drive<'_> {
    /// `P(from → to)` and `P(to → from)` on the time grid.
    fn transfer(&self, rabi_mhz: f64, detuning_mhz: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let seg = SegmentSpec::new(
            vec![DriveTone::new(self.cfg.transition, rabi_mhz, detuning_mhz).with_phase(self.cfg.phase_rad)],
            0.0,
        );
        let n = self.cfg.qudit.n_levels;
        let fwd = population_trace(&seg, &self.cfg.qudit, &StateVector::basis(n, self.from)?, &self.times)?;
        let back = population_trace(&seg, &self.cfg.qudit, &StateVector::basis(n, self.to)?, &self.times)?;
        Ok((fwd.level(self.to), back.level(self.from)))
    }
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len())
        .max_by(|a, b| v[*a].total_cmp(&v[*b]).then(b.cmp(a)))
        .unwrap_or(0)
}

pub fn run(cfg: &RabiConfig, out: &mut Outputs) -> Result<Report> {
    validate_qudit(&cfg.qudit)?;
    let n = cfg.qudit.n_levels;
    if cfg.transition == 0 || cfg.transition >= n {
        return Err(CliError::config(format!(
            "transition = {} must lie in 1..={} for a {n}-level qudit",
            cfg.transition,
            n - 1
        )));
    }
    let lower = cfg.transition - 1;
    let initial = cfg.initial_level.unwrap_or(lower);
    check_level(initial, n, "initial_level")?;
    // The partner level of the transition that starts empty.
    let partner = if initial == lower { cfg.transition } else { lower };
    let times = cfg.t_grid.values()?;

    let seg = SegmentSpec::new(
        vec![DriveTone::new(cfg.transition, cfg.rabi_mhz, cfg.detuning_mhz).with_phase(cfg.phase_rad)],
        0.0,
    );
    let trace = population_trace(&seg, &cfg.qudit, &StateVector::basis(n, initial)?, &times)?;
    out.table("rabi_trace", || trace.to_csv(), &trace)?;
    let transfer = trace.level(partner);
    let peak = argmax(&transfer);
    let mut summary = json!({
        "initial_level": initial,
        "partner_level": partner,
        "peak_transfer": transfer[peak],
        "peak_time_ns": times[peak],
    });

    let drive = Drive {
        cfg,
        times: times.clone(),
        from: initial,
        to: partner,
    };

    if let Some(grid) = &cfg.detuning_grid_mhz {
        let detunings = grid.values("detuning_grid_mhz")?;
        let mut rows = Vec::new();
        let mut resonance = Vec::new();
        for &d in &detunings {
            let (fwd, back) = drive.transfer(cfg.rabi_mhz, d)?;
            let k = argmax(&fwd);
            resonance.push(ResonanceRow {
                detuning_mhz: d,
                max_transfer: fwd[k],
                t_at_max_ns: times[k],
            });
            for (i, &t) in times.iter().enumerate() {
                rows.push(DetuningRow {
                    detuning_mhz: d,
                    t_ns: t,
                    p_transfer: fwd[i],
                    visibility: fwd[i] + back[i],
                });
            }
        }
        out.table(
            "rabi_detuning",
            || {
                let mut s = String::from("detuning_mhz,t_ns,p_transfer,visibility\n");
                for r in &rows {
                    s += &format!(
                        "{},{},{},{}\n",
                        f12(r.detuning_mhz),
                        f12(r.t_ns),
                        f12(r.p_transfer),
                        f12(r.visibility)
                    );
                }
                s
            },
            &rows,
        )?;
        out.table(
            "rabi_resonance",
            || {
                let mut s = String::from("detuning_mhz,max_transfer,t_at_max_ns\n");
                for r in &resonance {
                    s += &format!(
                        "{},{},{}\n",
                        f12(r.detuning_mhz),
                        f12(r.max_transfer),
                        f12(r.t_at_max_ns)
                    );
                }
                s
            },
            &resonance,
        )?;
        let best = argmax(&resonance.iter().map(|r| r.max_transfer).collect::<Vec<_>>());
        summary["resonance_detuning_mhz"] = json!(resonance[best].detuning_mhz);
    }

    if let Some(grid) = &cfg.amplitude_grid {
        let kappa = cfg
            .kappa_mhz_per_unit
            .ok_or_else(|| CliError::config("amplitude_grid requires kappa_mhz_per_unit"))?;
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(CliError::config("kappa_mhz_per_unit must be positive"));
        }
        let mut rows = Vec::new();
        for a in grid.values("amplitude_grid")? {
            if a < 0.0 {
                return Err(CliError::config("amplitude_grid values must be non-negative"));
            }
            let (fwd, _) = drive.transfer(kappa * a, cfg.detuning_mhz)?;
            for (i, &t) in times.iter().enumerate() {
                rows.push(PowerRow {
                    amplitude: a,
                    rabi_mhz: kappa * a,
                    t_ns: t,
                    p_transfer: fwd[i],
                });
            }
        }
        out.table(
            "rabi_power",
            || {
                let mut s = String::from("amplitude,rabi_mhz,t_ns,p_transfer\n");
                for r in &rows {
                    s += &format!(
                        "{},{},{},{}\n",
                        f12(r.amplitude),
                        f12(r.rabi_mhz),
                        f12(r.t_ns),
                        f12(r.p_transfer)
                    );
                }
                s
            },
            &rows,
        )?;
    }
    Ok(Report::ok(summary))
}
