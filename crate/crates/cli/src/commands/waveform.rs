use serde::{Deserialize, Serialize};
use serde_json::json;

use qudit_sim::waveform::segment_carriers;
use qudit_sim::{export_waveform, synthesize, AwgConfig, QuditSpec, SegmentSpec, WaveformFormat};

use super::{validate_qudit, Outputs, Report};
use crate::config::default_qudit;
use crate::error::Result;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformConfig {
    #[serde(default = "default_qudit")]
    pub qudit: QuditSpec,
    pub sequence: Vec<SegmentSpec>,
    pub awg: AwgConfig,
    #[serde(default = "raw")]
    pub output_format: WaveformFormat,
}

fn raw() -> WaveformFormat {
    WaveformFormat::F32le
}

pub fn run(cfg: &WaveformConfig, out: &mut Outputs) -> Result<Report> {
    validate_qudit(&cfg.qudit)?;
    let w = synthesize(&cfg.sequence, &cfg.qudit, &cfg.awg)?;
    let name = match cfg.output_format {
        WaveformFormat::Csv => "waveform.csv",
        WaveformFormat::F32le => "waveform.f32",
    };
    let path = out.claim(name);
    export_waveform(&w, &path, cfg.output_format)?;
    let segments = cfg
        .sequence
        .iter()
        .map(|seg| {
            Ok(json!({
                "duration_ns": seg.duration_ns,
                "carriers": segment_carriers(seg, &cfg.qudit, &cfg.awg)?,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Report::ok(json!({
        "sample_rate_gsps": cfg.awg.sample_rate_gsps,
        "kappa_mhz_per_unit": cfg.awg.kappa_mhz_per_unit,
        "samples": w.len(),
        "duration_ns": w.duration_ns,
        "peak": w.peak(),
        "segments": segments,
    })))
}
