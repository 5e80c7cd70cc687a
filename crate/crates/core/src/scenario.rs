//! Scenario documents: one TOML file binding curves, SINR sources, traffic,
//! timing, the service profile and QoE coefficients.
//!
//! ```toml
//! [general]
//! name = "video_call"
//! harq_mode = "paper_verbatim"      # or "cumulative_product"
//!
//! [phy.uplink]
//! curve_file = "ul_curves.csv"      # relative to the scenario file
//! # or: synth = { mid_sinr_db = 5.0, slope = 1.0, peak_throughput_bps = 2e7 }
//! overhead = 0.95
//! combining = "geometric"           # or "gain_db" with gain_db_per_retx
//!
//! [sinr.uplink]
//! kind = "constant"
//! sinr_db = 15.0
//! # or: kind = "trace", trace_file = "ul_sinr.csv", at_time_s = 2.0
//!
//! [queue.uplink]
//! arrival_rate = 250.0              # packets/s
//!
//! [timing]                          # seconds
//! t_netwin = 0.05
//!
//! [service]
//! kind = "video_call"
//! packet_len = 8000.0               # bits
//! # ...
//!
//! [qoe.voice]
//! r0 = 93.2
//! ```
//!
//! Every `uplink` section has a matching `downlink` section.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve_models::{
    load_curves, synth_curve, CombiningMode, CurveError, HarqCombining, PhyCurveSet,
};
use crate::environment::{load_trace, EnvError, SinrProvider};
use crate::packet_model::{HarqMode, TimingConfig};
use crate::qoe::QoeModelParams;
use crate::service_quality::{ServiceError, ServiceKind, ServiceProfile};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("scenario syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("{direction} curves: {source}")]
    Curves {
        direction: &'static str,
        source: CurveError,
    },
    #[error("{direction} sinr: {source}")]
    Sinr {
        direction: &'static str,
        source: EnvError,
    },
    #[error("service: {0}")]
    Service(#[from] ServiceError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Directional<S> {
    pub uplink: S,
    pub downlink: S,
}

impl<S: Clone> Directional<S> {
    pub fn both(s: S) -> Self {
        Self {
            uplink: s.clone(),
            downlink: s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneralSection {
    pub name: String,
    #[serde(default)]
    pub harq_mode: HarqMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub mid_sinr_db: f64,
    pub slope: f64,
    pub peak_throughput_bps: f64,
}

fn default_overhead() -> f64 {
    crate::curve_models::DEFAULT_OVERHEAD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthSpec>,
    #[serde(default = "default_overhead")]
    pub overhead: f64,
    #[serde(default)]
    pub combining: CombiningMode,
    #[serde(default)]
    pub gain_db_per_retx: f64,
}

impl CurveSource {
    pub fn synthetic(spec: SynthSpec) -> Self {
        Self {
            label: None,
            curve_file: None,
            synth: Some(spec),
            overhead: default_overhead(),
            combining: CombiningMode::Geometric,
            gain_db_per_retx: 0.0,
        }
    }

    fn resolve(&self, base: &Path) -> Result<PhyCurveSet<f64>, CurveSourceError> {
        let curves = match (&self.curve_file, &self.synth) {
            (Some(file), None) => {
                let path = base.join(file);
                let text = fs::read_to_string(&path).map_err(|source| CurveSourceError::Io {
                    path: path.clone(),
                    source,
                })?;
                load_curves(&text)?.with_label(file.display().to_string())
            }
            (None, Some(s)) => synth_curve(
                s.mid_sinr_db,
                s.slope,
                s.peak_throughput_bps,
                format!(
                    "synth(mid={},slope={},peak={})",
                    s.mid_sinr_db, s.slope, s.peak_throughput_bps
                ),
            )?,
            _ => return Err(CurveSourceError::Ambiguous),
        };
        let combining = HarqCombining {
            mode: self.combining,
            gain_db_per_retx: self.gain_db_per_retx,
        };
        let curves = curves
            .with_overhead(self.overhead)?
            .with_combining(combining)?;
        Ok(match &self.label {
            Some(l) => curves.with_label(l.clone()),
            None => curves,
        })
    }
}

enum CurveSourceError {
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Curve(CurveError),
    Ambiguous,
}

impl From<CurveError> for CurveSourceError {
    fn from(e: CurveError) -> Self {
        CurveSourceError::Curve(e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum SinrSource {
    Constant {
        sinr_db: f64,
    },
    Trace {
        trace_file: PathBuf,
        #[serde(default)]
        at_time_s: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueueSection {
    /// Packet arrival rate in packets/s.
    pub arrival_rate: f64,
}

/// Timing entries of a scenario; the receive window and HARQ limit come from
/// the service profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingSection {
    pub t_protocolproc: f64,
    pub t_sigproc: f64,
    pub n_uu: u32,
    pub t_uu: f64,
    pub t_netrelay: f64,
    pub n_ho: u32,
    pub t_ho: f64,
    pub t_netwin: f64,
}

impl Default for TimingSection {
    fn default() -> Self {
        let t = TimingConfig::<f64>::with_service(0.0, 1);
        Self {
            t_protocolproc: t.t_protocolproc,
            t_sigproc: t.t_sigproc,
            n_uu: t.n_uu,
            t_uu: t.t_uu,
            t_netrelay: t.t_netrelay,
            n_ho: t.n_ho,
            t_ho: t.t_ho,
            t_netwin: t.t_netwin,
        }
    }
}

/// The scenario file as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub general: GeneralSection,
    pub phy: Directional<CurveSource>,
    pub sinr: Directional<SinrSource>,
    pub queue: Directional<QueueSection>,
    #[serde(default)]
    pub timing: TimingSection,
    pub service: ServiceProfile<f64>,
    #[serde(default)]
    pub qoe: QoeModelParams<f64>,
}

impl ScenarioDoc {
    /// Bundled defaults for a service: table timing and service values,
    /// logistic curves (mid 5 dB, slope 1/dB, 20 Mbit/s peak) in both
    /// directions, constant 15 dB SINR, and the service's nominal packet rate.
    pub fn preset(kind: ServiceKind) -> Self {
        let service = ServiceProfile::<f64>::preset(kind);
        let arrival_rate = service.bitrate / service.packet_len;
        let synth = SynthSpec {
            mid_sinr_db: 5.0,
            slope: 1.0,
            peak_throughput_bps: 2e7,
        };
        Self {
            general: GeneralSection {
                name: kind.name().to_string(),
                harq_mode: HarqMode::PaperVerbatim,
            },
            phy: Directional::both(CurveSource::synthetic(synth)),
            sinr: Directional::both(SinrSource::Constant { sinr_db: 15.0 }),
            queue: Directional::both(QueueSection { arrival_rate }),
            timing: TimingSection::default(),
            service,
            qoe: QoeModelParams::default(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario documents serialize to TOML")
    }

    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        Ok(toml::from_str(text)?)
    }

    /// Loads referenced files relative to `base` and validates everything.
    pub fn resolve(&self, base: &Path) -> Result<Scenario, ScenarioError> {
        self.service.validate()?;
        let curves = |direction: &'static str, src: &CurveSource| {
            src.resolve(base).map_err(|e| match e {
                CurveSourceError::Io { path, source } => ScenarioError::Io { path, source },
                CurveSourceError::Curve(source) => ScenarioError::Curves { direction, source },
                CurveSourceError::Ambiguous => ScenarioError::Invalid(format!(
                    "phy.{direction}: set exactly one of curve_file or synth"
                )),
            })
        };
        let sinr = |direction: &'static str,
                    src: &SinrSource|
         -> Result<(SinrProvider<f64>, f64), ScenarioError> {
            match src {
                SinrSource::Constant { sinr_db } => {
                    let p = SinrProvider::constant(*sinr_db);
                    p.validate()
                        .map_err(|source| ScenarioError::Sinr { direction, source })?;
                    Ok((p, 0.0))
                }
                SinrSource::Trace {
                    trace_file,
                    at_time_s,
                } => {
                    let path = base.join(trace_file);
                    let text = fs::read_to_string(&path)
                        .map_err(|source| ScenarioError::Io { path, source })?;
                    let p = load_trace(&text)
                        .map_err(|source| ScenarioError::Sinr { direction, source })?;
                    if !(*at_time_s >= 0.0) {
                        return Err(ScenarioError::Invalid(format!(
                            "sinr.{direction}.at_time_s must be >= 0"
                        )));
                    }
                    Ok((p, *at_time_s))
                }
            }
        };
        for (direction, q) in [
            ("uplink", &self.queue.uplink),
            ("downlink", &self.queue.downlink),
        ] {
            if !(q.arrival_rate >= 0.0) || !q.arrival_rate.is_finite() {
                return Err(ScenarioError::Invalid(format!(
                    "queue.{direction}.arrival_rate must be >= 0, got {}",
                    q.arrival_rate
                )));
            }
        }
        let t = &self.timing;
        let timing = TimingConfig {
            t_protocolproc: t.t_protocolproc,
            t_sigproc: t.t_sigproc,
            n_uu: t.n_uu,
            t_uu: t.t_uu,
            t_netrelay: t.t_netrelay,
            n_ho: t.n_ho,
            t_ho: t.t_ho,
            t_netwin: t.t_netwin,
            t_rxwin: self.service.rx_window,
            n_harq_max: self.service.n_harq_max,
        };
        timing
            .validate()
            .map_err(|e| ScenarioError::Invalid(format!("timing: {e}")))?;
        let (ul_sinr, ul_time) = sinr("uplink", &self.sinr.uplink)?;
        let (dl_sinr, dl_time) = sinr("downlink", &self.sinr.downlink)?;
        Ok(Scenario {
            name: self.general.name.clone(),
            harq_mode: self.general.harq_mode,
            ul_curves: curves("uplink", &self.phy.uplink)?,
            dl_curves: curves("downlink", &self.phy.downlink)?,
            ul_sinr,
            dl_sinr,
            ul_time,
            dl_time,
            ul_arrival_rate: self.queue.uplink.arrival_rate,
            dl_arrival_rate: self.queue.downlink.arrival_rate,
            timing,
            service: self.service.clone(),
            qoe_params: self.qoe,
        })
    }
}

/// A fully resolved, validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub harq_mode: HarqMode,
    pub ul_curves: PhyCurveSet<f64>,
    pub dl_curves: PhyCurveSet<f64>,
    pub ul_sinr: SinrProvider<f64>,
    pub dl_sinr: SinrProvider<f64>,
    /// Instants at which the SINR sources are read.
    pub ul_time: f64,
    pub dl_time: f64,
    pub ul_arrival_rate: f64,
    pub dl_arrival_rate: f64,
    pub timing: TimingConfig<f64>,
    pub service: ServiceProfile<f64>,
    pub qoe_params: QoeModelParams<f64>,
}

impl Scenario {
    pub fn preset(kind: ServiceKind) -> Self {
        ScenarioDoc::preset(kind)
            .resolve(Path::new("."))
            .expect("bundled presets are valid")
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        ScenarioDoc::from_toml(&text)?.resolve(base)
    }
}
