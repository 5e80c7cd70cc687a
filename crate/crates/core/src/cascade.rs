//! The full five-layer evaluation and SINR sweeps built on it.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve_models::{CurveError, PhyCurveSet};
use crate::environment::{service_rate, EnvError};
use crate::packet_model::{
    e2e_delay, evaluate_link, network_loss, DelayBudget, HarqMode, LinkEvaluation, LossBreakdown,
    PacketError, QueueConfig,
};
use crate::qoe::{mos, MosScore, QoeError};
use crate::scenario::Scenario;
use crate::service_quality::{indicators, ServiceError, ServiceKind, ServiceQualityIndicators};

/// Evaluation failure, prefixed with the layer it came from.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("environment ({direction}): {source}")]
    Environment {
        direction: &'static str,
        source: EnvError,
    },
    #[error("curve_models ({direction}): {source}")]
    Curves {
        direction: &'static str,
        source: CurveError,
    },
    #[error("packet_model ({direction}): {source}")]
    Packet {
        direction: &'static str,
        source: PacketError,
    },
    #[error("service_quality: {0}")]
    ServiceQuality(#[from] ServiceError),
    #[error("qoe: {0}")]
    Qoe(#[from] QoeError),
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep range: min {min}, max {max}, step {step}")]
    InvalidRange { min: f64, max: f64, step: f64 },
    #[error("at {sinr_db} dB: {source}")]
    Point { sinr_db: f64, source: EvalError },
    #[error("writing sweep: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionReport {
    pub curve_label: String,
    pub sinr_db: f64,
    pub bler: f64,
    pub goodput_bps: f64,
    /// Packet service rate `mu` derived from goodput.
    pub service_rate: f64,
    pub arrival_rate: f64,
    pub link: LinkEvaluation<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub scenario: String,
    pub service: ServiceKind,
    pub harq_mode: HarqMode,
    pub uplink: DirectionReport,
    pub downlink: DirectionReport,
    pub delay: DelayBudget<f64>,
    pub loss: LossBreakdown<f64>,
    pub indicators: ServiceQualityIndicators<f64>,
    pub mos: MosScore<f64>,
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize to JSON")
    }
}

fn evaluate_direction(
    direction: &'static str,
    curves: &PhyCurveSet<f64>,
    sinr_db: f64,
    arrival_rate: f64,
    scenario: &Scenario,
) -> Result<DirectionReport, EvalError> {
    let goodput = curves.goodput_at(sinr_db);
    let mu = service_rate(goodput, scenario.service.packet_len)
        .map_err(|source| EvalError::Environment { direction, source })?;
    let queue = QueueConfig::new(arrival_rate, mu, scenario.service.queue_k)
        .map_err(|source| EvalError::Packet { direction, source })?;
    let link = evaluate_link(
        curves,
        sinr_db,
        &queue,
        &scenario.timing,
        scenario.harq_mode,
    )
    .map_err(|source| match source {
        PacketError::Curve(source) => EvalError::Curves { direction, source },
        source => EvalError::Packet { direction, source },
    })?;
    Ok(DirectionReport {
        curve_label: curves.label().to_string(),
        sinr_db,
        bler: curves.bler_at(sinr_db),
        goodput_bps: goodput,
        service_rate: mu,
        arrival_rate,
        link,
    })
}

/// Runs the cascade with explicit per-direction SINR values.
pub fn evaluate_at(
    scenario: &Scenario,
    ul_sinr_db: f64,
    dl_sinr_db: f64,
) -> Result<EvaluationReport, EvalError> {
    let uplink = evaluate_direction(
        "uplink",
        &scenario.ul_curves,
        ul_sinr_db,
        scenario.ul_arrival_rate,
        scenario,
    )?;
    let downlink = evaluate_direction(
        "downlink",
        &scenario.dl_curves,
        dl_sinr_db,
        scenario.dl_arrival_rate,
        scenario,
    )?;
    let delay = e2e_delay(uplink.link.delay, downlink.link.delay, &scenario.timing);
    let p_npl = network_loss(delay.t_cn, &scenario.timing);
    let loss = LossBreakdown::from_links(&uplink.link.loss, p_npl, &downlink.link.loss);
    let indicators = indicators(&scenario.service, &loss, &delay)?;
    let mos = mos(&indicators, &scenario.qoe_params)?;
    Ok(EvaluationReport {
        scenario: scenario.name.clone(),
        service: scenario.service.kind,
        harq_mode: scenario.harq_mode,
        uplink,
        downlink,
        delay,
        loss,
        indicators,
        mos,
    })
}

/// Runs the cascade at the scenario's own SINR operating points.
pub fn evaluate(scenario: &Scenario) -> Result<EvaluationReport, EvalError> {
    let ul = scenario.ul_sinr.sinr_at(scenario.ul_time);
    let dl = scenario.dl_sinr.sinr_at(scenario.dl_time);
    evaluate_at(scenario, ul, dl)
}

/// One sweep point. `bler` and `goodput_bps` describe the uplink.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sinr_db: f64,
    pub bler: f64,
    pub goodput_bps: f64,
    pub p_all_exact: f64,
    pub p_all_approx: f64,
    pub t_all_s: f64,
    pub mos: f64,
}

impl From<&EvaluationReport> for SweepRow {
    fn from(r: &EvaluationReport) -> Self {
        Self {
            sinr_db: r.uplink.sinr_db,
            bler: r.uplink.bler,
            goodput_bps: r.uplink.goodput_bps,
            p_all_exact: r.loss.p_all_exact,
            p_all_approx: r.loss.p_all_approx,
            t_all_s: r.delay.t_all,
            mos: r.mos.value,
        }
    }
}

/// `floor((max - min) / step) + 1` points starting at `min`.
pub fn sweep_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>, SweepError> {
    if !(min.is_finite() && max.is_finite() && step.is_finite()) || min > max || !(step > 0.0) {
        return Err(SweepError::InvalidRange { min, max, step });
    }
    // absorb representation error so 0..1 step 0.1 yields 11 points
    let n = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| min + i as f64 * step).collect())
}

/// Evaluates every grid point with the same SINR in both directions.
/// Points run in parallel; rows come back in grid order.
pub fn sweep(
    scenario: &Scenario,
    min: f64,
    max: f64,
    step: f64,
) -> Result<Vec<SweepRow>, SweepError> {
    sweep_grid(min, max, step)?
        .into_par_iter()
        .map(|s| {
            evaluate_at(scenario, s, s)
                .map(|r| SweepRow::from(&r))
                .map_err(|source| SweepError::Point { sinr_db: s, source })
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), SweepError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_sweep_csv(text: &str) -> Result<Vec<SweepRow>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve_models::HarqCombining;

    #[test]
    fn grid_arithmetic() {
        assert_eq!(sweep_grid(3.0, 3.0, 1.0).unwrap(), vec![3.0]);
        assert_eq!(sweep_grid(0.0, 10.0, 1.0).unwrap().len(), 11);
        assert_eq!(sweep_grid(0.0, 1.0, 0.1).unwrap().len(), 11);
        assert_eq!(
            sweep_grid(0.0, 10.0, 3.0).unwrap(),
            vec![0.0, 3.0, 6.0, 9.0]
        );
        assert!(sweep_grid(1.0, 0.0, 1.0).is_err());
        assert!(sweep_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn perfect_channel_video_call() {
        let mut s = Scenario::preset(ServiceKind::VideoCall);
        let clean = PhyCurveSet::new(
            "clean",
            vec![0.0, 30.0],
            vec![0.0, 0.0],
            vec![1e8, 1e8],
            0.95,
            HarqCombining::geometric(),
        )
        .unwrap();
        s.ul_curves = clean.clone();
        s.dl_curves = clean;
        s.ul_arrival_rate = 1.0;
        s.dl_arrival_rate = 1.0;
        let r = evaluate(&s).unwrap();
        assert_eq!(r.uplink.link.loss.p_e, 0.0);
        assert_eq!(r.uplink.link.delay.e_n_retr, 1.0);
        assert!(r.loss.p_all_exact < 1e-60, "{:#?}", r.loss);
        assert_eq!(r.loss.p_ul, r.uplink.link.loss.p_window);
        assert!(r.mos.value > 4.2);
    }

    #[test]
    fn errors_name_their_layer() {
        let mut s = Scenario::preset(ServiceKind::VoiceCall);
        s.ul_curves = PhyCurveSet::new(
            "dead",
            vec![0.0, 1.0],
            vec![1.0, 1.0],
            vec![0.0, 0.0],
            1.0,
            HarqCombining::geometric(),
        )
        .unwrap();
        let err = evaluate(&s).unwrap_err();
        assert!(
            err.to_string().starts_with("packet_model (uplink)"),
            "{err}"
        );

        let mut s = Scenario::preset(ServiceKind::VoiceCall);
        s.dl_arrival_rate = 1e9;
        let err = evaluate(&s).unwrap_err();
        assert!(matches!(
            err,
            EvalError::Packet {
                direction: "downlink",
                source: PacketError::Unstable { .. }
            }
        ));
    }

    #[test]
    fn sweep_rows_in_grid_order() {
        let s = Scenario::preset(ServiceKind::MobileGame);
        let rows = sweep(&s, 10.0, 20.0, 0.5).unwrap();
        assert_eq!(rows.len(), 21);
        assert!(rows.windows(2).all(|w| w[0].sinr_db < w[1].sinr_db));
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("sinr_db,bler,goodput_bps,p_all_exact,p_all_approx,t_all_s,mos\n"));
        assert_eq!(read_sweep_csv(&text).unwrap(), rows);
    }
}
