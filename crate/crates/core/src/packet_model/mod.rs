//! Packet layer: buffer queueing, HARQ delay, and the end-to-end loss model.
//!
//! One direction (uplink or downlink) is evaluated by [`evaluate_link`];
//! the two directions plus the core network are assembled by
//! [`e2e_delay`] and [`LossBreakdown::from_links`].

mod delay;
mod harq;
mod loss;
mod queue;

pub use delay::{
    cn_delay, e2e_delay, harq_delay, link_delay, single_tx_time, DelayBudget, LinkDelay,
    TimingConfig,
};
pub use harq::{expected_transmissions, residual_phy_loss, HarqMode};
pub use loss::{
    combine_loss, link_loss, nested_expansion, network_loss, window_loss, LinkLoss, LossBreakdown,
};
pub use queue::{queue_steady_state, QueueConfig, QueueMetrics};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve_models::{CurveError, PhyCurveSet};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PacketError {
    #[error("queue_steady_state: load rho = {rho} exceeds 1, no steady state")]
    Unstable { rho: f64 },
    #[error("invalid queue: {0}")]
    InvalidQueue(String),
    #[error("invalid timing: {0}")]
    InvalidTiming(String),
    #[error("HARQ transmission limit must be >= 1, got {0}")]
    InvalidHarqMax(usize),
    #[error("BLER sequence too short: need {need}, got {got}")]
    InsufficientBlerSequence { need: usize, got: usize },
    #[error("probability out of range at index {index}: {value}")]
    ProbabilityOutOfRange { index: usize, value: f64 },
    #[error("expected transmissions must be >= 1, got {0}")]
    TransmissionsBelowOne(f64),
    #[error("window_loss: effective service rate {mu_e}/s must exceed effective arrival rate {lambda_e}/s")]
    WindowLossUndefined { mu_e: f64, lambda_e: f64 },
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// All packet-layer quantities for one radio direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkEvaluation<T> {
    pub sinr_db: T,
    pub bler_seq: Vec<T>,
    pub queue: QueueMetrics<T>,
    pub delay: LinkDelay<T>,
    pub loss: LinkLoss<T>,
}

/// Runs queue -> HARQ count -> HARQ delay -> residual loss -> window loss ->
/// link loss for one direction at a fixed SINR.
pub fn evaluate_link<T: Scalar>(
    curves: &PhyCurveSet<T>,
    sinr_db: T,
    queue: &QueueConfig<T>,
    timing: &TimingConfig<T>,
    mode: HarqMode,
) -> Result<LinkEvaluation<T>, PacketError> {
    timing.validate()?;
    let metrics = queue_steady_state(queue)?;
    let n_max = timing.n_harq_max;
    let bler_seq = curves.retx_bler_sequence(sinr_db, n_max);
    let e_n_retr = expected_transmissions(&bler_seq, n_max, mode)?;
    let delay = link_delay(e_n_retr, metrics.w_avg, timing)?;
    let p_e = residual_phy_loss(&bler_seq, n_max)?;
    let p_window = window_loss(metrics.mu_e, metrics.lambda_e, timing.t_rxwin)?;
    let loss = LinkLoss {
        p_to: metrics.p_block,
        p_e,
        p_window,
        p_link: link_loss(p_e, p_window),
    };
    Ok(LinkEvaluation {
        sinr_db,
        bler_seq,
        queue: metrics,
        delay,
        loss,
    })
}
