//! PHY-to-QoE evaluation engine.
//!
//! Maps a physical-layer operating point through five cascaded layers:
//!
//! 1. [`environment`]: SINR operating point and packet service rate
//! 2. [`curve_models`]: BLER and throughput at that SINR
//! 3. [`packet_model`]: M/M/1/K buffering, HARQ delay, end-to-end loss
//! 4. [`service_quality`]: frame errors and stalls for video, pass-through otherwise
//! 5. [`qoe`]: MOS per service
//!
//! The analytic layers are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix them to `f64`, the precision used by scenarios, the
//! simulation oracle and the CLI. [`oracle_sim`] checks the packet-layer
//! closed forms by simulation.

// NaN must fail validation, so range checks are written as `!(x >= lo)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cascade;
pub mod curve_models;
pub mod environment;
pub mod oracle_sim;
pub mod packet_model;
pub mod qoe;
pub mod scalar;
pub mod scenario;
pub mod service_quality;
pub mod validation;

pub use scalar::Scalar;

pub type PhyCurveSet = curve_models::PhyCurveSet<f64>;
pub type PhyCurveSetF32 = curve_models::PhyCurveSet<f32>;
pub type HarqCombining = curve_models::HarqCombining<f64>;
pub type SinrProvider = environment::SinrProvider<f64>;
pub type QueueConfig = packet_model::QueueConfig<f64>;
pub type QueueConfigF32 = packet_model::QueueConfig<f32>;
pub type QueueMetrics = packet_model::QueueMetrics<f64>;
pub type QueueMetricsF32 = packet_model::QueueMetrics<f32>;
pub type TimingConfig = packet_model::TimingConfig<f64>;
pub type TimingConfigF32 = packet_model::TimingConfig<f32>;
pub type DelayBudget = packet_model::DelayBudget<f64>;
pub type LossBreakdown = packet_model::LossBreakdown<f64>;
pub type LossBreakdownF32 = packet_model::LossBreakdown<f32>;
pub type ServiceProfile = service_quality::ServiceProfile<f64>;
pub type ServiceQualityIndicators = service_quality::ServiceQualityIndicators<f64>;
pub type QoeModelParams = qoe::QoeModelParams<f64>;
pub type MosScore = qoe::MosScore<f64>;
