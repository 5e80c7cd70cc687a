//! Experience quality layer: service indicators to a MOS in `[1, 5]`.
//!
//! Three parametric models, all with explicit, overridable coefficients:
//! an E-model style rating for voice, a bitrate/stall model for video, and a
//! delay/loss model for mobile games.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{is_probability, Scalar};
use crate::service_quality::{ServiceKind, ServiceQualityIndicators};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QoeError {
    #[error("loss probability out of range: {0}")]
    LossOutOfRange(f64),
    #[error("delay must be >= 0 s, got {0}")]
    NegativeDelay(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MosScore<T> {
    pub value: T,
    pub service_kind: ServiceKind,
}

impl<T: Scalar> MosScore<T> {
    fn clamped(value: T, service_kind: ServiceKind) -> Self {
        Self {
            value: value.max(T::one()).min(T::lit(5.0)),
            service_kind,
        }
    }
}

/// `R = r0 - I_delay - I_loss` with
/// `I_delay = a * max(0, d_ms - 177.3) + b * d_ms` and
/// `I_loss = c * ln(1 + d * loss_pct)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    deny_unknown_fields,
    bound(deserialize = "T: Scalar + Deserialize<'de>")
)]
pub struct VoiceParams<T> {
    pub r0: T,
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Scalar> Default for VoiceParams<T> {
    fn default() -> Self {
        Self {
            r0: T::lit(93.2),
            a: T::lit(0.11),
            b: T::lit(0.024),
            c: T::lit(11.0),
            d: T::lit(10.0),
        }
    }
}

/// `base - alpha * T_k / T_segment - beta * N_k - gamma * T_initial`, where
/// `base = 1 + 4 * (1 - exp(-bitrate / b0))` and
/// `b0 = bits_per_pixel * R_h * R_v * framerate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    deny_unknown_fields,
    bound(deserialize = "T: Scalar + Deserialize<'de>")
)]
pub struct VideoParams<T> {
    pub bits_per_pixel: T,
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
}

impl<T: Scalar> Default for VideoParams<T> {
    fn default() -> Self {
        Self {
            bits_per_pixel: T::lit(0.05),
            alpha: T::lit(4.0),
            beta: T::lit(0.2),
            gamma: T::lit(0.3),
        }
    }
}

impl<T: Scalar> VideoParams<T> {
    pub fn bitrate_scale(&self, framerate: T, definition: (u32, u32)) -> T {
        let pixels = T::from_count(definition.0 as usize) * T::from_count(definition.1 as usize);
        self.bits_per_pixel * pixels * framerate
    }
}

/// `5 - p * ln(1 + q * delay_ms) - r * loss_pct`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    deny_unknown_fields,
    bound(deserialize = "T: Scalar + Deserialize<'de>")
)]
pub struct GameParams<T> {
    pub p: T,
    pub q: T,
    pub r: T,
}

impl<T: Scalar> Default for GameParams<T> {
    fn default() -> Self {
        Self {
            p: T::lit(0.5),
            q: T::lit(0.1),
            r: T::lit(0.1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    default,
    deny_unknown_fields,
    bound(deserialize = "T: Scalar + Deserialize<'de>")
)]
pub struct QoeModelParams<T> {
    pub voice: VoiceParams<T>,
    pub video: VideoParams<T>,
    pub game: GameParams<T>,
}

impl<T: Scalar> Default for QoeModelParams<T> {
    fn default() -> Self {
        Self {
            voice: VoiceParams::default(),
            video: VideoParams::default(),
            game: GameParams::default(),
        }
    }
}

/// Transmission rating factor of the voice model.
pub fn voice_rating<T: Scalar>(loss: T, delay: T, params: &VoiceParams<T>) -> T {
    let delay_ms = delay * T::lit(1e3);
    let loss_pct = loss * T::lit(100.0);
    let i_delay = params.a * (delay_ms - T::lit(177.3)).max(T::zero()) + params.b * delay_ms;
    let i_loss = params.c * (T::one() + params.d * loss_pct).ln();
    params.r0 - i_delay - i_loss
}

/// Standard R-to-MOS conversion.
pub fn rating_to_mos<T: Scalar>(r: T) -> T {
    if r <= T::zero() {
        T::one()
    } else if r >= T::lit(100.0) {
        T::lit(4.5)
    } else {
        T::one() + T::lit(0.035) * r + T::lit(7e-6) * r * (r - T::lit(60.0)) * (T::lit(100.0) - r)
    }
}

pub fn mos_voice<T: Scalar>(
    loss: T,
    delay: T,
    params: &VoiceParams<T>,
) -> Result<MosScore<T>, QoeError> {
    if !is_probability(loss) {
        return Err(QoeError::LossOutOfRange(loss.to_f64_lossy()));
    }
    if !(delay >= T::zero()) {
        return Err(QoeError::NegativeDelay(delay.to_f64_lossy()));
    }
    let r = voice_rating(loss, delay, params);
    Ok(MosScore::clamped(rating_to_mos(r), ServiceKind::VoiceCall))
}

pub fn mos_video<T: Scalar>(
    ind: &ServiceQualityIndicators<T>,
    params: &VideoParams<T>,
) -> MosScore<T> {
    let base = if ind.bitrate > T::zero() {
        let scale = params.bitrate_scale(ind.framerate, ind.definition);
        T::one() + T::lit(4.0) * (T::one() - (-ind.bitrate / scale).exp())
    } else {
        T::one()
    };
    let stall_fraction = if ind.segment_duration > T::zero() {
        ind.stall_duration / ind.segment_duration
    } else {
        T::zero()
    };
    let value = base
        - params.alpha * stall_fraction
        - params.beta * ind.stall_events
        - params.gamma * ind.initial_buffering;
    let kind = if ind.kind.is_video() {
        ind.kind
    } else {
        ServiceKind::VideoCall
    };
    MosScore::clamped(value, kind)
}

pub fn mos_game<T: Scalar>(loss: T, delay: T, params: &GameParams<T>) -> MosScore<T> {
    let delay_ms = delay * T::lit(1e3);
    let loss_pct = loss * T::lit(100.0);
    let value =
        T::lit(5.0) - params.p * (T::one() + params.q * delay_ms).ln() - params.r * loss_pct;
    MosScore::clamped(value, ServiceKind::MobileGame)
}

/// Routes indicators to the model of their service kind.
pub fn mos<T: Scalar>(
    ind: &ServiceQualityIndicators<T>,
    params: &QoeModelParams<T>,
) -> Result<MosScore<T>, QoeError> {
    match ind.kind {
        ServiceKind::VoiceCall => mos_voice(ind.loss, ind.delay, &params.voice),
        ServiceKind::MobileGame => Ok(mos_game(ind.loss, ind.delay, &params.game)),
        ServiceKind::VideoCall | ServiceKind::BufferedVideo => Ok(mos_video(ind, &params.video)),
    }
}
