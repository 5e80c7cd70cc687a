//! Service quality layer: packet loss and delay to per-service indicators.
//!
//! Video services get frame-level stall indicators; voice and game pass loss
//! and delay through unchanged.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::packet_model::{DelayBudget, LossBreakdown};
use crate::scalar::{is_probability, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ServiceError {
    #[error("{op} requires a video service, got {kind}")]
    NotVideo { op: &'static str, kind: ServiceKind },
    #[error("invalid service profile: {0}")]
    InvalidProfile(String),
    #[error("frame lists differ in length: {probs} probabilities, {durations} durations")]
    LengthMismatch { probs: usize, durations: usize },
    #[error("frame probability out of range at index {index}: {value}")]
    ProbabilityOutOfRange { index: usize, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServiceKind {
    VideoCall,
    BufferedVideo,
    VoiceCall,
    MobileGame,
}

impl ServiceKind {
    pub const ALL: [ServiceKind; 4] = [
        ServiceKind::VideoCall,
        ServiceKind::BufferedVideo,
        ServiceKind::VoiceCall,
        ServiceKind::MobileGame,
    ];

    pub fn is_video(self) -> bool {
        matches!(self, ServiceKind::VideoCall | ServiceKind::BufferedVideo)
    }

    pub fn name(self) -> &'static str {
        match self {
            ServiceKind::VideoCall => "video_call",
            ServiceKind::BufferedVideo => "buffered_video",
            ServiceKind::VoiceCall => "voice_call",
            ServiceKind::MobileGame => "mobile_game",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for ServiceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-service parameters. Lengths in bits, times in seconds, rates per second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceProfile<T> {
    pub kind: ServiceKind,
    pub packet_len: T,
    pub rx_window: T,
    pub queue_k: usize,
    pub n_harq_max: usize,
    pub bitrate: T,
    pub framerate: T,
    /// Horizontal x vertical resolution in pixels.
    pub definition: (u32, u32),
    /// Explicit frame durations of one segment; uniform `1/framerate` over
    /// `segment_duration` when absent.
    #[serde(default)]
    pub frame_durations: Option<Vec<T>>,
    pub segment_duration: T,
    pub initial_buffering: T,
}

impl<T: Scalar> ServiceProfile<T> {
    /// Table values for packet length, receive window, buffer size and HARQ
    /// limit, with representative media settings.
    pub fn preset(kind: ServiceKind) -> Self {
        let bytes = |b: f64| T::lit(b * 8.0);
        let (packet_len, rx_window, queue_k, n_harq_max) = match kind {
            ServiceKind::VideoCall => (bytes(1000.0), T::lit(0.3), 16, 4),
            ServiceKind::BufferedVideo => (bytes(1000.0), T::lit(1.0), 16, 4),
            ServiceKind::VoiceCall => (bytes(123.0), T::lit(0.15), 10, 8),
            ServiceKind::MobileGame => (bytes(150.0), T::lit(0.3), 12, 4),
        };
        let (bitrate, framerate, definition, initial_buffering) = match kind {
            ServiceKind::VideoCall => (T::lit(2e6), T::lit(25.0), (1280, 720), T::zero()),
            ServiceKind::BufferedVideo => (T::lit(4e6), T::lit(30.0), (1920, 1080), T::lit(1.0)),
            // 50 voice frames/s
            ServiceKind::VoiceCall => (packet_len * T::lit(50.0), T::zero(), (0, 0), T::zero()),
            // 60 state updates/s
            ServiceKind::MobileGame => (packet_len * T::lit(60.0), T::zero(), (0, 0), T::zero()),
        };
        Self {
            kind,
            packet_len,
            rx_window,
            queue_k,
            n_harq_max,
            bitrate,
            framerate,
            definition,
            frame_durations: None,
            segment_duration: T::one(),
            initial_buffering,
        }
    }

    pub fn validate(&self) -> Result<(), ServiceError> {
        let bad = |m: String| Err(ServiceError::InvalidProfile(m));
        if !(self.packet_len > T::zero()) {
            return bad(format!("packet_len must be > 0, got {}", self.packet_len));
        }
        for (name, v) in [
            ("rx_window", self.rx_window),
            ("bitrate", self.bitrate),
            ("framerate", self.framerate),
            ("segment_duration", self.segment_duration),
            ("initial_buffering", self.initial_buffering),
        ] {
            if !(v >= T::zero()) || !v.is_finite() {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if self.queue_k < 1 || self.n_harq_max < 1 {
            return bad("queue_k and n_harq_max must be >= 1".into());
        }
        if self.kind.is_video() {
            if !(self.framerate > T::zero()) {
                return bad(format!(
                    "video framerate must be > 0, got {}",
                    self.framerate
                ));
            }
            if let Some(d) = &self.frame_durations {
                if d.is_empty() || d.iter().any(|x| !(*x >= T::zero())) {
                    return bad("frame_durations must be non-empty and non-negative".into());
                }
            }
        }
        Ok(())
    }

    /// Frame durations of one segment.
    pub fn segment_frames(&self) -> Vec<T> {
        match &self.frame_durations {
            Some(d) => d.clone(),
            None => {
                let n = (self.segment_duration * self.framerate)
                    .round()
                    .to_usize()
                    .unwrap_or(0);
                vec![T::one() / self.framerate; n]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceQualityIndicators<T> {
    pub kind: ServiceKind,
    pub loss: T,
    pub delay: T,
    pub packets_per_frame: usize,
    pub frame_error_prob: T,
    /// Expected stalled time per segment.
    pub stall_duration: T,
    /// Expected errored frames per segment.
    pub stall_events: T,
    pub segment_duration: T,
    pub initial_buffering: T,
    pub bitrate: T,
    pub framerate: T,
    pub definition: (u32, u32),
}

/// `ceil(bitrate / (framerate * packet_len))`.
pub fn packets_per_frame<T: Scalar>(profile: &ServiceProfile<T>) -> Result<usize, ServiceError> {
    if !profile.kind.is_video() {
        return Err(ServiceError::NotVideo {
            op: "packets_per_frame",
            kind: profile.kind,
        });
    }
    if !(profile.framerate > T::zero()) || !(profile.packet_len > T::zero()) {
        return Err(ServiceError::InvalidProfile(
            "framerate and packet_len must be > 0".into(),
        ));
    }
    let per_frame = profile.bitrate / (profile.framerate * profile.packet_len);
    per_frame.ceil().to_usize().ok_or_else(|| {
        ServiceError::InvalidProfile(format!("packets per frame not representable: {per_frame}"))
    })
}

/// Probability that at least one of `n_f` packets is lost.
pub fn frame_error_prob<T: Scalar>(p_all: T, n_f: usize) -> T {
    T::one() - (T::one() - p_all).powi(n_f as i32)
}

/// `(sum P_i * FrameDur_i, sum P_i)` over one segment.
pub fn segment_stall<T: Scalar>(
    frame_probs: &[T],
    frame_durations: &[T],
) -> Result<(T, T), ServiceError> {
    if frame_probs.len() != frame_durations.len() {
        return Err(ServiceError::LengthMismatch {
            probs: frame_probs.len(),
            durations: frame_durations.len(),
        });
    }
    if let Some((index, v)) = frame_probs
        .iter()
        .enumerate()
        .find(|(_, p)| !is_probability(**p))
    {
        return Err(ServiceError::ProbabilityOutOfRange {
            index,
            value: v.to_f64_lossy(),
        });
    }
    let t_k = frame_probs
        .iter()
        .zip(frame_durations)
        .map(|(p, d)| *p * *d)
        .sum();
    let n_k = frame_probs.iter().copied().sum();
    Ok((t_k, n_k))
}

/// Indicators from a combined loss probability and end-to-end delay.
pub fn indicators_for<T: Scalar>(
    profile: &ServiceProfile<T>,
    p_all: T,
    t_all: T,
) -> Result<ServiceQualityIndicators<T>, ServiceError> {
    profile.validate()?;
    if !is_probability(p_all) {
        return Err(ServiceError::ProbabilityOutOfRange {
            index: 0,
            value: p_all.to_f64_lossy(),
        });
    }
    let mut ind = ServiceQualityIndicators {
        kind: profile.kind,
        loss: p_all,
        delay: t_all,
        packets_per_frame: 0,
        frame_error_prob: T::zero(),
        stall_duration: T::zero(),
        stall_events: T::zero(),
        segment_duration: profile.segment_duration,
        initial_buffering: T::zero(),
        bitrate: profile.bitrate,
        framerate: profile.framerate,
        definition: profile.definition,
    };
    if profile.kind.is_video() {
        let n_f = packets_per_frame(profile)?;
        let p_frame = frame_error_prob(p_all, n_f);
        let durations = profile.segment_frames();
        let probs = vec![p_frame; durations.len()];
        let (t_k, n_k) = segment_stall(&probs, &durations)?;
        ind.packets_per_frame = n_f;
        ind.frame_error_prob = p_frame;
        ind.stall_duration = t_k;
        ind.stall_events = n_k;
        ind.segment_duration = durations.iter().copied().sum();
        ind.initial_buffering = profile.initial_buffering;
    }
    Ok(ind)
}

/// Indicators from the packet layer outputs, using the exact composed loss.
pub fn indicators<T: Scalar>(
    profile: &ServiceProfile<T>,
    loss: &LossBreakdown<T>,
    delay: &DelayBudget<T>,
) -> Result<ServiceQualityIndicators<T>, ServiceError> {
    indicators_for(profile, loss.p_all_exact, delay.t_all)
}
