//! System-level stand-in: where the SINR operating point comes from, and how
//! goodput becomes a packet service rate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub const TRACE_CSV_HEADER: &str = "time_s,sinr_db";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("sinr trace is empty")]
    EmptyTrace,
    #[error("sinr trace time not strictly ascending at sample {index}")]
    TraceNotAscending { index: usize },
    #[error("non-finite sinr at sample {index}")]
    NonFiniteSinr { index: usize },
    #[error("packet length must be > 0 bits, got {0}")]
    InvalidPacketLength(f64),
    #[error("goodput must be finite and >= 0, got {0}")]
    InvalidGoodput(f64),
    #[error("trace line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("unexpected trace header {found:?}, expected \"{TRACE_CSV_HEADER}\"")]
    Header { found: String },
}

/// Source of the SINR operating point over time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SinrProvider<T> {
    Constant {
        sinr_db: T,
    },
    /// `(time_s, sinr_db)` samples held until the next sample.
    Trace {
        samples: Vec<(T, T)>,
    },
}

impl<T: Scalar> SinrProvider<T> {
    pub fn constant(sinr_db: T) -> Self {
        SinrProvider::Constant { sinr_db }
    }

    pub fn trace(samples: Vec<(T, T)>) -> Result<Self, EnvError> {
        let p = SinrProvider::Trace { samples };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        match self {
            SinrProvider::Constant { sinr_db } if !sinr_db.is_finite() => {
                Err(EnvError::NonFiniteSinr { index: 0 })
            }
            SinrProvider::Constant { .. } => Ok(()),
            SinrProvider::Trace { samples } => {
                if samples.is_empty() {
                    return Err(EnvError::EmptyTrace);
                }
                for (i, (t, s)) in samples.iter().enumerate() {
                    if !t.is_finite() || (i > 0 && !(*t > samples[i - 1].0)) {
                        return Err(EnvError::TraceNotAscending { index: i });
                    }
                    if !s.is_finite() {
                        return Err(EnvError::NonFiniteSinr { index: i });
                    }
                }
                Ok(())
            }
        }
    }

    /// SINR in dB at time `t` seconds (step-hold, right-continuous).
    pub fn sinr_at(&self, t: T) -> T {
        match self {
            SinrProvider::Constant { sinr_db } => *sinr_db,
            SinrProvider::Trace { samples } => {
                let idx = samples.partition_point(|(ts, _)| *ts <= t);
                samples[idx.saturating_sub(1)].1
            }
        }
    }
}

/// Parses a `time_s,sinr_db` trace.
pub fn load_trace<T: Scalar>(source: &str) -> Result<SinrProvider<T>, EnvError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| EnvError::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != TRACE_CSV_HEADER {
        return Err(EnvError::Header { found: header });
    }
    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| EnvError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let num = |idx: usize| -> Result<T, EnvError> {
            record[idx]
                .parse::<f64>()
                .ok()
                .and_then(T::from_f64)
                .ok_or_else(|| EnvError::Parse {
                    line,
                    message: format!("invalid number {:?}", &record[idx]),
                })
        };
        samples.push((num(0)?, num(1)?));
    }
    SinrProvider::trace(samples)
}

/// Packets per second served at `goodput` bit/s for `packet_len`-bit packets.
pub fn service_rate<T: Scalar>(goodput: T, packet_len: T) -> Result<T, EnvError> {
    if !(packet_len > T::zero()) || !packet_len.is_finite() {
        return Err(EnvError::InvalidPacketLength(packet_len.to_f64_lossy()));
    }
    if !(goodput >= T::zero()) || !goodput.is_finite() {
        return Err(EnvError::InvalidGoodput(goodput.to_f64_lossy()));
    }
    Ok(goodput / packet_len)
}
