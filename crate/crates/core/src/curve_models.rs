//! Bitstream layer: BLER@SINR and THP@SINR curves for one PHY configuration.
//!
//! Curves are sampled tables evaluated by piecewise-linear interpolation with
//! clamping at the grid ends. Per-transmission BLER for HARQ is derived from
//! the first-transmission curve by a [`HarqCombining`] rule.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{is_probability, Scalar};

/// Header line of the curve CSV format.
pub const CURVE_CSV_HEADER: &str = "sinr_db,bler,throughput_bps";

/// Protocol overhead factor applied to throughput when none is given.
pub const DEFAULT_OVERHEAD: f64 = 0.95;

/// Half-width and spacing of the grid produced by [`synth_curve`].
const SYNTH_HALF_SPAN_DB: f64 = 15.0;
const SYNTH_STEP_DB: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("unexpected header {found:?}, expected \"{CURVE_CSV_HEADER}\"")]
    Header { found: String },
    #[error("mismatched column lengths: {0}")]
    LengthMismatch(String),
    #[error("curve needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("grid not ascending at sample {index}")]
    GridNotAscending { index: usize },
    #[error("probability out of range at sample {index}: {value}")]
    ProbabilityOutOfRange { index: usize, value: f64 },
    #[error("negative or non-finite throughput at sample {index}: {value}")]
    InvalidThroughput { index: usize, value: f64 },
    #[error("bler increases with sinr at sample {index}")]
    BlerNotMonotone { index: usize },
    #[error("throughput decreases with sinr at sample {index}")]
    ThroughputNotMonotone { index: usize },
    #[error("overhead must lie in (0, 1], got {0}")]
    InvalidOverhead(f64),
    #[error("combining gain must be >= 0 dB, got {0}")]
    InvalidGain(f64),
    #[error("logistic slope must be > 0, got {0}")]
    InvalidSlope(f64),
    #[error("peak throughput must be > 0, got {0}")]
    InvalidPeakThroughput(f64),
    #[error("transmission index must be >= 1, got {0}")]
    InvalidTransmissionIndex(usize),
}

/// How the BLER of the i-th HARQ transmission follows from the curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombiningMode {
    /// `BLER_i = BLER(sinr)^i`.
    #[default]
    Geometric,
    /// `BLER_i = BLER(sinr + (i - 1) * gain_db_per_retx)`.
    GainDb,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarqCombining<T> {
    pub mode: CombiningMode,
    /// Only read in [`CombiningMode::GainDb`].
    pub gain_db_per_retx: T,
}

impl<T: Scalar> HarqCombining<T> {
    pub fn geometric() -> Self {
        Self {
            mode: CombiningMode::Geometric,
            gain_db_per_retx: T::zero(),
        }
    }

    pub fn gain_db(gain_db_per_retx: T) -> Result<Self, CurveError> {
        let c = Self {
            mode: CombiningMode::GainDb,
            gain_db_per_retx,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CurveError> {
        let g = self.gain_db_per_retx;
        if !(g >= T::zero()) || !g.is_finite() {
            return Err(CurveError::InvalidGain(g.to_f64_lossy()));
        }
        Ok(())
    }
}

impl<T: Scalar> Default for HarqCombining<T> {
    fn default() -> Self {
        Self::geometric()
    }
}

/// Sampled BLER and throughput curves of one PHY algorithm configuration.
///
/// Fields are private so every instance satisfies the grid invariants:
/// strictly ascending SINR, BLER in `[0, 1]` and non-increasing, throughput
/// non-negative and non-decreasing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhyCurveSet<T> {
    label: String,
    sinr_grid: Vec<T>,
    bler: Vec<T>,
    throughput: Vec<T>,
    overhead: T,
    combining: HarqCombining<T>,
}

impl<T: Scalar> PhyCurveSet<T> {
    pub fn new(
        label: impl Into<String>,
        sinr_grid: Vec<T>,
        bler: Vec<T>,
        throughput: Vec<T>,
        overhead: T,
        combining: HarqCombining<T>,
    ) -> Result<Self, CurveError> {
        if sinr_grid.len() != bler.len() || sinr_grid.len() != throughput.len() {
            return Err(CurveError::LengthMismatch(format!(
                "sinr {} / bler {} / throughput {}",
                sinr_grid.len(),
                bler.len(),
                throughput.len()
            )));
        }
        if sinr_grid.len() < 2 {
            return Err(CurveError::TooFewSamples(sinr_grid.len()));
        }
        for (i, s) in sinr_grid.iter().enumerate() {
            if !s.is_finite() || (i > 0 && !(*s > sinr_grid[i - 1])) {
                return Err(CurveError::GridNotAscending { index: i });
            }
        }
        for (i, b) in bler.iter().enumerate() {
            if !is_probability(*b) {
                return Err(CurveError::ProbabilityOutOfRange {
                    index: i,
                    value: b.to_f64_lossy(),
                });
            }
            if i > 0 && *b > bler[i - 1] {
                return Err(CurveError::BlerNotMonotone { index: i });
            }
        }
        for (i, r) in throughput.iter().enumerate() {
            if !(*r >= T::zero()) || !r.is_finite() {
                return Err(CurveError::InvalidThroughput {
                    index: i,
                    value: r.to_f64_lossy(),
                });
            }
            if i > 0 && *r < throughput[i - 1] {
                return Err(CurveError::ThroughputNotMonotone { index: i });
            }
        }
        if !(overhead > T::zero() && overhead <= T::one()) {
            return Err(CurveError::InvalidOverhead(overhead.to_f64_lossy()));
        }
        combining.validate()?;
        Ok(Self {
            label: label.into(),
            sinr_grid,
            bler,
            throughput,
            overhead,
            combining,
        })
    }

    pub fn with_overhead(mut self, overhead: T) -> Result<Self, CurveError> {
        if !(overhead > T::zero() && overhead <= T::one()) {
            return Err(CurveError::InvalidOverhead(overhead.to_f64_lossy()));
        }
        self.overhead = overhead;
        Ok(self)
    }

    pub fn with_combining(mut self, combining: HarqCombining<T>) -> Result<Self, CurveError> {
        combining.validate()?;
        self.combining = combining;
        Ok(self)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn sinr_grid(&self) -> &[T] {
        &self.sinr_grid
    }

    pub fn bler(&self) -> &[T] {
        &self.bler
    }

    pub fn throughput(&self) -> &[T] {
        &self.throughput
    }

    pub fn overhead(&self) -> T {
        self.overhead
    }

    pub fn combining(&self) -> HarqCombining<T> {
        self.combining
    }

    /// First-transmission BLER at `sinr` dB.
    pub fn bler_at(&self, sinr: T) -> T {
        interpolate(&self.sinr_grid, &self.bler, sinr)
    }

    /// Raw interpolated throughput at `sinr` dB, before overhead.
    pub fn throughput_at(&self, sinr: T) -> T {
        interpolate(&self.sinr_grid, &self.throughput, sinr)
    }

    /// Interpolated throughput scaled by the overhead factor, in bit/s.
    pub fn goodput_at(&self, sinr: T) -> T {
        self.throughput_at(sinr) * self.overhead
    }

    /// BLER of the `i`-th transmission (`i = 1` is the new transmission).
    pub fn retx_bler(&self, sinr: T, i: usize) -> Result<T, CurveError> {
        if i < 1 {
            return Err(CurveError::InvalidTransmissionIndex(i));
        }
        Ok(match self.combining.mode {
            CombiningMode::Geometric => self.bler_at(sinr).powi(i as i32),
            CombiningMode::GainDb => {
                let shift = T::from_count(i - 1) * self.combining.gain_db_per_retx;
                self.bler_at(sinr + shift)
            }
        })
    }

    /// `[BLER_1, ..., BLER_n]` at `sinr`.
    pub fn retx_bler_sequence(&self, sinr: T, n: usize) -> Vec<T> {
        (1..=n)
            .map(|i| self.retx_bler(sinr, i).expect("index starts at 1"))
            .collect()
    }

    /// Serializes the sampled grid in the curve CSV format.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CURVE_CSV_HEADER);
        out.push('\n');
        for ((s, b), r) in self.sinr_grid.iter().zip(&self.bler).zip(&self.throughput) {
            let _ = writeln!(
                out,
                "{},{},{}",
                s.to_f64_lossy(),
                b.to_f64_lossy(),
                r.to_f64_lossy()
            );
        }
        out
    }
}

fn interpolate<T: Scalar>(xs: &[T], ys: &[T], x: T) -> T {
    if x.is_nan() {
        return T::nan();
    }
    let last = xs.len() - 1;
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[last] {
        return ys[last];
    }
    // xs[hi - 1] <= x < xs[hi]
    let hi = xs.partition_point(|g| *g <= x);
    let lo = hi - 1;
    let t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    ys[lo] + (ys[hi] - ys[lo]) * t
}

/// Parses curve CSV content into a validated set.
///
/// Overhead defaults to 0.95 and combining to geometric; override with
/// [`PhyCurveSet::with_overhead`] and [`PhyCurveSet::with_combining`].
pub fn load_curves<T: Scalar>(source: &str) -> Result<PhyCurveSet<T>, CurveError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source.as_bytes());

    let header = reader
        .headers()
        .map_err(|e| CurveError::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != CURVE_CSV_HEADER {
        return Err(CurveError::Header { found: header });
    }

    let mut sinr = Vec::new();
    let mut bler = Vec::new();
    let mut thp = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { .. } => CurveError::LengthMismatch(e.to_string()),
            _ => CurveError::Parse {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            },
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |idx: usize| -> Result<T, CurveError> {
            let raw = &record[idx];
            let v: f64 = raw.parse().map_err(|_| CurveError::Parse {
                line,
                message: format!("invalid number {raw:?}"),
            })?;
            T::from_f64(v).ok_or_else(|| CurveError::Parse {
                line,
                message: format!("value {raw:?} not representable"),
            })
        };
        sinr.push(field(0)?);
        bler.push(field(1)?);
        thp.push(field(2)?);
    }

    PhyCurveSet::new(
        "loaded",
        sinr,
        bler,
        thp,
        T::lit(DEFAULT_OVERHEAD),
        HarqCombining::geometric(),
    )
}

/// Logistic BLER curve `1 / (1 + exp(slope * (s - mid)))` with throughput
/// `peak * (1 - BLER)`, sampled over `mid ± 15 dB` at 0.5 dB steps.
pub fn synth_curve<T: Scalar>(
    mid_sinr_db: T,
    slope: T,
    peak_throughput: T,
    label: impl Into<String>,
) -> Result<PhyCurveSet<T>, CurveError> {
    if !(slope > T::zero()) || !slope.is_finite() {
        return Err(CurveError::InvalidSlope(slope.to_f64_lossy()));
    }
    if !(peak_throughput > T::zero()) || !peak_throughput.is_finite() {
        return Err(CurveError::InvalidPeakThroughput(
            peak_throughput.to_f64_lossy(),
        ));
    }
    let half_steps = (SYNTH_HALF_SPAN_DB / SYNTH_STEP_DB).round() as usize;
    let step = T::lit(SYNTH_STEP_DB);
    let grid: Vec<T> = (0..=2 * half_steps)
        .map(|j| {
            let offset = T::from_count(j) - T::from_count(half_steps);
            mid_sinr_db + offset * step
        })
        .collect();
    let bler: Vec<T> = grid
        .iter()
        .map(|&s| logistic_bler(s, mid_sinr_db, slope))
        .collect();
    let thp = bler
        .iter()
        .map(|&b| peak_throughput * (T::one() - b))
        .collect();
    PhyCurveSet::new(
        label,
        grid,
        bler,
        thp,
        T::lit(DEFAULT_OVERHEAD),
        HarqCombining::geometric(),
    )
}

#[inline]
pub(crate) fn logistic_bler<T: Scalar>(sinr: T, mid: T, slope: T) -> T {
    T::one() / (T::one() + (slope * (sinr - mid)).exp())
}
