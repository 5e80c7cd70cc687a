//! HARQ transmission count and residual failure.

use serde::{Deserialize, Serialize};

use super::PacketError;
use crate::scalar::{is_probability, Scalar};

/// Formula used for the mean number of transmissions per HARQ procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HarqMode {
    /// `1 + sum_{i=2..N} i * BLER_{i-1}`, term for term.
    #[default]
    PaperVerbatim,
    /// `1 + sum_{i=2..N} prod_{j<i} BLER_j`, the mean of the stopping time.
    CumulativeProduct,
}

fn check_sequence<T: Scalar>(bler_seq: &[T], n_max: usize, need: usize) -> Result<(), PacketError> {
    if n_max < 1 {
        return Err(PacketError::InvalidHarqMax(n_max));
    }
    if bler_seq.len() < need {
        return Err(PacketError::InsufficientBlerSequence {
            need,
            got: bler_seq.len(),
        });
    }
    if let Some((index, v)) = bler_seq
        .iter()
        .enumerate()
        .find(|(_, b)| !is_probability(**b))
    {
        return Err(PacketError::ProbabilityOutOfRange {
            index,
            value: v.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Mean transmissions per HARQ procedure, `bler_seq[0]` being `BLER_1`.
pub fn expected_transmissions<T: Scalar>(
    bler_seq: &[T],
    n_max: usize,
    mode: HarqMode,
) -> Result<T, PacketError> {
    match mode {
        HarqMode::PaperVerbatim => {
            check_sequence(bler_seq, n_max, n_max.saturating_sub(1))?;
            let tail: T = (2..=n_max)
                .map(|i| T::from_count(i) * bler_seq[i - 2])
                .sum();
            Ok(T::one() + tail)
        }
        HarqMode::CumulativeProduct => {
            check_sequence(bler_seq, n_max, n_max)?;
            let mut survive = T::one();
            let mut total = T::one();
            for b in &bler_seq[..n_max - 1] {
                survive = survive * *b;
                total = total + survive;
            }
            Ok(total)
        }
    }
}

/// Probability that all `n_max` transmissions fail.
pub fn residual_phy_loss<T: Scalar>(bler_seq: &[T], n_max: usize) -> Result<T, PacketError> {
    check_sequence(bler_seq, n_max, n_max)?;
    Ok(bler_seq[..n_max].iter().fold(T::one(), |acc, b| acc * *b))
}
