//! Packet loss components and their end-to-end composition.

use serde::{Deserialize, Serialize};

use super::{PacketError, TimingConfig};
use crate::scalar::Scalar;

/// Loss contributions of one radio direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkLoss<T> {
    /// Transmit buffer overflow.
    pub p_to: T,
    /// All HARQ attempts failed.
    pub p_e: T,
    /// Sojourn exceeded the receive window.
    pub p_window: T,
    /// `p_e + (1 - p_e) * p_window`.
    pub p_link: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown<T> {
    pub p_to1: T,
    pub p_ul: T,
    pub p_npl: T,
    pub p_to2: T,
    pub p_dl: T,
    pub p_e_ul: T,
    pub p_e_dl: T,
    pub p_ul_loss: T,
    pub p_dl_loss: T,
    pub p_all_exact: T,
    pub p_all_approx: T,
}

impl<T: Scalar> LossBreakdown<T> {
    pub fn from_links(ul: &LinkLoss<T>, p_npl: T, dl: &LinkLoss<T>) -> Self {
        let components = [ul.p_to, ul.p_link, p_npl, dl.p_to, dl.p_link];
        let (p_all_exact, p_all_approx) = combine_loss(components);
        Self {
            p_to1: ul.p_to,
            p_ul: ul.p_link,
            p_npl,
            p_to2: dl.p_to,
            p_dl: dl.p_link,
            p_e_ul: ul.p_e,
            p_e_dl: dl.p_e,
            p_ul_loss: ul.p_window,
            p_dl_loss: dl.p_window,
            p_all_exact,
            p_all_approx,
        }
    }

    pub fn components(&self) -> [T; 5] {
        [self.p_to1, self.p_ul, self.p_npl, self.p_to2, self.p_dl]
    }
}

/// Probability that a packet outlives the receive window:
/// `exp(-(mu_e - lambda_e) * window)`.
pub fn window_loss<T: Scalar>(mu_e: T, lambda_e: T, window: T) -> Result<T, PacketError> {
    if !(mu_e > lambda_e) || !(lambda_e >= T::zero()) {
        return Err(PacketError::WindowLossUndefined {
            mu_e: mu_e.to_f64_lossy(),
            lambda_e: lambda_e.to_f64_lossy(),
        });
    }
    if !(window >= T::zero()) {
        return Err(PacketError::InvalidTiming(format!(
            "receive window must be >= 0, got {window}"
        )));
    }
    Ok((-(mu_e - lambda_e) * window).exp())
}

pub fn link_loss<T: Scalar>(p_e: T, p_window: T) -> T {
    p_e + (T::one() - p_e) * p_window
}

/// Indicator that the deterministic core-network delay exceeds its window.
pub fn network_loss<T: Scalar>(t_cn: T, timing: &TimingConfig<T>) -> T {
    if t_cn > timing.t_netwin {
        T::one()
    } else {
        T::zero()
    }
}

/// Sequential composition of the five loss stages, expanded the way the
/// nested expression is written: each stage only sees what survived the
/// previous ones.
pub fn nested_expansion<T: Scalar>([p_to1, p_ul, p_npl, p_to2, p_dl]: [T; 5]) -> T {
    let one = T::one();
    let after_to1 = one - p_to1;
    let after_ul = one - p_to1 - after_to1 * p_ul;
    let after_npl = after_ul - after_ul * p_npl;
    let after_to2 = after_npl - after_npl * p_to2;
    p_to1 + after_to1 * p_ul + after_ul * p_npl + after_npl * p_to2 + after_to2 * p_dl
}

/// Returns `(exact, approx)`: the nested composition and the first-order sum
/// clamped to `[0, 1]`.
pub fn combine_loss<T: Scalar>(components: [T; 5]) -> (T, T) {
    let exact = nested_expansion(components);
    let approx = components
        .iter()
        .copied()
        .sum::<T>()
        .min(T::one())
        .max(T::zero());
    (exact, approx)
}
