//! Steady-state M/M/1/K transmit buffer.

use serde::{Deserialize, Serialize};

use super::PacketError;
use crate::scalar::Scalar;

/// Poisson arrivals at `lambda`, exponential service at `mu`, room for
/// `k_max` packets; arrivals to a full buffer are dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueConfig<T> {
    pub lambda: T,
    pub mu: T,
    pub k_max: usize,
}

impl<T: Scalar> QueueConfig<T> {
    pub fn new(lambda: T, mu: T, k_max: usize) -> Result<Self, PacketError> {
        let q = Self { lambda, mu, k_max };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<(), PacketError> {
        if !(self.lambda >= T::zero()) || !self.lambda.is_finite() {
            return Err(PacketError::InvalidQueue(format!(
                "arrival rate must be >= 0, got {}",
                self.lambda
            )));
        }
        if !(self.mu > T::zero()) || !self.mu.is_finite() {
            return Err(PacketError::InvalidQueue(format!(
                "service rate must be > 0, got {}",
                self.mu
            )));
        }
        if self.k_max < 1 {
            return Err(PacketError::InvalidQueue(
                "queue capacity K must be >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn rho(&self) -> T {
        self.lambda / self.mu
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueueMetrics<T> {
    pub rho: T,
    pub k_max: usize,
    /// Probability of an empty system.
    pub p0: T,
    /// Blocking probability `p_K`, the transmit-buffer overflow loss.
    pub p_block: T,
    /// Mean number of packets waiting, excluding the one in service.
    pub l_avg: T,
    /// Arrival rate of accepted packets, `lambda * (1 - p_block)`.
    pub lambda_e: T,
    /// Effective service rate; equal to `mu`.
    pub mu_e: T,
    /// Mean wait before service, `l_avg / lambda_e` (0 without traffic).
    pub w_avg: T,
}

impl<T: Scalar> QueueMetrics<T> {
    /// `p_n = rho^n * p0` for `n = 0..=K`.
    pub fn state_probabilities(&self) -> Vec<T> {
        (0..=self.k_max)
            .map(|n| self.rho.powi(n as i32) * self.p0)
            .collect()
    }
}

fn near_unit_load<T: Scalar>(rho: T) -> bool {
    (rho - T::one()).abs() < T::unit_load_tolerance()
}

pub fn queue_steady_state<T: Scalar>(cfg: &QueueConfig<T>) -> Result<QueueMetrics<T>, PacketError> {
    cfg.validate()?;
    let rho = cfg.rho();
    let unit = near_unit_load(rho);
    if rho > T::one() && !unit {
        return Err(PacketError::Unstable {
            rho: rho.to_f64_lossy(),
        });
    }
    let k = T::from_count(cfg.k_max);
    let kp1 = k + T::one();
    let rho_k = rho.powi(cfg.k_max as i32);
    let rho_k1 = rho_k * rho;

    let (p0, l_avg) = if unit {
        (T::one() / kp1, k * (k - T::one()) / (T::lit(2.0) * kp1))
    } else {
        let one = T::one();
        (
            (one - rho) / (one - rho_k1),
            rho / (one - rho) - rho * (one + k * rho_k) / (one - rho_k1),
        )
    };
    let p_block = rho_k * p0;
    // The closed-form queue length loses a few ulps to cancellation when rho is small
    let l_avg = l_avg.max(T::zero());
    let lambda_e = cfg.lambda * (T::one() - p_block);
    let w_avg = if lambda_e > T::zero() {
        l_avg / lambda_e
    } else {
        T::zero()
    };

    Ok(QueueMetrics {
        rho,
        k_max: cfg.k_max,
        p0,
        p_block,
        l_avg,
        lambda_e,
        mu_e: cfg.mu,
        w_avg,
    })
}
