//! Seeded Monte Carlo counterparts of the packet-layer closed forms.
//!
//! Randomness comes from ChaCha8 seeded through `seed_from_u64`, so a given
//! `(config, seed)` produces the same report on every platform. Exponential
//! variates use inversion, `-ln(1 - U) / rate`.
//!
//! Standard errors use batch means over consecutive arrival blocks. For
//! proportions the error is floored at the binomial error of `max(p, 1/n)`,
//! the resolution limit of `n` observations.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::packet_model::QueueConfig;

const BATCHES: usize = 50;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("simulate_mm1k: load rho = {rho} exceeds 1")]
    Unstable { rho: f64 },
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub n_arrivals: usize,
    pub warmup_fraction: f64,
}

impl SimConfig {
    pub fn new(seed: u64, n_arrivals: usize) -> Self {
        Self {
            seed,
            n_arrivals,
            warmup_fraction: 0.1,
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        if self.n_arrivals < 1 {
            return Err(SimError::InvalidConfig("n_arrivals must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(SimError::InvalidConfig(format!(
                "warmup_fraction must lie in [0, 1), got {}",
                self.warmup_fraction
            )));
        }
        Ok(())
    }
}

/// Point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    /// `|value - reference| <= sigmas * std_error`.
    pub fn within_sigmas(&self, reference: f64, sigmas: f64) -> bool {
        (self.value - reference).abs() <= sigmas * self.std_error
    }

    /// `|value - reference| <= tol * |reference|`.
    pub fn within_relative(&self, reference: f64, tol: f64) -> bool {
        (self.value - reference).abs() <= tol * reference.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub p_block: Estimate,
    /// Time-average number waiting, excluding the packet in service.
    pub l_avg: Estimate,
    /// Mean wait before service of accepted packets.
    pub w_avg: Estimate,
    /// Fraction of accepted packets whose sojourn exceeds the window.
    pub window_loss: Estimate,
    pub arrivals: u64,
    pub accepted: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarqReport {
    pub e_n_retr: Estimate,
    pub residual_loss: Estimate,
    pub trials: u64,
}

fn exp_sample(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate
}

fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn proportion_floor(p: f64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    let p = p.max(1.0 / n).min(1.0);
    (p * (1.0 - p) / n).sqrt()
}

#[derive(Default, Clone, Copy)]
struct Batch {
    arrivals: u64,
    blocked: u64,
    accepted: u64,
    departed: u64,
    wait_sum: f64,
    over_window: u64,
    area: f64,
    start: f64,
    end: f64,
}

struct Packet {
    arrival: f64,
    batch: Option<usize>,
}

/// Event-driven M/M/1/K run of `sim.n_arrivals` arrivals.
pub fn simulate_mm1k(
    queue: &QueueConfig<f64>,
    rx_window: f64,
    sim: &SimConfig,
) -> Result<SimReport, SimError> {
    queue
        .validate()
        .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
    sim.validate()?;
    let rho = queue.rho();
    if rho > 1.0 && (rho - 1.0).abs() >= 1e-9 {
        return Err(SimError::Unstable { rho });
    }
    let zero = Estimate {
        value: 0.0,
        std_error: 0.0,
    };
    if queue.lambda == 0.0 {
        return Ok(SimReport {
            p_block: zero,
            l_avg: zero,
            w_avg: zero,
            window_loss: zero,
            arrivals: 0,
            accepted: 0,
        });
    }

    let n = sim.n_arrivals;
    let warmup = ((n as f64) * sim.warmup_fraction).floor() as usize;
    let observed = n - warmup;
    let n_batches = BATCHES.min(observed).max(1);
    let batch_len = observed.div_ceil(n_batches);
    let batch_of = |idx: usize| -> Option<usize> { idx.checked_sub(warmup).map(|j| j / batch_len) };

    let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
    let mut batches = vec![Batch::default(); n_batches];
    let mut system: VecDeque<Packet> = VecDeque::with_capacity(queue.k_max + 1);

    let mut now = 0.0;
    let mut next_arrival = exp_sample(&mut rng, queue.lambda);
    let mut next_departure = f64::INFINITY;
    let mut arrived = 0usize;
    // batch collecting time-average area; None during warmup
    let mut area_batch: Option<usize> = None;

    let record_departure = |batches: &mut [Batch], pkt: &Packet, at: f64| {
        if let Some(b) = pkt.batch {
            batches[b].departed += 1;
            if at - pkt.arrival > rx_window {
                batches[b].over_window += 1;
            }
        }
    };

    while arrived < n || !system.is_empty() {
        let arrival_next = arrived < n && next_arrival <= next_departure;
        let t = if arrival_next {
            next_arrival
        } else {
            next_departure
        };
        if let Some(b) = area_batch {
            let waiting = system.len().saturating_sub(1) as f64;
            batches[b].area += waiting * (t - now);
        }
        now = t;

        if arrival_next {
            let idx = arrived;
            arrived += 1;
            let batch = batch_of(idx);
            if let Some(b) = batch {
                if area_batch != Some(b) {
                    if let Some(prev) = area_batch {
                        batches[prev].end = now;
                    }
                    batches[b].start = now;
                    area_batch = Some(b);
                }
                batches[b].arrivals += 1;
            }
            if system.len() >= queue.k_max {
                if let Some(b) = batch {
                    batches[b].blocked += 1;
                }
            } else {
                if let Some(b) = batch {
                    batches[b].accepted += 1;
                }
                system.push_back(Packet {
                    arrival: now,
                    batch,
                });
                if system.len() == 1 {
                    next_departure = now + exp_sample(&mut rng, queue.mu);
                }
            }
            if arrived < n {
                next_arrival = now + exp_sample(&mut rng, queue.lambda);
            } else if let Some(b) = area_batch.take() {
                // time averages stop at the last arrival; the backlog drains for per-packet stats
                batches[b].end = now;
            }
        } else {
            let pkt = system.pop_front().expect("departure from non-empty system");
            record_departure(&mut batches, &pkt, now);
            next_departure = match system.front() {
                Some(head) => {
                    if let Some(b) = head.batch {
                        batches[b].wait_sum += now - head.arrival;
                    }
                    now + exp_sample(&mut rng, queue.mu)
                }
                None => f64::INFINITY,
            };
        }
    }

    let total = batches.iter().fold(Batch::default(), |mut acc, b| {
        acc.arrivals += b.arrivals;
        acc.blocked += b.blocked;
        acc.accepted += b.accepted;
        acc.departed += b.departed;
        acc.wait_sum += b.wait_sum;
        acc.over_window += b.over_window;
        acc.area += b.area;
        acc.end += b.end - b.start;
        acc
    });
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    let per_batch = |f: &dyn Fn(&Batch) -> f64| -> f64 {
        let vals: Vec<f64> = batches.iter().filter(|b| b.arrivals > 0).map(f).collect();
        mean_and_se(&vals).1
    };

    let p_block = ratio(total.blocked as f64, total.arrivals as f64);
    let window = ratio(total.over_window as f64, total.departed as f64);
    Ok(SimReport {
        p_block: Estimate {
            value: p_block,
            std_error: per_batch(&|b| ratio(b.blocked as f64, b.arrivals as f64))
                .max(proportion_floor(p_block, total.arrivals)),
        },
        l_avg: Estimate {
            value: ratio(total.area, total.end),
            std_error: per_batch(&|b| ratio(b.area, b.end - b.start)),
        },
        w_avg: Estimate {
            value: ratio(total.wait_sum, total.accepted as f64),
            std_error: per_batch(&|b| ratio(b.wait_sum, b.accepted as f64)),
        },
        window_loss: Estimate {
            value: window,
            std_error: per_batch(&|b| ratio(b.over_window as f64, b.departed as f64))
                .max(proportion_floor(window, total.departed)),
        },
        arrivals: total.arrivals,
        accepted: total.accepted,
    })
}

/// Runs `trials` HARQ procedures: attempt `i` fails with `bler_seq[i - 1]`,
/// stopping at the first success or after `n_max` attempts.
pub fn simulate_harq(
    bler_seq: &[f64],
    n_max: usize,
    trials: usize,
    seed: u64,
) -> Result<HarqReport, SimError> {
    if n_max < 1 || trials < 1 {
        return Err(SimError::InvalidConfig(
            "n_max and trials must be >= 1".into(),
        ));
    }
    if bler_seq.len() < n_max {
        return Err(SimError::InvalidConfig(format!(
            "BLER sequence has {} entries, need {n_max}",
            bler_seq.len()
        )));
    }
    if bler_seq.iter().any(|b| !(0.0..=1.0).contains(b)) {
        return Err(SimError::InvalidConfig(
            "BLER entries must lie in [0, 1]".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0u64;
    let mut sum_sq = 0u64;
    let mut failures = 0u64;
    for _ in 0..trials {
        let mut attempts = 0u64;
        let mut delivered = false;
        for &bler in &bler_seq[..n_max] {
            attempts += 1;
            let u: f64 = rng.random();
            if u >= bler {
                delivered = true;
                break;
            }
        }
        sum += attempts;
        sum_sq += attempts * attempts;
        if !delivered {
            failures += 1;
        }
    }
    let n = trials as f64;
    let mean = sum as f64 / n;
    let var = if trials > 1 {
        ((sum_sq as f64) - n * mean * mean).max(0.0) / (n - 1.0)
    } else {
        0.0
    };
    let residual = failures as f64 / n;
    Ok(HarqReport {
        e_n_retr: Estimate {
            value: mean,
            std_error: (var / n).sqrt(),
        },
        residual_loss: Estimate {
            value: residual,
            std_error: proportion_floor(residual, trials as u64),
        },
        trials: trials as u64,
    })
}
