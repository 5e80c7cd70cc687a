//! End-to-end delay budget.

use serde::{Deserialize, Serialize};

use super::PacketError;
use crate::scalar::Scalar;

/// Timing parameters of the delay and window models, in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingConfig<T> {
    pub t_protocolproc: T,
    pub t_sigproc: T,
    pub n_uu: u32,
    pub t_uu: T,
    pub t_netrelay: T,
    pub n_ho: u32,
    pub t_ho: T,
    pub t_netwin: T,
    pub t_rxwin: T,
    pub n_harq_max: usize,
}

impl<T: Scalar> TimingConfig<T> {
    /// Table defaults (1 ms protocol, 1 ms uu, 30 ms handover, 5 ms relay)
    /// plus 1 ms signal processing, one uu message, no handover and a 50 ms
    /// network window.
    pub fn with_service(t_rxwin: T, n_harq_max: usize) -> Self {
        Self {
            t_protocolproc: T::lit(1e-3),
            t_sigproc: T::lit(1e-3),
            n_uu: 1,
            t_uu: T::lit(1e-3),
            t_netrelay: T::lit(5e-3),
            n_ho: 0,
            t_ho: T::lit(30e-3),
            t_netwin: T::lit(50e-3),
            t_rxwin,
            n_harq_max,
        }
    }

    pub fn validate(&self) -> Result<(), PacketError> {
        let times = [
            ("t_protocolproc", self.t_protocolproc),
            ("t_sigproc", self.t_sigproc),
            ("t_uu", self.t_uu),
            ("t_netrelay", self.t_netrelay),
            ("t_ho", self.t_ho),
            ("t_netwin", self.t_netwin),
            ("t_rxwin", self.t_rxwin),
        ];
        for (name, t) in times {
            if !(t >= T::zero()) || !t.is_finite() {
                return Err(PacketError::InvalidTiming(format!(
                    "{name} must be >= 0, got {t}"
                )));
            }
        }
        if self.n_harq_max < 1 {
            return Err(PacketError::InvalidHarqMax(self.n_harq_max));
        }
        Ok(())
    }
}

/// Delay of one direction's HARQ procedure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkDelay<T> {
    pub e_n_retr: T,
    /// Scheduling wait charged to the first transmission.
    pub t_schedule: T,
    /// First transmission: scheduling + signal processing + uu messages.
    pub t_single_tr: T,
    /// Retransmission, scheduled without waiting.
    pub t_retx: T,
    pub t_harq: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayBudget<T> {
    pub ul: LinkDelay<T>,
    pub dl: LinkDelay<T>,
    pub t_ulharq: T,
    pub t_cn: T,
    pub t_dlharq: T,
    pub t_protocolproc: T,
    pub t_all: T,
}

pub fn single_tx_time<T: Scalar>(t_ulschedule: T, timing: &TimingConfig<T>) -> T {
    t_ulschedule + timing.t_sigproc + T::from_count(timing.n_uu as usize) * timing.t_uu
}

/// `t_first + (e_n_retr - 1) * t_retx`; equals `e_n_retr * t` when both
/// transmissions cost the same.
pub fn harq_delay<T: Scalar>(e_n_retr: T, t_first: T, t_retx: T) -> Result<T, PacketError> {
    if !(e_n_retr >= T::one()) {
        return Err(PacketError::TransmissionsBelowOne(e_n_retr.to_f64_lossy()));
    }
    Ok(t_first + (e_n_retr - T::one()) * t_retx)
}

pub fn cn_delay<T: Scalar>(timing: &TimingConfig<T>) -> T {
    timing.t_netrelay + T::from_count(timing.n_ho as usize) * timing.t_ho
}

/// Builds one direction's HARQ delay from its scheduling wait.
pub fn link_delay<T: Scalar>(
    e_n_retr: T,
    t_schedule: T,
    timing: &TimingConfig<T>,
) -> Result<LinkDelay<T>, PacketError> {
    let t_single_tr = single_tx_time(t_schedule, timing);
    let t_retx = single_tx_time(T::zero(), timing);
    let t_harq = harq_delay(e_n_retr, t_single_tr, t_retx)?;
    Ok(LinkDelay {
        e_n_retr,
        t_schedule,
        t_single_tr,
        t_retx,
        t_harq,
    })
}

pub fn e2e_delay<T: Scalar>(
    ul: LinkDelay<T>,
    dl: LinkDelay<T>,
    timing: &TimingConfig<T>,
) -> DelayBudget<T> {
    let t_cn = cn_delay(timing);
    let t_all = ul.t_harq + t_cn + dl.t_harq + T::lit(2.0) * timing.t_protocolproc;
    DelayBudget {
        ul,
        dl,
        t_ulharq: ul.t_harq,
        t_cn,
        t_dlharq: dl.t_harq,
        t_protocolproc: timing.t_protocolproc,
        t_all,
    }
}
