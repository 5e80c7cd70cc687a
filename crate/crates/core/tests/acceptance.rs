//! Exit criteria. Each test prints one `PASS`/`FAIL` line, then asserts it.
//! Run with `cargo test --test acceptance -- --nocapture --test-threads=1`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use phyqoe::cascade::{evaluate, sweep};
use phyqoe::curve_models::synth_curve;
use phyqoe::oracle_sim::{simulate_harq, simulate_mm1k, Estimate, SimConfig};
use phyqoe::packet_model::{
    combine_loss, expected_transmissions, queue_steady_state, residual_phy_loss, window_loss,
    HarqMode, QueueConfig,
};
use phyqoe::qoe::{mos_game, mos_video, mos_voice, GameParams, VideoParams, VoiceParams};
use phyqoe::scenario::Scenario;
use phyqoe::service_quality::{indicators_for, ServiceKind, ServiceProfile};
use phyqoe::validation::{validate, CheckStatus, ValidationInput};

fn verdict(id: u32, title: &str, pass: bool, detail: &str) {
    println!(
        "criterion {id} [{}] {title}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

const SEED: u64 = 2024;
const SIGMAS: f64 = 3.0;

#[test]
fn criterion_1_queue_oracle_equivalence() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut cells = 0;
    for rho in [0.3, 0.7, 0.95, 1.0] {
        for k in [4, 10, 16] {
            let cfg = QueueConfig::new(rho, 1.0, k).unwrap();
            let analytic = queue_steady_state(&cfg).unwrap();
            let sim = simulate_mm1k(&cfg, 0.3, &SimConfig::new(SEED, 1_000_000)).unwrap();
            let quantities: [(&str, f64, Estimate); 3] = [
                ("p_block", analytic.p_block, sim.p_block),
                ("l_avg", analytic.l_avg, sim.l_avg),
                ("w_avg", analytic.w_avg, sim.w_avg),
            ];
            for (name, reference, est) in quantities {
                cells += 1;
                let in_sigma = est.within_sigmas(reference, SIGMAS);
                let in_rel = rho > 0.95 || est.within_relative(reference, 0.02);
                let line = format!(
                    "rho={rho} K={k} {name}: analytic {reference:.6e} simulated {:.6e} se {:.2e} rel {:+.2}%",
                    est.value,
                    est.std_error,
                    100.0 * (est.value - reference) / reference
                );
                println!(
                    "  {} {line}",
                    if in_sigma && in_rel { "ok  " } else { "MISS" }
                );
                if !in_sigma || !in_rel {
                    failures.push(format!(
                        "{line} ({})",
                        if in_sigma {
                            "outside 2% relative"
                        } else {
                            "outside 3 se"
                        }
                    ));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let fast = elapsed < Duration::from_secs(60);
    let pass = failures.is_empty() && fast;
    verdict(
        1,
        "queue oracle equivalence",
        pass,
        &format!(
            "{}/{cells} checks within tolerance, {:.1} s",
            cells - failures.len(),
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass, "failing cells:\n{}", failures.join("\n"));
}

#[test]
fn criterion_2_loss_composition_algebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let n = 20_000;
    let mut worst = 0.0f64;
    let mut dominance_violations = 0;
    for i in 0..n {
        let p: [f64; 5] = std::array::from_fn(|_| {
            let u: f64 = rng.random();
            // half the vectors log-uniform down to 1e-12
            if i % 2 == 0 {
                u
            } else {
                10f64.powf(-12.0 * u)
            }
        });
        let (exact, approx) = combine_loss(p);
        let product = 1.0 - p.iter().map(|x| 1.0 - x).product::<f64>();
        worst = worst.max((exact - product).abs());
        if approx < exact {
            dominance_violations += 1;
        }
    }
    let pass = worst <= 1e-12 && dominance_violations == 0;
    verdict(
        2,
        "loss composition algebra",
        pass,
        &format!("{n} vectors, max |expansion - product| {worst:.2e}, {dominance_violations} dominance violations"),
    );
    assert!(pass);
}

#[test]
fn criterion_3_harq_oracle() {
    let seq = [0.1; 4];
    let sim = simulate_harq(&seq, 4, 1_000_000, SEED).unwrap();
    let cumulative = expected_transmissions(&seq, 4, HarqMode::CumulativeProduct).unwrap();
    let verbatim = expected_transmissions(&seq, 4, HarqMode::PaperVerbatim).unwrap();
    let residual = residual_phy_loss(&seq, 4).unwrap();

    let report = validate(&ValidationInput {
        queue: QueueConfig::new(0.5, 1.0, 10).unwrap(),
        rx_window: 0.3,
        bler_seq: seq.to_vec(),
        n_max: 4,
        harq_mode: HarqMode::PaperVerbatim,
        sim: SimConfig::new(SEED, 100_000),
        harq_trials: 100_000,
    })
    .unwrap();
    let flagged = report.has_divergence()
        && report.check("e_n_retr").map(|c| c.status) == Some(CheckStatus::ExpectedDivergence);

    let mean_ok = (cumulative - 1.111).abs() < 1e-12 && sim.e_n_retr.within_sigmas(1.111, SIGMAS);
    let residual_ok =
        (residual - 1e-4).abs() < 1e-16 && sim.residual_loss.within_sigmas(1e-4, SIGMAS);
    let verbatim_ok = verbatim == 1.9;
    let pass = mean_ok && residual_ok && verbatim_ok && flagged;
    verdict(
        3,
        "HARQ oracle",
        pass,
        &format!(
            "simulated E[N] {:.5} (se {:.1e}) vs {cumulative}, residual {:.2e} (se {:.1e}) vs {residual:e}, verbatim {verbatim}, divergence flagged: {flagged}",
            sim.e_n_retr.value, sim.e_n_retr.std_error, sim.residual_loss.value, sim.residual_loss.std_error
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_4_closed_form_spot_values() {
    let m = queue_steady_state(&QueueConfig::new(1.0f64, 1.0, 16).unwrap()).unwrap();
    let w: f64 = window_loss(2.0, 1.0, 0.3).unwrap();
    let errs = [
        (m.p0 - 1.0 / 17.0).abs(),
        (m.l_avg - 120.0 / 17.0).abs(),
        (w - (-0.3f64).exp()).abs(),
    ];
    let pass = errs.iter().all(|e| *e <= 1e-12);
    verdict(
        4,
        "closed-form spot values",
        pass,
        &format!(
            "p0 {} l_avg {} window {}; errors {:.1e} {:.1e} {:.1e}",
            m.p0, m.l_avg, w, errs[0], errs[1], errs[2]
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_5_mos_drops_less_than_goodput() {
    let mid = 5.0;
    let mut points = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut pass = true;
    for kind in [ServiceKind::VoiceCall, ServiceKind::MobileGame] {
        let a = Scenario::preset(kind);
        let mut b = a.clone();
        b.ul_curves = synth_curve(mid, 1.0, 1e7, "half peak").unwrap();
        b.dl_curves = b.ul_curves.clone();
        assert_eq!(a.ul_curves.bler(), b.ul_curves.bler());

        let ra = sweep(&a, mid + 5.0, mid + 15.0, 0.5).unwrap();
        let rb = sweep(&b, mid + 5.0, mid + 15.0, 0.5).unwrap();
        for (x, y) in ra.iter().zip(&rb) {
            points += 1;
            let goodput_drop = (x.goodput_bps - y.goodput_bps) / x.goodput_bps;
            let mos_drop = (x.mos - y.mos) / x.mos;
            worst = worst.max(mos_drop - goodput_drop);
            let below = mos_drop < goodput_drop;
            if !below {
                pass = false;
                println!(
                    "  MISS {kind} at {} dB: mos drop {mos_drop} goodput drop {goodput_drop}",
                    x.sinr_db
                );
            }
        }
    }
    verdict(
        5,
        "relative MOS drop below relative goodput drop",
        pass,
        &format!("{points} sweep points, max (mos drop - goodput drop) {worst:.4}"),
    );
    assert!(pass);
}

fn axis(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Checks a 2-D grid is non-increasing along both axes and inside [1, 5].
fn monotone_grid(grid: &[Vec<f64>]) -> bool {
    let on_scale = grid.iter().flatten().all(|v| (1.0..=5.0).contains(v));
    let rows = grid
        .iter()
        .all(|r| r.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    let cols = (0..grid[0].len()).all(|j| grid.windows(2).all(|w| w[1][j] <= w[0][j] + 1e-12));
    on_scale && rows && cols
}

#[test]
fn criterion_6_mos_contracts() {
    let losses = axis(32, 0.0, 1.0);
    let delays = axis(32, 0.0, 1.5);

    let voice_params = VoiceParams::default();
    let voice: Vec<Vec<f64>> = losses
        .iter()
        .map(|&l| {
            delays
                .iter()
                .map(|&d| mos_voice(l, d, &voice_params).unwrap().value)
                .collect()
        })
        .collect();
    let game_params = GameParams::default();
    let game: Vec<Vec<f64>> = losses
        .iter()
        .map(|&l| {
            delays
                .iter()
                .map(|&d| mos_game(l, d, &game_params).value)
                .collect()
        })
        .collect();

    // video: stalled time x stall count x bitrate, 10^3 points
    let video_params = VideoParams::default();
    let base = indicators_for(
        &ServiceProfile::preset(ServiceKind::BufferedVideo),
        0.0,
        0.05,
    )
    .unwrap();
    let stall_times = axis(10, 0.0, 1.0);
    let stall_counts = axis(10, 0.0, 30.0);
    let bitrates = axis(10, 2e5, 2e7);
    let mut video_ok = true;
    let mut video_points = 0;
    for &br in &bitrates {
        let grid: Vec<Vec<f64>> = stall_times
            .iter()
            .map(|&t| {
                stall_counts
                    .iter()
                    .map(|&n| {
                        video_points += 1;
                        let ind = phyqoe::ServiceQualityIndicators {
                            stall_duration: t,
                            stall_events: n,
                            bitrate: br,
                            ..base.clone()
                        };
                        mos_video(&ind, &video_params).value
                    })
                    .collect()
            })
            .collect();
        video_ok &= monotone_grid(&grid);
    }
    // non-decreasing in bitrate at every (stall time, stall count)
    for &t in &stall_times {
        for &n in &stall_counts {
            let scores: Vec<f64> = bitrates
                .iter()
                .map(|&br| {
                    let ind = phyqoe::ServiceQualityIndicators {
                        stall_duration: t,
                        stall_events: n,
                        bitrate: br,
                        ..base.clone()
                    };
                    mos_video(&ind, &video_params).value
                })
                .collect();
            video_ok &= scores.windows(2).all(|w| w[1] >= w[0] - 1e-12);
        }
    }
    // and non-increasing in packet loss through the indicator layer
    let profile = ServiceProfile::preset(ServiceKind::VideoCall);
    let by_loss: Vec<f64> = axis(1000, 0.0, 1.0)
        .iter()
        .map(|&p| mos_video(&indicators_for(&profile, p, 0.05).unwrap(), &video_params).value)
        .collect();
    video_ok &= by_loss.windows(2).all(|w| w[1] <= w[0] + 1e-12);

    let voice_ok = monotone_grid(&voice);
    let game_ok = monotone_grid(&game);
    let pass = voice_ok && game_ok && video_ok;
    verdict(
        6,
        "MOS contracts",
        pass,
        &format!(
            "voice {} pts {voice_ok}, game {} pts {game_ok}, video {video_points}+{} pts {video_ok}",
            losses.len() * delays.len(),
            losses.len() * delays.len(),
            by_loss.len()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_end_to_end_determinism() {
    let start = Instant::now();
    let mut identical = 0;
    for kind in ServiceKind::ALL {
        let first = evaluate(&Scenario::preset(kind)).unwrap().to_json();
        let second = evaluate(&Scenario::preset(kind)).unwrap().to_json();
        if first.as_bytes() == second.as_bytes() {
            identical += 1;
        }
    }
    let pass = identical == ServiceKind::ALL.len();
    verdict(
        7,
        "end-to-end determinism",
        pass,
        &format!(
            "{identical}/{} presets byte-identical across runs ({:.2} s); suite wall time is reported by cargo",
            ServiceKind::ALL.len(),
            start.elapsed().as_secs_f64()
        ),
    );
    assert!(pass);
}
