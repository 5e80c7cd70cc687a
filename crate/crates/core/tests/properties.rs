use proptest::prelude::*;

use phyqoe::curve_models::{load_curves, synth_curve, HarqCombining};
use phyqoe::packet_model::{combine_loss, nested_expansion, queue_steady_state, QueueConfig};
use phyqoe::qoe::{mos_game, mos_voice, GameParams, VoiceParams};
use phyqoe::service_quality::frame_error_prob;
use phyqoe::PhyCurveSet;

fn prob() -> impl Strategy<Value = f64> {
    0.0f64..=1.0
}

proptest! {
    #[test]
    fn expansion_matches_complement_product(p in proptest::array::uniform5(prob())) {
        let exact = nested_expansion(p);
        let product = 1.0 - p.iter().map(|x| 1.0 - x).product::<f64>();
        prop_assert!((exact - product).abs() <= 1e-12);
    }

    #[test]
    fn union_bound_gap_is_second_order(p in proptest::array::uniform5(0.0f64..0.2)) {
        let (exact, approx) = combine_loss(p);
        let sum: f64 = p.iter().sum();
        prop_assert!(approx >= exact);
        prop_assert!(approx - exact <= sum * sum / 2.0 + 1e-15);
    }

    #[test]
    fn synthetic_curves_are_monotone(mid in -5.0f64..20.0, slope in 0.1f64..3.0, peak in 1e5f64..1e9, s in -30.0f64..40.0, ds in 0.0f64..5.0) {
        let c = synth_curve(mid, slope, peak, "p").unwrap();
        prop_assert!(c.bler_at(s + ds) <= c.bler_at(s));
        prop_assert!(c.goodput_at(s + ds) >= c.goodput_at(s));
        prop_assert!(c.goodput_at(s) <= c.overhead() * peak * (1.0 + 1e-12));
    }

    #[test]
    fn retransmission_bler_never_increases(s in -10.0f64..25.0, gain in 0.0f64..6.0) {
        let c = synth_curve(5.0, 1.0, 2e7, "p").unwrap()
            .with_combining(HarqCombining::gain_db(gain).unwrap()).unwrap();
        let seq = c.retx_bler_sequence(s, 8);
        prop_assert!(seq.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(seq.iter().all(|b| (0.0..=1.0).contains(b)));
    }

    #[test]
    fn curve_csv_round_trips(mid in 0.0f64..10.0, slope in 0.2f64..2.0, peak in 1e6f64..1e8) {
        let c = synth_curve(mid, slope, peak, "p").unwrap();
        let back: PhyCurveSet = load_curves(&c.to_csv()).unwrap();
        prop_assert_eq!(back.sinr_grid(), c.sinr_grid());
        prop_assert_eq!(back.bler(), c.bler());
        prop_assert_eq!(back.throughput(), c.throughput());
    }

    #[test]
    fn frame_error_below_union_bound(p in 0.0f64..0.05, n in 1usize..300) {
        let pf = frame_error_prob(p, n);
        prop_assert!(pf >= p - 1e-15);
        prop_assert!(pf <= (n as f64 * p).min(1.0) + 1e-12);
    }

    #[test]
    fn queue_probabilities_are_a_distribution(rho in 0.01f64..1.0, k in 1usize..40) {
        let m = queue_steady_state(&QueueConfig::new(rho * 100.0, 100.0, k).unwrap()).unwrap();
        let total: f64 = m.state_probabilities().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(m.l_avg >= 0.0 && m.l_avg <= (k - 1) as f64 + 1e-9);
        prop_assert!((m.w_avg * m.lambda_e - m.l_avg).abs() <= 1e-9 * m.l_avg.max(1.0));
    }

    #[test]
    fn blocking_grows_with_load(rho in 0.05f64..0.95, d in 0.0f64..0.05, k in 1usize..30) {
        let lo = queue_steady_state(&QueueConfig::new(rho, 1.0, k).unwrap()).unwrap();
        let hi = queue_steady_state(&QueueConfig::new(rho + d, 1.0, k).unwrap()).unwrap();
        prop_assert!(hi.p_block >= lo.p_block * (1.0 - 1e-12));
        prop_assert!(hi.l_avg >= lo.l_avg - 1e-12);
    }

    #[test]
    fn voice_and_game_scores_stay_on_scale(loss in prob(), delay in 0.0f64..5.0) {
        let v = mos_voice(loss, delay, &VoiceParams::default()).unwrap().value;
        let g = mos_game(loss, delay, &GameParams::default()).value;
        prop_assert!((1.0..=5.0).contains(&v));
        prop_assert!((1.0..=5.0).contains(&g));
    }
}
