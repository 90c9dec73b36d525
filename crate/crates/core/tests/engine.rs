use proptest::prelude::*;
use rendezvous_core::{run, CoinScript, CoinSource, Direction, Mode, WorldConfig};

fn positions(n: usize, d: f64, interior: &[f64]) -> Vec<f64> {
    let mut xs = vec![0.0, d];
    xs.extend(interior.iter().take(n - 2).map(|u| u * d));
    xs.sort_by(f64::total_cmp);
    xs
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn seeded_runs_keep_invariants(
        n in 3usize..=16,
        d in 1.0f64..200.0,
        r in prop::sample::select(vec![1.1, 1.2, 1.28, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9]),
        interior in prop::collection::vec(0.0f64..1.0, 14),
        seed in any::<u64>(),
    ) {
        let config = WorldConfig::new(positions(n, d, &interior), r);
        let trace = run(config, CoinSource::seeded(seed)).unwrap();
        prop_assert!(trace.check_invariants().is_ok(), "{:?}", trace.check_invariants());
        prop_assert!(trace.rendezvous_achieved);
        let i = trace.rendezvous_round.unwrap() as i32;
        let reach = if i == 0 { 0.0 } else { r.powi(2 * i - 1) };
        let x = trace.rendezvous_position.unwrap();
        prop_assert!(x >= -reach - 1e-9 && x <= d + reach + 1e-9, "x={} outside reach {}", x, reach);
    }

    #[test]
    fn runs_are_deterministic(n in 3usize..=8, d in 1.0f64..50.0, seed in any::<u64>()) {
        let config = WorldConfig::equidistant(n, d, 1.28);
        let a = run(config.clone(), CoinSource::seeded(seed)).unwrap();
        let b = run(config, CoinSource::seeded(seed)).unwrap();
        prop_assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }

    #[test]
    fn scripted_runs_keep_invariants(n in 3usize..=5, d in 0.5f64..4.0, index in any::<u64>()) {
        let script = CoinScript::from_index(n, 5, index);
        let trace = run(WorldConfig::equidistant(n, d, 1.28), CoinSource::script(script)).unwrap();
        prop_assert!(trace.check_invariants().is_ok(), "{:?}", trace.check_invariants());
    }
}

#[test]
fn three_robot_example() {
    let script = CoinScript::parse("R\nL\nL").unwrap();
    let trace = run(
        WorldConfig::new(vec![0.0, 0.5, 1.0], 1.28),
        CoinSource::script(script),
    )
    .unwrap();
    assert!(trace.rendezvous_achieved);
    assert!((trace.rendezvous_time.unwrap() - 0.75).abs() < 1e-9);
    assert!((trace.rendezvous_position.unwrap() - 0.25).abs() < 1e-9);
    assert!((trace.max_distance() - 0.75).abs() < 1e-9);
    assert!((trace.distance_ratio() - 1.5).abs() < 1e-9);
    assert_eq!(trace.events.len(), 2);
    assert!(trace.events[0].reactions[0].is_single_single());
    let modes: Vec<Mode> = trace.robots.iter().map(|r| r.final_mode).collect();
    assert_eq!(modes, vec![Mode::BoundaryT, Mode::BoundaryT, Mode::Single]);
}

#[test]
fn identical_coins_never_meet() {
    let script = CoinScript::uniform(3, 8, Direction::Right);
    let trace = run(
        WorldConfig::equidistant(3, 1.0, 1.28),
        CoinSource::script(script),
    )
    .unwrap();
    assert!(!trace.rendezvous_achieved);
    assert!(trace.events.is_empty());
    assert_eq!(trace.rounds_used, 8);
    assert!(trace.check_invariants().is_ok());
}

#[test]
fn coincident_start_counts_as_a_meeting() {
    let script = CoinScript::uniform(3, 4, Direction::Left);
    let trace = run(
        WorldConfig::new(vec![0.0, 0.0, 1.0], 1.28),
        CoinSource::script(script),
    )
    .unwrap();
    let first = &trace.events[0];
    assert_eq!(first.time, 0.0);
    assert_eq!(first.participants, vec![0, 1]);
    assert!(first.reactions[0].is_single_single());
}

#[test]
fn trace_serializes() {
    let trace = run(
        WorldConfig::equidistant(5, 20.0, 1.28),
        CoinSource::seeded(9),
    )
    .unwrap();
    let csv = trace.to_csv().unwrap();
    assert_eq!(csv.lines().count(), 6);
    let back: rendezvous_core::Trace = serde_json::from_str(&trace.to_json().unwrap()).unwrap();
    assert_eq!(back, trace);
}
