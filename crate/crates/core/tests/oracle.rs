use rendezvous_core::oracle::{compare_monte_carlo, enumerate};
use rendezvous_core::{EnumerationSpec, WorldConfig};

fn spec(n: usize, d: f64, h: u32) -> EnumerationSpec {
    EnumerationSpec::new(WorldConfig::equidistant(n, d, 1.28), h)
}

#[test]
fn no_followup_violations_for_three_robots() {
    for d in [0.5, 1.0, 2.0] {
        let rep = enumerate(&spec(3, d, 6)).unwrap();
        assert_eq!(rep.scripts, 1 << 18);
        assert!(rep.followup_checked > 0, "d={d}: nothing was checked");
        assert_eq!(
            rep.followup_violation_count,
            0,
            "d={d}: first violations {:?}",
            &rep.followup_violations[..rep.followup_violations.len().min(3)]
        );
    }
}

#[test]
fn no_followup_violations_for_four_robots() {
    let rep = enumerate(&spec(4, 1.0, 4)).unwrap();
    assert!(rep.followup_checked > 0);
    assert_eq!(
        rep.followup_violation_count,
        0,
        "{:?}",
        rep.followup_violations.first()
    );
}

#[test]
fn longer_horizon_refines_without_changing_early_rounds() {
    let short = enumerate(&spec(3, 1.0, 4)).unwrap();
    let long = enumerate(&spec(3, 1.0, 5)).unwrap();
    for i in 0..4 {
        assert!(
            (short.rendezvous_probability_by_round[i] - long.rendezvous_probability_by_round[i])
                .abs()
                < 1e-15,
            "round {i}"
        );
    }
    assert!(long.rendezvous_probability >= short.rendezvous_probability);
    let total = long.rendezvous_probability + long.residual_probability;
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn monte_carlo_agrees_with_enumeration() {
    let s = spec(3, 1.0, 6);
    let exact = enumerate(&s).unwrap();
    let cmp = compare_monte_carlo(&s, &exact, 20_000, 5).unwrap();
    assert!(cmp.within_3se, "{cmp:?}");
}
