use super::*;

#[test]
fn fill_matching_hits_the_target() {
    let omega = DomainRegion::unit_square();
    let (points, h) = generate_with_fill(&omega, 0.08, 3).unwrap();
    assert!((h / 0.08 - 1.0).abs() <= 0.1, "h = {h}");
    assert_eq!(fill_distance_refined(&points, &omega).unwrap(), h);
}

#[test]
fn config_rejects_unknown_fields_and_fills_defaults() {
    let config: SuiteConfig = serde_json::from_str(r#"{"seed": 5}"#).unwrap();
    assert_eq!(config.seed, 5);
    assert_eq!(config.cardinality_n, SuiteConfig::default().cardinality_n);
    assert!(serde_json::from_str::<SuiteConfig>(r#"{"sede": 5}"#).is_err());
}

#[test]
fn small_cardinality_and_gram_studies() {
    let config = SuiteConfig {
        cardinality_n: 60,
        reproduction_grid: 11,
        identity_n: 60,
        ..SuiteConfig::default()
    };
    let (report, timing) = run_suite(&config, Some(&[1, 2, 6]));
    let ids: Vec<u32> = report.outcomes.iter().map(|o| o.id).collect();
    assert_eq!(ids, vec![1, 2, 6]);
    assert!(report.pass(), "{}", report.to_json().unwrap());
    assert_eq!(timing.criteria.len(), 3);
}

#[test]
fn failures_become_failed_outcomes() {
    let config = SuiteConfig {
        gram_radii: vec![0.5, 0.1],
        ..SuiteConfig::default()
    };
    let (report, _) = run_suite(&config, Some(&[6]));
    let o = report.outcome(6).unwrap();
    assert!(!o.pass);
    assert!(o.error.as_deref().unwrap().contains("3 radii"));
}

#[test]
fn determinism_verdict() {
    let config = SuiteConfig {
        cardinality_n: 40,
        reproduction_grid: 5,
        ..SuiteConfig::default()
    };
    let (mut a, _) = run_suite_with_threads(&config, Some(&[1]), 1).unwrap();
    let (b, _) = run_suite_with_threads(&config, Some(&[1]), 3).unwrap();
    a.add_determinism(&b, [1, 3]).unwrap();
    assert!(a.outcome(10).unwrap().pass);
    let mut c = b.clone();
    c.outcomes[0].summary.push('!');
    let mut b = b;
    b.add_determinism(&c, [3, 3]).unwrap();
    assert!(!b.outcome(10).unwrap().pass);
}
