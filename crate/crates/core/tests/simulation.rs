use netsurv::cohort::{simulate_cohort, simulate_cohort_with, SimulationConfig, Status};
use netsurv::estimator::{kaplan_meier, EventDefinition};
use netsurv::hazard::{Component, ComponentModel, Hazard};

#[test]
fn equal_competing_hazards_split_deaths_evenly() {
    let m = ComponentModel::new(
        Hazard::constant(0.2).unwrap(),
        Hazard::constant(0.05).unwrap(),
        Hazard::constant(0.05).unwrap(),
        Hazard::constant(0.1).unwrap(),
    );
    let c = simulate_cohort(&m, 20_000, f64::INFINITY, 0.0, 5).unwrap();
    let deaths = c.records().iter().filter(|r| r.status.is_death()).count();
    assert_eq!(deaths, c.len());
    let cancer = c.records().iter().filter(|r| r.status == Status::DeathCancer).count();
    let frac = cancer as f64 / deaths as f64;
    assert!((frac - 0.5).abs() < 0.02, "cause-A fraction {frac}");
    let d_share = c
        .records()
        .iter()
        .filter(|r| r.true_cause == Some(Component::D))
        .count() as f64
        / deaths as f64;
    assert!((d_share - 0.25).abs() < 0.02, "D share {d_share}");
}

#[test]
fn km_of_constant_hazard_hits_closed_form() {
    let m = ComponentModel::new(Hazard::constant(0.5).unwrap(), Hazard::Zero, Hazard::Zero, Hazard::Zero);
    let c = simulate_cohort(&m, 20_000, 3.0, 0.1, 17).unwrap();
    let km = kaplan_meier(&c, &EventDefinition::AllDeaths).unwrap();
    let want = (-0.5f64).exp();
    assert!(
        (km.value_at(1.0) - want).abs() < 0.006,
        "{} vs {want}",
        km.value_at(1.0)
    );
}

#[test]
fn administrative_censoring_caps_follow_up() {
    let m = ComponentModel::new(Hazard::constant(0.1).unwrap(), Hazard::Zero, Hazard::Zero, Hazard::Zero);
    let c = simulate_cohort(&m, 2_000, 2.0, 0.0, 1).unwrap();
    assert!(c.records().iter().all(|r| r.follow_up_time <= 2.0));
    let censored: Vec<_> = c.records().iter().filter(|r| r.status == Status::Censored).collect();
    assert!(!censored.is_empty());
    assert!(censored
        .iter()
        .all(|r| r.follow_up_time == 2.0 && r.true_cause.is_none()));
}

#[test]
fn seeds_and_parallelism() {
    let m = ComponentModel::new(
        Hazard::weibull(1.5, 5.3).unwrap(),
        Hazard::constant(0.02).unwrap(),
        Hazard::piecewise(vec![1.0], vec![0.1, 0.0]).unwrap(),
        Hazard::constant(0.025).unwrap(),
    );
    let mut cfg = SimulationConfig::new(3_000, 8.0, 0.02, 9);
    let serial = simulate_cohort_with(&m, &cfg).unwrap();
    cfg.parallel = true;
    assert_eq!(simulate_cohort_with(&m, &cfg).unwrap().records(), serial.records());
    cfg.seed = 10;
    assert_ne!(simulate_cohort_with(&m, &cfg).unwrap().records(), serial.records());
    // C hazard stops at t = 1, so no treatment-induced deaths after it
    assert!(serial
        .records()
        .iter()
        .filter(|r| r.true_cause == Some(Component::C))
        .all(|r| r.follow_up_time <= 1.0));
}

#[test]
fn invalid_configurations_are_rejected() {
    let m = ComponentModel::zero();
    assert!(simulate_cohort(&m, 10, f64::INFINITY, 0.0, 1).is_err());
    assert!(simulate_cohort(&m, 0, 5.0, 0.0, 1).is_err());
    assert!(simulate_cohort(&m, 10, -1.0, 0.0, 1).is_err());
    assert!(simulate_cohort(&m, 10, 5.0, -0.1, 1).is_err());
    let all_censored = simulate_cohort(&m, 10, 5.0, 0.0, 1).unwrap();
    assert!(all_censored.records().iter().all(|r| r.status == Status::Censored));
}
