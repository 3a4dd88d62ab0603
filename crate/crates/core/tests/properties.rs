use proptest::prelude::*;

use netsurv::cohort::{load_cohort, Cohort, Provenance, Status, SubjectRecord};
use netsurv::estimands::{build_scenario, survival, EstimandKind, ScenarioSpec};
use netsurv::estimator::{kaplan_meier, pohar_perme, EventDefinition};
use netsurv::hazard::{Component, ComponentModel, Hazard};
use netsurv::lifetable::{DemographicProfile, LifeTable, Sex};

fn hazard() -> impl Strategy<Value = Hazard> {
    prop_oneof![
        Just(Hazard::Zero),
        (0.0..2.0f64).prop_map(|r| Hazard::constant(r).unwrap()),
        (0.5..3.0f64, 0.5..10.0f64).prop_map(|(k, s)| Hazard::weibull(k, s).unwrap()),
        (
            prop::collection::vec(0.05..3.0f64, 1..4),
            prop::collection::vec(0.0..1.5f64, 5)
        )
            .prop_map(|(gaps, rates)| {
                let mut acc = 0.0;
                let breaks: Vec<f64> = gaps
                    .iter()
                    .map(|g| {
                        acc += g;
                        acc
                    })
                    .collect();
                let rates = rates[..breaks.len() + 1].to_vec();
                Hazard::piecewise(breaks, rates).unwrap()
            }),
    ]
}

fn model() -> impl Strategy<Value = ComponentModel> {
    (hazard(), hazard(), hazard(), hazard()).prop_map(|(a, b, c, d)| ComponentModel::new(a, b, c, d))
}

fn kinds() -> Vec<EstimandKind> {
    vec![
        EstimandKind::Overall,
        EstimandKind::Net,
        EstimandKind::DiseaseAttributable,
        EstimandKind::DiseaseSpecific,
        EstimandKind::cause_specific(0.3).unwrap(),
    ]
}

proptest! {
    #[test]
    fn overall_survival_is_product_of_components(m in model(), t in 0.01..15.0f64) {
        let product: f64 = Component::ALL.iter().map(|c| m.component(*c).survival(t).unwrap()).product();
        let s = survival(&m, EstimandKind::Overall, t).unwrap();
        prop_assert!((s - product).abs() <= 1e-12 * (1.0 + product));
        let total: f64 = Component::ALL.iter().map(|c| m.component(*c).cumulative(t).unwrap()).sum();
        prop_assert!((m.weighted_cumulative([1.0; 4], t).unwrap() - total).abs() <= 1e-12 * (1.0 + total));
    }

    #[test]
    fn estimands_are_ordered_and_bounded(m in model(), t in 0.0..15.0f64, dt in 0.0..3.0f64) {
        let v = |k| survival(&m, k, t).unwrap();
        let overall = v(EstimandKind::Overall);
        let net = v(EstimandKind::Net);
        let da = v(EstimandKind::DiseaseAttributable);
        let ds = v(EstimandKind::DiseaseSpecific);
        prop_assert!(overall <= net && net <= da && da <= ds);
        for k in kinds() {
            let s0 = survival(&m, k, t).unwrap();
            let s1 = survival(&m, k, t + dt).unwrap();
            prop_assert!((0.0..=1.0).contains(&s0));
            prop_assert!(s1 <= s0);
        }
    }

    #[test]
    fn relative_risk_identity(m in model(), t in 0.01..15.0f64) {
        let d = m.background.hazard_at(t).unwrap();
        prop_assume!(d > 1e-6);
        let direct = m.relative_risk(t).unwrap();
        let excess = m.relative_risk_excess_form(t).unwrap();
        let want = (m.baseline_excess.hazard_at(t).unwrap() + m.treatment_induced.hazard_at(t).unwrap() + d) / d;
        prop_assert!((direct - want).abs() <= 1e-10 * want);
        prop_assert!((excess - want).abs() <= 1e-10 * want);
    }

    #[test]
    fn gap_is_invariant_to_allocation(rr in 1.0..6.0f64, f1 in 0.0..=1.0f64, f2 in 0.0..=1.0f64, t in 0.0..10.0f64) {
        let gap = |f| {
            let m = build_scenario(&ScenarioSpec::new(rr, f)).unwrap();
            survival(&m, EstimandKind::DiseaseSpecific, t).unwrap() - survival(&m, EstimandKind::Net, t).unwrap()
        };
        prop_assert!((gap(f1) - gap(f2)).abs() <= 1e-12);
    }

    #[test]
    fn inverse_cumulative_round_trips(h in hazard(), target in 0.0..5.0f64) {
        let t = h.inverse_cumulative(target).unwrap();
        if t.is_finite() {
            prop_assert!((h.cumulative(t).unwrap() - target).abs() <= 1e-9 * (1.0 + target));
        } else {
            prop_assert!(h.cumulative(1e6).unwrap() < target + 1e-9);
        }
    }
}

fn record_strategy() -> impl Strategy<Value = Vec<(u8, u8, f64)>> {
    prop::collection::vec((0u8..8, 0u8..3, 60.0..80.0f64), 1..40)
}

fn build(records: &[(u8, u8, f64)]) -> Vec<SubjectRecord> {
    records
        .iter()
        .enumerate()
        .map(|(i, (t, s, age))| {
            let status = [Status::Censored, Status::DeathCancer, Status::DeathOther][*s as usize];
            SubjectRecord {
                id: format!("p{i:03}"),
                profile: DemographicProfile::new(*age, Sex::Female, 2001).unwrap(),
                // coarse times force ties
                follow_up_time: 0.5 + *t as f64 * 0.5,
                status,
                true_cause: None,
                arm: None,
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn estimators_ignore_record_order(raw in record_strategy(), rotate in 0usize..40) {
        let recs = build(&raw);
        let mut shuffled = recs.clone();
        shuffled.reverse();
        let k = rotate % shuffled.len();
        shuffled.rotate_left(k);
        let a = Cohort::new(recs, Provenance::Derived { from: "a".into() }).unwrap();
        let b = Cohort::new(shuffled, Provenance::Derived { from: "b".into() }).unwrap();
        let table = LifeTable::flat(0.03, 55..=90, 1995..=2010, &[Sex::Female]).unwrap();
        prop_assert_eq!(kaplan_meier(&a, &EventDefinition::AllDeaths).unwrap(), kaplan_meier(&b, &EventDefinition::AllDeaths).unwrap());
        prop_assert_eq!(pohar_perme(&a, &table).unwrap(), pohar_perme(&b, &table).unwrap());
    }

    #[test]
    fn km_stays_in_unit_interval_and_decreases(raw in record_strategy()) {
        let c = Cohort::new(build(&raw), Provenance::Derived { from: "t".into() }).unwrap();
        let km = kaplan_meier(&c, &EventDefinition::AllDeaths).unwrap();
        prop_assert!(km.values.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!(km.values.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn cohort_csv_round_trips(raw in record_strategy()) {
        let c = Cohort::new(build(&raw), Provenance::Derived { from: "t".into() }).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let back = load_cohort(buf.as_slice(), "mem").unwrap();
        prop_assert_eq!(back.records(), c.records());
    }
}
