use netsurv::cohort::{simulate_cohort_with, Cohort, Provenance, SimulationConfig};
use netsurv::decomposition::{cause_a_contrast, decompose_trial};
use netsurv::estimands::ScenarioRow;
use netsurv::estimator::{smr, SmrConvention};
use netsurv::fixtures::{trial_arms, trial_cohort, trial_life_table, TRIAL_HORIZON};
use netsurv::hazard::{ComponentModel, Hazard};
use netsurv::lifetable::{LifeTable, Sex};

#[test]
fn fixture_arms_and_counts() {
    let c = trial_cohort().unwrap();
    let counts = c.arm_counts();
    assert_eq!(counts["placebo"], 127);
    assert_eq!(counts["estrogen"], 125);
    assert!(!c.has_cause_labels());
    assert!(c.arm("nonexistent").is_err());
}

#[test]
fn fixture_smr_matches_reported_relative_risks() {
    let (placebo, estrogen) = trial_arms().unwrap();
    let table = trial_life_table().unwrap();
    let p = smr(&placebo, &table, TRIAL_HORIZON, SmrConvention::ExpectedProbability).unwrap();
    let e = smr(&estrogen, &table, TRIAL_HORIZON, SmrConvention::ExpectedProbability).unwrap();
    assert_eq!(p.observed, 58);
    assert_eq!(e.observed, 66);
    assert_eq!(format!("{:.1}", p.ratio), "3.4");
    assert_eq!(format!("{:.1}", e.ratio), "3.9");
    // person-time expectation is smaller, so the ratio is larger
    let pt = smr(&placebo, &table, TRIAL_HORIZON, SmrConvention::PersonTime).unwrap();
    assert!(pt.expected < p.expected && pt.ratio > p.ratio);
}

#[test]
fn fixture_report_is_both_present() {
    let (placebo, estrogen) = trial_arms().unwrap();
    let r = decompose_trial(&placebo, Some(&estrogen), &trial_life_table().unwrap(), TRIAL_HORIZON).unwrap();
    assert_eq!(r.scenario_row, ScenarioRow::BothPresent);
    let text = r.to_text_table();
    for needle in ["13.5%", "45.7%", "52.8%", "3.4", "3.9", "32.1", "7.1"] {
        assert!(text.contains(needle), "missing {needle} in\n{text}");
    }
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["reference"]["deaths_other"], 58);
}

const H: f64 = 3.0;
const A: f64 = 0.2;
const B: f64 = 0.12;
const C: f64 = 0.08;
const D: f64 = 0.025;

fn arm(b: f64, c: f64, n: usize, seed: u64, label: &str) -> Cohort {
    let m = ComponentModel::new(
        Hazard::constant(A).unwrap(),
        Hazard::constant(b).unwrap(),
        Hazard::constant(c).unwrap(),
        Hazard::constant(D).unwrap(),
    );
    let mut cfg = SimulationConfig::new(n, H, 0.0, seed);
    cfg.arm = Some(label.into());
    cfg.id_prefix = format!("{label}-");
    simulate_cohort_with(&m, &cfg).unwrap()
}

/// Cumulative incidence of deaths from hazard `part` among constant
/// competing hazards summing to `total`.
fn cif(part: f64, total: f64, t: f64) -> f64 {
    part / total * (1.0 - (-total * t).exp())
}

fn table() -> LifeTable {
    LifeTable::flat(D, 60..=90, 1990..=2020, &[Sex::Male]).unwrap()
}

#[test]
fn decomposition_recovers_simulated_components() {
    let n = 40_000;
    let reference = arm(B, 0.0, n, 1, "ref");
    let treated = arm(B, C, n, 2, "trt");
    let r = decompose_trial(&reference, Some(&treated), &table(), H).unwrap();

    let d_true = 100.0 * (1.0 - (-D * H).exp());
    assert!((r.component_d_pct - d_true).abs() < 1e-9);

    let p_ref = cif(B + D, A + B + D, H);
    let p_trt = cif(B + C + D, A + B + C + D, H);
    let se_ref = 100.0 * (p_ref * (1.0 - p_ref) / n as f64).sqrt();
    let se_trt = 100.0 * (p_trt * (1.0 - p_trt) / n as f64).sqrt();
    let b_true = 100.0 * p_ref - d_true;
    let c_true = 100.0 * (p_trt - p_ref);
    assert!(
        (r.component_b_pp - b_true).abs() < 3.0 * se_ref,
        "B {} vs {b_true}",
        r.component_b_pp
    );
    let se_c = (se_ref * se_ref + se_trt * se_trt).sqrt();
    let c_hat = r.component_c_pp.unwrap();
    assert!((c_hat - c_true).abs() < 3.0 * se_c, "C {c_hat} vs {c_true}");
}

#[test]
fn competing_risks_mask_cause_a_contrast() {
    // treatment has no effect on A, yet fewer disease deaths are observed
    let n = 40_000;
    let reference = arm(0.0, 0.0, n, 3, "ref");
    let treated = arm(0.0, 0.3, n, 4, "trt");
    let contrast = cause_a_contrast(&reference, &treated, H).unwrap();
    let want = 100.0 * (cif(A, A + 0.3 + D, H) - cif(A, A + D, H));
    let p = cif(A, A + D, H);
    let se = 100.0 * (2.0 * p * (1.0 - p) / n as f64).sqrt();
    assert!(contrast.difference_pp < 0.0);
    assert!(
        (contrast.difference_pp - want).abs() < 3.0 * se,
        "{} vs {want}",
        contrast.difference_pp
    );
    assert_eq!(contrast.caveat_key, "competing_risks_masking");
}

#[test]
fn decomposition_rejects_bad_inputs() {
    let (placebo, _) = trial_arms().unwrap();
    let table = trial_life_table().unwrap();
    assert!(decompose_trial(&placebo, None, &table, 0.0).is_err());
    assert!(decompose_trial(&placebo, None, &table, f64::NAN).is_err());
    let empty = Cohort::new(Vec::new(), Provenance::Derived { from: "x".into() }).unwrap();
    assert!(decompose_trial(&empty, None, &table, 3.0).is_err());
    // a table that does not cover the cohort is a coverage error
    let narrow = LifeTable::flat(0.02, 60..=61, 1960..=1961, &[Sex::Male]).unwrap();
    let err = decompose_trial(&placebo, None, &narrow, 3.0).unwrap_err();
    assert!(err.is_data_error(), "{err}");
}
