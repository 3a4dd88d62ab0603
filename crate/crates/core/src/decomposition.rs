//! Fixed-horizon decomposition of a one- or two-arm cohort into Components
//! A, B, C and D.
//!
//! - D is the cohort-average expected (life-table) death probability by the
//!   horizon, computed for every subject over the full common horizon.
//! - B is the reference arm's other-cause death percentage minus D.
//! - C is the treated arm's other-cause percentage minus the reference arm's.
//!
//! Attributing the whole reference excess to B and the whole between-arm
//! difference to C assumes randomization balances B across arms. Percentages
//! keep full precision; rounding to one decimal happens only in
//! [`DecompositionReport::to_text_table`].

use std::fmt::Write as _;

use serde::Serialize;

use crate::cohort::{Cohort, Status};
use crate::error::{Error, Result};
use crate::estimands::ScenarioRow;
use crate::lifetable::LifeTable;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArmSummary {
    pub label: String,
    pub n: usize,
    pub deaths_cause_a: usize,
    pub deaths_cause_a_pct: f64,
    pub deaths_other: usize,
    pub other_cause_pct: f64,
    /// Expected death percentage for this arm alone.
    pub expected_pct: f64,
    /// other_cause_pct / component_d_pct.
    pub rr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub horizon: f64,
    pub reference: ArmSummary,
    pub treated: Option<ArmSummary>,
    pub component_d_pct: f64,
    pub component_b_pp: f64,
    pub component_c_pp: Option<f64>,
    pub one_arm: bool,
    pub scenario_row: ScenarioRow,
    pub identification_assumption: &'static str,
    pub narrative_keys: Vec<&'static str>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecomposeOptions {
    /// A component estimate above this many percentage points counts as
    /// present when classifying the scenario.
    pub presence_threshold_pp: f64,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self {
            presence_threshold_pp: 0.5,
        }
    }
}

fn arm_label(c: &Cohort, fallback: &str) -> String {
    c.records()
        .first()
        .and_then(|r| r.arm.clone())
        .unwrap_or_else(|| fallback.to_string())
}

/// Sum of expected death probabilities by `horizon`.
fn expected_deaths(arm: &Cohort, table: &LifeTable, horizon: f64) -> Result<f64> {
    let mut recs: Vec<_> = arm.records().iter().collect();
    recs.sort_by(|a, b| a.id.cmp(&b.id));
    recs.iter()
        .map(|r| Ok(1.0 - table.expected_survival(&r.profile, horizon)?))
        .sum()
}

struct ArmCounts {
    n: usize,
    cause_a: usize,
    other: usize,
}

fn count_deaths(arm: &Cohort, horizon: f64) -> ArmCounts {
    let within = |s: Status| {
        arm.records()
            .iter()
            .filter(|r| r.status == s && r.follow_up_time <= horizon)
            .count()
    };
    ArmCounts {
        n: arm.len(),
        cause_a: within(Status::DeathCancer),
        other: within(Status::DeathOther),
    }
}

fn pct(count: usize, n: usize) -> f64 {
    100.0 * count as f64 / n as f64
}

pub fn decompose_trial(
    reference: &Cohort,
    treated: Option<&Cohort>,
    table: &LifeTable,
    horizon: f64,
) -> Result<DecompositionReport> {
    decompose_trial_with(reference, treated, table, horizon, DecomposeOptions::default())
}

pub fn decompose_trial_with(
    reference: &Cohort,
    treated: Option<&Cohort>,
    table: &LifeTable,
    horizon: f64,
    options: DecomposeOptions,
) -> Result<DecompositionReport> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::Validation(format!(
            "horizon must be finite and > 0, got {horizon}"
        )));
    }
    reference.require_nonempty()?;
    if let Some(t) = treated {
        t.require_nonempty()?;
    }

    let ref_expected = expected_deaths(reference, table, horizon)?;
    let treated_expected = treated.map(|t| expected_deaths(t, table, horizon)).transpose()?;
    let n_total = reference.len() + treated.map_or(0, Cohort::len);
    let component_d_pct = 100.0 * (ref_expected + treated_expected.unwrap_or(0.0)) / n_total as f64;
    if component_d_pct <= 0.0 {
        return Err(Error::UndefinedRatio(
            "expected other-cause mortality is zero; relative risk undefined".into(),
        ));
    }

    let summarize = |arm: &Cohort, expected: f64, fallback: &str| {
        let c = count_deaths(arm, horizon);
        let other_cause_pct = pct(c.other, c.n);
        ArmSummary {
            label: arm_label(arm, fallback),
            n: c.n,
            deaths_cause_a: c.cause_a,
            deaths_cause_a_pct: pct(c.cause_a, c.n),
            deaths_other: c.other,
            other_cause_pct,
            expected_pct: 100.0 * expected / c.n as f64,
            rr: other_cause_pct / component_d_pct,
        }
    };
    let reference_summary = summarize(reference, ref_expected, "reference");
    let treated_summary = treated.map(|t| summarize(t, treated_expected.expect("computed with arm"), "treated"));

    let component_b_pp = reference_summary.other_cause_pct - component_d_pct;
    let component_c_pp = treated_summary
        .as_ref()
        .map(|t| t.other_cause_pct - reference_summary.other_cause_pct);

    let b_present = component_b_pp > options.presence_threshold_pp;
    let c_present = component_c_pp.is_some_and(|c| c > options.presence_threshold_pp);
    let scenario_row = match (b_present, c_present) {
        (false, false) => ScenarioRow::None,
        (true, false) => ScenarioRow::BaselineOnly,
        (false, true) => ScenarioRow::TreatmentOnly,
        (true, true) => ScenarioRow::BothPresent,
    };

    let mut narrative_keys = vec![scenario_row.relation_key()];
    if b_present {
        narrative_keys.push("baseline_excess_in_reference_arm");
    }
    if c_present {
        narrative_keys.push("treatment_induced_excess_in_treated_arm");
    }
    if treated.is_none() {
        narrative_keys.push("one_arm_no_component_c");
    }

    Ok(DecompositionReport {
        horizon,
        one_arm: treated.is_none(),
        reference: reference_summary,
        treated: treated_summary,
        component_d_pct,
        component_b_pp,
        component_c_pp,
        scenario_row,
        identification_assumption: "randomization_balances_component_b_across_arms",
        narrative_keys,
    })
}

impl DecompositionReport {
    /// Fixed-width table: one row for the general population, one per arm,
    /// then the B and C lines. Values rounded to one decimal.
    pub fn to_text_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<32} {:>5} {:>16} {:>12} {:>9} {:>9}",
            "Group", "N", "Cause-A deaths", "Other deaths", "% Other", "RR"
        );
        let _ = writeln!(
            s,
            "{:<32} {:>5} {:>16} {:>12} {:>8.1}% {:>9.1}",
            "General population (D)", "-", "-", "-", self.component_d_pct, 1.0
        );
        let mut row = |arm: &ArmSummary, parts: &str| {
            let _ = writeln!(
                s,
                "{:<32} {:>5} {:>16} {:>12} {:>8.1}% {:>9.1}",
                format!("{} ({parts})", arm.label),
                arm.n,
                format!("{} ({:.1}%)", arm.deaths_cause_a, arm.deaths_cause_a_pct),
                arm.deaths_other,
                arm.other_cause_pct,
                arm.rr
            );
        };
        row(&self.reference, "D + B");
        if let Some(t) = &self.treated {
            row(t, "D + B + C");
        }
        let _ = writeln!(
            s,
            "Component B (baseline differences): {:.1} percentage points",
            self.component_b_pp
        );
        match self.component_c_pp {
            Some(c) => {
                let _ = writeln!(s, "Component C (treatment-induced): {c:.1} percentage points");
            }
            None => {
                let _ = writeln!(s, "Component C: not estimable from a single arm");
            }
        }
        let _ = writeln!(s, "Horizon: {} years", self.horizon);
        s
    }
}

/// Treated-minus-reference difference in disease-death percentages.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauseAContrast {
    pub horizon: f64,
    pub reference_pct: f64,
    pub treated_pct: f64,
    pub difference_pp: f64,
    pub caveat_key: &'static str,
    pub caveat: &'static str,
}

pub const COMPETING_RISKS_CAVEAT: &str = "treatment-induced other-cause deaths remove patients before they can \
die of the disease, so a lower disease-death percentage in the treated arm can reflect competing risks \
rather than benefit";

pub fn cause_a_contrast(reference: &Cohort, treated: &Cohort, horizon: f64) -> Result<CauseAContrast> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::Validation(format!(
            "horizon must be finite and > 0, got {horizon}"
        )));
    }
    reference.require_nonempty()?;
    treated.require_nonempty()?;
    let r = count_deaths(reference, horizon);
    let t = count_deaths(treated, horizon);
    let reference_pct = pct(r.cause_a, r.n);
    let treated_pct = pct(t.cause_a, t.n);
    Ok(CauseAContrast {
        horizon,
        reference_pct,
        treated_pct,
        difference_pp: treated_pct - reference_pct,
        caveat_key: "competing_risks_masking",
        caveat: COMPETING_RISKS_CAVEAT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohort::load_cohort;
    use crate::lifetable::Sex;

    fn arm() -> Cohort {
        let src = "id,age,sex,year,time,status,arm\n\
            a,70,male,2000,1,death_other,ref\n\
            b,70,male,2000,2,death_cancer,ref\n\
            c,70,male,2000,3,censored,ref\n\
            d,70,male,2000,2.5,death_other,ref\n";
        load_cohort(src.as_bytes(), "t").unwrap()
    }

    fn table() -> LifeTable {
        LifeTable::flat(0.025, 60..=80, 1995..=2010, &[Sex::Male]).unwrap()
    }

    #[test]
    fn self_comparison_gives_zero_c() {
        let a = arm();
        let r = decompose_trial(&a, Some(&a), &table(), 3.0).unwrap();
        assert_eq!(r.component_c_pp, Some(0.0));
        let d = 100.0 * (1.0 - (-0.075f64).exp());
        assert!((r.component_d_pct - d).abs() < 1e-10);
        assert!((r.component_b_pp - (50.0 - d)).abs() < 1e-10);
        assert!((r.reference.rr - 50.0 / d).abs() < 1e-12);
    }

    #[test]
    fn one_arm_has_no_c() {
        let r = decompose_trial(&arm(), None, &table(), 3.0).unwrap();
        assert!(r.one_arm);
        assert!(r.component_c_pp.is_none());
        assert!(r.treated.is_none());
        assert!(r.to_text_table().contains("not estimable"));
    }

    #[test]
    fn zero_expected_is_undefined() {
        let zero = LifeTable::flat(0.0, 60..=80, 1995..=2010, &[Sex::Male]).unwrap();
        assert!(matches!(
            decompose_trial(&arm(), None, &zero, 3.0),
            Err(Error::UndefinedRatio(_))
        ));
    }

    #[test]
    fn identical_arms_have_zero_contrast() {
        let a = arm();
        let c = cause_a_contrast(&a, &a, 3.0).unwrap();
        assert_eq!(c.difference_pp, 0.0);
        assert_eq!(c.caveat_key, "competing_risks_masking");
    }

    #[test]
    fn horizon_limits_counts() {
        let r = decompose_trial(&arm(), None, &table(), 1.5).unwrap();
        assert_eq!(r.reference.deaths_other, 1);
        assert_eq!(r.reference.deaths_cause_a, 0);
    }
}
