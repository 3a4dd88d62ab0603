//! Bundled data: a synthetic two-arm prostate-cancer trial with a matching
//! era life table, plus summary metadata from the original trial report.
//!
//! The cohort is calibrated so the decomposition reproduces the published
//! 3-year other-cause percentages (45.7% placebo, 52.8% estrogen) against
//! an expected 13.5%. Regenerate with `fixtures/generate_fixtures.py`.

use crate::cohort::{load_cohort, Cohort};
use crate::error::Result;
use crate::lifetable::{load_life_table, LifeTable, LoadOptions};

pub const TRIAL_HORIZON: f64 = 3.0;
pub const REFERENCE_ARM: &str = "placebo";
pub const TREATED_ARM: &str = "estrogen";

pub const TRIAL_COHORT_CSV: &str = include_str!("../fixtures/vacurg_trial.csv");
pub const TRIAL_LIFE_TABLE_CSV: &str = include_str!("../fixtures/trial_era_male.csv");

/// Published cardiovascular death percentages at three years; informational.
pub const CARDIOVASCULAR_PCT_TREATED: f64 = 40.0;
pub const CARDIOVASCULAR_PCT_REFERENCE: f64 = 28.3;

pub fn trial_cohort() -> Result<Cohort> {
    load_cohort(TRIAL_COHORT_CSV.as_bytes(), "fixture:vacurg_trial")
}

pub fn trial_life_table() -> Result<LifeTable> {
    load_life_table(TRIAL_LIFE_TABLE_CSV.as_bytes(), LoadOptions::default())
}

/// Reference and treated arms of the bundled trial.
pub fn trial_arms() -> Result<(Cohort, Cohort)> {
    let c = trial_cohort()?;
    Ok((c.arm(REFERENCE_ARM)?, c.arm(TREATED_ARM)?))
}
