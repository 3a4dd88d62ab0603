//! Survival estimands under a four-component mortality decomposition.
//!
//! Patient mortality is split into additive hazards: A (the disease),
//! B (baseline excess other-cause mortality from shared risk factors),
//! C (treatment-induced other-cause mortality) and D (general-population
//! mortality from life tables). Each survival estimand removes a different
//! subset of these, and this crate provides closed-form curves, simulation,
//! non-parametric estimators and a small advisor built on that view.

pub mod advisor;
pub mod cohort;
pub mod decomposition;
pub mod error;
pub mod estimands;
pub mod estimator;
pub mod fixtures;
pub mod hazard;
pub mod lifetable;
pub mod output;

pub use advisor::{
    advise, advise_with_threshold, rr_threshold_classify, AdvisorAnswers, Leaf, RrClass, Verdict, YesNo,
};
pub use cohort::{load_cohort, simulate_cohort, simulate_cohort_with, Cohort, SimulationConfig, Status, SubjectRecord};
pub use decomposition::{cause_a_contrast, decompose_trial, CauseAContrast, DecompositionReport};
pub use error::{Error, Result};
pub use estimands::{
    build_scenario, estimand_curve, gap_curve, scenario_table, survival, EstimandCurve, EstimandKind, GapCurve,
    ScenarioSpec, TimeGrid,
};
pub use estimator::{kaplan_meier, pohar_perme, smr, EventDefinition, PoharPermeCurve, Smr, SmrConvention, StepCurve};
pub use hazard::{Component, ComponentModel, Hazard};
pub use lifetable::{load_life_table, DemographicProfile, LifeTable, Sex};
