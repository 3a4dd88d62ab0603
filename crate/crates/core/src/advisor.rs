//! Estimand advisor: a four-question decision tree mapping an analysis to
//! the survival estimand it actually produces.
//!
//! 1. Was general-population other-cause mortality (D) removed?
//!    No: overall survival.
//! 2. Is the relative risk of other-cause mortality approximately 1?
//!    Yes: net survival is disease-specific survival.
//! 3. Is reliable cause-of-death data available?
//!    Yes: cause-specific survival.
//! 4. Do stratified life tables remove baseline differences (B ≈ 0)?
//!    Yes: disease-attributable survival. No: net survival, with caution.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimands::EstimandKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum YesNo {
    Yes,
    No,
}

impl YesNo {
    pub fn is_yes(self) -> bool {
        self == YesNo::Yes
    }
}

impl From<bool> for YesNo {
    fn from(b: bool) -> Self {
        if b {
            YesNo::Yes
        } else {
            YesNo::No
        }
    }
}

impl std::str::FromStr for YesNo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "yes" | "y" | "true" => Ok(YesNo::Yes),
            "no" | "n" | "false" => Ok(YesNo::No),
            other => Err(Error::Validation(format!("expected yes or no, got {other:?}"))),
        }
    }
}

pub const DEFAULT_RR_THRESHOLD: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdvisorAnswers {
    pub removed_general_population_mortality: YesNo,
    pub rr_approximately_one: YesNo,
    pub reliable_cause_of_death: YesNo,
    pub lifetables_remove_baseline: YesNo,
    /// When given, replaces `rr_approximately_one` via [`rr_threshold_classify`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed_rr: Option<f64>,
}

impl AdvisorAnswers {
    pub fn new(removed_d: bool, rr_approx_one: bool, reliable_cod: bool, stratified_tables: bool) -> Self {
        Self {
            removed_general_population_mortality: removed_d.into(),
            rr_approximately_one: rr_approx_one.into(),
            reliable_cause_of_death: reliable_cod.into(),
            lifetables_remove_baseline: stratified_tables.into(),
            observed_rr: None,
        }
    }

    pub fn with_observed_rr(mut self, rr: f64) -> Self {
        self.observed_rr = Some(rr);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let a: Self = serde_json_from_str(text)?;
        if let Some(rr) = a.observed_rr {
            check_rr(rr)?;
        }
        Ok(a)
    }
}

// serde_json is only needed for this one entry point; keep it behind a
// small wrapper so the error maps onto ours.
fn serde_json_from_str<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Validation(format!("advisor answers JSON: {e}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RrClass {
    ApproximatelyOne,
    Elevated,
}

fn check_rr(rr: f64) -> Result<()> {
    if !(rr.is_finite() && rr >= 0.0) {
        return Err(Error::Validation(format!(
            "observed relative risk must be >= 0, got {rr}"
        )));
    }
    Ok(())
}

/// `ApproximatelyOne` iff `observed_rr <= threshold`.
pub fn rr_threshold_classify(observed_rr: f64, threshold: f64) -> Result<RrClass> {
    check_rr(observed_rr)?;
    if !threshold.is_finite() {
        return Err(Error::Validation(format!("threshold must be finite, got {threshold}")));
    }
    Ok(if observed_rr <= threshold {
        RrClass::ApproximatelyOne
    } else {
        RrClass::Elevated
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Leaf {
    OverallSurvival,
    NetEqualsDiseaseSpecific,
    CauseSpecific,
    DiseaseAttributable,
    NetSurvivalCaution,
}

impl Leaf {
    pub const ALL: [Leaf; 5] = [
        Leaf::OverallSurvival,
        Leaf::NetEqualsDiseaseSpecific,
        Leaf::CauseSpecific,
        Leaf::DiseaseAttributable,
        Leaf::NetSurvivalCaution,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Leaf::OverallSurvival => "Overall Survival",
            Leaf::NetEqualsDiseaseSpecific => "Net survival ≈ Cancer-specific survival",
            Leaf::CauseSpecific => "Cause-specific Survival",
            Leaf::DiseaseAttributable => "Disease-attributable Survival",
            Leaf::NetSurvivalCaution => "Net Survival",
        }
    }

    pub fn estimand(self) -> EstimandKind {
        match self {
            Leaf::OverallSurvival => EstimandKind::Overall,
            Leaf::NetEqualsDiseaseSpecific => EstimandKind::DiseaseSpecific,
            Leaf::CauseSpecific => EstimandKind::CauseSpecific { coded_fraction: 0.0 },
            Leaf::DiseaseAttributable => EstimandKind::DiseaseAttributable,
            Leaf::NetSurvivalCaution => EstimandKind::Net,
        }
    }

    pub fn guidance_key(self) -> &'static str {
        match self {
            Leaf::OverallSurvival => "single_population_not_comparable",
            Leaf::NetEqualsDiseaseSpecific => "standard_interpretation_valid",
            Leaf::CauseSpecific => "national_surveillance_consistent_coding",
            Leaf::DiseaseAttributable => "burden_and_cost_effectiveness",
            Leaf::NetSurvivalCaution => "interpret_cautiously",
        }
    }

    pub fn guidance(self) -> &'static str {
        match self {
            Leaf::OverallSurvival => {
                "Describes mortality burden in one population; not comparable across populations whose \
                 background mortality differs."
            }
            Leaf::NetEqualsDiseaseSpecific => {
                "Patients carry no excess other-cause mortality, so net survival can be read as \
                 disease-specific survival."
            }
            Leaf::CauseSpecific => "Suitable for surveillance within a setting whose cause-of-death coding is stable.",
            Leaf::DiseaseAttributable => {
                "Counts treatment-induced deaths against the disease; use for burden-of-disease and \
                 cost-effectiveness work. Component C cannot be removed by better life tables."
            }
            Leaf::NetSurvivalCaution => {
                "Retains both baseline (B, addressable) and treatment-induced (C, irreducible) excess \
                 other-cause mortality; it is not disease-specific survival."
            }
        }
    }
}

impl fmt::Display for Leaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CautionFlag {
    /// Net survival here does not equal disease-specific survival.
    NetNotDiseaseSpecific,
    /// B ≈ 0 was asserted, not verified.
    BaselineRemovalUnverified,
    /// Cause-specific survival includes an unknown coded share of C.
    CodedFractionUnknown,
    /// Observed RR overrode the supplied RR answer.
    ObservedRrOverride,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub leaf: Leaf,
    pub label: &'static str,
    pub estimand: EstimandKind,
    pub components: &'static str,
    pub guidance_key: &'static str,
    pub guidance: &'static str,
    pub caution_flags: Vec<CautionFlag>,
    /// How an observed RR was classified, when one was supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rr_class: Option<RrClass>,
}

pub fn advise(answers: &AdvisorAnswers) -> Result<Verdict> {
    advise_with_threshold(answers, DEFAULT_RR_THRESHOLD)
}

pub fn advise_with_threshold(answers: &AdvisorAnswers, threshold: f64) -> Result<Verdict> {
    let mut flags = Vec::new();
    let rr_class = answers
        .observed_rr
        .map(|rr| rr_threshold_classify(rr, threshold))
        .transpose()?;
    let rr_one = match rr_class {
        Some(c) => {
            let from_rr = c == RrClass::ApproximatelyOne;
            if from_rr != answers.rr_approximately_one.is_yes() {
                flags.push(CautionFlag::ObservedRrOverride);
            }
            from_rr
        }
        None => answers.rr_approximately_one.is_yes(),
    };

    let leaf = if !answers.removed_general_population_mortality.is_yes() {
        // the RR override is irrelevant on this branch
        flags.clear();
        Leaf::OverallSurvival
    } else if rr_one {
        Leaf::NetEqualsDiseaseSpecific
    } else if answers.reliable_cause_of_death.is_yes() {
        Leaf::CauseSpecific
    } else if answers.lifetables_remove_baseline.is_yes() {
        Leaf::DiseaseAttributable
    } else {
        Leaf::NetSurvivalCaution
    };
    match leaf {
        Leaf::NetSurvivalCaution => flags.push(CautionFlag::NetNotDiseaseSpecific),
        Leaf::DiseaseAttributable => flags.push(CautionFlag::BaselineRemovalUnverified),
        Leaf::CauseSpecific => flags.push(CautionFlag::CodedFractionUnknown),
        _ => {}
    }
    let estimand = leaf.estimand();
    Ok(Verdict {
        leaf,
        label: leaf.label(),
        estimand,
        components: estimand.components_label(),
        guidance_key: leaf.guidance_key(),
        guidance: leaf.guidance(),
        caution_flags: flags,
        rr_class: if answers.removed_general_population_mortality.is_yes() {
            rr_class
        } else {
            None
        },
    })
}

/// One row of the estimand-to-audience map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AudienceEntry {
    pub estimand: EstimandKind,
    pub components: &'static str,
    pub interpretation: &'static str,
    pub primary_use: &'static str,
}

pub fn audience_map() -> [AudienceEntry; 4] {
    [
        AudienceEntry {
            estimand: EstimandKind::DiseaseSpecific,
            components: EstimandKind::DiseaseSpecific.components_label(),
            interpretation: "survival when only the disease itself causes death",
            primary_use: "clinical trials and treatment efficacy",
        },
        AudienceEntry {
            estimand: EstimandKind::DiseaseAttributable,
            components: EstimandKind::DiseaseAttributable.components_label(),
            interpretation: "survival counting every death causally due to the disease or its treatment",
            primary_use: "burden of disease and cost-effectiveness",
        },
        AudienceEntry {
            estimand: EstimandKind::CauseSpecific { coded_fraction: 0.0 },
            components: EstimandKind::CauseSpecific { coded_fraction: 0.0 }.components_label(),
            interpretation: "survival based on the certified underlying cause of death",
            primary_use: "national surveillance with reliable coding",
        },
        AudienceEntry {
            estimand: EstimandKind::Net,
            components: EstimandKind::Net.components_label(),
            interpretation: "survival with general-population other-cause mortality removed",
            primary_use: "international comparisons, unreliable cause-of-death coding",
        },
    ]
}

/// Registry-based relative risk of other-cause mortality by cancer site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RrEvidence {
    pub site: &'static str,
    pub sex: &'static str,
    pub age_band: &'static str,
    pub rr: f64,
}

pub const RR_EVIDENCE: [RrEvidence; 15] = [
    RrEvidence {
        site: "head_and_neck",
        sex: "male",
        age_band: "40-59",
        rr: 4.0,
    },
    RrEvidence {
        site: "head_and_neck",
        sex: "male",
        age_band: "60-69",
        rr: 2.6,
    },
    RrEvidence {
        site: "head_and_neck",
        sex: "male",
        age_band: "70-79",
        rr: 1.6,
    },
    RrEvidence {
        site: "head_and_neck",
        sex: "female",
        age_band: "40-59",
        rr: 4.5,
    },
    RrEvidence {
        site: "head_and_neck",
        sex: "female",
        age_band: "60-69",
        rr: 2.9,
    },
    RrEvidence {
        site: "head_and_neck",
        sex: "female",
        age_band: "70-79",
        rr: 1.8,
    },
    RrEvidence {
        site: "breast",
        sex: "female",
        age_band: "40-59",
        rr: 1.3,
    },
    RrEvidence {
        site: "breast",
        sex: "female",
        age_band: "60-69",
        rr: 1.4,
    },
    RrEvidence {
        site: "breast",
        sex: "female",
        age_band: "70-79",
        rr: 1.2,
    },
    RrEvidence {
        site: "colorectal",
        sex: "male",
        age_band: "40-59",
        rr: 1.0,
    },
    RrEvidence {
        site: "colorectal",
        sex: "male",
        age_band: "60-69",
        rr: 1.0,
    },
    RrEvidence {
        site: "colorectal",
        sex: "male",
        age_band: "70-79",
        rr: 1.0,
    },
    RrEvidence {
        site: "colorectal",
        sex: "female",
        age_band: "40-59",
        rr: 1.0,
    },
    RrEvidence {
        site: "colorectal",
        sex: "female",
        age_band: "60-69",
        rr: 1.0,
    },
    RrEvidence {
        site: "colorectal",
        sex: "female",
        age_band: "70-79",
        rr: 1.0,
    },
];

pub fn lookup_rr_evidence(site: &str, sex: &str, age_band: &str) -> Option<&'static RrEvidence> {
    RR_EVIDENCE
        .iter()
        .find(|e| e.site == site && e.sex == sex && e.age_band == age_band)
}

/// Short guidance line for a registry site, classifying its published RR.
pub fn example_guidance(site: &str, sex: &str, age_band: &str, threshold: f64) -> Option<String> {
    let e = lookup_rr_evidence(site, sex, age_band)?;
    let class = rr_threshold_classify(e.rr, threshold).ok()?;
    Some(match class {
        RrClass::ApproximatelyOne => format!(
            "{site} ({sex}, {age_band}): RR {:.1}; net survival approximates disease-specific survival",
            e.rr
        ),
        RrClass::Elevated => format!(
            "{site} ({sex}, {age_band}): RR {:.1}; net survival retains excess other-cause mortality and \
             understates disease-specific survival",
            e.rr
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quoted_paths() {
        let v = advise(&AdvisorAnswers::new(false, true, true, true)).unwrap();
        assert_eq!(v.leaf, Leaf::OverallSurvival);
        assert_eq!(v.components, "A+B+C+D");
        assert_eq!(v.guidance_key, "single_population_not_comparable");

        let v = advise(&AdvisorAnswers::new(true, true, false, false)).unwrap();
        assert_eq!(v.leaf, Leaf::NetEqualsDiseaseSpecific);
        assert_eq!(v.components, "A");

        let v = advise(&AdvisorAnswers::new(true, false, false, false)).unwrap();
        assert_eq!(v.leaf, Leaf::NetSurvivalCaution);
        assert_eq!(v.components, "A+B+C");
        assert!(v.caution_flags.contains(&CautionFlag::NetNotDiseaseSpecific));
    }

    #[test]
    fn threshold_boundaries() {
        assert_eq!(rr_threshold_classify(1.0, 1.1).unwrap(), RrClass::ApproximatelyOne);
        assert_eq!(rr_threshold_classify(1.1, 1.1).unwrap(), RrClass::ApproximatelyOne);
        assert_eq!(rr_threshold_classify(3.4, 1.1).unwrap(), RrClass::Elevated);
        assert!(rr_threshold_classify(-0.5, 1.1).is_err());
    }

    #[test]
    fn observed_rr_overrides_answer() {
        let a = AdvisorAnswers::new(true, true, true, false).with_observed_rr(3.4);
        let v = advise(&a).unwrap();
        assert_eq!(v.leaf, Leaf::CauseSpecific);
        assert!(v.caution_flags.contains(&CautionFlag::ObservedRrOverride));
        assert_eq!(v.rr_class, Some(RrClass::Elevated));
    }

    #[test]
    fn json_answers() {
        let a = AdvisorAnswers::from_json(
            r#"{"removed_general_population_mortality":"yes","rr_approximately_one":"no",
                "reliable_cause_of_death":"no","lifetables_remove_baseline":"yes"}"#,
        )
        .unwrap();
        assert_eq!(advise(&a).unwrap().leaf, Leaf::DiseaseAttributable);
        assert!(AdvisorAnswers::from_json(r#"{"removed_general_population_mortality":"yes"}"#).is_err());
        assert!(AdvisorAnswers::from_json(
            r#"{"removed_general_population_mortality":"yes","rr_approximately_one":"no",
                "reliable_cause_of_death":"no","lifetables_remove_baseline":"yes","observed_rr":-1}"#
        )
        .is_err());
    }

    #[test]
    fn evidence_lookup() {
        assert_eq!(lookup_rr_evidence("head_and_neck", "female", "40-59").unwrap().rr, 4.5);
        let g = example_guidance("colorectal", "male", "70-79", DEFAULT_RR_THRESHOLD).unwrap();
        assert!(g.contains("approximates"));
        let g = example_guidance("breast", "female", "70-79", DEFAULT_RR_THRESHOLD).unwrap();
        assert!(g.contains("understates"));
        assert!(lookup_rr_evidence("lung", "male", "40-59").is_none());
    }
}
