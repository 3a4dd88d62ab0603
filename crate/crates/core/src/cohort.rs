//! Individual-level cohorts: competing-risks simulation and CSV ingestion.
//!
//! Simulation draws one latent failure time per component hazard by inverse
//! transform (`H_k(T_k) = E_k` with `E_k ~ Exp(1)`), plus an exponential
//! censoring time, and observes the minimum, administratively censored at the
//! maximum follow-up. Every subject gets its own ChaCha stream keyed by its
//! index, so a cohort depends only on the seed and never on thread scheduling.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hazard::{Component, ComponentModel, Hazard};
use crate::lifetable::{DemographicProfile, Sex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Censored,
    DeathCancer,
    DeathOther,
}

impl Status {
    pub const TOKENS: [&'static str; 3] = ["censored", "death_cancer", "death_other"];

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Censored => "censored",
            Status::DeathCancer => "death_cancer",
            Status::DeathOther => "death_other",
        }
    }

    pub fn is_death(self) -> bool {
        !matches!(self, Status::Censored)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "censored" => Ok(Status::Censored),
            "death_cancer" => Ok(Status::DeathCancer),
            "death_other" => Ok(Status::DeathOther),
            other => Err(Error::Validation(format!(
                "unknown status {other:?}; allowed: {}",
                Status::TOKENS.join(", ")
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubjectRecord {
    pub id: String,
    pub profile: DemographicProfile,
    pub follow_up_time: f64,
    pub status: Status,
    /// Component that caused the death; known for simulated deaths or when
    /// supplied as an explicit attribution column.
    pub true_cause: Option<Component>,
    pub arm: Option<String>,
}

impl SubjectRecord {
    fn validate(&self) -> std::result::Result<(), String> {
        if !(self.follow_up_time.is_finite() && self.follow_up_time > 0.0) {
            return Err(format!(
                "follow-up time must be finite and > 0, got {}",
                self.follow_up_time
            ));
        }
        match (self.status, self.true_cause) {
            (Status::Censored, Some(c)) => Err(format!("censored subject cannot carry cause {c}")),
            (Status::DeathCancer, Some(c)) if c != Component::A => {
                Err(format!("death_cancer must have cause A, got {c}"))
            }
            (Status::DeathOther, Some(Component::A)) => Err("death_other cannot have cause A".to_string()),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Simulated { seed: u64, model: String },
    Ingested { source: String },
    Derived { from: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    records: Vec<SubjectRecord>,
    provenance: Provenance,
}

impl Cohort {
    pub fn new(records: Vec<SubjectRecord>, provenance: Provenance) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            r.validate()
                .map_err(|m| Error::Validation(format!("record {} ({}): {m}", i + 1, r.id)))?;
            if !seen.insert(r.id.as_str()) {
                return Err(Error::Validation(format!("duplicate subject id {:?}", r.id)));
            }
        }
        Ok(Self { records, provenance })
    }

    pub fn records(&self) -> &[SubjectRecord] {
        &self.records
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub(crate) fn require_nonempty(&self) -> Result<()> {
        if self.records.is_empty() {
            return Err(Error::Validation("cohort has no subjects".into()));
        }
        Ok(())
    }

    /// True when every death carries a cause component.
    pub fn has_cause_labels(&self) -> bool {
        self.records
            .iter()
            .all(|r| !r.status.is_death() || r.true_cause.is_some())
    }

    /// Subject counts per arm label; unlabelled subjects are not counted.
    pub fn arm_counts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for r in &self.records {
            if let Some(arm) = &r.arm {
                *out.entry(arm.clone()).or_insert(0) += 1;
            }
        }
        out
    }

    /// The subjects of one arm as a new cohort.
    pub fn arm(&self, name: &str) -> Result<Cohort> {
        let records: Vec<_> = self
            .records
            .iter()
            .filter(|r| r.arm.as_deref() == Some(name))
            .cloned()
            .collect();
        if records.is_empty() {
            return Err(Error::Validation(format!("no subjects in arm {name:?}")));
        }
        Ok(Cohort {
            records,
            provenance: Provenance::Derived {
                from: format!("arm {name}"),
            },
        })
    }

    /// Writes `id,age,sex,year,time,status,arm`, plus `true_cause` when any
    /// record carries a label. Floats use shortest round-trip formatting.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let with_cause = self.records.iter().any(|r| r.true_cause.is_some());
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["id", "age", "sex", "year", "time", "status", "arm"];
        if with_cause {
            header.push("true_cause");
        }
        w.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![
                r.id.clone(),
                r.profile.age_at_diagnosis.to_string(),
                r.profile.sex.to_string(),
                r.profile.diagnosis_year.to_string(),
                r.follow_up_time.to_string(),
                r.status.to_string(),
                r.arm.clone().unwrap_or_default(),
            ];
            if with_cause {
                row.push(r.true_cause.map(|c| c.to_string()).unwrap_or_default());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

const COHORT_COLUMNS: [&str; 8] = ["id", "age", "sex", "year", "time", "status", "arm", "true_cause"];

/// Reads a cohort CSV. `arm` and `true_cause` columns are optional and may
/// hold empty values.
pub fn load_cohort<R: Read>(source: R, source_name: &str) -> Result<Cohort> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = rdr.headers()?.clone();
    let mut idx: [Option<usize>; 8] = [None; 8];
    for (i, h) in headers.iter().enumerate() {
        let slot = COHORT_COLUMNS.iter().position(|c| *c == h).ok_or_else(|| Error::Row {
            row: 1,
            message: format!("unknown column `{h}`; expected {}", COHORT_COLUMNS.join(",")),
        })?;
        if idx[slot].replace(i).is_some() {
            return Err(Error::Row {
                row: 1,
                message: format!("column `{h}` appears twice"),
            });
        }
    }
    for slot in 0..6 {
        if idx[slot].is_none() {
            return Err(Error::Row {
                row: 1,
                message: format!("missing column `{}`", COHORT_COLUMNS[slot]),
            });
        }
    }

    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec.position().map(|p| p.line()).unwrap_or(0);
        let bad = |message: String| Error::Row { row, message };
        let field = |slot: usize| idx[slot].and_then(|i| rec.get(i)).unwrap_or("");

        let id = field(0).to_string();
        if id.is_empty() {
            return Err(bad("empty id".into()));
        }
        let age: f64 = field(1)
            .parse()
            .map_err(|_| bad(format!("age must be a number, got {:?}", field(1))))?;
        let sex: Sex = field(2).parse().map_err(|e: Error| bad(e.to_string()))?;
        let year: i32 = field(3)
            .parse()
            .map_err(|_| bad(format!("year must be an integer, got {:?}", field(3))))?;
        let time: f64 = field(4)
            .parse()
            .map_err(|_| bad(format!("time must be a number, got {:?}", field(4))))?;
        let status: Status = field(5).parse().map_err(|e: Error| bad(e.to_string()))?;
        let arm = Some(field(6)).filter(|s| !s.is_empty()).map(str::to_string);
        let true_cause = match field(7) {
            "" => None,
            s => Some(
                Component::parse(s).ok_or_else(|| bad(format!("true_cause must be one of A, B, C, D, got {s:?}")))?,
            ),
        };
        let profile = DemographicProfile::new(age, sex, year).map_err(|e| bad(e.to_string()))?;
        let record = SubjectRecord {
            id,
            profile,
            follow_up_time: time,
            status,
            true_cause,
            arm,
        };
        record.validate().map_err(bad)?;
        if !seen.insert(record.id.clone()) {
            return Err(bad(format!("duplicate id {:?}", record.id)));
        }
        records.push(record);
    }
    Ok(Cohort {
        records,
        provenance: Provenance::Ingested {
            source: source_name.to_string(),
        },
    })
}

/// Settings for [`simulate_cohort_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub n: usize,
    /// Administrative censoring time; may be `f64::INFINITY`.
    pub max_follow_up: f64,
    /// Rate of exponential random censoring (0 disables it).
    pub censoring_rate: f64,
    pub seed: u64,
    /// Demographics stamped on every subject.
    pub profile: DemographicProfile,
    pub arm: Option<String>,
    pub id_prefix: String,
    pub parallel: bool,
}

impl SimulationConfig {
    pub fn new(n: usize, max_follow_up: f64, censoring_rate: f64, seed: u64) -> Self {
        Self {
            n,
            max_follow_up,
            censoring_rate,
            seed,
            profile: DemographicProfile {
                age_at_diagnosis: 70.0,
                sex: Sex::Male,
                diagnosis_year: 2000,
            },
            arm: None,
            id_prefix: "S".to_string(),
            parallel: false,
        }
    }
}

/// Random stream for one subject.
pub fn subject_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Latent failure time by inverse transform; `+inf` if the hazard never
/// accumulates enough mass.
pub fn sample_latent_time<R: Rng + ?Sized>(hazard: &Hazard, rng: &mut R) -> Result<f64> {
    let u: f64 = rng.sample(Open01);
    hazard.inverse_cumulative(-u.ln())
}

pub fn simulate_cohort(
    model: &ComponentModel,
    n: usize,
    max_follow_up: f64,
    censoring_rate: f64,
    seed: u64,
) -> Result<Cohort> {
    simulate_cohort_with(model, &SimulationConfig::new(n, max_follow_up, censoring_rate, seed))
}

pub fn simulate_cohort_with(model: &ComponentModel, cfg: &SimulationConfig) -> Result<Cohort> {
    if cfg.n == 0 {
        return Err(Error::Validation("cohort size must be >= 1".into()));
    }
    if cfg.max_follow_up.is_nan() || cfg.max_follow_up <= 0.0 {
        return Err(Error::Validation(format!(
            "max follow-up must be > 0, got {}",
            cfg.max_follow_up
        )));
    }
    if !(cfg.censoring_rate.is_finite() && cfg.censoring_rate >= 0.0) {
        return Err(Error::Validation(format!(
            "censoring rate must be >= 0, got {}",
            cfg.censoring_rate
        )));
    }
    if cfg.max_follow_up.is_infinite()
        && cfg.censoring_rate == 0.0
        && Component::ALL.iter().all(|c| model.component(*c).is_identically_zero())
    {
        return Err(Error::Validation(
            "all-zero model without censoring or finite follow-up produces no finite times".into(),
        ));
    }

    let draw = |i: usize| simulate_subject(model, cfg, i);
    let records = if cfg.parallel {
        (0..cfg.n).into_par_iter().map(draw).collect::<Result<Vec<_>>>()?
    } else {
        (0..cfg.n).map(draw).collect::<Result<Vec<_>>>()?
    };
    Ok(Cohort {
        records,
        provenance: Provenance::Simulated {
            seed: cfg.seed,
            model: model.summary(),
        },
    })
}

fn simulate_subject(model: &ComponentModel, cfg: &SimulationConfig, i: usize) -> Result<SubjectRecord> {
    let mut rng = subject_rng(cfg.seed, i as u64);
    let mut first = (f64::INFINITY, None);
    for c in Component::ALL {
        let t = sample_latent_time(model.component(c), &mut rng)?;
        if t < first.0 {
            first = (t, Some(c));
        }
    }
    let u: f64 = rng.sample(Open01);
    let censor = if cfg.censoring_rate > 0.0 {
        -u.ln() / cfg.censoring_rate
    } else {
        f64::INFINITY
    };
    let limit = censor.min(cfg.max_follow_up);
    let (time, status, cause) = match first {
        (t, Some(c)) if t <= limit => {
            let status = if c == Component::A {
                Status::DeathCancer
            } else {
                Status::DeathOther
            };
            (t, status, Some(c))
        }
        _ => (limit, Status::Censored, None),
    };
    if !time.is_finite() {
        return Err(Error::Validation(format!(
            "subject {i} has no finite event or censoring time"
        )));
    }
    Ok(SubjectRecord {
        id: format!("{}{:06}", cfg.id_prefix, i + 1),
        profile: cfg.profile,
        follow_up_time: time,
        status,
        true_cause: cause,
        arm: cfg.arm.clone(),
    })
}
