//! Closed-form survival estimands built from a [`ComponentModel`].
//!
//! Each estimand keeps a fixed subset of the hazard components:
//!
//! | kind                  | components      |
//! |-----------------------|-----------------|
//! | overall               | A + B + C + D   |
//! | net                   | A + B + C       |
//! | disease-attributable  | A + C           |
//! | cause-specific        | A + (coded) C   |
//! | disease-specific      | A               |
//!
//! Survival is always `exp(-sum of kept cumulative hazards)`, so time-varying
//! components are handled exactly.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hazard::{Component, ComponentModel, Hazard};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimandKind {
    Overall,
    Net,
    DiseaseAttributable,
    DiseaseSpecific,
    /// Disease-specific plus the fraction of Component C that death
    /// certificates code as the disease.
    CauseSpecific {
        coded_fraction: f64,
    },
}

impl EstimandKind {
    pub fn cause_specific(coded_fraction: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&coded_fraction) {
            return Err(Error::Validation(format!(
                "cause-specific coded fraction must be in [0, 1], got {coded_fraction}"
            )));
        }
        Ok(EstimandKind::CauseSpecific { coded_fraction })
    }

    /// Weight applied to each component's cumulative hazard, indexed by
    /// [`Component::index`].
    pub fn weights(&self) -> [f64; 4] {
        match *self {
            EstimandKind::Overall => [1.0, 1.0, 1.0, 1.0],
            EstimandKind::Net => [1.0, 1.0, 1.0, 0.0],
            EstimandKind::DiseaseAttributable => [1.0, 0.0, 1.0, 0.0],
            EstimandKind::DiseaseSpecific => [1.0, 0.0, 0.0, 0.0],
            EstimandKind::CauseSpecific { coded_fraction } => [1.0, 0.0, coded_fraction, 0.0],
        }
    }

    pub fn components_label(&self) -> &'static str {
        match self {
            EstimandKind::Overall => "A+B+C+D",
            EstimandKind::Net => "A+B+C",
            EstimandKind::DiseaseAttributable => "A+C",
            EstimandKind::DiseaseSpecific => "A",
            EstimandKind::CauseSpecific { .. } => "A+some C",
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EstimandKind::Overall => "overall",
            EstimandKind::Net => "net",
            EstimandKind::DiseaseAttributable => "disease_attributable",
            EstimandKind::DiseaseSpecific => "disease_specific",
            EstimandKind::CauseSpecific { .. } => "cause_specific",
        }
    }
}

impl fmt::Display for EstimandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimandKind::CauseSpecific { coded_fraction } => {
                write!(f, "cause_specific:{coded_fraction}")
            }
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for EstimandKind {
    type Err = Error;

    /// Accepts the snake_case names; `cause_specific:<fraction>` sets the coded
    /// fraction (default 0).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let kind = match name {
            "overall" => EstimandKind::Overall,
            "net" => EstimandKind::Net,
            "disease_attributable" => EstimandKind::DiseaseAttributable,
            "disease_specific" => EstimandKind::DiseaseSpecific,
            "cause_specific" => {
                let frac = match arg {
                    Some(a) => a
                        .parse::<f64>()
                        .map_err(|_| Error::Validation(format!("bad coded fraction {a:?}")))?,
                    None => 0.0,
                };
                return EstimandKind::cause_specific(frac);
            }
            other => {
                return Err(Error::Validation(format!(
                    "unknown estimand kind {other:?}; expected one of overall, net, \
                     disease_attributable, disease_specific, cause_specific[:fraction]"
                )))
            }
        };
        if arg.is_some() {
            return Err(Error::Validation(format!("estimand {name} takes no argument")));
        }
        Ok(kind)
    }
}

pub fn survival(model: &ComponentModel, kind: EstimandKind, t: f64) -> Result<f64> {
    Ok((-model.weighted_cumulative(kind.weights(), t)?).exp())
}

/// S_A: disease deaths only.
pub fn survival_disease_specific(model: &ComponentModel, t: f64) -> Result<f64> {
    survival(model, EstimandKind::DiseaseSpecific, t)
}

/// S_{A+C}: disease deaths plus treatment-induced deaths.
pub fn survival_disease_attributable(model: &ComponentModel, t: f64) -> Result<f64> {
    survival(model, EstimandKind::DiseaseAttributable, t)
}

/// Net survival: everything except general-population mortality.
pub fn survival_net(model: &ComponentModel, t: f64) -> Result<f64> {
    survival(model, EstimandKind::Net, t)
}

pub fn survival_overall(model: &ComponentModel, t: f64) -> Result<f64> {
    survival(model, EstimandKind::Overall, t)
}

/// Evenly spaced time grid. Points are computed as `start + i * step`, never by
/// repeated addition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeGrid {
    pub start: f64,
    pub end: f64,
    pub step: f64,
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(start: f64, end: f64, step: f64) -> Result<Self> {
        if !(start.is_finite() && end.is_finite() && step.is_finite()) {
            return Err(Error::Validation("time grid bounds must be finite".into()));
        }
        if start < 0.0 {
            return Err(Error::Validation(format!("time grid must start at >= 0, got {start}")));
        }
        if step <= 0.0 || end < start {
            return Err(Error::Validation(format!(
                "time grid needs end >= start and step > 0 (got {start}:{end}:{step})"
            )));
        }
        let steps = ((end - start) / step + 1e-9).floor() as usize;
        let points = (0..=steps).map(|i| start + i as f64 * step).collect();
        Ok(Self {
            start,
            end,
            step,
            points,
        })
    }

    /// Parses `start:end:step`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Validation(format!(
                "grid must look like start:end:step, got {spec:?}"
            )));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Validation(format!("bad number {s:?} in grid {spec:?}")))
        };
        Self::new(num(parts[0])?, num(parts[1])?, num(parts[2])?)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

impl Default for TimeGrid {
    /// `[0, 10]` years in steps of 0.01.
    fn default() -> Self {
        Self::new(0.0, 10.0, 0.01).expect("static grid")
    }
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Validation("time grid is empty".into()));
    }
    if times[0] < 0.0 || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Validation("time grid must be finite and start at >= 0".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Validation("time grid must be strictly ascending".into()));
    }
    Ok(())
}

/// A named survival function sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimandCurve {
    pub kind: EstimandKind,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl EstimandCurve {
    pub fn new(kind: EstimandKind, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_grid(&times)?;
        if times.len() != values.len() {
            return Err(Error::Validation("curve times/values length mismatch".into()));
        }
        if times[0] != 0.0 || values[0] != 1.0 {
            return Err(Error::Validation("estimand curve must start at S(0) = 1".into()));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Validation("survival values must lie in [0, 1]".into()));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Validation("survival values must be nonincreasing".into()));
        }
        Ok(Self { kind, times, values })
    }
}

pub fn estimand_curve(model: &ComponentModel, kind: EstimandKind, grid: &TimeGrid) -> Result<EstimandCurve> {
    let times = grid.points().to_vec();
    let values = times
        .iter()
        .map(|t| survival(model, kind, *t))
        .collect::<Result<Vec<_>>>()?;
    EstimandCurve::new(kind, times, values)
}

/// Pointwise `kind_a - kind_b`, in percentage points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapCurve {
    pub kind_a: EstimandKind,
    pub kind_b: EstimandKind,
    pub times: Vec<f64>,
    pub gap_pp: Vec<f64>,
    /// First grid time at which the gap is largest.
    pub argmax: f64,
    pub max_gap_pp: f64,
}

impl GapCurve {
    pub fn at(&self, t: f64) -> Option<f64> {
        self.times
            .iter()
            .position(|x| (x - t).abs() < 1e-9)
            .map(|i| self.gap_pp[i])
    }
}

pub fn gap_curve(
    model: &ComponentModel,
    kind_a: EstimandKind,
    kind_b: EstimandKind,
    times: &[f64],
) -> Result<GapCurve> {
    check_grid(times)?;
    let gap_pp = times
        .iter()
        .map(|t| Ok(100.0 * (survival(model, kind_a, *t)? - survival(model, kind_b, *t)?)))
        .collect::<Result<Vec<_>>>()?;
    let (mut best_i, mut best) = (0, gap_pp[0]);
    for (i, g) in gap_pp.iter().enumerate() {
        if *g > best {
            best = *g;
            best_i = i;
        }
    }
    Ok(GapCurve {
        kind_a,
        kind_b,
        times: times.to_vec(),
        argmax: times[best_i],
        max_gap_pp: best,
        gap_pp,
    })
}

/// How excess other-cause mortality is split between B and C.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Allocation {
    PureBaseline,
    PureTreatment,
    Mixed,
}

impl Allocation {
    pub const ALL: [Allocation; 3] = [Allocation::PureBaseline, Allocation::PureTreatment, Allocation::Mixed];

    /// Share of the excess assigned to Component C.
    pub fn frac_c(self) -> f64 {
        match self {
            Allocation::PureBaseline => 0.0,
            Allocation::PureTreatment => 1.0,
            Allocation::Mixed => 0.5,
        }
    }
}

/// Parameters of a constant-RR analytical scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioSpec {
    pub rr: f64,
    /// Share of the excess other-cause hazard allocated to Component C.
    pub frac_c: f64,
    pub background_rate: f64,
    pub cancer_shape: f64,
    pub cancer_scale: f64,
}

impl ScenarioSpec {
    pub const DEFAULT_BACKGROUND_RATE: f64 = 0.025;
    pub const DEFAULT_CANCER_SHAPE: f64 = 1.5;
    pub const DEFAULT_CANCER_SCALE: f64 = 5.3;
    pub const DEFAULT_RR_GRID: [f64; 5] = [1.0, 1.5, 2.0, 3.0, 4.0];

    /// Weibull(1.5, 5.3) cancer hazard with a 0.025/year background.
    pub fn new(rr: f64, frac_c: f64) -> Self {
        Self {
            rr,
            frac_c,
            background_rate: Self::DEFAULT_BACKGROUND_RATE,
            cancer_shape: Self::DEFAULT_CANCER_SHAPE,
            cancer_scale: Self::DEFAULT_CANCER_SCALE,
        }
    }

    pub fn with_allocation(rr: f64, allocation: Allocation) -> Self {
        Self::new(rr, allocation.frac_c())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rr.is_finite() && self.rr >= 1.0) {
            return Err(Error::Validation(format!("rr must be >= 1, got {}", self.rr)));
        }
        if !(0.0..=1.0).contains(&self.frac_c) {
            return Err(Error::Validation(format!(
                "frac_C must be in [0, 1], got {}",
                self.frac_c
            )));
        }
        if !(self.background_rate.is_finite() && self.background_rate > 0.0) {
            return Err(Error::Validation(format!(
                "background rate must be > 0, got {}",
                self.background_rate
            )));
        }
        Ok(())
    }

    /// frac_C * (RR - 1) * h_D.
    pub fn treatment_rate(&self) -> f64 {
        self.frac_c * (self.rr - 1.0) * self.background_rate
    }

    /// (1 - frac_C) * (RR - 1) * h_D.
    pub fn baseline_rate(&self) -> f64 {
        (1.0 - self.frac_c) * (self.rr - 1.0) * self.background_rate
    }
}

fn rate_or_zero(rate: f64) -> Result<Hazard> {
    if rate == 0.0 {
        Ok(Hazard::Zero)
    } else {
        Hazard::constant(rate)
    }
}

pub fn build_scenario(spec: &ScenarioSpec) -> Result<ComponentModel> {
    spec.validate()?;
    Ok(ComponentModel::new(
        Hazard::weibull(spec.cancer_shape, spec.cancer_scale)?,
        rate_or_zero(spec.baseline_rate())?,
        rate_or_zero(spec.treatment_rate())?,
        Hazard::constant(spec.background_rate)?,
    ))
}

/// Which excess components are present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioRow {
    None,
    BaselineOnly,
    TreatmentOnly,
    BothPresent,
}

impl ScenarioRow {
    pub fn net_equals(self) -> &'static str {
        match self {
            ScenarioRow::None => "A",
            ScenarioRow::BaselineOnly => "A+B",
            ScenarioRow::TreatmentOnly => "A+C",
            ScenarioRow::BothPresent => "A+B+C",
        }
    }

    pub fn relation_key(self) -> &'static str {
        match self {
            ScenarioRow::None => "equals_disease_specific",
            ScenarioRow::BaselineOnly => "gap_equals_component_b",
            ScenarioRow::TreatmentOnly => "equals_disease_attributable",
            ScenarioRow::BothPresent => "gap_equals_b_plus_c",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioClassification {
    pub row: ScenarioRow,
    pub net_equals: &'static str,
    pub relation_key: &'static str,
    /// Components separating net from disease-specific survival.
    pub gap_to_disease_specific: Vec<Component>,
    /// Components separating net from disease-attributable survival.
    pub gap_to_disease_attributable: Vec<Component>,
}

/// Rate tolerance used to call a component "present".
pub const PRESENCE_TOLERANCE: f64 = 1e-12;

fn present_on(h: &Hazard, probes: &[f64]) -> Result<bool> {
    for t in probes {
        match h.hazard_at(*t) {
            Ok(r) if r > PRESENCE_TOLERANCE => return Ok(true),
            Ok(_) => {}
            Err(Error::SingularEvaluation { .. }) => return Ok(true),
            Err(e) => return Err(e),
        }
    }
    Ok(false)
}

/// Classification on the default probe grid.
pub fn scenario_table(model: &ComponentModel) -> Result<ScenarioClassification> {
    scenario_table_on(model, TimeGrid::default().points())
}

pub fn scenario_table_on(model: &ComponentModel, probes: &[f64]) -> Result<ScenarioClassification> {
    let b = present_on(&model.baseline_excess, probes)?;
    let c = present_on(&model.treatment_induced, probes)?;
    let row = match (b, c) {
        (false, false) => ScenarioRow::None,
        (true, false) => ScenarioRow::BaselineOnly,
        (false, true) => ScenarioRow::TreatmentOnly,
        (true, true) => ScenarioRow::BothPresent,
    };
    let mut gap_ds = Vec::new();
    if b {
        gap_ds.push(Component::B);
    }
    if c {
        gap_ds.push(Component::C);
    }
    let gap_da = if b { vec![Component::B] } else { Vec::new() };
    Ok(ScenarioClassification {
        row,
        net_equals: row.net_equals(),
        relation_key: row.relation_key(),
        gap_to_disease_specific: gap_ds,
        gap_to_disease_attributable: gap_da,
    })
}
