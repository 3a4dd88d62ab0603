//! Nonparametric survival estimators over individual-level cohorts.
//!
//! - [`kaplan_meier`]: product-limit estimate for any event definition;
//!   deaths that do not qualify are censored at their death time.
//! - [`disease_attributable_km`]: product-limit with deaths caused by A or C.
//! - [`pohar_perme`]: net survival, weighting each subject by the inverse of
//!   their expected (life-table) survival.
//! - [`smr`]: observed over expected other-cause deaths.
//!
//! Pohar Perme, with `w_i(u) = 1 / S_Pi(u)` and `λ_Pi` the subject's
//! life-table hazard, estimates the excess cumulative hazard increment
//!
//! ```text
//! dΛ_E(u) = Σ w_i dN_i(u) / Σ w_i Y_i(u)  -  Σ w_i Y_i λ_Pi(u) du / Σ w_i Y_i(u)
//! ```
//!
//! and net survival is its product integral: the jump part contributes
//! `1 - Σ w dN / Σ w Y` at each death time and the continuous part is
//! integrated exactly. Between two observed times the risk set is fixed and
//! `Σ w_i λ_Pi = d/du Σ w_i`, so the continuous part over `(a, b]` is
//! `ln Σ w_i(b) - ln Σ w_i(a)`. The weighted risk-set sum is kept grouped by
//! current life-table rate, which makes it exact across piecewise segments.
//!
//! All estimators sort subjects by `(time, id)`; results do not depend on
//! input order. A death and a censoring at the same time are handled with the
//! death first (the censored subject is still at risk).

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::cohort::{Cohort, Status, SubjectRecord};
use crate::error::{Error, Result};
use crate::hazard::Component;
use crate::lifetable::{ExpectedHazard, LifeTable};
use crate::output::sig6;

/// Right-continuous step function with one point per distinct time at which
/// something happened (death, censoring, or a requested evaluation time).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Subjects at risk just before each time.
    pub at_risk: Vec<usize>,
    /// Qualifying events at each time.
    pub events: Vec<usize>,
    /// Pointwise variance of the survival estimate (advisory).
    pub variance: Option<Vec<f64>>,
}

impl StepCurve {
    /// Value at `t`: 1 before the first point, otherwise the value at the last
    /// point `<= t`.
    pub fn value_at(&self, t: f64) -> f64 {
        let i = self.times.partition_point(|x| *x <= t);
        if i == 0 {
            1.0
        } else {
            self.values[i - 1]
        }
    }

    pub fn variance_at(&self, t: f64) -> Option<f64> {
        let v = self.variance.as_ref()?;
        let i = self.times.partition_point(|x| *x <= t);
        Some(if i == 0 { 0.0 } else { v[i - 1] })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Writes `time,survival,at_risk[,variance]` at 6 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W, with_variance: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let with_variance = with_variance && self.variance.is_some();
        if with_variance {
            w.write_record(["time", "survival", "at_risk", "variance"])?;
        } else {
            w.write_record(["time", "survival", "at_risk"])?;
        }
        for i in 0..self.times.len() {
            let mut row = vec![sig6(self.times[i]), sig6(self.values[i]), self.at_risk[i].to_string()];
            if with_variance {
                row.push(sig6(self.variance.as_ref().expect("checked")[i]));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Which deaths count as events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventDefinition {
    /// Every death (overall survival).
    AllDeaths,
    /// Deaths coded `death_cancer` (cause-specific survival).
    CancerDeaths,
    /// Deaths whose cause component is in the set; requires labels.
    Components(Vec<Component>),
}

impl EventDefinition {
    pub fn is_event(&self, r: &SubjectRecord) -> bool {
        match self {
            EventDefinition::AllDeaths => r.status.is_death(),
            EventDefinition::CancerDeaths => r.status == Status::DeathCancer,
            EventDefinition::Components(set) => r.status.is_death() && r.true_cause.is_some_and(|c| set.contains(&c)),
        }
    }
}

fn sorted_records(cohort: &Cohort) -> Result<Vec<&SubjectRecord>> {
    cohort.require_nonempty()?;
    let mut recs: Vec<&SubjectRecord> = cohort.records().iter().collect();
    recs.sort_by(|a, b| {
        a.follow_up_time
            .total_cmp(&b.follow_up_time)
            .then_with(|| a.id.cmp(&b.id))
    });
    Ok(recs)
}

/// Groups of equal times over a sorted slice: `(time, start, end)`.
fn time_groups(recs: &[&SubjectRecord]) -> Vec<(f64, usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < recs.len() {
        let t = recs[i].follow_up_time;
        let mut j = i;
        while j < recs.len() && recs[j].follow_up_time == t {
            j += 1;
        }
        out.push((t, i, j));
        i = j;
    }
    out
}

/// Product-limit estimate with Greenwood variance.
pub fn kaplan_meier(cohort: &Cohort, events: &EventDefinition) -> Result<StepCurve> {
    kaplan_meier_by(cohort, |r| events.is_event(r))
}

pub fn kaplan_meier_by<F>(cohort: &Cohort, is_event: F) -> Result<StepCurve>
where
    F: Fn(&SubjectRecord) -> bool,
{
    let recs = sorted_records(cohort)?;
    let mut n = recs.len();
    let mut s = 1.0;
    let mut greenwood = 0.0;
    let groups = time_groups(&recs);
    let mut curve = StepCurve {
        times: Vec::with_capacity(groups.len()),
        values: Vec::with_capacity(groups.len()),
        at_risk: Vec::with_capacity(groups.len()),
        events: Vec::with_capacity(groups.len()),
        variance: Some(Vec::with_capacity(groups.len())),
    };
    for (t, start, end) in groups {
        let d = recs[start..end].iter().filter(|r| is_event(r)).count();
        if d > 0 {
            s *= 1.0 - d as f64 / n as f64;
            if n > d {
                greenwood += d as f64 / (n as f64 * (n - d) as f64);
            }
        }
        curve.times.push(t);
        curve.values.push(s);
        curve.at_risk.push(n);
        curve.events.push(d);
        curve.variance.as_mut().expect("set above").push(s * s * greenwood);
        n -= end - start;
    }
    Ok(curve)
}

/// Product-limit estimate counting deaths caused by Components A or C.
pub fn disease_attributable_km(cohort: &Cohort) -> Result<StepCurve> {
    if !cohort.has_cause_labels() {
        return Err(Error::MissingLabels(
            "disease-attributable survival needs a cause component (true_cause) for every death; \
             use a simulated cohort or add an explicit true_cause column"
                .into(),
        ));
    }
    kaplan_meier(cohort, &EventDefinition::Components(vec![Component::A, Component::C]))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PoharPermeOptions {
    /// Extra times at which the curve gets a point (e.g. 5 years), so the
    /// continuous part is evaluated exactly there.
    pub eval_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoharPermeCurve {
    /// Net survival clipped to `[0, 1]`.
    pub curve: StepCurve,
    /// Unclipped estimates; these can exceed 1 when deaths are rarer than the
    /// life table predicts.
    pub raw_values: Vec<f64>,
    /// Number of points whose raw value fell outside `[0, 1]`.
    pub clipped: usize,
    /// Set when the weighted risk set vanished before the last observed time.
    pub truncated_at: Option<f64>,
}

impl PoharPermeCurve {
    pub fn value_at(&self, t: f64) -> f64 {
        self.curve.value_at(t)
    }

    pub fn raw_value_at(&self, t: f64) -> f64 {
        let i = self.curve.times.partition_point(|x| *x <= t);
        if i == 0 {
            1.0
        } else {
            self.raw_values[i - 1]
        }
    }
}

pub fn pohar_perme(cohort: &Cohort, table: &LifeTable) -> Result<PoharPermeCurve> {
    pohar_perme_with(cohort, table, &PoharPermeOptions::default())
}

struct RateGroup {
    rate: f64,
    count: usize,
    /// Σ w_i at the reference time.
    sum: f64,
}

/// Weighted risk-set sum, grouped by each member's current life-table rate.
struct WeightedRiskSet {
    groups: BTreeMap<u64, RateGroup>,
    t_ref: f64,
}

impl WeightedRiskSet {
    fn advance(&mut self, t: f64) {
        if t > self.t_ref {
            let dt = t - self.t_ref;
            for g in self.groups.values_mut() {
                if g.rate != 0.0 {
                    g.sum *= (g.rate * dt).exp();
                }
            }
            self.t_ref = t;
        }
    }

    fn add(&mut self, rate: f64, w: f64) {
        let g = self.groups.entry(rate.to_bits()).or_insert(RateGroup {
            rate,
            count: 0,
            sum: 0.0,
        });
        g.count += 1;
        g.sum += w;
    }

    fn remove(&mut self, rate: f64, w: f64) {
        let key = rate.to_bits();
        let g = self.groups.get_mut(&key).expect("subject present in its rate group");
        g.count -= 1;
        g.sum -= w;
        if g.count == 0 {
            self.groups.remove(&key);
        }
    }

    fn total(&self) -> f64 {
        self.groups.values().map(|g| g.sum).sum()
    }
}

struct Member<'a> {
    record: &'a SubjectRecord,
    expected: ExpectedHazard,
}

impl Member<'_> {
    fn weight(&self, t: f64) -> f64 {
        self.expected.cumulative(t).map(f64::exp).unwrap_or(f64::INFINITY)
    }

    fn rate_on_segment(&self, j: usize) -> f64 {
        self.expected.segments().rates()[j]
    }

    fn final_rate(&self) -> f64 {
        *self.expected.segments().rates().last().expect("nonempty rates")
    }
}

pub fn pohar_perme_with(cohort: &Cohort, table: &LifeTable, options: &PoharPermeOptions) -> Result<PoharPermeCurve> {
    let recs = sorted_records(cohort)?;
    let members = recs
        .iter()
        .map(|r| {
            Ok(Member {
                record: r,
                expected: table.expected_hazard_function(&r.profile, r.follow_up_time)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // segment changes inside each subject's follow-up
    let mut transitions: Vec<(f64, usize, usize)> = Vec::new();
    for (i, m) in members.iter().enumerate() {
        for (j, b) in m.expected.segments().breakpoints().iter().enumerate() {
            transitions.push((*b, i, j + 1));
        }
    }
    transitions.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let max_time = recs.last().expect("nonempty").follow_up_time;
    let mut knots: Vec<f64> = recs.iter().map(|r| r.follow_up_time).collect();
    knots.extend(
        options
            .eval_times
            .iter()
            .copied()
            .filter(|t| *t > 0.0 && *t <= max_time),
    );
    knots.sort_by(f64::total_cmp);
    knots.dedup();

    let mut risk = WeightedRiskSet {
        groups: BTreeMap::new(),
        t_ref: 0.0,
    };
    for m in &members {
        risk.add(m.rate_on_segment(0), 1.0);
    }

    let mut out = PoharPermeCurve {
        curve: StepCurve {
            times: Vec::with_capacity(knots.len()),
            values: Vec::with_capacity(knots.len()),
            at_risk: Vec::with_capacity(knots.len()),
            events: Vec::with_capacity(knots.len()),
            variance: Some(Vec::with_capacity(knots.len())),
        },
        raw_values: Vec::with_capacity(knots.len()),
        clipped: 0,
        truncated_at: None,
    };

    let mut s = 1.0;
    let mut var_cum = 0.0;
    let mut prev_total = members.len() as f64;
    let mut next_transition = 0;
    let mut next_exit = 0;
    let mut n_at_risk = members.len();

    for t in knots {
        while next_transition < transitions.len() && transitions[next_transition].0 <= t {
            let (b, i, j) = transitions[next_transition];
            risk.advance(b);
            let m = &members[i];
            let w = m.weight(b);
            risk.remove(m.rate_on_segment(j - 1), w);
            risk.add(m.rate_on_segment(j), w);
            next_transition += 1;
        }
        risk.advance(t);
        let total = risk.total();
        if !(total.is_finite() && total > 0.0 && prev_total > 0.0) {
            out.truncated_at = Some(t);
            break;
        }
        s *= total / prev_total;

        let mut exit_end = next_exit;
        while exit_end < members.len() && members[exit_end].record.follow_up_time == t {
            exit_end += 1;
        }
        let exiting = &members[next_exit..exit_end];
        let mut deaths = 0;
        let mut weighted_deaths = 0.0;
        let mut weighted_sq = 0.0;
        for m in exiting.iter().filter(|m| m.record.status.is_death()) {
            let w = m.weight(t);
            deaths += 1;
            weighted_deaths += w;
            weighted_sq += w * w;
        }
        if deaths > 0 {
            s *= 1.0 - weighted_deaths / total;
            var_cum += weighted_sq / (total * total);
        }

        out.curve.times.push(t);
        out.raw_values.push(s);
        let clipped = s.clamp(0.0, 1.0);
        if clipped != s {
            out.clipped += 1;
        }
        out.curve.values.push(clipped);
        out.curve.at_risk.push(n_at_risk);
        out.curve.events.push(deaths);
        out.curve.variance.as_mut().expect("set above").push(s * s * var_cum);

        for m in exiting {
            risk.remove(m.final_rate(), m.weight(t));
        }
        n_at_risk -= exiting.len();
        next_exit = exit_end;
        prev_total = if risk.groups.is_empty() { 0.0 } else { risk.total() };
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SmrConvention {
    /// Expected deaths are summed person-level death probabilities by the
    /// horizon. Deaths keep their full horizon; only subjects censored alive
    /// before the horizon are truncated at their censoring time.
    #[default]
    ExpectedProbability,
    /// Expected deaths are the life-table cumulative hazard over each
    /// subject's observed person-time up to the horizon.
    PersonTime,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Smr {
    pub horizon: f64,
    pub convention: SmrConvention,
    pub observed: usize,
    pub expected: f64,
    pub ratio: f64,
}

/// Standardized mortality ratio of other-cause deaths within `horizon`.
pub fn smr(cohort: &Cohort, table: &LifeTable, horizon: f64, convention: SmrConvention) -> Result<Smr> {
    cohort.require_nonempty()?;
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::Validation(format!(
            "horizon must be finite and > 0, got {horizon}"
        )));
    }
    let mut observed = 0;
    let mut expected = 0.0;
    let mut recs: Vec<&SubjectRecord> = cohort.records().iter().collect();
    recs.sort_by(|a, b| a.id.cmp(&b.id));
    for r in recs {
        let within = r.follow_up_time <= horizon;
        if within && r.status == Status::DeathOther {
            observed += 1;
        }
        expected += match convention {
            SmrConvention::ExpectedProbability => {
                let end = if r.status == Status::Censored {
                    r.follow_up_time.min(horizon)
                } else {
                    horizon
                };
                1.0 - table.expected_survival(&r.profile, end)?
            }
            SmrConvention::PersonTime => table.expected_cumulative(&r.profile, r.follow_up_time.min(horizon))?,
        };
    }
    if expected <= 0.0 {
        return Err(Error::UndefinedRatio("SMR with zero expected deaths".into()));
    }
    Ok(Smr {
        horizon,
        convention,
        observed,
        expected,
        ratio: observed as f64 / expected,
    })
}
