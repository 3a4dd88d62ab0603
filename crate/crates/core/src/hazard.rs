//! Hazard functions and the four-component mortality decomposition.
//!
//! Total mortality among patients is split additively into
//!
//! - A: disease-specific hazard (progression, metastasis),
//! - B: baseline other-cause excess present at diagnosis,
//! - C: treatment-induced other-cause hazard,
//! - D: general-population other-cause hazard.
//!
//! All times are in years and all rates in events per year.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_time(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain(format!("time must be >= 0, got {t}")));
    }
    Ok(())
}

/// Piecewise-constant hazard. Intervals are left-closed, right-open and the
/// last rate extends to infinity, so `rates.len() == breakpoints.len() + 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseConstant {
    breakpoints: Vec<f64>,
    rates: Vec<f64>,
    // cumulative hazard at each breakpoint
    #[serde(skip)]
    cum_at_break: Vec<f64>,
}

impl PiecewiseConstant {
    pub fn new(breakpoints: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        if rates.len() != breakpoints.len() + 1 {
            return Err(Error::Validation(format!(
                "piecewise hazard needs {} rates for {} breakpoints, got {}",
                breakpoints.len() + 1,
                breakpoints.len(),
                rates.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite() || *b <= 0.0) {
            return Err(Error::Validation("piecewise breakpoints must be finite and > 0".into()));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation(
                "piecewise breakpoints must be strictly increasing".into(),
            ));
        }
        if rates.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::Validation("piecewise rates must be finite and >= 0".into()));
        }
        let mut cum_at_break = Vec::with_capacity(breakpoints.len());
        let mut acc = 0.0;
        let mut prev = 0.0;
        for (b, r) in breakpoints.iter().zip(&rates) {
            acc += r * (b - prev);
            cum_at_break.push(acc);
            prev = *b;
        }
        Ok(Self {
            breakpoints,
            rates,
            cum_at_break,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub(crate) fn segment(&self, t: f64) -> usize {
        self.breakpoints.partition_point(|b| *b <= t)
    }

    pub(crate) fn rate_at(&self, t: f64) -> f64 {
        self.rates[self.segment(t)]
    }

    pub(crate) fn cumulative(&self, t: f64) -> f64 {
        let j = self.segment(t);
        let (start, base) = if j == 0 {
            (0.0, 0.0)
        } else {
            (self.breakpoints[j - 1], self.cum_at_break[j - 1])
        };
        base + self.rates[j] * (t - start)
    }

    fn inverse_cumulative(&self, target: f64) -> f64 {
        let mut start = 0.0;
        let mut base = 0.0;
        for (j, rate) in self.rates.iter().enumerate() {
            let end_cum = self.cum_at_break.get(j).copied().unwrap_or(f64::INFINITY);
            if target <= end_cum && *rate > 0.0 {
                return start + (target - base) / rate;
            }
            if j < self.breakpoints.len() {
                start = self.breakpoints[j];
                base = end_cum;
            }
        }
        f64::INFINITY
    }
}

/// A nonnegative hazard rate over time since diagnosis.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Hazard {
    Weibull { shape: f64, scale: f64 },
    Constant { rate: f64 },
    PiecewiseConstant(PiecewiseConstant),
    Zero,
}

impl Hazard {
    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        if !(shape.is_finite() && shape > 0.0) {
            return Err(Error::Validation(format!("weibull shape must be > 0, got {shape}")));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Validation(format!("weibull scale must be > 0, got {scale}")));
        }
        Ok(Hazard::Weibull { shape, scale })
    }

    pub fn constant(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(Error::Validation(format!("constant rate must be >= 0, got {rate}")));
        }
        Ok(Hazard::Constant { rate })
    }

    pub fn piecewise(breakpoints: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        PiecewiseConstant::new(breakpoints, rates).map(Hazard::PiecewiseConstant)
    }

    /// Instantaneous rate at `t`.
    pub fn hazard_at(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(match self {
            Hazard::Weibull { shape, scale } => {
                if t == 0.0 {
                    if *shape < 1.0 {
                        return Err(Error::SingularEvaluation { shape: *shape });
                    }
                    if *shape == 1.0 {
                        return Ok(1.0 / scale);
                    }
                    return Ok(0.0);
                }
                (shape / scale) * (t / scale).powf(shape - 1.0)
            }
            Hazard::Constant { rate } => *rate,
            Hazard::PiecewiseConstant(p) => p.rate_at(t),
            Hazard::Zero => 0.0,
        })
    }

    /// Integral of the hazard over `[0, t]`, in closed form.
    pub fn cumulative(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.cumulative_unchecked(t))
    }

    pub(crate) fn cumulative_unchecked(&self, t: f64) -> f64 {
        match self {
            Hazard::Weibull { shape, scale } => (t / scale).powf(*shape),
            Hazard::Constant { rate } => rate * t,
            Hazard::PiecewiseConstant(p) => p.cumulative(t),
            Hazard::Zero => 0.0,
        }
    }

    /// `exp(-cumulative(t))`.
    pub fn survival(&self, t: f64) -> Result<f64> {
        Ok((-self.cumulative(t)?).exp())
    }

    /// Smallest `t` with `cumulative(t) == target`; `+inf` when the cumulative
    /// hazard never reaches `target`.
    pub fn inverse_cumulative(&self, target: f64) -> Result<f64> {
        if target.is_nan() || target < 0.0 {
            return Err(Error::Domain(format!(
                "cumulative hazard target must be >= 0, got {target}"
            )));
        }
        if target == 0.0 {
            return Ok(0.0);
        }
        Ok(match self {
            Hazard::Weibull { shape, scale } => scale * target.powf(1.0 / shape),
            Hazard::Constant { rate } => {
                if *rate > 0.0 {
                    target / rate
                } else {
                    f64::INFINITY
                }
            }
            Hazard::PiecewiseConstant(p) => p.inverse_cumulative(target),
            Hazard::Zero => f64::INFINITY,
        })
    }

    /// True when the hazard is identically zero.
    pub fn is_identically_zero(&self) -> bool {
        match self {
            Hazard::Zero => true,
            Hazard::Constant { rate } => *rate == 0.0,
            Hazard::PiecewiseConstant(p) => p.rates.iter().all(|r| *r == 0.0),
            Hazard::Weibull { .. } => false,
        }
    }
}

impl fmt::Display for Hazard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hazard::Weibull { shape, scale } => write!(f, "weibull(shape={shape}, scale={scale})"),
            Hazard::Constant { rate } => write!(f, "constant({rate})"),
            Hazard::PiecewiseConstant(p) => {
                write!(f, "piecewise(breaks={:?}, rates={:?})", p.breakpoints, p.rates)
            }
            Hazard::Zero => write!(f, "zero"),
        }
    }
}

/// Labels for the four hazard components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Component {
    A,
    B,
    C,
    D,
}

impl Component {
    pub const ALL: [Component; 4] = [Component::A, Component::B, Component::C, Component::D];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Component::A => "A",
            Component::B => "B",
            Component::C => "C",
            Component::D => "D",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "A" | "a" => Some(Component::A),
            "B" | "b" => Some(Component::B),
            "C" | "c" => Some(Component::C),
            "D" | "d" => Some(Component::D),
            _ => None,
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The four-component bundle defining a population's mortality structure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentModel {
    /// A: disease-specific.
    pub cancer: Hazard,
    /// B: baseline other-cause excess.
    pub baseline_excess: Hazard,
    /// C: treatment-induced other-cause.
    pub treatment_induced: Hazard,
    /// D: general-population other-cause.
    pub background: Hazard,
}

impl ComponentModel {
    pub fn new(cancer: Hazard, baseline_excess: Hazard, treatment_induced: Hazard, background: Hazard) -> Self {
        Self {
            cancer,
            baseline_excess,
            treatment_induced,
            background,
        }
    }

    pub fn zero() -> Self {
        Self::new(Hazard::Zero, Hazard::Zero, Hazard::Zero, Hazard::Zero)
    }

    pub fn component(&self, c: Component) -> &Hazard {
        match c {
            Component::A => &self.cancer,
            Component::B => &self.baseline_excess,
            Component::C => &self.treatment_induced,
            Component::D => &self.background,
        }
    }

    fn rates(&self, t: f64) -> Result<[f64; 4]> {
        Ok([
            self.cancer.hazard_at(t)?,
            self.baseline_excess.hazard_at(t)?,
            self.treatment_induced.hazard_at(t)?,
            self.background.hazard_at(t)?,
        ])
    }

    /// h_A + h_B + h_C + h_D.
    pub fn total_hazard(&self, t: f64) -> Result<f64> {
        let [a, b, c, d] = self.rates(t)?;
        Ok(a + b + c + d)
    }

    /// h_A + h_B + h_C: everything above general-population mortality.
    pub fn excess_hazard(&self, t: f64) -> Result<f64> {
        let [a, b, c, _] = self.rates(t)?;
        Ok(a + b + c)
    }

    /// h_B + h_C + h_D: all other-cause mortality among patients.
    pub fn other_cause_hazard(&self, t: f64) -> Result<f64> {
        let [_, b, c, d] = self.rates(t)?;
        Ok(b + c + d)
    }

    /// Relative risk of other-cause mortality, `(h_B + h_C + h_D) / h_D`.
    pub fn relative_risk(&self, t: f64) -> Result<f64> {
        let [_, b, c, d] = self.rates(t)?;
        if d <= 0.0 {
            return Err(Error::UndefinedRatio(format!(
                "relative risk needs background hazard > 0 at t = {t}"
            )));
        }
        Ok((b + c + d) / d)
    }

    /// The same ratio written as `1 + (h_B + h_C) / h_D`.
    pub fn relative_risk_excess_form(&self, t: f64) -> Result<f64> {
        let [_, b, c, d] = self.rates(t)?;
        if d <= 0.0 {
            return Err(Error::UndefinedRatio(format!(
                "relative risk needs background hazard > 0 at t = {t}"
            )));
        }
        Ok(1.0 + (b + c) / d)
    }

    /// `sum_k weights[k] * H_k(t)` with weights indexed by [`Component::index`].
    pub fn weighted_cumulative(&self, weights: [f64; 4], t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(Component::ALL
            .iter()
            .zip(weights)
            .filter(|(_, w)| *w != 0.0)
            .map(|(c, w)| w * self.component(*c).cumulative_unchecked(t))
            .sum())
    }

    pub fn summary(&self) -> String {
        format!(
            "A={}; B={}; C={}; D={}",
            self.cancer, self.baseline_excess, self.treatment_induced, self.background
        )
    }
}

/// Relative risk of other-cause mortality sampled on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelativeRiskProfile {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl RelativeRiskProfile {
    pub fn new(model: &ComponentModel, times: &[f64]) -> Result<Self> {
        let values = times
            .iter()
            .map(|t| model.relative_risk(*t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            times: times.to_vec(),
            values,
        })
    }

    /// Value at the last grid point at or before `t`.
    pub fn rr_at(&self, t: f64) -> Option<f64> {
        let i = self.times.partition_point(|x| *x <= t);
        (i > 0).then(|| self.values[i - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_weibull() -> Hazard {
        Hazard::weibull(1.5, 5.3).unwrap()
    }

    #[test]
    fn weibull_five_year_survival_is_forty_percent() {
        let h = reference_weibull();
        let cum = h.cumulative(5.0).unwrap();
        assert!((cum - (5.0f64 / 5.3).powf(1.5)).abs() < 1e-12);
        assert!((cum - 0.91629).abs() < 1e-4);
        assert!((h.survival(5.0).unwrap() - 0.400).abs() < 5e-5);
    }

    #[test]
    fn weibull_rate_formula() {
        let h = reference_weibull();
        let expected = (1.5 / 5.3) * (2.0f64 / 5.3).powf(0.5);
        assert!((h.hazard_at(2.0).unwrap() - expected).abs() < 1e-15);
        assert_eq!(h.hazard_at(0.0).unwrap(), 0.0);
    }

    #[test]
    fn weibull_small_shape_is_singular_at_zero() {
        let h = Hazard::weibull(0.7, 2.0).unwrap();
        assert!(matches!(h.hazard_at(0.0), Err(Error::SingularEvaluation { .. })));
        assert!(h.hazard_at(0.5).unwrap().is_finite());
        assert_eq!(h.cumulative(0.0).unwrap(), 0.0);
        assert!(h.survival(1.0).unwrap() > 0.0);
    }

    #[test]
    fn constant_and_piecewise_lookups() {
        let c = Hazard::constant(0.025).unwrap();
        assert_eq!(c.hazard_at(7.3).unwrap(), 0.025);
        assert!((c.cumulative(5.0).unwrap() - 0.125).abs() < 1e-15);

        let p = Hazard::piecewise(vec![2.0], vec![0.01, 0.03]).unwrap();
        assert_eq!(p.hazard_at(2.0).unwrap(), 0.03);
        assert_eq!(p.hazard_at(1.999).unwrap(), 0.01);
        assert!((p.cumulative(3.0).unwrap() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn negative_time_is_domain_error() {
        for h in [reference_weibull(), Hazard::Zero, Hazard::constant(1.0).unwrap()] {
            assert!(matches!(h.hazard_at(-1.0), Err(Error::Domain(_))));
            assert!(matches!(h.cumulative(-0.1), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn piecewise_validation() {
        assert!(Hazard::piecewise(vec![1.0, 2.0], vec![0.1, 0.2]).is_err());
        assert!(Hazard::piecewise(vec![2.0, 1.0], vec![0.1, 0.2, 0.3]).is_err());
        assert!(Hazard::piecewise(vec![1.0], vec![0.1, -0.2]).is_err());
        assert!(Hazard::piecewise(vec![], vec![0.1]).is_ok());
    }

    #[test]
    fn cumulative_is_zero_at_origin() {
        let hs = [
            reference_weibull(),
            Hazard::constant(0.3).unwrap(),
            Hazard::piecewise(vec![1.0, 4.0], vec![0.2, 0.0, 0.5]).unwrap(),
            Hazard::Zero,
        ];
        for h in &hs {
            assert_eq!(h.cumulative(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn inverse_cumulative_round_trips() {
        let hs = [
            reference_weibull(),
            Hazard::constant(0.3).unwrap(),
            Hazard::piecewise(vec![1.0, 4.0], vec![0.2, 0.0, 0.5]).unwrap(),
        ];
        for h in &hs {
            for x in [0.05, 0.2, 0.7, 2.5] {
                let t = h.inverse_cumulative(x).unwrap();
                assert!((h.cumulative(t).unwrap() - x).abs() < 1e-12, "{h} {x}");
            }
        }
        let tail_zero = Hazard::piecewise(vec![1.0], vec![0.2, 0.0]).unwrap();
        assert!(tail_zero.inverse_cumulative(0.3).unwrap().is_infinite());
        assert!(Hazard::Zero.inverse_cumulative(0.1).unwrap().is_infinite());
    }

    #[test]
    fn component_sums() {
        let m = ComponentModel::new(
            reference_weibull(),
            Hazard::constant(0.025).unwrap(),
            Hazard::Zero,
            Hazard::constant(0.025).unwrap(),
        );
        let ha = reference_weibull().hazard_at(5.0).unwrap();
        assert!((m.total_hazard(5.0).unwrap() - (ha + 0.05)).abs() < 1e-15);
        assert!((m.excess_hazard(5.0).unwrap() - (ha + 0.025)).abs() < 1e-15);
        assert_eq!(ComponentModel::zero().total_hazard(3.0).unwrap(), 0.0);
        assert_eq!(ComponentModel::zero().excess_hazard(3.0).unwrap(), 0.0);
        assert_eq!(ComponentModel::zero().other_cause_hazard(3.0).unwrap(), 0.0);

        let only_d = ComponentModel::new(
            Hazard::Zero,
            Hazard::Zero,
            Hazard::Zero,
            Hazard::constant(0.025).unwrap(),
        );
        assert_eq!(only_d.total_hazard(1.0).unwrap(), 0.025);
        assert_eq!(only_d.other_cause_hazard(1.0).unwrap(), 0.025);
    }

    #[test]
    fn other_cause_sum() {
        let m = ComponentModel::new(
            reference_weibull(),
            Hazard::constant(0.05).unwrap(),
            Hazard::constant(0.025).unwrap(),
            Hazard::constant(0.025).unwrap(),
        );
        for t in [0.0, 1.0, 9.5] {
            assert!((m.other_cause_hazard(t).unwrap() - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn relative_risk_values() {
        let d = Hazard::constant(0.025).unwrap();
        let none = ComponentModel::new(reference_weibull(), Hazard::Zero, Hazard::Zero, d.clone());
        assert_eq!(none.relative_risk(2.0).unwrap(), 1.0);

        let four = ComponentModel::new(
            reference_weibull(),
            Hazard::constant(0.05).unwrap(),
            Hazard::constant(0.025).unwrap(),
            d.clone(),
        );
        assert!((four.relative_risk(2.0).unwrap() - 4.0).abs() < 1e-12);

        let one_half = ComponentModel::new(reference_weibull(), Hazard::constant(0.0125).unwrap(), Hazard::Zero, d);
        assert!((one_half.relative_risk(2.0).unwrap() - 1.5).abs() < 1e-12);

        let no_d = ComponentModel::new(reference_weibull(), Hazard::Zero, Hazard::Zero, Hazard::Zero);
        assert!(matches!(no_d.relative_risk(1.0), Err(Error::UndefinedRatio(_))));
    }

    #[test]
    fn time_varying_rr_profile() {
        let m = ComponentModel::new(
            Hazard::Zero,
            Hazard::piecewise(vec![2.0], vec![0.05, 0.0]).unwrap(),
            Hazard::Zero,
            Hazard::constant(0.025).unwrap(),
        );
        let prof = RelativeRiskProfile::new(&m, &[0.0, 1.0, 2.0, 3.0]).unwrap();
        for (v, want) in prof.values.iter().zip([3.0, 3.0, 1.0, 1.0]) {
            assert!((v - want).abs() < 1e-12);
        }
        assert!((prof.rr_at(2.5).unwrap() - 1.0).abs() < 1e-12);
        assert!((prof.rr_at(0.5).unwrap() - 3.0).abs() < 1e-12);
    }
}
