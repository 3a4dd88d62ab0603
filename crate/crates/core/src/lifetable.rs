//! General-population life tables (Component D).
//!
//! Rates are keyed by integer age, sex and calendar year. For a person
//! diagnosed at age `a0` in year `y0`, the rate that applies at follow-up time
//! `t` is the entry for `(floor(a0 + t), sex, y0 + floor(t))`: attained age
//! floors to whole years and the calendar year advances on each anniversary
//! of diagnosis. The resulting expected hazard is piecewise constant in `t`.
//! Lookups outside the table never extrapolate.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hazard::{Hazard, PiecewiseConstant};

pub const MAX_AGE: u32 = 110;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sex {
    Male,
    Female,
}

impl Sex {
    pub fn as_str(self) -> &'static str {
        match self {
            Sex::Male => "male",
            Sex::Female => "female",
        }
    }
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "male" => Ok(Sex::Male),
            "female" => Ok(Sex::Female),
            other => Err(Error::Validation(format!(
                "sex must be `male` or `female`, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DemographicProfile {
    pub age_at_diagnosis: f64,
    pub sex: Sex,
    pub diagnosis_year: i32,
}

impl DemographicProfile {
    pub fn new(age_at_diagnosis: f64, sex: Sex, diagnosis_year: i32) -> Result<Self> {
        if !(age_at_diagnosis.is_finite() && age_at_diagnosis >= 0.0) {
            return Err(Error::Validation(format!(
                "age at diagnosis must be finite and >= 0, got {age_at_diagnosis}"
            )));
        }
        Ok(Self {
            age_at_diagnosis,
            sex,
            diagnosis_year,
        })
    }

    fn base_age(&self) -> i64 {
        self.age_at_diagnosis.floor() as i64
    }

    /// Follow-up time of the `j`-th birthday after diagnosis (`j >= 1`).
    fn birthday(&self, j: i64) -> f64 {
        (self.base_age() + j) as f64 - self.age_at_diagnosis
    }

    /// Attained integer age at follow-up time `t`, consistent with [`Self::birthday`].
    pub fn attained_age(&self, t: f64) -> i64 {
        let mut n = (t + self.age_at_diagnosis.fract()).floor().max(0.0) as i64;
        while self.birthday(n + 1) <= t {
            n += 1;
        }
        while n > 0 && self.birthday(n) > t {
            n -= 1;
        }
        self.base_age() + n
    }

    pub fn attained_year(&self, t: f64) -> i64 {
        self.diagnosis_year as i64 + t.floor() as i64
    }
}

/// Table key: `(age, sex, year)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TableKey {
    pub age: u32,
    pub sex: Sex,
    pub year: i32,
}

impl fmt::Display for TableKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(age {}, {}, year {})", self.age, self.sex, self.year)
    }
}

/// Bounding rectangle of the keys present in a table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Coverage {
    pub min_age: u32,
    pub max_age: u32,
    pub min_year: i32,
    pub max_year: i32,
    pub sexes: Vec<Sex>,
    /// True when every key inside the rectangle is present.
    pub complete: bool,
}

/// Which column carries mortality in a life-table CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateInput {
    /// `rate`: instantaneous hazard per year.
    #[default]
    Rate,
    /// `qx`: annual death probability, converted with `rate = -ln(1 - qx)`.
    Qx,
}

impl RateInput {
    fn column(self) -> &'static str {
        match self {
            RateInput::Rate => "rate",
            RateInput::Qx => "qx",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LifeTable {
    rates: BTreeMap<TableKey, f64>,
}

impl LifeTable {
    /// Builds a table, rejecting duplicate keys and invalid rates.
    pub fn from_entries<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (TableKey, f64)>,
    {
        let mut rates = BTreeMap::new();
        for (i, (key, rate)) in entries.into_iter().enumerate() {
            let row = i as u64 + 1;
            check_entry(row, &key, rate)?;
            if rates.insert(key, rate).is_some() {
                return Err(Error::DuplicateKey {
                    row,
                    key: key.to_string(),
                });
            }
        }
        Ok(Self { rates })
    }

    /// A table with the same rate everywhere in the given rectangle.
    pub fn flat(
        rate: f64,
        ages: std::ops::RangeInclusive<u32>,
        years: std::ops::RangeInclusive<i32>,
        sexes: &[Sex],
    ) -> Result<Self> {
        let mut entries = Vec::new();
        for &sex in sexes {
            for age in ages.clone() {
                for year in years.clone() {
                    entries.push((TableKey { age, sex, year }, rate));
                }
            }
        }
        Self::from_entries(entries)
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&TableKey, &f64)> {
        self.rates.iter()
    }

    pub fn rate(&self, key: &TableKey) -> Option<f64> {
        self.rates.get(key).copied()
    }

    pub fn coverage(&self) -> Option<Coverage> {
        let first = self.rates.keys().next()?;
        let mut cov = Coverage {
            min_age: first.age,
            max_age: first.age,
            min_year: first.year,
            max_year: first.year,
            sexes: Vec::new(),
            complete: false,
        };
        for k in self.rates.keys() {
            cov.min_age = cov.min_age.min(k.age);
            cov.max_age = cov.max_age.max(k.age);
            cov.min_year = cov.min_year.min(k.year);
            cov.max_year = cov.max_year.max(k.year);
            if !cov.sexes.contains(&k.sex) {
                cov.sexes.push(k.sex);
            }
        }
        cov.sexes.sort();
        let cells =
            (cov.max_age - cov.min_age + 1) as usize * (cov.max_year - cov.min_year + 1) as usize * cov.sexes.len();
        cov.complete = cells == self.rates.len();
        Some(cov)
    }

    fn lookup(&self, age: i64, sex: Sex, year: i64) -> Result<f64> {
        let missing = || Error::Coverage {
            key: format!("(age {age}, {sex}, year {year})"),
        };
        if self.rates.is_empty() {
            return Err(Error::Coverage {
                key: format!("(age {age}, {sex}, year {year}); the table is empty"),
            });
        }
        let age = u32::try_from(age).map_err(|_| missing())?;
        let year = i32::try_from(year).map_err(|_| missing())?;
        self.rate(&TableKey { age, sex, year }).ok_or_else(missing)
    }

    /// Instantaneous background rate at follow-up time `t`.
    pub fn expected_hazard(&self, profile: &DemographicProfile, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::Domain(format!("time must be >= 0, got {t}")));
        }
        self.lookup(profile.attained_age(t), profile.sex, profile.attained_year(t))
    }

    /// The person's background hazard over `[0, horizon)` as a piecewise
    /// function; adjacent segments with equal rates are merged.
    pub fn expected_hazard_function(&self, profile: &DemographicProfile, horizon: f64) -> Result<ExpectedHazard> {
        if !(horizon.is_finite() && horizon >= 0.0) {
            return Err(Error::Domain(format!("horizon must be finite and >= 0, got {horizon}")));
        }
        let mut starts = vec![0.0];
        let mut j = 1;
        loop {
            let b = profile.birthday(j);
            if b >= horizon {
                break;
            }
            starts.push(b);
            j += 1;
        }
        let mut y = 1.0;
        while y < horizon {
            starts.push(y);
            y += 1.0;
        }
        starts.sort_by(f64::total_cmp);
        starts.dedup();

        let mut breakpoints = Vec::new();
        let mut rates: Vec<f64> = Vec::new();
        for s in starts {
            let r = self.expected_hazard(profile, s)?;
            match rates.last() {
                Some(last) if *last == r => {}
                Some(_) => {
                    breakpoints.push(s);
                    rates.push(r);
                }
                None => rates.push(r),
            }
        }
        Ok(ExpectedHazard {
            hazard: PiecewiseConstant::new(breakpoints, rates)?,
            horizon,
        })
    }

    /// Integral of the expected hazard over `[0, t)`, summed exactly over segments.
    pub fn expected_cumulative(&self, profile: &DemographicProfile, t: f64) -> Result<f64> {
        self.expected_hazard_function(profile, t)?.cumulative(t)
    }

    pub fn expected_survival(&self, profile: &DemographicProfile, t: f64) -> Result<f64> {
        Ok((-self.expected_cumulative(profile, t)?).exp())
    }

    /// Writes the table in the `age,sex,year,rate` schema.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["age", "sex", "year", "rate"])?;
        for (k, r) in &self.rates {
            w.write_record([k.age.to_string(), k.sex.to_string(), k.year.to_string(), r.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_entry(row: u64, key: &TableKey, rate: f64) -> Result<()> {
    if key.age > MAX_AGE {
        return Err(Error::Row {
            row,
            message: format!("age {} outside 0..={MAX_AGE}", key.age),
        });
    }
    if !(rate.is_finite() && rate >= 0.0) {
        return Err(Error::Row {
            row,
            message: format!("rate must be finite and >= 0, got {rate}"),
        });
    }
    Ok(())
}

/// One person's background hazard over a bounded follow-up window.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedHazard {
    hazard: PiecewiseConstant,
    horizon: f64,
}

impl ExpectedHazard {
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn segments(&self) -> &PiecewiseConstant {
        &self.hazard
    }

    fn check(&self, t: f64) -> Result<()> {
        if t.is_nan() || t < 0.0 || t > self.horizon {
            return Err(Error::Domain(format!(
                "t = {t} outside the expected-hazard window [0, {}]",
                self.horizon
            )));
        }
        Ok(())
    }

    pub fn cumulative(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.hazard.cumulative(t))
    }

    /// Converts to a plain hazard. Beyond the window the last rate is carried
    /// forward, so callers must stay inside `[0, horizon]`.
    pub fn into_hazard(self) -> Hazard {
        if self.hazard.breakpoints().is_empty() {
            Hazard::Constant {
                rate: self.hazard.rates()[0],
            }
        } else {
            Hazard::PiecewiseConstant(self.hazard)
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub input: RateInput,
}

/// Reads a life table from CSV with header `age,sex,year,rate` (or `qx` when
/// `options.input` is [`RateInput::Qx`]). Column order is free; unknown
/// columns are rejected.
pub fn load_life_table<R: Read>(source: R, options: LoadOptions) -> Result<LifeTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = rdr.headers()?.clone();
    let value_col = options.input.column();
    let mut idx = [None; 4];
    for (i, h) in headers.iter().enumerate() {
        let slot = match h {
            "age" => 0,
            "sex" => 1,
            "year" => 2,
            c if c == value_col => 3,
            "rate" | "qx" => {
                return Err(Error::Row {
                    row: 1,
                    message: format!(
                        "column `{h}` found but the loader expects `{value_col}`; select the matching rate input"
                    ),
                })
            }
            other => {
                return Err(Error::Row {
                    row: 1,
                    message: format!("unknown column `{other}`"),
                })
            }
        };
        if idx[slot].replace(i).is_some() {
            return Err(Error::Row {
                row: 1,
                message: format!("column `{h}` appears twice"),
            });
        }
    }
    let names = ["age", "sex", "year", value_col];
    let mut cols = [0usize; 4];
    for (slot, name) in names.iter().enumerate() {
        cols[slot] = idx[slot].ok_or_else(|| Error::Row {
            row: 1,
            message: format!("missing column `{name}`"),
        })?;
    }

    let mut rates = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec.position().map(|p| p.line()).unwrap_or(0);
        let field = |slot: usize| rec.get(cols[slot]).unwrap_or("");
        let bad = |message: String| Error::Row { row, message };

        let age: u32 = field(0)
            .parse()
            .map_err(|_| bad(format!("age must be an integer, got {:?}", field(0))))?;
        let sex: Sex = field(1).parse().map_err(|e: Error| bad(e.to_string()))?;
        let year: i32 = field(2)
            .parse()
            .map_err(|_| bad(format!("year must be an integer, got {:?}", field(2))))?;
        let value: f64 = field(3)
            .parse()
            .map_err(|_| bad(format!("{value_col} must be a number, got {:?}", field(3))))?;
        let rate = match options.input {
            RateInput::Rate => value,
            RateInput::Qx => {
                if !(0.0..1.0).contains(&value) {
                    return Err(bad(format!("qx must be in [0, 1), got {value}")));
                }
                -(1.0 - value).ln()
            }
        };
        let key = TableKey { age, sex, year };
        check_entry(row, &key, rate)?;
        if rates.insert(key, rate).is_some() {
            return Err(Error::DuplicateKey {
                row,
                key: key.to_string(),
            });
        }
    }
    Ok(LifeTable { rates })
}

/// Subjects whose follow-up leaves the table, with the first missing key.
pub fn coverage_gaps<'a, I>(table: &LifeTable, subjects: I) -> Vec<(String, String)>
where
    I: IntoIterator<Item = (&'a str, &'a DemographicProfile, f64)>,
{
    subjects
        .into_iter()
        .filter_map(
            |(id, profile, horizon)| match table.expected_hazard_function(profile, horizon) {
                Ok(_) => None,
                Err(Error::Coverage { key }) => Some((id.to_string(), key)),
                Err(e) => Some((id.to_string(), e.to_string())),
            },
        )
        .collect()
}
