use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;

use netsurv::advisor::{self, AdvisorAnswers, YesNo};
use netsurv::cohort::{load_cohort, simulate_cohort_with, Cohort, SimulationConfig, Status};
use netsurv::decomposition::{cause_a_contrast, decompose_trial, CauseAContrast, DecompositionReport};
use netsurv::estimands::{build_scenario, gap_curve, survival, EstimandKind, ScenarioSpec, TimeGrid};
use netsurv::estimator::{
    disease_attributable_km, kaplan_meier, pohar_perme_with, smr, EventDefinition, PoharPermeCurve, PoharPermeOptions,
    Smr, SmrConvention, StepCurve,
};
use netsurv::fixtures;
use netsurv::lifetable::{
    coverage_gaps, load_life_table, Coverage, DemographicProfile, LifeTable, LoadOptions, RateInput, Sex,
};
use netsurv::output::sig6;
use netsurv::{Error, Result};

use crate::{Format, Global};

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    let path = dir.join(name);
    let file = File::create(&path)?;
    Ok((path, BufWriter::new(file)))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let (path, mut w) = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(std::io::Error::other)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(path)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn read_table(path: &Path, qx: bool) -> Result<LifeTable> {
    let input = if qx { RateInput::Qx } else { RateInput::Rate };
    load_life_table(open(path)?, LoadOptions { input })
}

fn read_cohort(path: &Path) -> Result<Cohort> {
    load_cohort(open(path)?, &path.display().to_string())
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Share of excess other-cause mortality allocated to Component C.
    #[arg(long, default_value_t = 0.5)]
    pub frac_c: f64,
    /// General-population hazard (Component D), per year.
    #[arg(long = "h-d", default_value_t = ScenarioSpec::DEFAULT_BACKGROUND_RATE)]
    pub h_d: f64,
    /// Weibull shape of the disease hazard (Component A).
    #[arg(long, default_value_t = ScenarioSpec::DEFAULT_CANCER_SHAPE)]
    pub shape: f64,
    /// Weibull scale of the disease hazard, in years.
    #[arg(long, default_value_t = ScenarioSpec::DEFAULT_CANCER_SCALE)]
    pub scale: f64,
}

impl ScenarioArgs {
    fn spec(&self, rr: f64) -> ScenarioSpec {
        ScenarioSpec {
            rr,
            frac_c: self.frac_c,
            background_rate: self.h_d,
            cancer_shape: self.shape,
            cancer_scale: self.scale,
        }
    }
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    /// Relative risks of other-cause mortality, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = ScenarioSpec::DEFAULT_RR_GRID)]
    pub rr: Vec<f64>,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Time grid as start:end:step, in years.
    #[arg(long, default_value = "0:10:0.01")]
    pub grid: String,
    /// Time at which the summary reports survival values.
    #[arg(long, default_value_t = 5.0)]
    pub summary_time: f64,
    /// Also write a small matplotlib script that plots the curve files.
    #[arg(long)]
    pub plot_script: bool,
}

#[derive(Debug, Serialize)]
struct CurveSummary {
    rr: f64,
    frac_c: f64,
    t: f64,
    s_a: f64,
    s_ac: f64,
    s_net: f64,
    gap_pp: f64,
    max_gap_pp: f64,
    argmax: f64,
    file: String,
}

fn curve_file_name(rr: f64) -> String {
    format!("curve_rr_{}.csv", sig6(rr))
}

pub fn curves(g: &Global, a: &CurvesArgs) -> Result<()> {
    let grid = TimeGrid::parse(&a.grid)?;
    if !(a.summary_time.is_finite() && a.summary_time >= 0.0) {
        return Err(Error::Validation(format!(
            "summary time must be >= 0, got {}",
            a.summary_time
        )));
    }
    if a.rr.is_empty() {
        return Err(Error::Validation("at least one --rr value is required".into()));
    }
    let mut summary = Vec::with_capacity(a.rr.len());
    for &rr in &a.rr {
        let m = build_scenario(&a.scenario.spec(rr))?;
        let name = curve_file_name(rr);
        let (_, file) = create(&g.output_dir, &name)?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(["t", "S_A", "S_AC", "S_net", "gap_pp"])
            .map_err(Error::Csv)?;
        for &t in grid.points() {
            let sa = survival(&m, EstimandKind::DiseaseSpecific, t)?;
            let sac = survival(&m, EstimandKind::DiseaseAttributable, t)?;
            let sn = survival(&m, EstimandKind::Net, t)?;
            w.write_record([sig6(t), sig6(sa), sig6(sac), sig6(sn), sig6(100.0 * (sa - sn))])
                .map_err(Error::Csv)?;
        }
        w.flush()?;

        let gap = gap_curve(&m, EstimandKind::DiseaseSpecific, EstimandKind::Net, grid.points())?;
        let t = a.summary_time;
        let s_a = survival(&m, EstimandKind::DiseaseSpecific, t)?;
        let s_net = survival(&m, EstimandKind::Net, t)?;
        summary.push(CurveSummary {
            rr,
            frac_c: a.scenario.frac_c,
            t,
            s_a,
            s_ac: survival(&m, EstimandKind::DiseaseAttributable, t)?,
            s_net,
            gap_pp: 100.0 * (s_a - s_net),
            max_gap_pp: gap.max_gap_pp,
            argmax: gap.argmax,
            file: name,
        });
    }

    match g.format {
        Format::Json => {
            write_json(&g.output_dir, "curves_summary.json", &summary)?;
        }
        Format::Csv => {
            let (_, file) = create(&g.output_dir, "curves_summary.csv")?;
            let mut w = csv::Writer::from_writer(file);
            w.write_record([
                "rr",
                "frac_c",
                "t",
                "S_A",
                "S_AC",
                "S_net",
                "gap_pp",
                "max_gap_pp",
                "argmax",
            ])?;
            for s in &summary {
                w.write_record([
                    sig6(s.rr),
                    sig6(s.frac_c),
                    sig6(s.t),
                    sig6(s.s_a),
                    sig6(s.s_ac),
                    sig6(s.s_net),
                    sig6(s.gap_pp),
                    sig6(s.max_gap_pp),
                    sig6(s.argmax),
                ])?;
            }
            w.flush()?;
        }
    }
    if a.plot_script {
        let files: Vec<&str> = summary.iter().map(|s| s.file.as_str()).collect();
        write_plot_script(&g.output_dir, &files)?;
    }
    for s in &summary {
        println!(
            "rr {}: gap at t={} is {} pp; max {} pp at t={}",
            sig6(s.rr),
            sig6(s.t),
            sig6(s.gap_pp),
            sig6(s.max_gap_pp),
            sig6(s.argmax)
        );
    }
    Ok(())
}

fn write_plot_script(dir: &Path, files: &[&str]) -> Result<()> {
    let (_, mut w) = create(dir, "plot_curves.py")?;
    let list = files.iter().map(|f| format!("{f:?}")).collect::<Vec<_>>().join(", ");
    write!(
        w,
        r#"# Plots the curve CSVs in this directory. Requires pandas and matplotlib.
import pandas as pd
import matplotlib.pyplot as plt

FILES = [{list}]

fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(7, 8))
for name in FILES:
    df = pd.read_csv(name)
    top.plot(df["t"], df["S_net"], label=name)
    bottom.plot(df["t"], df["gap_pp"], label=name)
top.plot(df["t"], df["S_A"], "k--", label="S_A")
top.set_ylabel("survival")
bottom.set_ylabel("S_A - S_net (pp)")
bottom.set_xlabel("years since diagnosis")
top.legend()
fig.tight_layout()
fig.savefig("curves.png", dpi=150)
"#
    )?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SexArg {
    Male,
    Female,
}

impl From<SexArg> for Sex {
    fn from(s: SexArg) -> Self {
        match s {
            SexArg::Male => Sex::Male,
            SexArg::Female => Sex::Female,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of subjects.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Relative risk of other-cause mortality.
    #[arg(long, default_value_t = 2.0)]
    pub rr: f64,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Administrative censoring time in years.
    #[arg(long, default_value_t = 10.0)]
    pub max_follow_up: f64,
    /// Rate of exponential random censoring, per year.
    #[arg(long, default_value_t = 0.0)]
    pub censoring_rate: f64,
    /// Age at diagnosis stamped on every subject.
    #[arg(long, default_value_t = 70.0)]
    pub age: f64,
    #[arg(long, value_enum, default_value_t = SexArg::Male)]
    pub sex: SexArg,
    /// Calendar year of diagnosis.
    #[arg(long, default_value_t = 2000)]
    pub year: i32,
    /// Arm label written to every record.
    #[arg(long)]
    pub arm: Option<String>,
    #[arg(long, default_value = "S")]
    pub id_prefix: String,
    /// Cohort file name inside the output directory.
    #[arg(long, default_value = "cohort.csv")]
    pub output: String,
}

#[derive(Debug, Serialize)]
struct SimulationSummary<'a> {
    seed: u64,
    n: usize,
    scenario: &'a ScenarioSpec,
    max_follow_up: f64,
    censoring_rate: f64,
    censored: usize,
    death_cancer: usize,
    death_other: usize,
    cohort_file: &'a str,
}

pub fn simulate(g: &Global, a: &SimulateArgs) -> Result<()> {
    let spec = a.scenario.spec(a.rr);
    let model = build_scenario(&spec)?;
    let mut cfg = SimulationConfig::new(a.n, a.max_follow_up, a.censoring_rate, g.seed);
    cfg.profile = DemographicProfile::new(a.age, a.sex.into(), a.year)?;
    cfg.arm = a.arm.clone();
    cfg.id_prefix = a.id_prefix.clone();
    cfg.parallel = g.parallel > 1;
    let cohort = simulate_cohort_with(&model, &cfg)?;
    let (path, w) = create(&g.output_dir, &a.output)?;
    cohort.write_csv(w)?;

    let count = |s: Status| cohort.records().iter().filter(|r| r.status == s).count();
    let summary = SimulationSummary {
        seed: g.seed,
        n: cohort.len(),
        scenario: &spec,
        max_follow_up: a.max_follow_up,
        censoring_rate: a.censoring_rate,
        censored: count(Status::Censored),
        death_cancer: count(Status::DeathCancer),
        death_other: count(Status::DeathOther),
        cohort_file: &a.output,
    };
    match g.format {
        Format::Json => {
            write_json(&g.output_dir, "simulation.json", &summary)?;
        }
        Format::Csv => {
            let (_, file) = create(&g.output_dir, "simulation_summary.csv")?;
            let mut w = csv::Writer::from_writer(file);
            w.write_record(["seed", "n", "rr", "frac_c", "censored", "death_cancer", "death_other"])?;
            w.write_record([
                summary.seed.to_string(),
                summary.n.to_string(),
                sig6(spec.rr),
                sig6(spec.frac_c),
                summary.censored.to_string(),
                summary.death_cancer.to_string(),
                summary.death_other.to_string(),
            ])?;
            w.flush()?;
        }
    }
    println!(
        "wrote {} subjects to {} ({} cancer deaths, {} other deaths, {} censored)",
        summary.n,
        path.display(),
        summary.death_cancer,
        summary.death_other,
        summary.censored
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SmrConventionArg {
    ExpectedProbability,
    PersonTime,
}

impl From<SmrConventionArg> for SmrConvention {
    fn from(c: SmrConventionArg) -> Self {
        match c {
            SmrConventionArg::ExpectedProbability => SmrConvention::ExpectedProbability,
            SmrConventionArg::PersonTime => SmrConvention::PersonTime,
        }
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Cohort CSV (`id,age,sex,year,time,status[,arm][,true_cause]`).
    #[arg(long)]
    pub cohort: PathBuf,
    /// Life table CSV (`age,sex,year,rate`).
    #[arg(long)]
    pub life_table: PathBuf,
    /// The life table holds annual death probabilities in a `qx` column.
    #[arg(long)]
    pub qx: bool,
    /// Follow-up horizon for the SMR, in years.
    #[arg(long, default_value_t = 5.0)]
    pub horizon: f64,
    /// Extra evaluation times for the Pohar Perme curve, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub eval_times: Vec<f64>,
    /// Add a pointwise variance column to the curve files.
    #[arg(long)]
    pub variance: bool,
    #[arg(long, value_enum, default_value_t = SmrConventionArg::ExpectedProbability)]
    pub smr_convention: SmrConventionArg,
}

#[derive(Debug, Serialize)]
struct SmrReport {
    horizon: f64,
    convention: SmrConvention,
    observed: usize,
    expected: f64,
    /// Absent when no deaths are expected.
    ratio: Option<f64>,
}

impl From<Smr> for SmrReport {
    fn from(s: Smr) -> Self {
        Self {
            horizon: s.horizon,
            convention: s.convention,
            observed: s.observed,
            expected: s.expected,
            ratio: Some(s.ratio),
        }
    }
}

fn write_curve(dir: &Path, name: &str, curve: &StepCurve, variance: bool) -> Result<()> {
    let (_, w) = create(dir, name)?;
    curve.write_csv(w, variance)
}

pub fn estimate(g: &Global, a: &EstimateArgs) -> Result<()> {
    let cohort = read_cohort(&a.cohort)?;
    let table = read_table(&a.life_table, a.qx)?;
    let options = PoharPermeOptions {
        eval_times: a.eval_times.clone(),
    };
    let labelled = cohort.has_cause_labels();

    let run_km = || -> Result<(StepCurve, StepCurve, Option<StepCurve>)> {
        let overall = kaplan_meier(&cohort, &EventDefinition::AllDeaths)?;
        let cause = kaplan_meier(&cohort, &EventDefinition::CancerDeaths)?;
        let attributable = if labelled {
            Some(disease_attributable_km(&cohort)?)
        } else {
            None
        };
        Ok((overall, cause, attributable))
    };
    let run_pp = || -> Result<PoharPermeCurve> { pohar_perme_with(&cohort, &table, &options) };
    let (km, pp) = if g.parallel > 1 {
        rayon::join(run_km, run_pp)
    } else {
        (run_km(), run_pp())
    };
    let (overall, cause, attributable) = km?;
    let pp = pp?;

    let smr = match smr(&cohort, &table, a.horizon, a.smr_convention.into()) {
        Ok(s) => SmrReport::from(s),
        Err(Error::UndefinedRatio(_)) => SmrReport {
            horizon: a.horizon,
            convention: a.smr_convention.into(),
            observed: cohort
                .records()
                .iter()
                .filter(|r| r.status == Status::DeathOther && r.follow_up_time <= a.horizon)
                .count(),
            expected: 0.0,
            ratio: None,
        },
        Err(e) => return Err(e),
    };

    let dir = &g.output_dir;
    write_curve(dir, "km_overall.csv", &overall, a.variance)?;
    write_curve(dir, "km_cause_specific.csv", &cause, a.variance)?;
    write_curve(dir, "pohar_perme.csv", &pp.curve, a.variance)?;
    if let Some(c) = &attributable {
        write_curve(dir, "km_disease_attributable.csv", c, a.variance)?;
    }
    write_json(dir, "smr.json", &smr)?;

    let h = a.horizon;
    println!(
        "at t={}: overall {}, cause-specific {}, net (Pohar Perme) {}",
        sig6(h),
        sig6(overall.value_at(h)),
        sig6(cause.value_at(h)),
        sig6(pp.value_at(h))
    );
    if let Some(c) = &attributable {
        println!("disease-attributable {}", sig6(c.value_at(h)));
    } else {
        println!("disease-attributable KM skipped: cohort has no true_cause labels");
    }
    if pp.clipped > 0 {
        println!("note: {} Pohar Perme points were clipped to [0, 1]", pp.clipped);
    }
    if let Some(t) = pp.truncated_at {
        println!("note: weighted risk set vanished at t={}", sig6(t));
    }
    match smr.ratio {
        Some(r) => println!(
            "SMR {} (observed {}, expected {})",
            sig6(r),
            smr.observed,
            sig6(smr.expected)
        ),
        None => println!("SMR undefined: no expected deaths"),
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Fixture {
    /// Bundled two-arm prostate-cancer trial.
    Vacurg,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// Use a bundled data set instead of --cohort/--life-table.
    #[arg(long, value_enum, conflicts_with_all = ["cohort", "life_table"])]
    pub fixture: Option<Fixture>,
    #[arg(long, requires = "life_table")]
    pub cohort: Option<PathBuf>,
    #[arg(long, requires = "cohort")]
    pub life_table: Option<PathBuf>,
    #[arg(long)]
    pub qx: bool,
    /// Arm used as the reference (D + B).
    #[arg(long)]
    pub reference_arm: Option<String>,
    /// Arm used as the treated group (D + B + C); omit for a one-arm analysis.
    #[arg(long)]
    pub treated_arm: Option<String>,
    /// Common horizon in years; defaults to 3 for the bundled trial.
    #[arg(long)]
    pub horizon: Option<f64>,
}

#[derive(Debug, Serialize)]
struct DecomposeOutput<'a> {
    report: &'a DecompositionReport,
    cause_a_contrast: Option<&'a CauseAContrast>,
}

pub fn decompose(g: &Global, a: &DecomposeArgs) -> Result<()> {
    let (cohort, table, default_ref, default_treated, default_horizon) = match (&a.fixture, &a.cohort, &a.life_table) {
        (Some(Fixture::Vacurg), _, _) => (
            fixtures::trial_cohort()?,
            fixtures::trial_life_table()?,
            Some(fixtures::REFERENCE_ARM),
            Some(fixtures::TREATED_ARM),
            Some(fixtures::TRIAL_HORIZON),
        ),
        (None, Some(c), Some(t)) => (read_cohort(c)?, read_table(t, a.qx)?, None, None, None),
        _ => {
            return Err(Error::Validation(
                "give either --fixture or both --cohort and --life-table".into(),
            ))
        }
    };
    let horizon = a
        .horizon
        .or(default_horizon)
        .ok_or_else(|| Error::Validation("--horizon is required for a user cohort".into()))?;

    let reference_name = a.reference_arm.as_deref().or(default_ref);
    let treated_name = a.treated_arm.as_deref().or(default_treated);
    let reference = match reference_name {
        Some(name) => cohort.arm(name)?,
        None => cohort.clone(),
    };
    let treated = treated_name.map(|name| cohort.arm(name)).transpose()?;

    let report = decompose_trial(&reference, treated.as_ref(), &table, horizon)?;
    let contrast = treated
        .as_ref()
        .map(|t| cause_a_contrast(&reference, t, horizon))
        .transpose()?;

    let text = report.to_text_table();
    let mut full = text.clone();
    if let Some(c) = &contrast {
        full.push_str(&format!(
            "Cause-A death contrast (treated - reference): {:.1} percentage points\nCaveat: {}\n",
            c.difference_pp, c.caveat
        ));
    }
    let (_, mut w) = create(&g.output_dir, "decomposition.txt")?;
    w.write_all(full.as_bytes())?;
    w.flush()?;
    write_json(
        &g.output_dir,
        "decomposition.json",
        &DecomposeOutput {
            report: &report,
            cause_a_contrast: contrast.as_ref(),
        },
    )?;
    print!("{full}");
    Ok(())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Answer {
    Yes,
    No,
}

impl From<Answer> for YesNo {
    fn from(a: Answer) -> Self {
        match a {
            Answer::Yes => YesNo::Yes,
            Answer::No => YesNo::No,
        }
    }
}

#[derive(Debug, Args)]
pub struct AdviseArgs {
    /// JSON file holding the four answers (and optionally observed_rr).
    #[arg(long, conflicts_with_all = ["removed_d", "rr_approx_one", "reliable_cod", "stratified_tables", "rr"])]
    pub answers: Option<PathBuf>,
    /// Was general-population mortality (D) removed?
    #[arg(long, value_enum)]
    pub removed_d: Option<Answer>,
    /// Is the other-cause relative risk approximately 1?
    #[arg(long, value_enum)]
    pub rr_approx_one: Option<Answer>,
    /// Observed other-cause relative risk; overrides --rr-approx-one.
    #[arg(long)]
    pub rr: Option<f64>,
    /// Is cause-of-death information reliable? Defaults to no.
    #[arg(long, value_enum)]
    pub reliable_cod: Option<Answer>,
    /// Do stratified life tables remove baseline differences? Defaults to no.
    #[arg(long, value_enum)]
    pub stratified_tables: Option<Answer>,
    /// Largest RR still treated as approximately 1.
    #[arg(long, default_value_t = advisor::DEFAULT_RR_THRESHOLD)]
    pub threshold: f64,
}

fn answers_from_flags(a: &AdviseArgs) -> Result<AdvisorAnswers> {
    let removed: YesNo = a
        .removed_d
        .ok_or_else(|| Error::Validation("--removed-d is required (or pass --answers)".into()))?
        .into();
    let rr_one = match (a.rr_approx_one, a.rr) {
        (Some(ans), _) => ans.into(),
        (None, Some(rr)) => {
            (advisor::rr_threshold_classify(rr, a.threshold)? == advisor::RrClass::ApproximatelyOne).into()
        }
        // unreachable in the tree when D was not removed
        (None, None) if removed == YesNo::No => YesNo::No,
        (None, None) => {
            return Err(Error::Validation(
                "--rr-approx-one or --rr is required when --removed-d is yes".into(),
            ))
        }
    };
    Ok(AdvisorAnswers {
        removed_general_population_mortality: removed,
        rr_approximately_one: rr_one,
        reliable_cause_of_death: a.reliable_cod.map_or(YesNo::No, Into::into),
        lifetables_remove_baseline: a.stratified_tables.map_or(YesNo::No, Into::into),
        observed_rr: a.rr,
    })
}

pub fn advise(g: &Global, a: &AdviseArgs) -> Result<()> {
    let answers = match &a.answers {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            AdvisorAnswers::from_json(&text)?
        }
        None => answers_from_flags(a)?,
    };
    let verdict = advisor::advise_with_threshold(&answers, a.threshold)?;
    write_json(&g.output_dir, "verdict.json", &verdict)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&verdict).map_err(std::io::Error::other)?
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct LifetableCheckArgs {
    #[arg(long)]
    pub life_table: PathBuf,
    #[arg(long)]
    pub qx: bool,
    #[arg(long)]
    pub cohort: PathBuf,
    /// Check every subject to this horizon instead of their own follow-up.
    #[arg(long)]
    pub horizon: Option<f64>,
}

#[derive(Debug, Serialize)]
struct GapEntry {
    id: String,
    missing: String,
}

#[derive(Debug, Serialize)]
struct CoverageReport {
    entries: usize,
    coverage: Option<CoverageSummary>,
    subjects: usize,
    horizon: Option<f64>,
    uncovered: Vec<GapEntry>,
}

#[derive(Debug, Serialize)]
struct CoverageSummary {
    min_age: u32,
    max_age: u32,
    min_year: i32,
    max_year: i32,
    sexes: Vec<&'static str>,
    complete: bool,
}

impl From<Coverage> for CoverageSummary {
    fn from(c: Coverage) -> Self {
        Self {
            min_age: c.min_age,
            max_age: c.max_age,
            min_year: c.min_year,
            max_year: c.max_year,
            sexes: c.sexes.iter().map(|s| s.as_str()).collect(),
            complete: c.complete,
        }
    }
}

pub fn lifetable_check(g: &Global, a: &LifetableCheckArgs) -> Result<()> {
    if let Some(h) = a.horizon {
        if !(h.is_finite() && h >= 0.0) {
            return Err(Error::Validation(format!("horizon must be finite and >= 0, got {h}")));
        }
    }
    let table = read_table(&a.life_table, a.qx)?;
    let cohort = read_cohort(&a.cohort)?;
    let gaps = coverage_gaps(
        &table,
        cohort
            .records()
            .iter()
            .map(|r| (r.id.as_str(), &r.profile, a.horizon.unwrap_or(r.follow_up_time))),
    );
    let report = CoverageReport {
        entries: table.len(),
        coverage: table.coverage().map(Into::into),
        subjects: cohort.len(),
        horizon: a.horizon,
        uncovered: gaps.into_iter().map(|(id, missing)| GapEntry { id, missing }).collect(),
    };
    write_json(&g.output_dir, "lifetable_check.json", &report)?;
    if let Some(first) = report.uncovered.first() {
        return Err(Error::Coverage {
            key: format!(
                "{} of {} subjects leave the table; first is {} at {}",
                report.uncovered.len(),
                report.subjects,
                first.id,
                first.missing
            ),
        });
    }
    println!(
        "life table covers all {} subjects ({} entries)",
        report.subjects, report.entries
    );
    Ok(())
}
