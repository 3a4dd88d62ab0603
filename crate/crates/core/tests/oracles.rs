//! Independent numerical oracles for cumulative hazards and life-table
//! expected mortality.

use netsurv::hazard::Hazard;
use netsurv::lifetable::{DemographicProfile, LifeTable, Sex, TableKey};

/// Composite Simpson's rule on `[a, b]`.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 1 { n + 1 } else { n };
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Integral of `h` over `[0, t]`, splitting at the given discontinuities.
fn quadrature(h: &Hazard, t: f64, cuts: &[f64]) -> f64 {
    let mut pts = vec![0.0];
    pts.extend(cuts.iter().copied().filter(|c| *c < t));
    pts.push(t);
    pts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            // hazards are left-closed, so stay strictly inside each piece
            let (a, b) = (w[0], w[1]);
            let eps = 1e-13 * (1.0 + b);
            let at = |x: f64| h.hazard_at(x.clamp(a + eps, b - eps)).unwrap();
            if a == 0.0 {
                // x = u^2 removes the sqrt-type behaviour of Weibull hazards at 0
                simpson(|u| at(u * u) * 2.0 * u, 0.0, b.sqrt(), 2000)
            } else {
                simpson(at, a, b, 2000)
            }
        })
        .sum()
}

#[test]
fn cumulative_hazards_match_quadrature() {
    let forms = [
        (Hazard::constant(0.37).unwrap(), vec![]),
        (
            Hazard::piecewise(vec![0.5, 2.0, 7.25, 12.0], vec![0.1, 0.8, 0.0, 0.3, 0.05]).unwrap(),
            vec![0.5, 2.0, 7.25, 12.0],
        ),
        (Hazard::weibull(1.5, 5.3).unwrap(), vec![]),
        (Hazard::weibull(2.5, 3.0).unwrap(), vec![]),
        (Hazard::Zero, vec![]),
    ];
    for (h, cuts) in &forms {
        for i in 0..=80 {
            let t = i as f64 * 0.25;
            let q = quadrature(h, t, cuts);
            let c = h.cumulative(t).unwrap();
            assert!((q - c).abs() < 1e-9, "{h}: t={t} quadrature {q} vs {c}");
        }
    }
}

#[test]
fn weibull_closed_form_values() {
    let h = Hazard::weibull(1.5, 5.3).unwrap();
    // (5/5.3)^1.5
    assert!((h.cumulative(5.0).unwrap() - 0.916_307_4).abs() < 1e-7);
    assert!((h.survival(10.0).unwrap() - 0.074_892).abs() < 1e-6);
}

fn varied_table() -> LifeTable {
    let mut entries = Vec::new();
    for age in 60..=80u32 {
        for year in 1995..=2010 {
            let rate = 0.004 * (1.09f64).powi(age as i32 - 60) * (1.0 - 0.01 * (year - 1995) as f64);
            entries.push((
                TableKey {
                    age,
                    sex: Sex::Female,
                    year,
                },
                rate,
            ));
        }
    }
    LifeTable::from_entries(entries).unwrap()
}

/// Expected cumulative hazard by direct enumeration: age advances whenever
/// `age0 + t` crosses an integer, calendar year at each integer `t`.
fn enumerated_cumulative(table: &LifeTable, age0: f64, year0: i32, t: f64) -> f64 {
    let mut cuts: Vec<f64> = Vec::new();
    let mut k = 1.0;
    while k - age0.fract() < t + 1.0 {
        let b = k - age0.fract();
        if b > 0.0 {
            cuts.push(b);
        }
        k += 1.0;
    }
    let mut y = 1.0;
    while y < t + 1.0 {
        cuts.push(y);
        y += 1.0;
    }
    cuts.retain(|c| *c < t);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut pts = vec![0.0];
    pts.extend(cuts);
    pts.push(t);
    pts.windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let key = TableKey {
                age: (age0 + mid).floor() as u32,
                sex: Sex::Female,
                year: year0 + mid.floor() as i32,
            };
            table.rate(&key).unwrap() * (w[1] - w[0])
        })
        .sum()
}

#[test]
fn life_table_segmentation_matches_enumeration() {
    let table = varied_table();
    for (age0, year0) in [(62.0, 1996), (63.37, 1999), (65.999, 2000), (70.5, 2001)] {
        let p = DemographicProfile::new(age0, Sex::Female, year0).unwrap();
        for i in 0..=36 {
            let t = i as f64 * 0.25 + 0.013;
            let want = enumerated_cumulative(&table, age0, year0, t);
            let got = table.expected_cumulative(&p, t).unwrap();
            assert!((want - got).abs() < 1e-12, "age {age0} t {t}: {want} vs {got}");
        }
    }
}

#[test]
fn life_table_hazard_function_is_consistent() {
    let table = varied_table();
    let p = DemographicProfile::new(63.37, Sex::Female, 1999).unwrap();
    let f = table.expected_hazard_function(&p, 8.0).unwrap();
    for i in 0..=80 {
        let t = i as f64 * 0.1;
        assert!((f.cumulative(t).unwrap() - table.expected_cumulative(&p, t).unwrap()).abs() < 1e-12);
    }
    assert!(f.cumulative(8.5).is_err());
}

#[test]
fn coverage_errors_name_the_cell() {
    let table = varied_table();
    let p = DemographicProfile::new(79.5, Sex::Female, 2000).unwrap();
    let err = table.expected_cumulative(&p, 3.0).unwrap_err();
    assert!(err.to_string().contains("81"), "{err}");
    let male = DemographicProfile::new(65.0, Sex::Male, 2000).unwrap();
    assert!(table.expected_survival(&male, 1.0).is_err());
}
