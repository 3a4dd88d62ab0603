#!/usr/bin/env python3
"""Regenerates the packaged trial fixtures.

Both files are synthetic. The life table is a Gompertz-shaped male mortality
surface whose level is calibrated so the trial cohort's mean expected death
probability over 3 years is CALIBRATION_TARGET. The cohort reproduces only the
per-arm death counts by cause; event times are evenly spaced over (0, 3) and
survivors are censored at 3 years.

Usage: python3 generate_fixtures.py   (writes next to this script)
"""

import math
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))

AGES = range(55, 91)
YEARS = range(1960, 1976)
HORIZON = 3.0
CALIBRATION_TARGET = 0.1354
GOMPERTZ_SLOPE = 0.085
SECULAR_DECLINE = 0.004

ARMS = [
    # (arm, id prefix, cancer deaths, other-cause deaths, n)
    ("placebo", "P", 37, 58, 127),
    ("estrogen", "E", 27, 66, 125),
]


def shape(age, year):
    return math.exp(GOMPERTZ_SLOPE * (age - 70)) * (1.0 - SECULAR_DECLINE * (year - 1960))


def profiles():
    out = []
    k = 0
    for arm, _, _, _, n in ARMS:
        for _ in range(n):
            age = 60.0 + ((k * 37) % 200) / 10.0
            year = 1960 + (k % 13)
            out.append((age, year))
            k += 1
    return out


def expected_cumulative(rate, age, year, t):
    """Integral of the attained-age / attained-year rate over [0, t)."""
    cuts = {0.0, t}
    j = 1
    while math.floor(age) + j - age < t:
        cuts.add(math.floor(age) + j - age)
        j += 1
    y = 1
    while y < t:
        cuts.add(float(y))
        y += 1
    cuts = sorted(cuts)
    total = 0.0
    for a, b in zip(cuts, cuts[1:]):
        if b <= a:
            continue
        n_age = sum(1 for i in range(1, j) if math.floor(age) + i - age <= a)
        n_year = sum(1 for i in range(1, y) if i <= a)
        total += rate(math.floor(age) + n_age, year + n_year) * (b - a)
    return total


def mean_expected_death(level, rounded=False):
    def rate(a, yr):
        r = level * shape(a, yr)
        return round(r, 6) if rounded else r

    ps = profiles()
    return sum(1.0 - math.exp(-expected_cumulative(rate, a, yr, HORIZON)) for a, yr in ps) / len(ps)


def calibrate():
    lo, hi = 1e-4, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mean_expected_death(mid) < CALIBRATION_TARGET:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def main():
    level = calibrate()
    with open(os.path.join(HERE, "trial_era_male.csv"), "w") as f:
        f.write("age,sex,year,rate\n")
        for a in AGES:
            for yr in YEARS:
                f.write(f"{a},male,{yr},{round(level * shape(a, yr), 6):.6f}\n")

    rng = random.Random(1967)
    ps = profiles()
    k = 0
    with open(os.path.join(HERE, "vacurg_trial.csv"), "w") as f:
        f.write("id,age,sex,year,time,status,arm\n")
        for arm, prefix, n_cancer, n_other, n in ARMS:
            statuses = ["death_cancer"] * n_cancer + ["death_other"] * n_other
            statuses += ["censored"] * (n - n_cancer - n_other)
            rng.shuffle(statuses)
            seen = {"death_cancer": 0, "death_other": 0}
            totals = {"death_cancer": n_cancer, "death_other": n_other}
            for i, status in enumerate(statuses):
                age, year = ps[k]
                k += 1
                if status == "censored":
                    time = HORIZON
                else:
                    time = HORIZON * (seen[status] + 0.5) / totals[status]
                    seen[status] += 1
                f.write(f"{prefix}{i + 1:03d},{age:.1f},male,{year},{time:.6f},{status},{arm}\n")

    print(f"level={level:.8f} mean D={mean_expected_death(level, rounded=True):.6f}")


if __name__ == "__main__":
    main()
