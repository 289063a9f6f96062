"""Generate the census-like fixture CSVs used by the dataset presets and tests.

The columns follow ACS PUMS naming (AGEP, SCHL, WKHP, COW, MAR, SEX, RAC1P,
PINCP). Values are synthetic: group-dependent feature distributions and an
income that is partly linear in the features, partly not. Two splits are
written: a smaller reference split (normalization statistics) and a sampling
split (candidate population). Re-running reproduces the files exactly.

    python3 make_fixture.py
"""

import numpy as np

# RAC1P code -> (rows in sampling split, education shift, hours shift, income shift)
GROUPS = {
    1: (16000, 0.8, 1.0, 4000.0),
    2: (6000, -1.0, -0.5, -6000.0),
    3: (5000, -1.5, -1.5, -8000.0),
    6: (7000, 1.8, 0.5, 9000.0),
    8: (5600, -2.2, -1.0, -9000.0),
    9: (5200, 0.0, -2.0, -3000.0),
    # below the 5000-row retention threshold
    4: (300, -1.0, 0.0, -5000.0),
    5: (150, -1.0, 0.0, -5000.0),
    7: (800, -0.5, 0.0, -2000.0),
}

COLUMNS = ["AGEP", "SCHL", "WKHP", "COW", "MAR", "SEX", "RAC1P", "PINCP"]


def draw(rng, n, code, edu_shift, hours_shift, income_shift):
    age = np.clip(rng.normal(42, 13, n), 18, 80).round()
    sex = rng.integers(1, 3, n)
    schl = np.clip(rng.normal(18 + edu_shift, 3, n), 1, 24).round()
    wkhp = np.clip(rng.normal(38 + 3 * hours_shift - 4 * (sex - 1), 10, n), 1, 99).round()
    cow = rng.choice(np.arange(1, 9), n, p=[0.6, 0.1, 0.08, 0.07, 0.05, 0.05, 0.04, 0.01])
    mar = rng.choice(np.arange(1, 6), n, p=[0.5, 0.05, 0.12, 0.03, 0.3])
    income = (
        -40000
        + 900 * age
        - 8 * (age - 45) ** 2
        + 3500 * (schl - 16)
        + 150 * (schl - 16) ** 2
        + 900 * wkhp
        - 5000 * (sex - 1)
        + 4000 * (mar == 1)
        + 6000 * (cow == 7)
        + income_shift
        + rng.normal(0, 18000, n)
    )
    income = np.maximum(income, 0).round(-1)
    race = np.full(n, code)
    return np.column_stack([age, schl, wkhp, cow, mar, sex, race, income]).astype(np.int64)


def write(path, seed, scale):
    rng = np.random.default_rng(seed)
    blocks = [
        draw(rng, max(1, int(n * scale)), code, e, h, s)
        for code, (n, e, h, s) in GROUPS.items()
    ]
    data = np.concatenate(blocks)
    data = data[rng.permutation(len(data))]
    with open(path, "w", newline="\n") as f:
        f.write(",".join(COLUMNS) + "\n")
        for row in data:
            f.write(",".join(str(v) for v in row) + "\n")


if __name__ == "__main__":
    write("census_reference.csv", seed=2017, scale=0.2)
    write("census_sampling.csv", seed=2018, scale=1.0)
