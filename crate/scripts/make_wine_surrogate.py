#!/usr/bin/env python3
"""Generate a deterministic stand-in for the UCI white wine-quality CSV.

The real file (winequality-white.csv, 4,898 rows, ';'-delimited) cannot be
fetched in offline builds. This script writes a file with the same header,
row count, value precision and per-column ranges, a correlated Gaussian-copula
body, and the well-known sulfur-dioxide outlier (free 289 / total 440, with
the remaining maxima at 146.5 / 366.5).

Usage: python3 scripts/make_wine_surrogate.py data/winequality-white-surrogate.csv
"""
import sys

import numpy as np

N = 4898
TARGET_ROW = 4745
SEED = 20250415

# name, mean, sd, min, max, rounding step
COLUMNS = [
    ("fixed acidity", 6.855, 0.844, 3.8, 14.2, 0.1),
    ("volatile acidity", 0.278, 0.101, 0.08, 1.1, 0.005),
    ("citric acid", 0.334, 0.121, 0.0, 1.66, 0.01),
    ("residual sugar", 6.39, 5.07, 0.6, 65.8, 0.05),
    ("chlorides", 0.0458, 0.0218, 0.009, 0.346, 0.001),
    ("free sulfur dioxide", 35.3, 17.0, 2.0, 146.5, 0.5),
    ("total sulfur dioxide", 138.4, 42.5, 9.0, 366.5, 0.5),
    ("density", 0.99403, 0.00299, 0.98711, 1.03898, 0.00001),
    ("pH", 3.188, 0.151, 2.72, 3.82, 0.01),
    ("sulphates", 0.49, 0.114, 0.22, 1.08, 0.01),
    ("alcohol", 10.51, 1.23, 8.0, 14.2, 0.1),
]

# Approximate pairwise correlations of the real data (upper triangle).
CORR = {
    (0, 2): 0.29, (0, 7): 0.27, (0, 8): -0.43, (0, 10): -0.12,
    (1, 2): -0.15, (1, 10): 0.07,
    (2, 3): 0.09, (2, 6): 0.12, (2, 7): 0.15,
    (3, 5): 0.30, (3, 6): 0.40, (3, 7): 0.84, (3, 10): -0.45,
    (4, 6): 0.20, (4, 7): 0.26, (4, 10): -0.36,
    (5, 6): 0.62, (5, 7): 0.29, (5, 10): -0.25,
    (6, 7): 0.53, (6, 10): -0.45,
    (7, 10): -0.78, (7, 8): -0.09,
    (8, 9): 0.16,
}

TARGET = [6.1, 0.26, 0.25, 2.9, 0.047, 289.0, 440.0, 0.99314, 3.44, 0.64, 10.5]
TARGET_QUALITY = 3


def nearest_pd(c):
    w, v = np.linalg.eigh(c)
    w = np.clip(w, 1e-3, None)
    c = v @ np.diag(w) @ v.T
    d = np.sqrt(np.diag(c))
    return c / np.outer(d, d)


def lognormal_marginal(z, mean, sd, lo):
    shift = lo - 0.5 * sd
    m = mean - shift
    s2 = np.log(1.0 + (sd / m) ** 2)
    return shift + np.exp(np.log(m) - 0.5 * s2 + np.sqrt(s2) * z)


def format_cell(v, step):
    decimals = len(f"{step:.10f}".rstrip("0").split(".")[1])
    text = f"{v:.{decimals}f}"
    return text.rstrip("0").rstrip(".") if "." in text else text


def main(path):
    rng = np.random.default_rng(SEED)
    d = len(COLUMNS)
    c = np.eye(d)
    for (i, j), r in CORR.items():
        c[i, j] = c[j, i] = r
    c = nearest_pd(c)
    z = rng.standard_normal((N, d)) @ np.linalg.cholesky(c).T

    data = np.empty((N, d))
    for k, (_, mean, sd, lo, hi, step) in enumerate(COLUMNS):
        x = lognormal_marginal(z[:, k], mean, sd, lo)
        # keep the body inside a few standard deviations; the real tails are sparse
        cap = min(hi, mean + 6.0 * sd)
        x = np.clip(x, lo, cap)
        x = np.round(x / step) * step
        data[:, k] = x
        # pin the published extremes on one body record each
        data[rng.integers(N), k] = lo
        if k in (5, 6):
            data[rng.integers(N), k] = hi

    score = 0.9 * z[:, 10] - 0.3 * z[:, 1] + 0.2 * z[:, 5] + 0.6 * rng.standard_normal(N)
    cuts = np.quantile(score, np.cumsum([20, 163, 1457, 2198, 880, 175]) / N)
    quality = 3 + np.searchsorted(cuts, score)

    data[TARGET_ROW] = TARGET
    quality[TARGET_ROW] = TARGET_QUALITY

    with open(path, "w") as f:
        f.write(";".join(f'"{name}"' for name, *_ in COLUMNS) + ';"quality"\n')
        for row, q in zip(data, quality):
            cells = [format_cell(v, step) for v, (*_, step) in zip(row, COLUMNS)]
            f.write(";".join(cells) + f";{q}\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/winequality-white-surrogate.csv")
