"""Regenerates the synthetic look-alike datasets in this directory.

None of these files hold real observations. Each one mimics the shape of a
case-study sample closely enough to exercise the matching CLI workflow.
"""

import csv
from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent
SEED = 20151015


def write(name, header, rows):
    with open(HERE / name, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def pareto(rng, alpha, u, size):
    return u * rng.uniform(size=size) ** (-1.0 / alpha)


def truncated_pareto(rng, alpha, lo, hi, size):
    # Inverse CDF of a Pareto restricted to (lo, hi].
    q = 1.0 - (lo / hi) ** alpha
    return lo * (1.0 - rng.uniform(size=size) * q) ** (-1.0 / alpha)


def prices(rng):
    """Intraday ticks for 40 sessions; three sessions carry a crash."""
    rows = []
    open_s, close_s = 34_200, 57_600
    price = 100.0
    crash_days = {12, 23, 31}
    for d in range(40):
        vol = rng.uniform(0.6e-4, 1.4e-4)
        t = open_s + rng.exponential(20.0)
        crash_at = rng.uniform(open_s + 3600, close_s - 7200) if d in crash_days else None
        while t < close_s:
            step = rng.normal(0.0, vol * np.sqrt(20.0 / 20.0))
            if crash_at is not None and crash_at <= t < crash_at + 900:
                step -= 8.0 * vol
            price *= np.exp(step)
            rows.append((f"{d * 86_400 + t:.1f}", f"{price:.4f}", f"day{d + 1:02d}"))
            t += rng.exponential(20.0)
    write("prices.csv", ["timestamp", "price", "day"], rows)


def nams(rng):
    """Log-scale severities: an Exponential bulk and a cluster of four."""
    bulk = rng.exponential(1 / 0.72, size=16)
    cluster = rng.normal(7.6, 0.35, size=4)
    values = np.sort(np.concatenate([bulk, cluster]))[::-1]
    write("nams_like.csv", ["severity"], [(f"{v:.3f}",) for v in values])


def returns(rng):
    """Absolute daily returns: a body, a 193-point layer and a 7-point top layer."""
    body = np.abs(rng.normal(0.0, 0.8, size=4000))
    body = body[body <= 1.97][:1800]
    lower = truncated_pareto(rng, 3.8, 1.97, 4.45, 193)
    upper = pareto(rng, 1.8, 4.45, 7)
    values = np.concatenate([body, lower, upper])
    rng.shuffle(values)
    write("abs_returns.csv", ["abs_return"], [(f"{v:.5f}",) for v in values])


def fatalities(rng):
    """Pareto(1.05) events above 300 with a handful of historic extremes."""
    modern = pareto(rng, 1.05, 300.0, 168)
    modern = modern[modern < 10_000]
    historic = np.array([10_276.0, 25_000.0, 38_000.0, 60_000.0, 150_000.0, 1.1e6, 2.0e6, 4.0e7])
    values = np.concatenate([modern, historic])
    rng.shuffle(values)
    write("fatalities.csv", ["fatalities"], [(f"{v:.0f}",) for v in values])


def main():
    rng = np.random.default_rng(SEED)
    prices(rng)
    nams(rng)
    returns(rng)
    fatalities(rng)


if __name__ == "__main__":
    main()
