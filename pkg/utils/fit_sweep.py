import csv
from collections import defaultdict

import fire
import numpy as np


def fit_lines(rows):
    """Least-squares T_charge = slope * N + intercept per drive power.

    Returns {drive_power_w: (slope, intercept, r_squared)}.
    """
    points = defaultdict(list)
    for row in rows:
        if row["status"] != "ok":
            continue
        points[float(row["drive_power_w"])].append(
            (int(row["n_receivers"]), float(row["t_charge_s"]))
        )
    fits = {}
    for drive_power, pairs in sorted(points.items()):
        n_values, times = np.asarray(sorted(pairs), dtype=np.float64).T
        slope, intercept = np.polyfit(n_values, times, 1)
        residual = times - (slope * n_values + intercept)
        spread = ((times - times.mean()) ** 2).sum()
        r_squared = 1.0 - (residual**2).sum() / spread if spread > 0 else 1.0
        fits[drive_power] = (float(slope), float(intercept), float(r_squared))
    return fits


def fit(summary="out/summary.csv", scheduler="tdma"):
    with open(summary, "r", encoding="utf-8") as fp:
        rows = [row for row in csv.DictReader(fp) if row["scheduler"] == scheduler]
    fits = fit_lines(rows)
    for drive_power, (slope, intercept, r_squared) in fits.items():
        print(
            f"P_d {drive_power:g} W: slope {slope:.1f} s/receiver, "
            f"intercept {intercept:.0f} s, R^2 {r_squared:.4f}"
        )


if __name__ == "__main__":
    fire.Fire(fit)
