"""Writes data/hockey_synthetic.csv: 88 team-seasons shaped like the NHL
wins / expected-goals table (wins ~ Poisson(exp(1.7 + 0.01 xG)))."""

import csv
import sys

import numpy as np

rng = np.random.default_rng(20240611)
n = 88
xg = rng.normal(220.0, 25.0, n)
wins = rng.poisson(np.exp(1.7 + 0.01 * xg))

out = sys.argv[1] if len(sys.argv) > 1 else "data/hockey_synthetic.csv"
with open(out, "w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["wins", "expected_goals"])
    for y, x in zip(wins, xg):
        w.writerow([int(y), f"{x:.2f}"])
