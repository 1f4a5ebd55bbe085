#!/usr/bin/env python3
# Copyright 2026 The dualex Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes a synthetic stand-in for the Combined Cycle Power Plant table.

Same header (AT, V, AP, RH, PE) and roughly the published column means,
spreads, ranges and AT/V correlation; PE follows an approximate linear
response with a mild curvature in AT plus noise. It is a CI fixture, not the
real data.
"""

import argparse
import csv

import numpy as np


def generate(n, seed):
    rng = np.random.default_rng(seed)
    mean = np.array([19.65, 54.31, 1013.26, 73.31])
    sd = np.array([7.45, 12.71, 5.94, 14.60])
    corr = np.array([
        [1.00, 0.84, -0.51, -0.54],
        [0.84, 1.00, -0.41, -0.31],
        [-0.51, -0.41, 1.00, 0.10],
        [-0.54, -0.31, 0.10, 1.00],
    ])
    cov = corr * np.outer(sd, sd)
    x = rng.multivariate_normal(mean, cov, size=n)
    lo = np.array([1.81, 25.36, 992.89, 25.56])
    hi = np.array([37.11, 81.56, 1033.30, 100.16])
    x = np.clip(x, lo, hi)
    at, v, ap, rh = x.T
    pe = (454.6 - 1.977 * at - 0.234 * v + 0.062 * ap - 0.158 * rh
          - 0.004 * (at - 19.65) ** 2 + rng.normal(0.0, 4.5, size=n))
    return np.column_stack([x, pe])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rows", type=int, default=500)
    ap.add_argument("--seed", type=int, default=20)
    ap.add_argument("--out", default="tests/data/ccpp_fixture.csv")
    args = ap.parse_args()
    rows = generate(args.rows, args.seed)
    with open(args.out, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["AT", "V", "AP", "RH", "PE"])
        for r in rows:
            w.writerow([f"{r[0]:.2f}", f"{r[1]:.2f}", f"{r[2]:.2f}", f"{r[3]:.2f}", f"{r[4]:.2f}"])


if __name__ == "__main__":
    main()
