#!/usr/bin/env python3
"""One-time calibration of the chaos threshold for the showcase amplitudes.

Long-run oracle: largest-Lyapunov estimates over 20 standard separatrix
seeds at T = 1e5 for amplitudes (1, 0.5, 0.1).  The recorded threshold is
half the median of the positive estimates (estimates above the integrable
noise floor 1e-3).  The result is frozen as dynamics.CHAOS_THRESHOLD.

Run:  python3 scripts/calibrate_chaos_threshold.py
"""

import json
import time

import numpy as np

from eulerlab import dynamics as dyn
from eulerlab import spectral as sp

T = 1e5
RENORM = 5.0
TOL = 1e-9
SEEDS = 20
FLOOR = 1e-3

def main():
    field = sp.make_abc(sp.ABCParams(1.0, 0.5, 0.1))
    seeds = dyn.separatrix_seeds(0.5, SEEDS)
    estimates = []
    for j, x0 in enumerate(seeds):
        t0 = time.time()
        est = dyn.lyapunov_max(field, x0, T, RENORM, tol=TOL)
        estimates.append(est.lambda_max)
        print(f"seed {j:2d}: lambda_max = {est.lambda_max:+.6f} "
              f"tail spread {est.tail_spread():.2e}  ({time.time()-t0:.0f}s)",
              flush=True)
    positives = sorted(x for x in estimates if x > FLOOR)
    theta = 0.5 * float(np.median(positives)) if positives else float("nan")
    out = {
        "amplitudes": [1.0, 0.5, 0.1],
        "T": T,
        "renorm": RENORM,
        "tol": TOL,
        "seeds": SEEDS,
        "positive_floor": FLOOR,
        "estimates": estimates,
        "positives": positives,
        "theta": theta,
    }
    print(json.dumps(out, indent=2))
    with open("scripts/chaos_threshold.json", "w") as fh:
        json.dump(out, fh, indent=2)
    print(f"\ntheta = {theta:.6f}  (freeze as dynamics.CHAOS_THRESHOLD)")

if __name__ == "__main__":
    main()
