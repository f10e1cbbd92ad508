#!/usr/bin/env python3
"""Derivation script for the saddle-route calibration constant.

Measures lambda_direct / lambda_saddle (with the calibration constant forced
to 1) at the calibration point tau = 0.6, T = 1e4, G = T^0.6, r = 160, and
prints the ratio together with the deviation profile over the dyadic r-grid.
The printed ratio is frozen into offcrit.lambda_kernel.SADDLE_CALIBRATION.

Run:  PYTHONPATH=src python3 tools/calibrate_kernel.py
"""

import sys

sys.path.insert(0, "src")

from offcrit import lambda_kernel
from offcrit.lambda_kernel import GaussianWeight, lambda_direct, lambda_saddle


def main() -> None:
    lambda_kernel.SADDLE_CALIBRATION = 1.0
    tau, T = 0.6, 1.0e4
    w = GaussianWeight(center_T=T, width_G=T**0.6)
    ratios = {}
    print("r      direct            saddle(calib=1)   direct/saddle")
    for r in (20.0, 40.0, 80.0, 160.0):
        d = lambda_direct(r, tau, w, 1e-10)
        s = lambda_saddle(r, tau, w)
        ratios[r] = d.value / s.value
        print(f"{r:5.0f}  {d.value: .9e}  {s.value: .9e}  {ratios[r]:.9f}")
    print()
    print(f"SADDLE_CALIBRATION = {ratios[160.0]:.9f}")


if __name__ == "__main__":
    main()
