"""Geometric phase of the driven damped two-level atom near resonance.

Run: python3 demos/resonance_gap.py

Prints Re gamma on both sides of zero detuning for a range of drive
strengths r = |2 V0| at decay difference delta = 1.  Below r = delta the
two one-sided limits differ (a finite jump at the diabolic point); the
jump grows like (delta^2 - r^2)^(-1/2) as r approaches the exceptional
point r = delta, and vanishes above it.
"""

import numpy as np

from nhgeo import Approach, drive_loop, gp_contour, gp_garrison_wright, re_gamma_resonance

DELTA = 1.0


def main():
    print("closed form vs numerical contour, Delta = 0.4")
    for r in (0.3, 0.9, 1.5):
        exact = gp_garrison_wright(r / 2, 0.4, DELTA).gamma
        num = gp_contour(drive_loop(r / 2, 0.4, DELTA)).gamma
        print(f"  r = {r:.1f}  closed {exact:.10f}  contour {num:.10f}  |diff| {abs(exact - num):.1e}")

    print("\nRe gamma / pi at resonance, one-sided limits")
    print(f"  {'r':>8} {'Delta->+0':>12} {'Delta->-0':>12} {'jump':>10}")
    for r in (0.0, 0.3, 0.6, 0.9, 0.99, 0.999, 1.2):
        a = re_gamma_resonance(r, DELTA, Approach.FROM_ABOVE) / np.pi
        b = re_gamma_resonance(r, DELTA, Approach.FROM_BELOW) / np.pi
        print(f"  {r:8.3f} {a:12.6f} {b:12.6f} {b - a:10.4f}")

    print("\ndivergence exponent from r = delta (1 - 10^-k)")
    k = np.arange(2, 7)
    r = DELTA * (1 - 10.0**-k)
    dev = [abs(re_gamma_resonance(x, DELTA) - np.pi) for x in r]
    slope = np.polyfit(np.log(DELTA**2 - r**2), np.log(dev), 1)[0]
    print(f"  fitted log-log slope {slope:.5f} (square-root singularity gives -0.5)")


if __name__ == "__main__":
    main()
