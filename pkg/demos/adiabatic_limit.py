"""From non-adiabatic to adiabatic evolution in a rotating field.

Run: python3 demos/adiabatic_limit.py  (about 10 s)

H(t) = B n(t).sigma with n(t) on a cone of half-angle theta = pi/3.  For
each drive period T the monodromy is computed, the cyclic state closest to
the lower band is selected and its total phase split into dynamical and
geometric parts.  The geometric part tends to the solid-angle value
pi/2 as T grows, with a leading correction pi sin^2(theta) omega / (2B).
"""

import time

import numpy as np

from nhgeo import cyclic_states, gp_constant_theta, period_propagator, phases_decompose, rotating_field

B, THETA = 0.5, np.pi / 3


def main():
    gap = 2 * B
    target = gp_constant_theta("spherical", THETA).gamma.real
    lower = np.array([-np.sin(THETA / 2), np.cos(THETA / 2)])
    print(f"adiabatic value {target:.10f}")
    print(f"  {'T gap':>8} {'gamma':>14} {'error':>10} {'first order':>12} {'routes agree':>13} {'s':>6}")
    for Tg in (1e1, 1e2, 1e3, 1e4):
        T = Tg / gap
        start = time.perf_counter()
        h = rotating_field(B, THETA, T)
        states = cyclic_states(period_propagator(h, 1e-10))
        c = max(states, key=lambda s: abs(lower @ s.state) / np.linalg.norm(s.state))
        r = phases_decompose(h, c, 1e-10, reference=target)
        pred = np.pi * np.sin(THETA) ** 2 * (2 * np.pi / T) / (2 * B)
        print(
            f"  {Tg:8.0e} {r.gamma.real:14.10f} {abs(r.gamma - target):10.3e} {pred:12.3e}"
            f" {r.diagnostics['route_mismatch']:13.1e} {time.perf_counter() - start:6.2f}"
        )


if __name__ == "__main__":
    main()
