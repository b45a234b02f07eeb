"""Complex Dirac monopole: exceptional circle, series and multipole phases.

Run: python3 demos/complex_dirac_multipoles.py

The offset z -> z - i eps turns the point degeneracy into a ring of
exceptional points rho = eps, z = 0.  Far from the ring the loop phase is
a monopole term plus dipole and quadrupole corrections in eps / r.
"""

import numpy as np

from nhgeo import MonopoleSpec, gp_complex_dirac_loop, gp_multipole
from nhgeo.monopole import GridBox, legendre_partial_sum, sample_grid

EPS = 1.0


def main():
    spec = MonopoleSpec(0.5, EPS, "complex_dirac")
    samples = sample_grid(spec, GridBox((-1.5, -1.5, -0.5), (1.5, 1.5, 0.5), (7, 7, 3)))
    ring = [s.position for s in samples if s.potential is None]
    print(f"grid points on the exceptional ring: {ring}")

    print("\non-axis series for 1/(r - i eps), l_max = 40")
    for r in (2.0, 4.0, 10.0):
        s = legendre_partial_sum(r, 0.0, EPS, 40)
        print(f"  r = {r:4.1f}  relative error {abs(s * (r - 1j * EPS) - 1):.1e}")

    print("\nloop phase at r = 10, chi = 1.0: exact vs truncated multipole sums")
    exact = gp_complex_dirac_loop(0.5, EPS, 10.0, 1.0).gamma
    print(f"  exact          {exact:.12f}")
    for order in range(3):
        approx = sum(g for _, g in gp_multipole(0.5, EPS, 10.0, 1.0, orders=order))
        print(f"  through order {order}  {approx:.12f}  error {abs(approx - exact):.2e}")

    print("\nerror of the three-term sum when eps is halved (r = 10)")
    for chi in (0.4, 1.0, 2.0):
        e = [abs(gp_complex_dirac_loop(0.5, x, 10.0, chi).gamma - sum(g for _, g in gp_multipole(0.5, x, 10.0, chi))) for x in (1.0, 0.5)]
        print(f"  chi = {chi:.1f}  ratio {e[0] / e[1]:.3f}")


if __name__ == "__main__":
    main()
