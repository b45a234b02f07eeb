"""Two gauge patches and the quantized curvature flux around a diabolic point.

Run: python3 demos/gauge_patches.py

On the real sphere around the degeneracy the lower band connection has a
north patch singular at the south pole and a south patch singular at the
north pole.  Loop phases in the two patches differ by 4 pi q, and the total
curvature flux is 4 pi q = 2 pi for q = 1/2.  Complex polar angles give
complex phases from the same closed form.
"""

import numpy as np

from nhgeo import constant_theta_loop, gp_constant_theta, gp_contour
from nhgeo.geophase import curvature_flux


def main():
    print("constant-theta loops: closed form vs contour (band -)")
    for theta in (0.5, np.pi / 3, 1.2 + 0.3j, np.pi / 2 + 1j):
        for patch in ("north", "south"):
            exact = gp_constant_theta("spherical", theta, "-", patch=patch).gamma
            num = gp_contour(constant_theta_loop(theta), "-", patch).gamma
            print(f"  theta = {complex(theta):.4f} {patch:>5}  {exact:.10f}  |diff| {abs(exact - num):.1e}")

    print("\ncurvature flux through the unit sphere")
    for method in ("surface", "boundary"):
        f = curvature_flux(method=method)
        print(f"  {method:>8}: {f.real:.12f}  (2 pi = {2 * np.pi:.12f})")


if __name__ == "__main__":
    main()
