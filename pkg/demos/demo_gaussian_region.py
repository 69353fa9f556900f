"""Rate boundary for Gaussian marginals under squared error.

Unlike the binary case the Gaussian curve never quite reaches its
unlimited-shared-randomness floor at any finite rc, so the trace ends
with an explicit limit row.
"""

import numpy as np

from ocrate import GaussianSpec, gaussian_boundary, gaussian_mmi


def main():
    spec = GaussianSpec(sigma_x=1.0, sigma_y=1.0, d=0.8)
    curve = gaussian_boundary(spec, np.linspace(0.0, 4.0, 9))
    print("unit variances, distortion budget 0.8")
    print("      rc   r_min")
    for rc, r in curve.rates():
        print(f"  {rc:6.3f}  {r:6.4f}")
    print(f"     inf  {gaussian_mmi(spec):6.4f}")
    print("\nthe gap between r(0) and the floor is the price of coding")
    print("without any shared randomness at all")
    print("\nsame table via: ocrate region-gauss --sigma-x 1 --sigma-y 1 "
          "--d 0.8")


if __name__ == "__main__":
    main()
