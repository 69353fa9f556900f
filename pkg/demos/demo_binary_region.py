"""Walk the rate boundary of the symmetric binary pair.

For a uniform binary source that must be reconstructed as a uniform
binary output, the minimum coding rate falls as the shared-randomness
rate grows, until it hits the ordinary rate-distortion value and stays
there. The saturation point is the binary entropy of the distortion
budget.
"""

import numpy as np

from ocrate import binary_entropy, bsc_boundary


def main():
    for d in (0.25, 0.15, 0.05):
        h = binary_entropy(d)
        curve = bsc_boundary(d, np.linspace(0.0, h, 9))
        print(f"\ndistortion budget {d}")
        print("      rc   r_min")
        for rc, r in curve.rates():
            print(f"  {rc:6.4f}  {r:6.4f}")
        print(f"  plateau value 1 - h(d) = {1.0 - h:.6f}")
        print(f"  plateau reached at rc = h(d) = {h:.6f}")
    print("\nsame table via: ocrate region-bsc --d 0.25")


if __name__ == "__main__":
    main()
