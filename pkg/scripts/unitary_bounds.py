"""Lipschitz constants of U_m against the 2 pi bound and the bound without it."""

import argparse
import math

from bdqms.periodic import lipschitz_seminorm, make_unitary_U


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-order", type=int, default=8)
    args = parser.parse_args()
    print("m,l(U_m),2pi(m-1)/m,bound,bound_without_2pi,holds,holds_without_2pi")
    for m in range(2, args.max_order + 1):
        lU = lipschitz_seminorm(make_unitary_U(m))
        root = math.sqrt((2 * m * m + 3 * m + 1) / (6 * m))
        print(f"{m},{lU:.12g},{2 * math.pi * (m - 1) / m:.12g},{2 * math.pi * root:.12g},{root:.12g},"
              f"{lU <= 2 * math.pi * root + 1e-6},{lU <= root + 1e-6}")


if __name__ == "__main__":
    main()
