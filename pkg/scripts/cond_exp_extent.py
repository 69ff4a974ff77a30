"""Extent of the two-point conditional-expectation tunnel as a function of eps."""

import argparse

import numpy as np

from bdqms.tunnels import cond_exp_toy, tunnel_extent_estimate


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--distance", type=float, default=1.0)
    parser.add_argument("--eps", type=float, nargs="+", default=list(np.round(np.linspace(0.05, 1.0, 20), 3)))
    args = parser.parse_args()
    print("eps,extent")
    for eps in args.eps:
        tunnel, A, B = cond_exp_toy(eps, args.distance)
        print(f"{eps:g},{tunnel_extent_estimate(tunnel, A, B):.12g}")


if __name__ == "__main__":
    main()
