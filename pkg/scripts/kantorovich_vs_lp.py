"""Kantorovich engine against the transport LP on random planar point clouds."""

import argparse
import time

import numpy as np

from bdqms.ou_core import KantorovichParams, StateFunctional, finite_commutative_space, kantorovich, kantorovich_exact_finite


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pairs", type=int, default=50)
    parser.add_argument("--max-points", type=int, default=8)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--no-polish", action="store_true", help="subgradient ascent only")
    args = parser.parse_args()
    params = KantorovichParams(polish_iterations=0 if args.no_polish else 100)
    rng = np.random.default_rng(args.seed)
    errs = []
    start = time.perf_counter()
    for _ in range(args.pairs):
        n = int(rng.integers(2, args.max_points + 1))
        P = rng.random((n, 2))
        D = np.linalg.norm(P[:, None] - P[None, :], axis=-1)
        mu, nu = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
        est = kantorovich(finite_commutative_space(D), StateFunctional(mu), StateFunctional(nu), params).value
        exact = kantorovich_exact_finite(D, mu, nu)
        errs.append(abs(est - exact) / exact)
    errs = np.array(errs)
    print(f"pairs {args.pairs}  worst relative error {errs.max():.3e}  median {np.median(errs):.3e}  "
          f"time {time.perf_counter() - start:.1f}s")


if __name__ == "__main__":
    main()
