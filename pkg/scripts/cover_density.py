"""Empirical gap between random unit vectors and the nearest sphere-cover point."""

import argparse

import numpy as np

from scorevoting.projection import nearest_cover_point


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=2, help="matrix size; the sphere lives in m*m dimensions")
    ap.add_argument("--eps", type=float, nargs="+", default=[1e-2, 1e-3])
    ap.add_argument("--samples", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=11)
    args = ap.parse_args()
    d = args.m * args.m
    rng = np.random.default_rng(args.seed)
    for eps in args.eps:
        u = rng.normal(size=(args.samples, d))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        gap = max(float(np.linalg.norm(nearest_cover_point(x, eps) - x)) for x in u)
        print(f"eps={eps:g}: max gap {gap:.6g}, bound m^2*sqrt(2 eps) = {args.m ** 2 * np.sqrt(2 * eps):.6g}")


if __name__ == "__main__":
    main()
