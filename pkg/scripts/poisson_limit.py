"""Total-variation distance to Poisson(lambda) for both row families and several lambda."""

import argparse

from monopoisson.pathstats import PoissonFamily, poisson_limit_demo


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lam", type=float, nargs="+", default=[0.5, 1.0, 3.0])
    ap.add_argument("--n", type=int, nargs="+", default=[10, 30, 100, 300, 1000])
    args = ap.parse_args()
    print("family,lambda,n,tv,le_cam_bound")
    for family in PoissonFamily:
        for lam in args.lam:
            ns = [n for n in args.n if n >= lam]
            for n, tv in zip(ns, poisson_limit_demo(family, lam, ns)):
                print(f"{family.value},{lam:g},{n},{tv:.3e},{min(lam * lam / n, 1.0):.3e}")


if __name__ == "__main__":
    main()
