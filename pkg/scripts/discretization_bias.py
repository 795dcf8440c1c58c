"""Mean of F_J(J) over simulated paths as the K grid is refined.

Under the exact law F_J(J) is uniform, so its mean is 1/2.  Missed returns
to zero between grid points inflate J; the bridge check removes most of it.
"""

import argparse
import math

import numpy as np

from monopoisson import analytic
from monopoisson.analytic import FinalKind
from monopoisson.simulate import RngStream, azema_path, path_from_azema, sample_s0


def mean_uniformized_j(n_paths, ds, bridge_check, seed):
    u = np.empty(n_paths)
    for i in range(n_paths):
        gen = RngStream(seed, i).generator()
        s0 = sample_s0(gen)
        path = path_from_azema(azema_path(gen, ds, bridge_check=bridge_check), s0)
        u[i] = analytic.cdf_final(FinalKind.J, path.j)
    return u.mean(), u.std(ddof=1) / math.sqrt(n_paths)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--paths", type=int, default=5000)
    ap.add_argument("--ds", type=float, nargs="+", default=[1e-3, 1e-4, 1e-5])
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    print("ds,bridge_check,mean_F_J(J),std_error")
    for ds in args.ds:
        for bridge in (False, True):
            m, s = mean_uniformized_j(args.paths, ds, bridge, args.seed)
            print(f"{ds:g},{int(bridge)},{m:.4f},{s:.4f}")


if __name__ == "__main__":
    main()
