"""Closed form vs direct quadrature of the skew compensator density.

Sweeps alpha and beta over a (x, y) grid and reports the worst relative gap,
plus the time spent in each evaluation route.
"""
import itertools
import time

import numpy as np

from subcomp.compensator import skew_ts_closed_form, theorem_density_quadrature
from subcomp.levy_models import SubordinatorSpec, TemperedStableParams
from subcomp.markov import SkewBMKernel, SkewParams

ALPHAS = (0.0, 0.25, 0.5, 0.75, 0.9)
BETAS = (-1.0, -0.5, 0.0, 0.5, 1.0)
XS = np.linspace(-2.0, 2.0, 9)
YS = np.concatenate([-np.geomspace(0.01, 5.0, 8), np.geomspace(0.01, 5.0, 8)])


def main():
    print(f"{'alpha':>6}{'beta':>6}{'max rel gap':>14}{'closed ms':>11}{'quad ms':>9}")
    for alpha, beta in itertools.product(ALPHAS, BETAS):
        spec = SubordinatorSpec(TemperedStableParams(1.0, 1.0, alpha))
        sk = SkewParams(beta)
        ker = SkewBMKernel(sk)
        worst, t_cf, t_q, n = 0.0, 0.0, 0.0, 0
        for x, y in itertools.product(XS, YS):
            t0 = time.perf_counter()
            cf = skew_ts_closed_form(x, y, sk, spec.params)
            t1 = time.perf_counter()
            q = theorem_density_quadrature(x, y, ker, spec)
            t2 = time.perf_counter()
            worst = max(worst, abs(cf - q) / (1.0 + cf))
            t_cf += t1 - t0
            t_q += t2 - t1
            n += 1
        print(f"{alpha:>6.2f}{beta:>6.1f}{worst:>14.2e}{1e3 * t_cf / n:>11.3f}{1e3 * t_q / n:>9.3f}")


if __name__ == "__main__":
    main()
