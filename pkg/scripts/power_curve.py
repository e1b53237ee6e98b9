"""How large a relative error in the predicted count the VG check detects.

For each path count N and corruption factor, reports the z-score; |z| > 4
means the corruption is caught.
"""
import math

from subcomp.levy_models import SubordinatorSpec, TemperedStableParams
from subcomp.markov import SkewBMKernel, SkewParams
from subcomp.mc_verify import Scenario, run_verification

FACTORS = (1.0, 1.01, 1.02, 1.05, 1.1, 1.2)
PATHS = (10_000, 100_000, 400_000)


def main():
    spec = SubordinatorSpec(TemperedStableParams(1.0, 1.0, 0.0))
    print(f"{'paths':>8}" + "".join(f"{f:>9.2f}" for f in FACTORS))
    for n in PATHS:
        sc = Scenario(SkewBMKernel(SkewParams(0.0)), spec, 1.0, 0.0, ((0.5, math.inf),), n, 7)
        zs = [run_verification(sc, predicted_scale=f).z_score for f in FACTORS]
        print(f"{n:>8}" + "".join(f"{z:>9.2f}" for z in zs))


if __name__ == "__main__":
    main()
