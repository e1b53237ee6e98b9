"""Analytic invariant checks run by ``subcomp selftest``.

Every check returns ``(passed, detail)``.  Seeds are fixed so a run is
reproducible; the whole table takes well under a minute.
"""
from __future__ import annotations

import itertools
import math
import time

import numpy as np
from scipy import stats

from .compensator import (skew_compensator, skew_gamma_closed_form, skew_ts_closed_form,
                          theorem_density_quadrature, levy_subordination_density,
                          vg_levy_density)
from .levy_models import (SubordinatorSpec, TemperedStableParams, laplace_exponent,
                          sample_gamma_increment, sample_ts_increment)
from .markov import SkewBMKernel, SkewParams, gaussian_density, skew_cdf, skew_density, skew_sample
from .specfun import bessel_k, bessel_k_integral, integrate, ts_integral_quadrature

V_GRID = (0.5, 0.9, 1.3)
AB_GRID = (0.5, 1.0, 2.0, 4.0)
X_GRID = (-1.0, 0.0, 0.3, 2.0)
Y_GRID = (0.25, -0.25, 1.0, -1.0, 3.0, -3.0)
BETA_GRID = (-1.0, -0.5, 0.0, 0.5, 1.0)
ALPHA_GRID = (0.0, 0.25, 0.5, 0.9)
KS_CASES = ((0.0, 0.0), (0.7, 0.3), (-1.0, 1.0), (1.0, 0.0))


def bessel_identity(bessel=bessel_k):
    worst = 0.0
    for v, a, b in itertools.product(V_GRID, AB_GRID, AB_GRID):
        ref = 2.0 * (a / b) ** v * bessel(v, a * b)
        worst = max(worst, abs(ts_integral_quadrature(v, a, b) - ref) / (1.0 + abs(ref)))
    return worst <= 1e-8, f"max rel diff {worst:.2e} (tol 1e-8)"


def half_integer(bessel=bessel_k):
    xs = np.geomspace(0.01, 20.0, 40)
    worst = 0.0
    for x in xs:
        exact = math.sqrt(math.pi / (2 * x)) * math.exp(-x)
        # the integral route is checked too, the fast path alone would be circular
        worst = max(worst, abs(bessel(0.5, x) / exact - 1),
                    abs(bessel_k_integral(0.5, x) / exact - 1))
    return worst <= 1e-12, f"max rel diff {worst:.2e} (tol 1e-12)"


def gamma_reduction(bessel=bessel_k):
    p = TemperedStableParams(1.0, 1.0, 0.0)
    worst = 0.0
    for x, y, b in itertools.product(X_GRID, Y_GRID, BETA_GRID):
        sk = SkewParams(b)
        gen = skew_ts_closed_form(x, y, sk, p, bessel)
        worst = max(worst, abs(gen - skew_gamma_closed_form(x, y, sk, 1.0, 1.0)) / (1 + gen))
    return worst <= 1e-12, f"max rel diff {worst:.2e} (tol 1e-12)"


def vg_reduction(bessel=bessel_k):
    spec = SubordinatorSpec(TemperedStableParams(1.0, 1.0, 0.0))
    worst = 0.0
    for y in (0.1, -0.1, 1.0, -1.0, 5.0, -5.0):
        val = levy_subordination_density(y, None, lambda z, yy: gaussian_density(yy, z), spec)
        worst = max(worst, abs(val / vg_levy_density(y, 1.0, 1.0) - 1))
    return worst <= 1e-8, f"max rel diff {worst:.2e} (tol 1e-8)"


def quadrature_vs_closed_form(bessel=bessel_k):
    worst = 0.0
    for a in ALPHA_GRID:
        spec = SubordinatorSpec(TemperedStableParams(1.0, 1.0, a))
        for b in BETA_GRID:
            sk = SkewParams(b)
            ker = SkewBMKernel(sk)
            for x, y in itertools.product(X_GRID, Y_GRID):
                cf = skew_ts_closed_form(x, y, sk, spec.params, bessel)
                q = theorem_density_quadrature(x, y, ker, spec)
                worst = max(worst, abs(cf - q) / (1 + cf))
    return worst <= 1e-6, f"max rel diff {worst:.2e} (tol 1e-6)"


def determinism_iff_beta_zero(bessel=bessel_k):
    spec = SubordinatorSpec(TemperedStableParams(1.0, 1.0, 0.25))
    spread = {}
    for b in (0.0, 0.7):
        comp = skew_compensator(SkewParams(b), spec)
        spread[b] = max(abs(comp.rate(0.0, x, y) - comp.rate(0.0, 0.0, y))
                        for x, y in itertools.product(X_GRID, Y_GRID))
    ok = spread[0.0] <= 1e-12 and spread[0.7] > 1e-3
    return ok, f"beta=0 spread {spread[0.0]:.1e}, beta=0.7 spread {spread[0.7]:.3f}"


def normalization(bessel=None):
    worst = 0.0
    for t, x, b in itertools.product((0.3, 1.0), (-0.7, 0.0, 0.7), (-1.0, 0.5, 1.0)):
        sk = SkewParams(b)
        total = integrate(lambda y: skew_density(t, x, y, sk), -math.inf, math.inf,
                          points=sorted({0.0, x}))
        worst = max(worst, abs(total - 1.0))
    return worst <= 1e-8, f"max |mass - 1| {worst:.2e} (tol 1e-8)"


def chapman_kolmogorov(bessel=None):
    worst = 0.0
    for s, t, x, y, b in ((0.5, 0.5, 0.3, -0.4, 0.7), (0.2, 1.0, -1.0, 0.5, -0.3),
                          (1.0, 0.7, 0.0, 1.2, 1.0)):
        sk = SkewParams(b)
        lhs = integrate(lambda m: skew_density(s, x, m, sk) * skew_density(t, m, y, sk),
                        -math.inf, math.inf, points=sorted({0.0, x, y}))
        worst = max(worst, abs(lhs - skew_density(s + t, x, y, sk)))
    return worst <= 1e-6, f"max abs diff {worst:.2e} (tol 1e-6)"


def ks_sampler(bessel=None, n=100_000, seed=20150809):
    rng = np.random.default_rng(seed)
    pvals = []
    for b, x in KS_CASES:
        sk = SkewParams(b)
        draws = skew_sample(1.0, x, sk, rng, size=n)
        pvals.append(stats.kstest(draws, lambda y: skew_cdf(1.0, x, y, sk)).pvalue)
    return min(pvals) > 0.01, "p-values " + ", ".join(f"{p:.3f}" for p in pvals)


def subordinator_laws(bessel=None, n=100_000, seed=11):
    rng = np.random.default_rng(seed)
    zs = []
    g = sample_gamma_increment(1.0, TemperedStableParams(1.0, 1.0, 0.0), rng, size=n)
    zs.append((g.mean() - 1.0) / (g.std(ddof=1) / math.sqrt(n)))
    g = sample_gamma_increment(1.0, TemperedStableParams(2.0, 2.0, 0.0), rng, size=n)
    # Var of the sample variance ~ (m4 - s^4) / n
    s2 = g.var(ddof=1)
    zs.append((s2 - 0.5) / math.sqrt((np.mean((g - g.mean()) ** 4) - s2 ** 2) / n))
    p = TemperedStableParams(1.0, 1.0, 0.5)
    ts = sample_ts_increment(0.5, p, rng, size=n)
    for u in (0.5, 1.0, 2.0):
        e = np.exp(-u * ts)
        zs.append((e.mean() - math.exp(-0.5 * laplace_exponent(u, p))) / (e.std(ddof=1) / math.sqrt(n)))
    worst = max(abs(z) for z in zs)
    return worst <= 4.0, f"max |z| {worst:.2f} (gate 4)"


CHECKS = (
    ("bessel identity", bessel_identity),
    ("K_1/2 closed form", half_integer),
    ("gamma-case reduction", gamma_reduction),
    ("variance gamma reduction", vg_reduction),
    ("quadrature vs closed form", quadrature_vs_closed_form),
    ("deterministic iff beta=0", determinism_iff_beta_zero),
    ("skew kernel normalization", normalization),
    ("chapman-kolmogorov", chapman_kolmogorov),
    ("exact sampler KS", ks_sampler),
    ("subordinator laws", subordinator_laws),
)


def run_selftest(bessel=bessel_k):
    """Run every check; returns a list of (name, passed, detail, seconds)."""
    rows = []
    for name, check in CHECKS:
        t0 = time.perf_counter()
        try:
            ok, detail = check(bessel=bessel)
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        rows.append((name, bool(ok), detail, time.perf_counter() - t0))
    return rows
