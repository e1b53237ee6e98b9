"""Monte Carlo check of the compensator identity

    E #{t <= T : Delta(X_Z)_t in B} = E int_0^T int_B k(X_{Z_{t-}}, y) dy dt

for a jump window B bounded away from 0.

Paths are simulated in fixed-size blocks.  Block ``b`` of side ``s``
(0 = empirical, 1 = predicted) draws from the substream
``SeedSequence(master_seed, spawn_key=(s, b))``, so results depend on the
master seed, the number of paths and the block size only, never on how many
workers run the blocks.  Per-path results are concatenated in block order
before any reduction.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Union

import numpy as np

from .compensator import (TailIntegralTable, levy_compensator, skew_compensator,
                          window_integral)
from .levy_models import ALPHA_WARN, JumpSizeTable, SubordinatorSpec
from .markov import CompoundPoissonKernel, SkewBMKernel
from .specfun import DEFAULT_QUAD, integrate

__all__ = [
    "Scenario",
    "JumpRecord",
    "VerificationReport",
    "simulate_xz_jumps",
    "simulate_block",
    "block_layout",
    "block_rng",
    "empirical_count",
    "predicted_count",
    "bias_bound",
    "run_verification",
    "SCHEMA_VERSION",
    "Z_GATE",
    "BIAS_FRACTION",
]

SCHEMA_VERSION = "1.0"
Z_GATE = 4.0
BIAS_FRACTION = 0.25
EMPIRICAL, PREDICTED = 0, 1


@dataclass(frozen=True)
class Scenario:
    kernel: Union[SkewBMKernel, CompoundPoissonKernel]
    subordinator: SubordinatorSpec
    horizon: float = 1.0
    x0: float = 0.0
    window: tuple = ((0.5, math.inf),)
    n_paths: int = 100_000
    master_seed: int = 0
    coupled: bool = False
    block_size: int = 2000

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if int(self.n_paths) < 1 or int(self.block_size) < 1:
            raise ValueError("n_paths and block_size must be positive")
        if not 0 <= int(self.master_seed) < 2 ** 64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        window = tuple((float(lo), float(hi)) for lo, hi in self.window)
        for lo, hi in window:
            if not lo < hi:
                raise ValueError(f"window interval ({lo}, {hi}) is empty")
            if lo <= 0 <= hi:
                raise ValueError(f"window interval ({lo}, {hi}) contains 0")
        object.__setattr__(self, "window", window)

    @property
    def is_skew(self) -> bool:
        return isinstance(self.kernel, SkewBMKernel)

    @property
    def window_gap(self) -> float:
        """Distance from the window to 0 (delta_B)."""
        if not self.window:
            return math.inf
        return min(min(abs(lo), abs(hi)) for lo, hi in self.window)

    @property
    def is_deterministic(self) -> bool:
        return not self.is_skew or self.kernel.skew.beta == 0.0

    def in_window(self, y):
        y = np.asarray(y, dtype=float)
        hit = np.zeros(y.shape, dtype=bool)
        for lo, hi in self.window:
            hit |= (y >= lo) & (y <= hi)
        return hit


@dataclass(frozen=True)
class JumpRecord:
    time: float
    size: float


@dataclass(frozen=True)
class VerificationReport:
    empirical_mean_count: float
    empirical_se: float
    predicted: float
    predicted_se: float
    z_score: float
    truncation_bias_bound: float
    passed: bool
    seed: int
    n_paths: int
    eps: float
    coupled: bool = False
    warnings: tuple = ()
    runtime_seconds: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        d["warnings"] = list(self.warnings)
        d["schema_version"] = SCHEMA_VERSION
        return d


# Simulation ----------------------------------------------------------------

def block_rng(seed: int, side: int, block: int):
    ss = np.random.SeedSequence(int(seed), spawn_key=(side, block))
    return np.random.Generator(np.random.PCG64(ss))


def simulate_block(scenario: Scenario, n: int, rng, table: JumpSizeTable,
                   tail_table: TailIntegralTable | None = None):
    """Simulate ``n`` independent paths of X_Z on (0, T].

    Returns a dict with the flat jump records (``path``, ``time``, ``size``),
    and, when ``tail_table`` is given, ``integral``: per path
    int_0^T int_B k(X_{Z_{t-}}, y) dy dt with the state piecewise constant
    between retained Z-jumps.
    """
    T = scenario.horizon
    spec = scenario.subordinator
    counts = rng.poisson(T * table.total, size=n)
    m = int(counts.sum())
    path = np.repeat(np.arange(n), counts)
    times = T - rng.uniform(0.0, T, size=m)
    sizes = table.sample(rng, m)
    order = np.lexsort((times, path))
    times = times[order]
    sizes = sizes[order]
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    rank = np.arange(m) - np.repeat(starts, counts)
    prev_time = np.where(rank > 0, np.roll(times, 1), 0.0)
    out = {"n": n}

    if scenario.is_skew:
        kernel = scenario.kernel
        state = np.full(n, float(scenario.x0))
        before = np.empty(m)
        jumps = np.empty(m)
        for k in range(int(counts.max()) if n else 0):
            idx = np.flatnonzero(rank == k)
            p = path[idx]
            if spec.drift > 0:
                # continuous motion of X over the drift time gamma * dt since the last jump
                state[p] = kernel.sample(spec.drift * (times[idx] - prev_time[idx]), state[p], rng)
            before[idx] = state[p]
            new = kernel.sample(sizes[idx], state[p], rng)
            jumps[idx] = new - state[p]
            state[p] = new
        keep = jumps != 0
        out.update(path=path[keep], time=times[keep], size=jumps[keep])
        if tail_table is not None:
            if spec.drift > 0:
                raise ValueError("state-dependent prediction needs a driftless subordinator")
            beta = kernel.skew.beta
            last = np.full(n, 0.0)
            np.maximum.at(last, path, times)
            seg = (times - prev_time) * tail_table.window_integral(before, scenario.window, beta)
            integral = np.bincount(path, weights=seg, minlength=n)
            integral += (T - last) * tail_table.window_integral(state, scenario.window, beta)
            out["integral"] = integral
    else:
        params = scenario.kernel.params
        incr = scenario.kernel.sample(sizes, 0.0, rng)
        keep = incr != 0
        r_path, r_time, r_size = [path[keep]], [times[keep]], [incr[keep]]
        if spec.drift > 0:
            # jumps of X itself during the drift time gamma * T
            k = rng.poisson(params.rate * spec.drift * T, size=n)
            r_path.append(np.repeat(np.arange(n), k))
            r_time.append(T - rng.uniform(0.0, T, size=int(k.sum())))
            r_size.append(params.jump_std * rng.standard_normal(int(k.sum())))
        p_all = np.concatenate(r_path)
        t_all = np.concatenate(r_time)
        s_all = np.concatenate(r_size)
        order = np.lexsort((t_all, p_all))
        out.update(path=p_all[order], time=t_all[order], size=s_all[order])
    return out


def simulate_xz_jumps(scenario: Scenario, rng, table: JumpSizeTable | None = None):
    """Jumps of one path of X_Z on (0, T], in time order."""
    if table is None:
        table = JumpSizeTable(scenario.subordinator.params, scenario.subordinator.truncation_eps)
    res = simulate_block(scenario, 1, rng, table)
    return [JumpRecord(float(t), float(s)) for t, s in zip(res["time"], res["size"])]


def block_layout(scenario: Scenario):
    """(block index, first path index, paths in block) for every block."""
    n, b = scenario.n_paths, scenario.block_size
    return [(i, i * b, min(b, n - i * b)) for i in range(-(-n // b))]


def _run_block(args):
    scenario, side, block, n, table, tail_table = args
    rng = block_rng(scenario.master_seed, side, block)
    res = simulate_block(scenario, n, rng, table, tail_table)
    counts = np.bincount(res["path"][scenario.in_window(res["size"])], minlength=n)
    return counts, res.get("integral")


def _run_side(scenario: Scenario, side: int, tables, workers: int):
    table, tail_table = tables
    jobs = [(scenario, side, b, n, table, tail_table) for b, _, n in block_layout(scenario)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_block, jobs))
    else:
        results = [_run_block(j) for j in jobs]
    counts = np.concatenate([r[0] for r in results]).astype(float)
    integrals = None
    if tail_table is not None:
        integrals = np.concatenate([r[1] for r in results])
    return counts, integrals


def _mean_se(values):
    n = len(values)
    if n == 0:
        return 0.0, 0.0
    mean = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return mean, se


def _tables(scenario: Scenario, with_tail: bool):
    spec = scenario.subordinator
    table = JumpSizeTable(spec.params, spec.truncation_eps)
    tail = None
    if with_tail and scenario.window:
        tail = TailIntegralTable(spec.params, scenario.window_gap)
    return table, tail


# Public operations ---------------------------------------------------------

def empirical_count(scenario: Scenario, workers: int = 1, tables=None):
    """Mean and standard error of the number of X_Z jumps in B per path."""
    if scenario.n_paths < 100:
        raise ValueError("empirical_count needs at least 100 paths")
    if not scenario.window:
        return 0.0, 0.0
    counts, _ = _run_side(scenario, EMPIRICAL, tables or _tables(scenario, False), workers)
    return _mean_se(counts)


def deterministic_prediction(scenario: Scenario, cfg=DEFAULT_QUAD):
    """(jump part, drift part) of T int_B k(y) dy for a state-independent compensator."""
    spec = scenario.subordinator
    T = scenario.horizon
    if scenario.is_skew:
        comp = skew_compensator(scenario.kernel.skew, spec)
    else:
        comp = levy_compensator(scenario.kernel, spec, cfg)
    x = scenario.x0
    jump = T * window_integral(lambda y: comp.jump_rate(x, y), scenario.window, cfg)
    drift = 0.0
    if comp.first_term_rate is not None and spec.drift > 0:
        drift = T * spec.drift * window_integral(comp.first_term_rate, scenario.window, cfg)
    return jump, drift


def predicted_count(scenario: Scenario, workers: int = 1, tables=None):
    """Expected integrated compensator over [0, T] x B, with its standard error.

    Deterministic compensators are integrated by quadrature (se = 0).  For the
    skew case with beta != 0 the integral is averaged over simulated paths
    drawn on the predicted-side substreams.
    """
    if not scenario.window:
        return 0.0, 0.0
    if scenario.is_deterministic:
        jump, drift = deterministic_prediction(scenario)
        return jump + drift, 0.0
    if tables is None or tables[1] is None:
        tables = _tables(scenario, True)
    _, integrals = _run_side(scenario, PREDICTED, tables, workers)
    return _mean_se(integrals)


def bias_bound(scenario: Scenario, cfg=DEFAULT_QUAD) -> float:
    """Upper bound on the expected number of window jumps lost to truncation.

    Skew BM: a dropped Z-jump of size z moves X by at least delta_B with
    probability at most 2 exp(-delta_B^2 / (2 z)), giving
    T int_0^eps 2 exp(-delta_B^2 / (2 z)) nu(z) dz.

    Compound Poisson: a dropped Z-jump of size z produces an X_Z jump only if X
    jumps during it (probability at most rate * z), giving
    T * rate * int_0^eps z nu(z) dz.
    """
    spec = scenario.subordinator
    eps = spec.truncation_eps
    p = spec.params
    T = scenario.horizon
    if not scenario.window:
        return 0.0
    if scenario.is_skew:
        d2 = scenario.window_gap ** 2

        def f(z):
            with np.errstate(over="ignore", under="ignore", divide="ignore"):
                return np.where(z > 0, 2.0 * np.exp(-0.5 * d2 / z - p.lam * z)
                                * p.c * z ** (-(1.0 + p.alpha)), 0.0)

        # the integrand is negligible below z = d2 / 1500 (exp(-750))
        lo = min(eps, d2 / 1500.0)
        return T * integrate(f, lo, eps, cfg)
    # z nu(z) = c z^-alpha e^{-lambda z}; z = w^(1/(1-alpha)) removes the endpoint singularity
    q = 1.0 / (1.0 - p.alpha)

    def g(w):
        z = w ** q
        return p.c * z ** (-p.alpha) * np.exp(-p.lam * z) * q * w ** (q - 1.0)

    return T * scenario.kernel.params.rate * integrate(g, 0.0, eps ** (1.0 / q), cfg)


def run_verification(scenario: Scenario, workers: int = 1,
                     predicted_scale: float = 1.0) -> VerificationReport:
    """Compare empirical and predicted jump counts; ``predicted_scale`` is a debug hook."""
    t0 = time.perf_counter()
    notes = []
    if scenario.subordinator.params.alpha >= ALPHA_WARN:
        notes.append("alpha >= 0.95: degraded sampler conditioning")
    bias = bias_bound(scenario)
    stochastic_pred = not scenario.is_deterministic
    tables = _tables(scenario, stochastic_pred)
    if scenario.coupled and stochastic_pred:
        counts, integrals = _run_side(scenario, EMPIRICAL, tables, workers)
        emp, emp_se = _mean_se(counts)
        pred, pred_se = _mean_se(integrals)
        pred *= predicted_scale
        _, diff_se = _mean_se(counts - predicted_scale * integrals)
        combined = diff_se
    else:
        emp, emp_se = empirical_count(scenario, workers, tables)
        pred, pred_se = predicted_count(scenario, workers, tables)
        pred *= predicted_scale
        pred_se *= predicted_scale
        combined = math.hypot(emp_se, pred_se)
    if combined > 0:
        z = (emp - pred) / combined
    else:
        z = 0.0 if emp == pred else math.copysign(math.inf, emp - pred)
    passed = abs(z) <= Z_GATE and bias <= BIAS_FRACTION * combined
    return VerificationReport(
        empirical_mean_count=emp,
        empirical_se=emp_se,
        predicted=pred,
        predicted_se=pred_se,
        z_score=z,
        truncation_bias_bound=bias,
        passed=bool(passed),
        seed=int(scenario.master_seed),
        n_paths=int(scenario.n_paths),
        eps=float(scenario.subordinator.truncation_eps),
        coupled=bool(scenario.coupled and stochastic_pred),
        warnings=tuple(notes),
        runtime_seconds=time.perf_counter() - t0,
    )
