"""Tempered-stable and Gamma subordinators: densities, exponents and samplers.

The Levy density is ``c z^-(1+alpha) exp(-lambda z)`` on z > 0 with
c, lambda > 0 and 0 <= alpha < 1; alpha = 0 is the Gamma subordinator.
All samplers take an explicit ``numpy.random.Generator``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import exprel, gamma as gamma_fn

from .specfun import DEFAULT_QUAD, QuadratureConfig, integrate, levy_tail_mass

__all__ = [
    "TemperedStableParams",
    "SubordinatorSpec",
    "SubordinatorPath",
    "SamplerError",
    "levy_density",
    "laplace_exponent",
    "sample_gamma_increment",
    "sample_positive_stable",
    "ts_proposals",
    "sample_ts_increment",
    "ts_acceptance_rate",
    "JumpSizeTable",
    "sample_jump_path",
]

ALPHA_WARN = 0.95


class SamplerError(RuntimeError):
    """A sampler could not produce a draw within its iteration budget."""


@dataclass(frozen=True)
class TemperedStableParams:
    """Parameters ``(c, lambda, alpha)`` of the subordinator Levy density."""

    c: float
    lam: float
    alpha: float = 0.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c!r}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam!r}")
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must lie in [0, 1), got {self.alpha!r}")
        if self.alpha >= ALPHA_WARN:
            warnings.warn(
                f"alpha={self.alpha} is close to 1: rejection acceptance and "
                "jump-size table conditioning degrade",
                RuntimeWarning,
                stacklevel=3,
            )

    @property
    def is_gamma(self) -> bool:
        return self.alpha == 0.0


@dataclass(frozen=True)
class SubordinatorSpec:
    """Subordinator ``Z_t = drift * t + (jumps larger than truncation_eps)``."""

    params: TemperedStableParams
    drift: float = 0.0
    truncation_eps: float = 1e-4

    def __post_init__(self):
        if not self.drift >= 0:
            raise ValueError("drift must be nonnegative")
        if not self.truncation_eps > 0:
            raise ValueError("truncation_eps must be positive")

    def continuous_part(self, t):
        """Z^c_t; jumps below eps are dropped, so this is exactly drift * t."""
        return self.drift * np.asarray(t, dtype=float)

    @cached_property
    def tail_mass(self) -> float:
        return levy_tail_mass(self.truncation_eps, self.params)


@dataclass(frozen=True)
class SubordinatorPath:
    horizon: float
    jump_times: np.ndarray
    jump_sizes: np.ndarray
    drift: float = 0.0
    truncation_eps: float = field(default=0.0, repr=False)

    def __post_init__(self):
        times = np.asarray(self.jump_times, dtype=float)
        sizes = np.asarray(self.jump_sizes, dtype=float)
        if times.shape != sizes.shape:
            raise ValueError("jump_times and jump_sizes differ in length")
        if times.size and (np.any(np.diff(times) <= 0) or times[0] <= 0
                           or times[-1] > self.horizon):
            raise ValueError("jump times must be strictly increasing in (0, T]")
        if np.any(sizes <= self.truncation_eps):
            raise ValueError("jump sizes must exceed the truncation threshold")
        object.__setattr__(self, "jump_times", times)
        object.__setattr__(self, "jump_sizes", sizes)

    def __call__(self, t):
        """Evaluate Z_t (right-continuous) at scalar or array ``t``."""
        t = np.asarray(t, dtype=float)
        csum = np.concatenate([[0.0], np.cumsum(self.jump_sizes)])
        idx = np.searchsorted(self.jump_times, t, side="right")
        return self.drift * t + csum[idx]


def levy_density(z, params: TemperedStableParams):
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise ValueError("Levy density is defined for z > 0 only")
    out = params.c * z ** (-(1.0 + params.alpha)) * np.exp(-params.lam * z)
    return out if out.ndim else float(out)


def laplace_exponent(u, params: TemperedStableParams):
    """psi(u) with E exp(-u Z_t) = exp(-t psi(u))."""
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValueError("u must be nonnegative")
    c, lam, alpha = params.c, params.lam, params.alpha
    if alpha == 0.0:
        out = c * np.log1p(u / lam)
    else:
        # c Gamma(-alpha) (lam^a - (lam+u)^a), rearranged so small alpha does not cancel
        log_ratio = np.log1p(u / lam)
        out = c * gamma_fn(1.0 - alpha) * lam ** alpha * log_ratio * exprel(alpha * log_ratio)
    return out if out.ndim else float(out)


def laplace_exponent_quadrature(u: float, params: TemperedStableParams,
                                cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """psi(u) straight from its defining integral; used to check the closed form."""
    def f(z):
        return -np.expm1(-u * z) * params.c * z ** (-(1.0 + params.alpha)) * np.exp(-params.lam * z)

    # z = w^(1/(1-alpha)) on (0, 1] absorbs the z^-alpha endpoint singularity
    p = 1.0 / (1.0 - params.alpha)

    def g(w):
        return f(w ** p) * p * w ** (p - 1.0)

    return integrate(g, 0.0, 1.0, cfg) + integrate(f, 1.0, math.inf, cfg)


def sample_gamma_increment(dt, params: TemperedStableParams, rng, size=None):
    """Z_{t+dt} - Z_t ~ Gamma(shape=c dt, rate=lambda) for the alpha = 0 case."""
    if params.alpha != 0.0:
        raise ValueError("Gamma increments require alpha == 0")
    if not dt > 0:
        raise ValueError("dt must be positive")
    return rng.gamma(params.c * dt, 1.0 / params.lam, size=size)


def sample_positive_stable(alpha: float, rng, size=None):
    """One-sided alpha-stable draws with E exp(-u S) = exp(-u^alpha).

    Kanter's representation:
    S = sin(a U) / sin(U)^(1/a) * (sin((1-a) U) / E)^((1-a)/a),
    U ~ Uniform(0, pi), E ~ Exp(1).
    """
    u = rng.uniform(0.0, math.pi, size=size)
    e = rng.standard_exponential(size=size)
    a = alpha
    return (np.sin(a * u) / np.sin(u) ** (1.0 / a)
            * (np.sin((1.0 - a) * u) / e) ** ((1.0 - a) / a))


def ts_acceptance_rate(dt: float, params: TemperedStableParams) -> float:
    """Probability that one stable proposal survives the exp(-lambda S) test."""
    return math.exp(dt * params.c * gamma_fn(-params.alpha) * params.lam ** params.alpha)


def ts_proposals(dt: float, params: TemperedStableParams, rng, size=None):
    """Untempered proposals: E exp(-u S) = exp(-dt c |Gamma(-alpha)| u^alpha)."""
    scale = (dt * params.c * -gamma_fn(-params.alpha)) ** (1.0 / params.alpha)
    return scale * sample_positive_stable(params.alpha, rng, size=size)


def sample_ts_increment(dt, params: TemperedStableParams, rng, size=None,
                        max_proposals: int = 10_000_000):
    """Exact tempered-stable increment by rejection from the untempered law.

    Proposals S are positive stable with E exp(-u S) = exp(-dt c |Gamma(-alpha)| u^alpha),
    i.e. the untempered exponent; S is kept with probability exp(-lambda S).  The
    expected number of proposals per draw is 1 / ts_acceptance_rate, which blows
    up with dt c lambda^alpha.  Split dt into smaller steps when that happens.
    """
    alpha = params.alpha
    if alpha == 0.0:
        return sample_gamma_increment(dt, params, rng, size=size)
    if not dt > 0:
        raise ValueError("dt must be positive")
    n = 1 if size is None else int(np.prod(size))
    out = np.empty(n)
    filled = 0
    proposals = 0
    accept = ts_acceptance_rate(dt, params)
    if accept * max_proposals < 1.0:
        raise SamplerError(
            f"tempered-stable acceptance rate {accept:.3g} needs more than {max_proposals} "
            "proposals per draw; split dt into smaller steps"
        )
    while filled < n:
        need = n - filled
        batch = int(min(max(need / accept * 1.1 + 16, 64), 2_000_000))
        if proposals + batch > max_proposals * n:
            raise SamplerError(
                f"tempered-stable rejection exceeded {max_proposals} proposals per "
                f"draw (acceptance rate {accept:.3g}); split dt into smaller steps"
            )
        s = ts_proposals(dt, params, rng, size=batch)
        keep = s[rng.uniform(size=batch) < np.exp(-params.lam * s)][:need]
        out[filled:filled + keep.size] = keep
        filled += keep.size
        proposals += batch
    return float(out[0]) if size is None else out.reshape(size)


class JumpSizeTable:
    """Inverse-CDF sampler for jump sizes above eps.

    The normalized tail Lambda(z) / Lambda(eps) is tabulated on ``n_nodes``
    log-spaced points between eps and ``eps + 40 / lambda`` (panel integrals by
    15-point Gauss-Legendre); log z is linearly interpolated in the tail mass.
    Beyond the last node the density is dominated by exp(-lambda z), so the
    remaining mass (< 1e-15 relative) is sampled as last node + Exp(lambda).
    """

    def __init__(self, params: TemperedStableParams, eps: float, n_nodes: int = 4096):
        self.params = params
        self.eps = float(eps)
        z_max = self.eps + 40.0 / params.lam
        nodes = np.geomspace(self.eps, z_max, n_nodes)
        gx, gw = np.polynomial.legendre.leggauss(15)
        lo = nodes[:-1, None]
        hi = nodes[1:, None]
        pts = 0.5 * (hi - lo) * gx + 0.5 * (hi + lo)
        panels = (0.5 * (hi - lo)[:, 0]) * (levy_density(pts, params) @ gw)
        far = levy_tail_mass(z_max, params)
        tail = np.concatenate([np.cumsum(panels[::-1])[::-1], [0.0]]) + far
        self.total = float(tail[0])
        self.nodes = nodes
        self.tail = tail
        self.far = far
        # np.interp needs increasing abscissae
        self._mass = tail[::-1]
        self._logz = np.log(nodes)[::-1]

    def tail_mass(self, z):
        """Tabulated Lambda(z) for eps <= z <= last node."""
        return np.interp(np.log(z), np.log(self.nodes), self.tail)

    def sample(self, rng, size):
        u = rng.uniform(size=size) * self.total
        z = np.exp(np.interp(u, self._mass, self._logz))
        z = np.maximum(z, np.nextafter(self.eps, np.inf))
        far = u < self.far
        if np.any(far):
            z[far] = self.nodes[-1] + rng.exponential(1.0 / self.params.lam, size=int(far.sum()))
        return z


def sample_jump_path(T: float, spec: SubordinatorSpec, rng,
                     table: JumpSizeTable | None = None) -> SubordinatorPath:
    """Retained jumps (> eps) of Z on (0, T] as a marked Poisson process.

    Jumps at or below eps are dropped without adding a compensating drift.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    if table is None:
        table = JumpSizeTable(spec.params, spec.truncation_eps)
    n = rng.poisson(T * table.total)
    times = np.sort(T - rng.uniform(0.0, T, size=n))
    sizes = table.sample(rng, n)
    return SubordinatorPath(T, times, sizes, spec.drift, spec.truncation_eps)
