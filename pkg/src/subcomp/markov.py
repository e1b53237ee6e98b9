"""Transition kernels of the Markov process X that gets time-changed.

Two kernels are provided: skew Brownian motion (continuous paths) and a
compound-Poisson process with centered Gaussian jumps.  Both are
time-homogeneous; the ``s`` argument of the kernel interface is accepted
and ignored.

Skew BM density (``sgn(0) := +1``)::

    p_t(x, y) = phi_t(y - x) + beta * sgn(y) * phi_t(|y| + |x|)

where phi_t is the N(0, t) density.  Integrating in y gives the CDF::

    F_t(x, y) = Phi((y - x) / sqrt(t)) - beta * Phi_bar((|x| + |y|) / sqrt(t))

valid on both sides of 0.  Note sgn(y) = 1 / sgn(y), so the quotient form
beta / sgn(y) is the same thing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, ndtr, ndtri

__all__ = [
    "SkewParams",
    "CompoundPoissonParams",
    "TransitionKernel",
    "SkewBMKernel",
    "CompoundPoissonKernel",
    "skew_density",
    "skew_cdf",
    "skew_sample",
    "cp_sample",
    "cp_density",
    "gaussian_density",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def gaussian_density(y, var):
    y = np.asarray(y, dtype=float)
    return _INV_SQRT_2PI / np.sqrt(var) * np.exp(-0.5 * y * y / var)


def _sgn(y):
    return np.where(np.asarray(y) >= 0, 1.0, -1.0)


def _scalar(out):
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class SkewParams:
    beta: float = 0.0

    def __post_init__(self):
        if not -1.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [-1, 1], got {self.beta!r}")


@dataclass(frozen=True)
class CompoundPoissonParams:
    rate: float
    jump_std: float

    def __post_init__(self):
        if not (self.rate > 0 and self.jump_std > 0):
            raise ValueError("rate and jump_std must be positive")

    def jump_density(self, y):
        """Density of the Levy measure, rate * N(0, jump_std^2) density."""
        return self.rate * gaussian_density(y, self.jump_std ** 2)


def _check_t(t):
    if np.any(np.asarray(t) <= 0):
        raise ValueError("t must be positive")


def skew_density(t, x, y, skew: SkewParams):
    _check_t(t)
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = (gaussian_density(y - x, t)
           + skew.beta * _sgn(y) * gaussian_density(np.abs(y) + np.abs(x), t))
    # the reflected term never exceeds the direct one, so clip rounding only
    return _scalar(np.maximum(out, 0.0))


def skew_cdf(t, x, y, skew: SkewParams):
    _check_t(t)
    sd = np.sqrt(np.asarray(t, dtype=float))
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = ndtr((y - x) / sd) - skew.beta * ndtr(-(np.abs(x) + np.abs(y)) / sd)
    return _scalar(np.clip(out, 0.0, 1.0))


def skew_sample(t, x, skew: SkewParams, rng, size=None):
    """Exact draws of X_t given X_0 = x for skew Brownian motion.

    For x >= 0 (x < 0 follows by the reflection (x, y, beta) -> (-x, -y, -beta)):

    * W ~ N(x, t).  If W > 0 it is kept with probability 1 - exp(-2 x W / t),
      the chance that the Brownian bridge from x to W stays away from 0.  Since
      phi_t(w - x) exp(-2 x w / t) = phi_t(w + x), the kept mass has density
      phi_t(y - x) - phi_t(y + x) on y > 0: the path killed at 0.
    * Otherwise the path hit 0, which happens with probability
      2 Phi_bar(x / sqrt t).  From 0 the endpoint is |Y| = G - x with
      G ~ N(0, t) conditioned on G > x (density of |Y| proportional to
      phi_t(m + x)), and its sign is + with probability (1 + beta) / 2.

    Summing the two pieces reproduces phi_t(y - x) + beta sgn(y) phi_t(|y| + x).
    ``t`` and ``x`` may be arrays that broadcast to ``size``.
    """
    _check_t(t)
    if size is None:
        size = np.broadcast(np.asarray(t), np.asarray(x)).shape
    t = np.broadcast_to(np.asarray(t, dtype=float), size)
    x = np.broadcast_to(np.asarray(x, dtype=float), size)
    flip = x < 0
    ax = np.abs(x)
    sd = np.sqrt(t)
    w = ax + sd * rng.standard_normal(size)
    u_bridge = rng.uniform(size=size)
    u_tail = rng.uniform(size=size)
    u_sign = rng.uniform(size=size)
    with np.errstate(over="ignore"):
        stays = (w > 0) & (u_bridge < -np.expm1(-2.0 * ax * w / t))
    # G > ax through the upper tail quantile, G = sd * Phi^-1(1 - u * Phi_bar(ax / sd))
    tail = u_tail * ndtr(-ax / sd)
    g = -sd * ndtri(tail)
    m = np.maximum(g - ax, 0.0)
    beta = np.where(flip, -skew.beta, skew.beta)
    signed = np.where(u_sign < 0.5 * (1.0 + beta), m, -m)
    out = np.where(stays, w, signed)
    out = np.where(flip, -out, out)
    return _scalar(out) if out.ndim == 0 else out


def cp_sample(t, x, params: CompoundPoissonParams, rng, size=None):
    """x + sum of N ~ Poisson(rate t) centered Gaussian jumps.

    Conditionally on N, the sum is N(0, N jump_std^2), which is sampled directly.
    """
    _check_t(t)
    if size is None:
        size = np.broadcast(np.asarray(t), np.asarray(x)).shape
    n = rng.poisson(params.rate * np.broadcast_to(t, size))
    out = np.asarray(x, dtype=float) + params.jump_std * np.sqrt(n) * rng.standard_normal(size)
    return _scalar(out) if np.ndim(out) == 0 else out


def cp_density(t, y, params: CompoundPoissonParams):
    """Density of the absolutely continuous part of X_t - X_0 at y != 0.

    sum_{n >= 1} Pois(n; rate t) N(0, n jump_std^2)(y); the atom exp(-rate t)
    at 0 is excluded.  The series is cut where the Poisson tail is far below
    1e-16 of the total.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    mu = params.rate * t
    mu_max = float(np.max(mu))
    n_max = int(mu_max + 12.0 * math.sqrt(mu_max) + 40.0)
    n = np.arange(1, n_max + 1).reshape((-1,) + (1,) * np.broadcast(mu, y).ndim)
    var = n * params.jump_std ** 2
    log_terms = -mu + n * np.log(mu) - gammaln(n + 1) - 0.5 * y * y / var
    out = (np.exp(log_terms) * _INV_SQRT_2PI / np.sqrt(var)).sum(axis=0)
    return _scalar(out)


class TransitionKernel:
    """Time-homogeneous transition kernel P_t(x, s, dy) with a Lebesgue density."""

    is_continuous_paths: bool = True

    def density(self, t, x, y, s=0.0):
        raise NotImplementedError

    def sample(self, t, x, rng, s=0.0, size=None):
        raise NotImplementedError


@dataclass(frozen=True)
class SkewBMKernel(TransitionKernel):
    skew: SkewParams
    is_continuous_paths = True

    def density(self, t, x, y, s=0.0):
        return skew_density(t, x, y, self.skew)

    def cdf(self, t, x, y, s=0.0):
        return skew_cdf(t, x, y, self.skew)

    def sample(self, t, x, rng, s=0.0, size=None):
        return skew_sample(t, x, self.skew, rng, size=size)


@dataclass(frozen=True)
class CompoundPoissonKernel(TransitionKernel):
    params: CompoundPoissonParams
    is_continuous_paths = False

    def density(self, t, x, y, s=0.0):
        """Density of the continuous part in y; the atom at y = x is not included."""
        return cp_density(t, np.asarray(y) - np.asarray(x), self.params)

    def jump_density(self, y):
        return self.params.jump_density(y)

    def sample(self, t, x, rng, s=0.0, size=None):
        return cp_sample(t, x, self.params, rng, size=size)
