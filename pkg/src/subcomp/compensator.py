"""Jump-rate densities of the time-changed process X_Z.

For X Markov with transition density p_z(x, .) and Z with drift gamma and
Levy density nu, the compensator of the jumps of X_Z has density in
(t, y), given the current state x = X_{Z_{t-}},

    gamma * F(y)  +  int_0^inf p_z(x, x + y) nu(z) dz,

where F is the Levy jump density of X (zero when X has continuous paths).
For skew Brownian motion and a tempered-stable Z the integral is a Bessel
function, which gives the closed forms below.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import ndtr

from .levy_models import SubordinatorSpec, TemperedStableParams
from .markov import (CompoundPoissonKernel, SkewBMKernel, SkewParams,
                     TransitionKernel, gaussian_density)
from .specfun import DEFAULT_QUAD, QuadratureConfig, bessel_k, integrate

__all__ = [
    "CompensatorDensity",
    "vg_levy_density",
    "skew_gamma_closed_form",
    "skew_ts_closed_form",
    "radial_rate",
    "theorem_density_quadrature",
    "levy_subordination_density",
    "skew_compensator",
    "levy_compensator",
    "window_integral",
    "TailIntegralTable",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)
# above this z the factor exp(-lambda z) is below exp(-745) and underflows anyway
_Z_CUTOFF_RATE = 745.0
SMALL_Y = 1e-4
# tail values span ~18 decades, so the table nodes use a purely relative tolerance
_TABLE_QUAD = QuadratureConfig(abs_tol=1e-300, rel_tol=1e-12, max_subdivisions=400)


def _sgn(v):
    return 1.0 if v >= 0 else -1.0


def _check_y(y):
    if y == 0:
        raise ValueError("jump size y must be nonzero")


def vg_levy_density(y, c: float, lam: float):
    """Variance Gamma Levy density c exp(-sqrt(2 lambda) |y|) / |y|."""
    y = np.asarray(y, dtype=float)
    if np.any(y == 0):
        raise ValueError("jump size y must be nonzero")
    ay = np.abs(y)
    out = c * np.exp(-math.sqrt(2.0 * lam) * ay) / ay
    return float(out) if out.ndim == 0 else out


def radial_rate(u: float, params: TemperedStableParams, bessel=bessel_k) -> float:
    """h(u) = int_0^inf phi_z(u) nu(z) dz in closed form.

    h(u) = 2c / sqrt(2 pi) * (sqrt(2 lambda) / u)^(1/2 + alpha) * K_(1/2 + alpha)(sqrt(2 lambda) u).
    """
    v = 0.5 + params.alpha
    r = math.sqrt(2.0 * params.lam)
    return 2.0 * params.c / _SQRT_2PI * (r / u) ** v * bessel(v, r * u)


def skew_ts_closed_form(x: float, y: float, skew: SkewParams,
                        params: TemperedStableParams, bessel=bessel_k) -> float:
    """Compensator density for skew BM time-changed by a tempered-stable subordinator.

    h(|y|) + beta * sgn(x + y) * h(|x| + |x + y|), with h from :func:`radial_rate`
    and sgn(0) := +1.
    """
    _check_y(y)
    out = radial_rate(abs(y), params, bessel)
    if skew.beta != 0.0:
        phi = abs(x) + abs(x + y)
        out += skew.beta * _sgn(x + y) * radial_rate(phi, params, bessel)
    return max(out, 0.0)


def skew_gamma_closed_form(x: float, y: float, skew: SkewParams,
                           c: float, lam: float) -> float:
    """The alpha = 0 case: c e^{-r|y|}/|y| + beta sgn(x+y) c e^{-r phi}/phi, r = sqrt(2 lambda)."""
    _check_y(y)
    r = math.sqrt(2.0 * lam)
    out = c * math.exp(-r * abs(y)) / abs(y)
    if skew.beta != 0.0:
        phi = abs(x) + abs(x + y)
        out += skew.beta * _sgn(x + y) * c * math.exp(-r * phi) / phi
    return max(out, 0.0)


def _subordinated_integral(kernel_of_z: Callable, params: TemperedStableParams,
                           cfg: QuadratureConfig) -> float:
    """int_0^inf kernel_of_z(z) nu(z) dz, integrated in s = log z.

    The split point is the maximum of the integrand located on a coarse grid;
    above z = 745 / lambda the integrand underflows and the range is cut.
    """
    s_hi = math.log(_Z_CUTOFF_RATE / params.lam)

    def g(s):
        with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
            z = np.exp(s)
            zz = np.maximum(z, 1e-300)
            # nu(z) dz = c z^-alpha exp(-lambda z) ds
            val = kernel_of_z(zz) * params.c * zz ** (-params.alpha) * np.exp(-params.lam * zz)
        return np.where(z > 0, val, 0.0)

    grid = np.linspace(-40.0, s_hi, 401)
    vals = g(grid)
    if not np.any(vals > 0):
        return 0.0
    peak = float(grid[int(np.argmax(vals))])
    return integrate(g, -math.inf, s_hi, cfg, points=[peak])


def theorem_density_quadrature(x: float, y: float, kernel: TransitionKernel,
                               spec: SubordinatorSpec,
                               cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Jump part of the compensator density, int_0^inf p_z(x, x + y) nu(z) dz, by quadrature.

    The drift term gamma * F(y) is not included; see :class:`CompensatorDensity`.
    """
    _check_y(y)
    return _subordinated_integral(lambda z: kernel.density(z, x, x + y), spec.params, cfg)


def levy_subordination_density(y: float, levy_jump_density: Optional[Callable],
                               marginal_density: Callable, spec: SubordinatorSpec,
                               cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Levy measure density of X_Z for Levy X: gamma F(y) + int marginal(z, y) nu(z) dz.

    ``marginal_density(z, y)`` is the density of X_z - X_0 (vectorized in z);
    ``levy_jump_density`` may be None for continuous X.
    """
    _check_y(y)
    jump = _subordinated_integral(lambda z: marginal_density(z, y), spec.params, cfg)
    if spec.drift > 0 and levy_jump_density is not None:
        jump += spec.drift * float(levy_jump_density(y))
    return jump


@dataclass(frozen=True)
class CompensatorDensity:
    """Density of the compensator in (t, y) given the state x = X_{Z_{t-}}.

    ``jump_rate(x, y)`` is the part driven by the jumps of Z,
    ``first_term_rate(y)`` is the jump density of X, multiplied by
    dZ^c_t / dt = ``drift``.  Both kernels here are time-homogeneous, so t is
    accepted and ignored.
    """

    jump_rate: Callable[[float, float], float]
    is_deterministic: bool
    first_term_rate: Optional[Callable[[float], float]] = None
    drift: float = 0.0

    def rate(self, t, x, y) -> float:
        out = self.jump_rate(x, y)
        if self.first_term_rate is not None and self.drift > 0:
            out += self.drift * float(self.first_term_rate(y))
        return out


def skew_compensator(skew: SkewParams, spec: SubordinatorSpec, method: str = "closed_form",
                     cfg: QuadratureConfig = DEFAULT_QUAD) -> CompensatorDensity:
    """Compensator density for skew BM; the drift term vanishes (continuous X)."""
    params = spec.params
    if method == "closed_form":
        def jump_rate(x, y):
            return skew_ts_closed_form(x, y, skew, params)
    elif method == "quadrature":
        kernel = SkewBMKernel(skew)

        def jump_rate(x, y):
            if abs(y) < SMALL_Y:
                return skew_ts_closed_form(x, y, skew, params)
            return theorem_density_quadrature(x, y, kernel, spec, cfg)
    else:
        raise ValueError(f"unknown method {method!r}")
    return CompensatorDensity(jump_rate, is_deterministic=skew.beta == 0.0,
                              first_term_rate=None, drift=spec.drift)


def levy_compensator(kernel: CompoundPoissonKernel, spec: SubordinatorSpec,
                     cfg: QuadratureConfig = DEFAULT_QUAD) -> CompensatorDensity:
    """Compensator density for compound-Poisson X; deterministic (Levy case)."""
    def jump_rate(x, y):
        return levy_subordination_density(y, None, lambda z, yy: kernel.density(z, 0.0, yy),
                                          spec, cfg)

    return CompensatorDensity(jump_rate, is_deterministic=True,
                              first_term_rate=kernel.jump_density, drift=spec.drift)


def window_integral(fun: Callable[[float], float], window, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """int_B fun(y) dy for a window B given as (lo, hi) pairs bounded away from 0."""
    total = 0.0
    for lo, hi in window:
        total += integrate(np.vectorize(fun, otypes=[float]), lo, hi, cfg)
    return total


class TailIntegralTable:
    """H(u) = int_u^inf h(s) ds on u >= u_min, tabulated and spline-interpolated.

    H(u) = int_0^inf Phi_bar(u / sqrt z) nu(z) dz is computed at each node by
    quadrature; log H is interpolated by a cubic spline on a grid that is
    quadratically clustered toward u_min.
    Above the last node H is below 1e-17 H(u_min) and is returned as 0.
    With it the window integral of the skew closed form is exact in x:

        int_B k(x, y) dy = sum over (a, b) in B of
            [H(|a|) - H(|b|)] (a > 0) or [H(|b|) - H(|a|)] (b < 0)
            + beta [H(|x| + |x + a|) - H(|x| + |x + b|)]

    because d/dy H(|x| + |x + y|) = -sgn(x + y) h(|x| + |x + y|).
    """

    def __init__(self, params: TemperedStableParams, u_min: float,
                 n_nodes: int = 1500, cfg: QuadratureConfig = _TABLE_QUAD):
        if not u_min > 0:
            raise ValueError("u_min must be positive")
        self.params = params
        self.u_min = float(u_min)
        self.u_max = self.u_min + 42.0 / math.sqrt(2.0 * params.lam)
        # denser near u_min where log H bends most
        self.nodes = self.u_min + (self.u_max - self.u_min) * np.linspace(0.0, 1.0, n_nodes) ** 2
        self.values = np.array([self.direct(u, cfg) for u in self.nodes])
        self._spline = CubicSpline(self.nodes, np.log(self.values))

    def direct(self, u: float, cfg: QuadratureConfig = _TABLE_QUAD) -> float:
        return _subordinated_integral(lambda z: ndtr(-u / np.sqrt(z)), self.params, cfg)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if np.any(u < self.u_min * (1 - 1e-12)):
            raise ValueError("H requested below the tabulated range")
        inside = u <= self.u_max
        out = np.zeros(u.shape)
        out[inside] = np.exp(self._spline(np.maximum(u[inside], self.u_min)))
        return out

    def window_integral(self, x, window, beta: float):
        """int_B [h(|y|) + beta sgn(x+y) h(|x| + |x+y|)] dy, vectorized in x."""
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        total = np.zeros(x.shape)
        for lo, hi in window:
            h_lo = self._at(abs(lo))
            h_hi = self._at(abs(hi))
            total += (h_lo - h_hi) if lo > 0 else (h_hi - h_lo)
            if beta != 0.0:
                total += beta * (self._at(ax + np.abs(x + lo)) - self._at(ax + np.abs(x + hi)))
        return total

    def _at(self, u):
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape)
        fin = np.isfinite(u)
        out[fin] = self(u[fin])
        return out if out.ndim else float(out)
