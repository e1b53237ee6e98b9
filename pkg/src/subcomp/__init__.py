"""Predictable compensators of time-changed Markov processes.

Closed-form and quadrature evaluation of the jump compensator of X_Z for a
Markov process X time-changed by an independent increasing process Z, plus a
Monte Carlo harness that checks the defining identity
E[# jumps in B up to T] = E[integrated compensator over [0, T] x B].
"""
from .compensator import (CompensatorDensity, levy_compensator, levy_subordination_density,
                          skew_compensator, skew_gamma_closed_form, skew_ts_closed_form,
                          theorem_density_quadrature, vg_levy_density)
from .levy_models import (SubordinatorPath, SubordinatorSpec, TemperedStableParams,
                          laplace_exponent, levy_density, sample_gamma_increment,
                          sample_jump_path, sample_ts_increment)
from .markov import (CompoundPoissonKernel, CompoundPoissonParams, SkewBMKernel, SkewParams,
                     cp_sample, skew_cdf, skew_density, skew_sample)
from .mc_verify import (Scenario, VerificationReport, bias_bound, empirical_count,
                        predicted_count, run_verification, simulate_xz_jumps)
from .specfun import QuadratureConfig, bessel_k, levy_tail_mass, ts_integral_quadrature

__version__ = "0.1.0"
