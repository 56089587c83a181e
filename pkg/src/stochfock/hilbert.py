"""Amplitude states over the number basis and the measures built on them.

A distribution ``P`` is represented by the real, nonnegative amplitude vector
``alpha_n = sqrt(P(n))`` truncated at an adaptively chosen dimension ``D``; the
mass beyond ``D`` is carried explicitly as ``tail_mass``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import distributions as dist
from .distributions import DistributionSpec, Family
from .errors import DomainError

NORMALIZATION_TOL = 1e-12
MAX_MOMENT_ORDER = 8


@dataclass(frozen=True, eq=False)
class StochasticState:
    """Truncated amplitude state with a certified tail."""

    amplitudes: np.ndarray
    tail_mass: float = 0.0
    source: Optional[DistributionSpec] = None

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=float)
        if amps.ndim != 1 or amps.size == 0:
            raise DomainError("amplitudes must be a nonempty 1-D sequence")
        if np.any(amps < 0) or not np.all(np.isfinite(amps)):
            raise DomainError("amplitudes must be finite and nonnegative")
        if self.tail_mass < 0:
            raise DomainError("tail_mass must be nonnegative")
        total = math.fsum(amps * amps) + self.tail_mass
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise DomainError(f"state is not normalized: sum(alpha^2) + tail = {total!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "tail_mass", float(self.tail_mass))

    @property
    def dimension(self):
        return self.amplitudes.size

    @property
    def probabilities(self):
        return self.amplitudes**2

    @classmethod
    def point_mass(cls, n, dimension=None):
        """Basis state |n> in a space of ``dimension`` (default n + 1)."""
        amps = np.zeros(dimension or n + 1)
        amps[n] = 1.0
        return cls(amps)


def build_state(spec, tail_tolerance=1e-12, cap=dist.DEFAULT_DIMENSION_CAP):
    """Amplitude state of ``spec`` with tail mass at most ``tail_tolerance``.

    Raises ResourceError when the tolerance needs more than ``cap`` terms.
    """
    if not 0.0 < tail_tolerance <= 1e-6:
        raise DomainError("tail_tolerance must lie in (0, 1e-6]")
    d, majorant = dist.cutoff(spec, tail_tolerance, cap)
    probs = dist.pmf_vector(spec, d)
    tail = 0.0
    if not spec.finite_support:
        tail = min(max(dist.survival(spec, d), 0.0), majorant)
    return StochasticState(np.sqrt(probs), tail, spec)


def _aligned(a, b):
    n = max(a.dimension, b.dimension)
    x = np.zeros(n)
    y = np.zeros(n)
    x[: a.dimension] = a.amplitudes
    y[: b.dimension] = b.amplitudes
    return x, y


def shannon_entropy(state, log_base=math.e, return_bound=False):
    """Entropy of the outcome law, with 0 log 0 = 0.

    With ``return_bound=True`` returns ``(value, half_width)`` where the
    half-width accounts for the truncated tail.
    """
    if log_base <= 1:
        raise DomainError("log_base must exceed 1")
    p = state.probabilities
    p = p[p > 0]
    value = 0.0 - math.fsum(p * np.log(p)) / math.log(log_base)
    if not return_bound:
        return value
    half = state.tail_mass * math.log(max(state.dimension, 2)) / math.log(log_base)
    return value, half


def _score(spec, parameter, n):
    """d/dtheta log P(n), elementwise over outcomes ``n``."""
    f = spec.family
    if f is Family.POISSON:
        return n / spec["lambda"] - 1.0
    p = spec["p"]
    if f is Family.BINOMIAL:
        return (n - spec["n"] * p) / (p * (1.0 - p))
    if f is Family.GEOMETRIC:
        return n / p - 1.0 / (1.0 - p)
    r = spec["r"]
    if spec["convention"] == "swapped":
        return r / p - n / (1.0 - p)
    return n / p - r / (1.0 - p)


def classical_fisher(spec, parameter=None):
    """Closed-form Fisher information of the family with respect to ``parameter``."""
    parameter = _check_parameter(spec, parameter)
    f = spec.family
    if f is Family.POISSON:
        return 1.0 / spec["lambda"]
    p = spec["p"]
    if f is Family.BINOMIAL:
        return spec["n"] / (p * (1.0 - p))
    if f is Family.GEOMETRIC:
        return 1.0 / (p * (1.0 - p) ** 2)
    r = spec["r"]
    if spec["convention"] == "swapped":
        return r / (p * p * (1.0 - p))
    return r / (p * (1.0 - p) ** 2)


def _check_parameter(spec, parameter):
    allowed = dist.CONTINUOUS_PARAMS[spec.family]
    if parameter is None:
        if len(allowed) != 1:
            raise DomainError(f"{spec.family.value} has no continuous parameter")
        parameter = allowed[0]
    if parameter == "lam":
        parameter = "lambda"
    if parameter not in allowed:
        raise DomainError(f"{parameter!r} is not a continuous parameter of {spec.family.value}")
    theta = spec[parameter]
    if parameter == "p" and not 0.0 < theta < 1.0:
        raise DomainError(f"p = {theta} is on the boundary of its domain")
    return parameter


def _fd_step(theta):
    return max(1e-5, 1e-5 * abs(theta))


def fisher_information(spec, parameter=None, method="analytic"):
    """Fisher information 4 * sum (d alpha_n / d theta)^2 of the amplitude state.

    ``method="analytic"`` differentiates the amplitudes in closed form;
    ``method="finite_difference"`` uses Richardson-refined central differences.
    """
    parameter = _check_parameter(spec, parameter)
    theta = spec[parameter]
    if method == "analytic":
        state = build_state(spec, 1e-15)
        n = np.arange(state.dimension, dtype=float)
        dalpha = 0.5 * state.amplitudes * _score(spec, parameter, n)
        return 4.0 * math.fsum(dalpha * dalpha)
    if method != "finite_difference":
        raise DomainError(f"unknown method {method!r}")

    h = _fd_step(theta)
    if parameter == "p" and not (0.0 < theta - h and theta + h < 1.0):
        raise DomainError(f"p = {theta} is too close to the boundary for a central difference")
    shifted = [spec.replace(**{parameter: theta + s}) for s in (h, -h, h / 2, -h / 2)]
    length = max(dist.cutoff(s, 1e-15)[0] for s in shifted)
    a = [np.sqrt(dist.pmf_vector(s, length)) for s in shifted]
    coarse = (a[0] - a[1]) / (2 * h)
    fine = (a[2] - a[3]) / h
    deriv = (4.0 * fine - coarse) / 3.0
    return 4.0 * math.fsum(deriv * deriv)


def moment(state, k, return_bound=False):
    """Raw moment sum n^k P(n); optional ``(value, tail_half_width)``."""
    k = int(k)
    if not 1 <= k <= MAX_MOMENT_ORDER:
        raise DomainError(f"moment order must lie in [1, {MAX_MOMENT_ORDER}]")
    n = np.arange(state.dimension, dtype=float)
    value = math.fsum(n**k * state.probabilities)
    if not return_bound:
        return value
    return value, _moment_tail(state, k)


def _moment_tail(state, k):
    if state.tail_mass == 0.0:
        return 0.0
    spec = state.source
    d = state.dimension
    if spec is None or spec.finite_support:
        return state.tail_mass * float(d) ** k
    q = dist.ratio_bound(spec, d)
    if q >= 1.0:
        return math.inf
    # P(n) <= P(d) q^(n-d) for n >= d; sum (d+j)^k q^j in chunks until it settles
    total, start, chunk = 0.0, 0, 4096
    while True:
        j = np.arange(start, start + chunk, dtype=float)
        terms = (d + j) ** k * q**j
        total += math.fsum(terms)
        # terms decrease once j exceeds k / ln(1/q)
        if start + chunk > k / -math.log(q) and terms[-1] <= 1e-17 * total:
            break
        start += chunk
        chunk *= 2
    return dist.pmf(spec, d) * total


def overlap(a, b, return_bound=False):
    """Fidelity sum alpha_n beta_n over the common range, clipped to [0, 1]."""
    x, y = _aligned(a, b)
    value = min(1.0, max(0.0, math.fsum(x * y)))
    if not return_bound:
        return value
    return value, math.sqrt(a.tail_mass * b.tail_mass)


def l2_distance(a, b):
    """Euclidean norm of the amplitude difference (shorter state zero-padded)."""
    x, y = _aligned(a, b)
    d = x - y
    return math.sqrt(math.fsum(d * d))


def nb_hierarchy_check(p, tail_tolerance=1e-12):
    """True iff NB(1, p) and Geometric(p) amplitudes agree within one ulp per term."""
    nb = build_state(dist.negative_binomial(1, p), tail_tolerance)
    geo = build_state(dist.geometric(p), tail_tolerance)
    x, y = _aligned(nb, geo)
    ulp = np.spacing(np.maximum(x, y))
    return bool(np.all(np.abs(x - y) <= ulp))
