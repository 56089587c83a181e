"""Folding a count variable onto the residues mod M.

Two independent routes compute the folded law:

* :func:`project_direct` sums the mass of every lattice ``r, r + M, r + 2M, ...``;
* :func:`project_cf` takes the M-point inverse DFT of the characteristic
  function sampled at ``2 pi k / M``.

Deviation from the uniform law is bounded by ``(1/M) sum_{k>=1} |cf(2 pi k / M)|``,
which :func:`cf_decay_bound` evaluates and :func:`turng_advise` uses to pick
the smallest scale parameter reaching a target deviation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import distributions as dist
from .distributions import Family
from .errors import DomainError, NumericalError, ResourceError

IMAG_RESIDUE_TOL = 1e-10
DEFAULT_FOLD_TOLERANCE = 1e-15


@dataclass(frozen=True, eq=False)
class ModularLaw:
    """Probabilities of the M residue classes and their deviation from 1/M.

    ``tail`` is the half-width of the interval attached to every cell: mass
    beyond the truncation point that was not assigned to any residue.
    """

    modulus: int
    probs: np.ndarray
    cf_bound: float = math.nan
    tail: float = 0.0
    max_abs_deviation: float = field(init=False)
    tv_distance: float = field(init=False)

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        if self.modulus < 2 or probs.shape != (self.modulus,):
            raise DomainError("a modular law needs M >= 2 and exactly M probabilities")
        if np.any(probs < -1e-15) or np.any(probs > 1 + 1e-15):
            raise NumericalError(f"residue probabilities outside [0, 1]: {probs}")
        probs = np.clip(probs, 0.0, 1.0)
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        dev = np.abs(probs - 1.0 / self.modulus)
        object.__setattr__(self, "max_abs_deviation", float(dev.max()))
        object.__setattr__(self, "tv_distance", 0.5 * math.fsum(dev))

    @property
    def amplitudes(self):
        """Folded amplitudes beta_k = sqrt(probs_k)."""
        return np.sqrt(self.probs)

    @property
    def total(self):
        return math.fsum(self.probs)


def _check_modulus(M):
    if int(M) != M or M < 2:
        raise DomainError(f"modulus must be an integer >= 2, got {M!r}")
    return int(M)


def cf_samples(spec, M):
    """cf(2 pi k / M) for k = 0 .. M-1."""
    return dist.cf(spec, 2.0 * np.pi * np.arange(M) / M)


def cf_decay_bound(spec, M):
    """(max_k |cf(2 pi k/M)|, (1/M) sum_k |cf(2 pi k/M)|) over k = 1 .. M-1.

    The second number bounds the largest deviation of any residue from 1/M.
    """
    M = _check_modulus(M)
    mags = np.abs(cf_samples(spec, M)[1:])
    return float(mags.max()), math.fsum(mags) / M


def project_direct(spec, M, tail_tolerance=DEFAULT_FOLD_TOLERANCE, cap=dist.DEFAULT_DIMENSION_CAP):
    """Residue law by summing the pmf over each lattice up to the adaptive cutoff."""
    M = _check_modulus(M)
    if not 0.0 < tail_tolerance <= 1e-10:
        raise DomainError("tail_tolerance must lie in (0, 1e-10]")
    d, majorant = dist.cutoff(spec, tail_tolerance, cap)
    probs = dist.pmf_vector(spec, d)
    folded = [math.fsum(probs[r::M]) for r in range(M)]
    tail = 0.0 if spec.finite_support else min(max(dist.survival(spec, d), 0.0), majorant)
    law = ModularLaw(M, folded, cf_decay_bound(spec, M)[1], tail)
    return law


def project_cf(spec, M):
    """Residue law as the inverse DFT of characteristic-function samples.

    Raises NumericalError if any folded probability keeps an imaginary part
    above 1e-10.
    """
    M = _check_modulus(M)
    phi = cf_samples(spec, M)
    k = np.arange(M)
    kernel = np.exp(-2j * np.pi * np.outer(k, k) / M)
    folded = kernel @ phi / M
    residue = float(np.abs(folded.imag).max())
    if residue > IMAG_RESIDUE_TOL:
        raise NumericalError(f"imaginary residue {residue:.3e} in DFT route")
    bound = math.fsum(np.abs(phi[1:])) / M
    return ModularLaw(M, folded.real, bound)


def uniform_deviation(law):
    """(max |p_k - 1/M|, total variation, M * sum (p_k - 1/M)^2)."""
    diff = law.probs - 1.0 / law.modulus
    return law.max_abs_deviation, law.tv_distance, law.modulus * math.fsum(diff * diff)


@dataclass(frozen=True)
class Advice:
    """Outcome of :func:`turng_advise`."""

    parameter: str
    value: float
    achieved_deviation: float
    heuristic_value: float
    spec: dist.DistributionSpec


_SCALE = {
    Family.POISSON: "lambda",
    Family.BINOMIAL: "n",
    Family.NEGATIVE_BINOMIAL: "r",
}


def _heuristic(family, fixed, M):
    # smallest scale whose mean reaches 2M
    target = 2.0 * M
    if family is Family.POISSON:
        return target
    p = float(fixed["p"])
    if family is Family.BINOMIAL:
        return math.ceil(target / p)
    go = p if fixed.get("convention", "pmf") == "pmf" else 1.0 - p
    return math.ceil(target * (1.0 - go) / go)


def turng_advise(family, fixed, M, epsilon, cap=None):
    """Smallest scale parameter whose folded law is within ``epsilon`` of uniform.

    ``family`` is ``"poisson"``, ``"binomial"`` or ``"negative_binomial"``;
    ``fixed`` holds the remaining parameters (``p``, and optionally the NB
    ``convention``). Integers ``n`` / ``r`` are scanned upward; ``lambda`` is
    scanned on a 0.1 grid and refined by bisection. Deviation is measured by
    :func:`project_direct`.
    """
    family = dist.DistributionSpec(family, _dummy_params(family, fixed)).family
    if family not in _SCALE:
        raise DomainError(f"no scale parameter for {family.value}")
    M = _check_modulus(M)
    if not 0.0 < epsilon <= 0.1:
        raise DomainError("epsilon must lie in (0, 0.1]")
    name = _SCALE[family]
    fixed = dict(fixed)

    def make(value):
        return dist.DistributionSpec(family, tuple({**fixed, name: value}.items()))

    def deviation(value):
        return project_direct(make(value), M).max_abs_deviation

    heuristic = _heuristic(family, fixed, M)
    if family is Family.POISSON:
        cap = cap or 1e4
        prev, lam = 0.0, 0.1
        best = (math.inf, None)
        while lam <= cap + 1e-9:
            dev = deviation(lam)
            best = min(best, (dev, lam))
            if dev <= epsilon:
                break
            prev, lam = lam, round(lam + 0.1, 10)
        else:
            raise ResourceError(
                f"deviation {epsilon:g} not reached for lambda <= {cap:g}", best[0]
            )
        lo, hi = prev, lam
        if lo > 0.0:
            while hi - lo > 1e-9 * max(1.0, hi):
                mid = 0.5 * (lo + hi)
                if deviation(mid) <= epsilon:
                    hi = mid
                else:
                    lo = mid
        return Advice(name, hi, deviation(hi), heuristic, make(hi))

    cap = int(cap or 10**6)
    best = (math.inf, None)
    value = 1
    while value <= cap:
        dev = deviation(value)
        best = min(best, (dev, value))
        if dev <= epsilon:
            return Advice(name, value, dev, heuristic, make(value))
        value += 1
    raise ResourceError(f"deviation {epsilon:g} not reached for {name} <= {cap}", best[0])


def _dummy_params(family, fixed):
    # enough parameters to resolve the family name through DistributionSpec
    fam = dist._ALIASES.get(str(getattr(family, "value", family)).lower())
    if fam is None:
        raise DomainError(f"unknown family {family!r}")
    scale = {Family.POISSON: 1.0, Family.BINOMIAL: 1, Family.NEGATIVE_BINOMIAL: 1}.get(fam)
    if scale is None:
        raise DomainError(f"no scale parameter for {fam.value}")
    return tuple({**dict(fixed), _SCALE[fam]: scale}.items())
