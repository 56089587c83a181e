"""Scalar engines for the five discrete families.

All combinatorics are evaluated in log space. Probabilities, characteristic
functions, generating functions and closed-form moments are pure functions of
a validated :class:`DistributionSpec`.

Negative Binomial convention
----------------------------
The default (``convention="pmf"``) mass function is::

    P(n) = C(n + r - 1, n) * (1 - p)**r * p**n,     n = 0, 1, 2, ...

so ``p`` weights the counted event and the mean is ``r p / (1 - p)``.  The
``"swapped"`` convention exchanges ``p`` and ``1 - p``.  ``Geometric(p)`` is the
``r = 1`` member of the default convention: ``P(n) = (1 - p) p**n``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import special

from .errors import DomainError, ResourceError

DEFAULT_DIMENSION_CAP = 2**20


class Family(str, enum.Enum):
    BINOMIAL = "binomial"
    NEGATIVE_BINOMIAL = "negative_binomial"
    GEOMETRIC = "geometric"
    POISSON = "poisson"
    HYPERGEOMETRIC = "hypergeometric"


_ALIASES = {
    "binomial": Family.BINOMIAL,
    "bin": Family.BINOMIAL,
    "negative_binomial": Family.NEGATIVE_BINOMIAL,
    "negativebinomial": Family.NEGATIVE_BINOMIAL,
    "nb": Family.NEGATIVE_BINOMIAL,
    "geometric": Family.GEOMETRIC,
    "geom": Family.GEOMETRIC,
    "poisson": Family.POISSON,
    "pois": Family.POISSON,
    "hypergeometric": Family.HYPERGEOMETRIC,
    "hyper": Family.HYPERGEOMETRIC,
}

# parameter names, in canonical order, and which of them are continuous
_PARAMS = {
    Family.BINOMIAL: ("n", "p"),
    Family.NEGATIVE_BINOMIAL: ("r", "p", "convention"),
    Family.GEOMETRIC: ("p",),
    Family.POISSON: ("lambda",),
    Family.HYPERGEOMETRIC: ("N", "K", "draws"),
}
CONTINUOUS_PARAMS = {
    Family.BINOMIAL: ("p",),
    Family.NEGATIVE_BINOMIAL: ("p",),
    Family.GEOMETRIC: ("p",),
    Family.POISSON: ("lambda",),
    Family.HYPERGEOMETRIC: (),
}
NB_CONVENTIONS = ("pmf", "swapped")


def _as_count(name, value):
    if isinstance(value, bool):
        raise DomainError(f"{name} must be an integer, got {value!r}")
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating, Fraction)) and float(value).is_integer():
        return int(value)
    raise DomainError(f"{name} must be an integer, got {value!r}")


def _as_real(name, value):
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise DomainError(f"{name} must be a real number, got {value!r}") from None
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return x


@dataclass(frozen=True)
class DistributionSpec:
    """A family together with validated parameters.

    Build instances through :func:`binomial`, :func:`poisson`, ... or
    :func:`parse_spec`; the constructor validates and normalises ``params``.
    Instances are hashable, so they can key caches.
    """

    family: Family
    params: tuple

    def __post_init__(self):
        family = _ALIASES.get(str(getattr(self.family, "value", self.family)).lower())
        if family is None:
            raise DomainError(f"unknown family {self.family!r}")
        raw = dict(self.params)
        if family is Family.NEGATIVE_BINOMIAL:
            raw.setdefault("convention", "pmf")
        expected = _PARAMS[family]
        if set(raw) != set(expected):
            raise DomainError(
                f"{family.value} takes parameters {expected}, got {tuple(raw)}"
            )
        values = _validate(family, raw)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "params", tuple((k, values[k]) for k in expected))

    def __getitem__(self, name):
        for key, value in self.params:
            if key == name:
                return value
        raise KeyError(name)

    def replace(self, **changes):
        """Copy with some parameters changed."""
        raw = dict(self.params)
        raw.update(changes)
        return DistributionSpec(self.family, tuple(raw.items()))

    @property
    def finite_support(self):
        return self.family in (Family.BINOMIAL, Family.HYPERGEOMETRIC)

    def __str__(self):
        body = ",".join(f"{k}={v}" for k, v in self.params)
        return f"{self.family.value}:{body}"


def _validate(family, raw):
    out = {}
    if family is Family.BINOMIAL:
        out["n"] = _as_count("n", raw["n"])
        out["p"] = _as_real("p", raw["p"])
        if out["n"] < 0:
            raise DomainError("Binomial n must be nonnegative")
        if not 0.0 <= out["p"] <= 1.0:
            raise DomainError("Binomial p must lie in [0, 1]")
    elif family is Family.NEGATIVE_BINOMIAL:
        out["r"] = _as_count("r", raw["r"])
        out["p"] = _as_real("p", raw["p"])
        out["convention"] = str(raw["convention"])
        if out["r"] < 1:
            raise DomainError("Negative Binomial r must be a positive integer")
        if not 0.0 < out["p"] < 1.0:
            raise DomainError("Negative Binomial p must lie in (0, 1)")
        if out["convention"] not in NB_CONVENTIONS:
            raise DomainError(f"convention must be one of {NB_CONVENTIONS}")
    elif family is Family.GEOMETRIC:
        out["p"] = _as_real("p", raw["p"])
        if not 0.0 < out["p"] < 1.0:
            raise DomainError("Geometric p must lie in (0, 1)")
    elif family is Family.POISSON:
        out["lambda"] = _as_real("lambda", raw["lambda"])
        if out["lambda"] <= 0.0:
            raise DomainError("Poisson lambda must be positive")
    else:
        out["N"] = _as_count("N", raw["N"])
        out["K"] = _as_count("K", raw["K"])
        out["draws"] = _as_count("draws", raw["draws"])
        if out["N"] < 0 or not 0 <= out["K"] <= out["N"] or not 0 <= out["draws"] <= out["N"]:
            raise DomainError("Hypergeometric needs 0 <= K <= N and 0 <= draws <= N")
    return out


def binomial(n, p):
    return DistributionSpec(Family.BINOMIAL, (("n", n), ("p", p)))


def negative_binomial(r, p, convention="pmf"):
    return DistributionSpec(
        Family.NEGATIVE_BINOMIAL, (("r", r), ("p", p), ("convention", convention))
    )


def geometric(p):
    return DistributionSpec(Family.GEOMETRIC, (("p", p),))


def poisson(lam):
    return DistributionSpec(Family.POISSON, (("lambda", lam),))


def hypergeometric(N, K, draws):
    return DistributionSpec(Family.HYPERGEOMETRIC, (("N", N), ("K", K), ("draws", draws)))


def _parse_value(text):
    text = text.strip()
    if text.lower() in NB_CONVENTIONS:
        return text.lower()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        frac = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"cannot parse parameter value {text!r}") from None
    return int(frac) if frac.denominator == 1 else float(frac)


_PARAM_ALIASES = {"lam": "lambda", "l": "lambda", "n_draws": "draws", "m": "draws"}


def parse_spec(text):
    """Parse ``family:k=v,...``, e.g. ``binomial:n=10,p=0.3`` or ``nb:r=4,p=1/6``."""
    name, _, body = text.partition(":")
    family = _ALIASES.get(name.strip().lower())
    if family is None:
        raise DomainError(f"unknown family {name!r}")
    params = []
    for item in filter(None, (s.strip() for s in body.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise DomainError(f"malformed parameter {item!r}; expected key=value")
        key = key.strip()
        if key not in ("N", "K"):
            key = _PARAM_ALIASES.get(key.lower(), key.lower())
        params.append((key, _parse_value(value)))
    return DistributionSpec(family, tuple(params))


# -- combinatorics ----------------------------------------------------------

_EXACT_CHOOSE_LIMIT = 20000


def log_choose(a, b):
    """Natural log of the binomial coefficient C(a, b).

    Scalars up to ``a = 20000`` go through exact integer arithmetic followed by
    a single correctly rounded logarithm; larger scalars and arrays use the
    log-gamma difference.
    """
    if np.ndim(a) == 0 and np.ndim(b) == 0:
        a, b = int(a), int(b)
        if a < 0 or b < 0 or b > a:
            raise DomainError(f"log_choose needs 0 <= b <= a, got a={a}, b={b}")
        if a <= _EXACT_CHOOSE_LIMIT:
            return math.log(math.comb(a, b))
        return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(b < 0) or np.any(b > a):
        raise DomainError("log_choose needs 0 <= b <= a elementwise")
    return special.gammaln(a + 1) - special.gammaln(b + 1) - special.gammaln(a - b + 1)


# -- probability mass -------------------------------------------------------


def support_bounds(spec):
    """(lowest, highest) value with nonzero mass; highest is None when unbounded."""
    f = spec.family
    if f is Family.BINOMIAL:
        n, p = spec["n"], spec["p"]
        if p == 0.0:
            return 0, 0
        if p == 1.0:
            return n, n
        return 0, n
    if f is Family.HYPERGEOMETRIC:
        N, K, m = spec["N"], spec["K"], spec["draws"]
        return max(0, m - (N - K)), min(K, m)
    return 0, None


def nominal_support_length(spec):
    """n + 1 for Binomial, min(K, draws) + 1 for Hypergeometric, None otherwise.

    Degenerate parameters (p = 0 or 1) keep the nominal length; the extra
    entries simply carry zero mass.
    """
    if spec.family is Family.BINOMIAL:
        return spec["n"] + 1
    if spec.family is Family.HYPERGEOMETRIC:
        return min(spec["K"], spec["draws"]) + 1
    return None


def pmf(spec, n):
    """Probability of the outcome ``n`` (scalar or integer array)."""
    scalar = np.ndim(n) == 0
    k = np.atleast_1d(np.asarray(n))
    if k.dtype.kind not in "iu":
        if not np.all(np.equal(np.mod(k, 1), 0)):
            raise DomainError("pmf is defined on integer outcomes")
        k = k.astype(np.int64)
    out = np.zeros(k.shape, dtype=float)
    lo, hi = support_bounds(spec)
    inside = (k >= lo) if hi is None else (k >= lo) & (k <= hi)
    if np.any(inside):
        out[inside] = np.exp(_log_pmf(spec, k[inside].astype(float)))
    return float(out[0]) if scalar else out


_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _stirling_error(x):
    """ln(x!) - [(x + 1/2) ln x - x + ln(2 pi)/2] for x >= 1, elementwise."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x <= 15.0
    if np.any(small):
        xs = x[small]
        out[small] = special.gammaln(xs + 1.0) - (xs + 0.5) * np.log(xs) + xs - _HALF_LOG_2PI
    big = ~small
    if np.any(big):
        inv = 1.0 / x[big]
        inv2 = inv * inv
        out[big] = inv * (
            1.0 / 12 - inv2 * (1.0 / 360 - inv2 * (1.0 / 1260 - inv2 * (1.0 / 1680 - inv2 / 1188)))
        )
    return out


def _deviance(x, mu):
    """x ln(x / mu) + mu - x, cancellation-free when x is close to mu."""
    x = np.asarray(x, dtype=float)
    mu = np.broadcast_to(np.asarray(mu, dtype=float), x.shape)
    out = np.empty_like(x)
    near = np.abs(x - mu) < 0.1 * (x + mu)
    far = ~near
    if np.any(far):
        xf, mf = x[far], mu[far]
        out[far] = xf * np.log(xf / mf) + mf - xf
    if np.any(near):
        xn, mn = x[near], mu[near]
        v = (xn - mn) / (xn + mn)
        s = (xn - mn) * v
        term = 2.0 * xn * v
        v2 = v * v
        for j in range(1, 200):
            term = term * v2
            s_new = s + term / (2 * j + 1)
            if np.all(s_new == s):
                break
            s = s_new
        out[near] = s
    return out


def _log_binomial_pmf(k, n, p):
    """log of C(n, k) p^k (1-p)^(n-k) for 0 < p < 1 and 0 <= k <= n (arrays allowed)."""
    k = np.asarray(k, dtype=float)
    n = np.broadcast_to(np.asarray(n, dtype=float), k.shape)
    out = np.empty_like(k)
    lo = k == 0
    hi = (k == n) & ~lo
    mid = ~(lo | hi)
    out[lo] = n[lo] * math.log1p(-p)
    out[hi] = n[hi] * math.log(p)
    if np.any(mid):
        km, nm = k[mid], n[mid]
        out[mid] = (
            _stirling_error(nm)
            - _stirling_error(km)
            - _stirling_error(nm - km)
            - _deviance(km, nm * p)
            - _deviance(nm - km, nm * (1.0 - p))
            + 0.5 * np.log(nm / (2.0 * math.pi * km * (nm - km)))
        )
    return out


def _log_pmf(spec, k):
    f = spec.family
    if f is Family.BINOMIAL:
        n, p = spec["n"], spec["p"]
        if p == 0.0 or p == 1.0:
            return np.zeros_like(k)
        return _log_binomial_pmf(k, n, p)
    if f is Family.POISSON:
        lam = spec["lambda"]
        out = np.full(k.shape, -lam)
        pos = k > 0
        kp = k[pos]
        out[pos] = -_stirling_error(kp) - _deviance(kp, lam) - 0.5 * np.log(2.0 * math.pi * kp)
        return out
    if f is Family.GEOMETRIC:
        p = spec["p"]
        return math.log1p(-p) + k * math.log(p)
    if f is Family.NEGATIVE_BINOMIAL:
        r, p = spec["r"], spec["p"]
        swapped = spec["convention"] == "swapped"
        if r == 1:
            # same expression as Geometric, so the two agree bit for bit
            if swapped:
                return math.log(p) + k * math.log1p(-p)
            return math.log1p(-p) + k * math.log(p)
        go = 1.0 - p if swapped else p
        # C(k+r-1, k) = r/(k+r) * C(k+r, k)
        return np.log(r / (k + r)) + _log_binomial_pmf(k, k + r, go)
    N, K, m = spec["N"], spec["K"], spec["draws"]
    if m == 0 or m == N:
        return np.zeros_like(k)
    q = m / N
    return (
        _log_binomial_pmf(k, K, q)
        + _log_binomial_pmf(m - k, N - K, q)
        - _log_binomial_pmf(np.array([float(m)]), N, q)[0]
    )


def pmf_vector(spec, length):
    """Masses of outcomes ``0 .. length-1`` as an array."""
    return pmf(spec, np.arange(length, dtype=np.int64))


def survival(spec, n):
    """P(N >= n), evaluated through regularised special functions."""
    n = int(n)
    if n <= 0:
        return 1.0
    f = spec.family
    lo, hi = support_bounds(spec)
    if hi is not None:
        if n > hi:
            return 0.0
        return math.fsum(pmf_vector(spec, hi + 1)[n:])
    if f is Family.POISSON:
        return float(special.gammainc(n, spec["lambda"]))
    if f is Family.GEOMETRIC:
        return spec["p"] ** n
    r, p = spec["r"], spec["p"]
    go = p if spec["convention"] == "pmf" else 1.0 - p
    return float(special.betainc(n, r, go))


def ratio_bound(spec, d):
    """Upper bound on P(n + 1) / P(n) valid for every n >= d (unbounded families)."""
    f = spec.family
    if f is Family.POISSON:
        return spec["lambda"] / (d + 1)
    if f is Family.GEOMETRIC:
        return spec["p"]
    if f is Family.NEGATIVE_BINOMIAL:
        r, p = spec["r"], spec["p"]
        go = p if spec["convention"] == "pmf" else 1.0 - p
        # (n + r) / (n + 1) is nonincreasing in n for r >= 1
        return go * (d + r) / (d + 1)
    raise DomainError(f"{f.value} has finite support")


def tail_majorant(spec, d):
    """Geometric-series upper bound on P(N >= d); ``inf`` if not yet contracting."""
    _, hi = support_bounds(spec)
    if hi is not None:
        return 0.0 if d > hi else float("inf")
    q = ratio_bound(spec, d)
    if q >= 1.0:
        return float("inf")
    return pmf(spec, d) / (1.0 - q)


def cutoff(spec, tail_tolerance, cap=DEFAULT_DIMENSION_CAP):
    """Smallest dimension ``D`` with certified tail mass ``P(N >= D) <= tail_tolerance``.

    Returns ``(D, majorant)``. Finite-support families return the exact support
    length with a zero tail.
    """
    if spec.finite_support:
        length = nominal_support_length(spec)
        if length > cap:
            raise ResourceError(f"support of length {length} exceeds cap {cap}", 1.0)
        return length, 0.0

    def ok(d):
        return tail_majorant(spec, d) <= tail_tolerance

    mean, var = closed_moments(spec)
    d = max(1, int(mean + 6.0 * math.sqrt(var)) + 1)
    while not ok(d):
        if d >= cap:
            raise ResourceError(
                f"tail tolerance {tail_tolerance:g} not reached below dimension cap {cap}",
                tail_majorant(spec, cap),
            )
        d = min(2 * d, cap)
    lo = 0
    hi = d
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi, tail_majorant(spec, hi)


# -- transforms -------------------------------------------------------------


def cf(spec, omega):
    """Characteristic function E[exp(i omega N)]; accepts scalar or array ``omega``."""
    scalar = np.ndim(omega) == 0
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    f = spec.family
    if f is Family.HYPERGEOMETRIC:
        lo, hi = support_bounds(spec)
        ks = np.arange(lo, hi + 1)
        probs = pmf(spec, ks)
        out = np.exp(1j * np.outer(w, ks)) @ probs
    else:
        out = _transform(spec, np.exp(1j * w))
    return complex(out[0]) if scalar else out


def pgf(spec, z):
    """Probability generating function E[z**N] inside the radius of convergence."""
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    radius = convergence_radius(spec)
    if np.any(np.abs(zz) >= radius) and math.isfinite(radius):
        raise DomainError(f"|z| must stay below the radius of convergence {radius:g}")
    f = spec.family
    if f is Family.HYPERGEOMETRIC:
        lo, hi = support_bounds(spec)
        ks = np.arange(lo, hi + 1)
        out = np.power.outer(zz, ks) @ pmf(spec, ks)
    else:
        out = _transform(spec, zz)
    return complex(out[0]) if scalar else out


def convergence_radius(spec):
    f = spec.family
    if f is Family.GEOMETRIC:
        return 1.0 / spec["p"]
    if f is Family.NEGATIVE_BINOMIAL:
        go = spec["p"] if spec["convention"] == "pmf" else 1.0 - spec["p"]
        return 1.0 / go
    return math.inf


def _transform(spec, z):
    f = spec.family
    if f is Family.BINOMIAL:
        p = spec["p"]
        return (1.0 - p + p * z) ** spec["n"]
    if f is Family.POISSON:
        return np.exp(spec["lambda"] * (z - 1.0))
    if f is Family.GEOMETRIC:
        p = spec["p"]
        return (1.0 - p) / (1.0 - p * z)
    r, p = spec["r"], spec["p"]
    if spec["convention"] == "swapped":
        stop, go = p, 1.0 - p
    else:
        stop, go = 1.0 - p, p
    return (stop / (1.0 - go * z)) ** r


def closed_moments(spec):
    """(mean, variance) from the closed forms."""
    f = spec.family
    if f is Family.BINOMIAL:
        n, p = spec["n"], spec["p"]
        return n * p, n * p * (1.0 - p)
    if f is Family.POISSON:
        lam = spec["lambda"]
        return lam, lam
    if f is Family.GEOMETRIC:
        p = spec["p"]
        return p / (1.0 - p), p / (1.0 - p) ** 2
    if f is Family.NEGATIVE_BINOMIAL:
        r, p = spec["r"], spec["p"]
        go = p if spec["convention"] == "pmf" else 1.0 - p
        return r * go / (1.0 - go), r * go / (1.0 - go) ** 2
    N, K, m = spec["N"], spec["K"], spec["draws"]
    mean = m * K / N if N else 0.0
    if N <= 1:
        return mean, 0.0
    return mean, m * (K / N) * ((N - K) / N) * ((N - m) / (N - 1))
