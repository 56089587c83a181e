"""Sampling pipeline: draw counts, reduce mod M, certify the digit stream.

Randomness comes from a seeded PCG64 generator (128-bit state). This module
demonstrates the distribution-to-uniform mechanism; it does not harvest
physical entropy, and a passing report is a statistical statement about a
deterministic stream.

Stream file formats
-------------------
``raw``: one digit per byte (requires M <= 256).
``packed``: M must be a power of two; each digit contributes log2(M) bits,
least significant bit first, and bits are packed into bytes little-endian
(the first bit lands in bit 0 of byte 0). The final byte is zero-padded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from . import distributions as dist
from .errors import DomainError
from .modproj import project_direct

CDF_TAIL = 1e-15
ANALYTIC_THRESHOLD = 1e-3


def make_rng(seed, stream=0):
    """Independent generator for ``(seed, stream)``; streams share no state."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


@lru_cache(maxsize=128)
def _cdf(spec):
    d, _ = dist.cutoff(spec, CDF_TAIL)
    cdf = np.cumsum(dist.pmf_vector(spec, d))
    cdf.setflags(write=False)
    return cdf


def sample_many(spec, rng, size):
    """``size`` variates by inversion of the cached CDF.

    Uniforms beyond the last CDF entry (mass < 1e-15) map to the cutoff.
    """
    cdf = _cdf(spec)
    u = rng.random(size)
    k = np.searchsorted(cdf, u, side="right")
    return np.minimum(k, cdf.size - 1)


def sample(spec, rng):
    return int(sample_many(spec, rng, 1)[0])


def generate(spec, M, count, seed, stream=0):
    """Digit stream ``sample mod M`` of length ``count``."""
    if int(M) != M or M < 1:
        raise DomainError("modulus must be a positive integer")
    if count < 1:
        raise DomainError("count must be at least 1")
    draws = sample_many(spec, make_rng(seed, stream), int(count))
    return (draws % int(M)).astype(np.int64)


def residue_counts(stream, M):
    return np.bincount(np.asarray(stream), minlength=M)[:M]


def chi_square_uniform(stream, M):
    """Pearson statistic against count/M per residue and its upper-tail p-value."""
    stream = np.asarray(stream)
    if stream.size < 10 * M:
        raise DomainError(f"need at least {10 * M} digits for M = {M}, got {stream.size}")
    counts = residue_counts(stream, M)
    return chi_square_from_counts(counts)


def chi_square_from_counts(counts):
    counts = np.asarray(counts, dtype=float)
    M = counts.size
    expected = counts.sum() / M
    stat = math.fsum((counts - expected) ** 2) / float(expected)
    return stat, chi_square_sf(stat, M - 1)


def chi_square_sf(statistic, df):
    """P(X >= statistic) for X ~ chi-square(df), via the regularized upper gamma."""
    if statistic <= 0:
        return 1.0
    return float(special.gammaincc(0.5 * df, 0.5 * statistic))


def entropy_bits(counts):
    freq = np.asarray(counts, dtype=float)
    freq = freq[freq > 0] / freq.sum()
    return -math.fsum(freq * np.log2(freq))


@dataclass(frozen=True)
class TurngReport:
    spec: dist.DistributionSpec
    modulus: int
    sample_count: int
    seed: int
    observed_counts: tuple
    chi_square: float
    p_value: float
    empirical_entropy_bits: float
    analytic_max_deviation: float
    alpha_level: float
    verdict: str

    @property
    def passed(self):
        return self.verdict == "pass"

    @property
    def frequencies(self):
        return np.asarray(self.observed_counts, dtype=float) / self.sample_count

    def as_dict(self):
        return {
            "spec": str(self.spec),
            "modulus": self.modulus,
            "sample_count": self.sample_count,
            "seed": self.seed,
            "observed_counts": list(self.observed_counts),
            "chi_square": self.chi_square,
            "p_value": self.p_value,
            "empirical_entropy_bits": self.empirical_entropy_bits,
            "analytic_max_deviation": self.analytic_max_deviation,
            "alpha_level": self.alpha_level,
            "verdict": self.verdict,
        }


def certify(spec, M, count, seed, alpha_level=0.001, stream=0):
    """Two-legged uniformity certificate.

    Pass requires the chi-square p-value to lie in ``[alpha, 1 - alpha]``
    (rejecting both misfit and a too-perfect fit) and the analytic folded law
    to deviate from uniform by at most 1e-3.
    """
    if not 0.0 < alpha_level < 0.5:
        raise DomainError("alpha_level must lie in (0, 0.5)")
    M = int(M)
    digits = generate(spec, M, count, seed, stream)
    if digits.size < 10 * M:
        raise DomainError(f"need at least {10 * M} digits for M = {M}, got {digits.size}")
    counts = residue_counts(digits, M)
    stat, pval = chi_square_from_counts(counts)
    analytic = project_direct(spec, M).max_abs_deviation
    ok = alpha_level <= pval <= 1.0 - alpha_level and analytic <= ANALYTIC_THRESHOLD
    return TurngReport(
        spec=spec,
        modulus=M,
        sample_count=int(count),
        seed=int(seed),
        observed_counts=tuple(int(c) for c in counts),
        chi_square=stat,
        p_value=pval,
        empirical_entropy_bits=entropy_bits(counts),
        analytic_max_deviation=analytic,
        alpha_level=alpha_level,
        verdict="pass" if ok else "fail",
    )


def encode_stream(digits, M, packed=False):
    """Bytes for a digit stream in the ``raw`` or ``packed`` layout."""
    digits = np.asarray(digits, dtype=np.int64)
    if packed:
        width = int(M).bit_length() - 1
        if M < 2 or 1 << width != M:
            raise DomainError("packed output needs M to be a power of two")
        bits = (digits[:, None] >> np.arange(width)) & 1
        return np.packbits(bits.astype(np.uint8).ravel(), bitorder="little").tobytes()
    if M > 256:
        raise DomainError("raw output stores one digit per byte, so M must be <= 256")
    return digits.astype(np.uint8).tobytes()


def decode_stream(data, M, packed=False, count=None):
    raw = np.frombuffer(data, dtype=np.uint8)
    if not packed:
        return raw.astype(np.int64)[:count]
    width = int(M).bit_length() - 1
    bits = np.unpackbits(raw, bitorder="little")
    n = bits.size // width if count is None else count
    bits = bits[: n * width].reshape(n, width).astype(np.int64)
    return (bits << np.arange(width)).sum(axis=1)


def write_stream(path, digits, M, packed=False):
    with open(path, "wb") as fh:
        fh.write(encode_stream(digits, M, packed))
