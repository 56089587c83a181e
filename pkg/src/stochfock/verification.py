"""Pinned verification suites run by ``stochfock verify``.

Each suite returns a list of :class:`Check` records; parameters and
tolerances are fixed here so reruns are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import distributions as dist
from . import fock, hilbert, modproj


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    value: float
    tolerance: float
    passed: bool

    def row(self):
        return [self.suite, self.name, self.value, self.tolerance, "pass" if self.passed else "fail"]


def _le(suite, name, value, tol):
    return Check(suite, name, float(value), float(tol), bool(value <= tol))


def theorem1():
    checks = []
    alpha = 2.0
    residuals = [fock.poisson_eigen_residual(d, alpha) for d in (32, 64, 128, 256)]
    checks.append(_le("theorem1", "residual D=128 |alpha|^2=4", residuals[2], 1e-8))
    worst_increase = max(b - a for a, b in zip(residuals, residuals[1:]))
    checks.append(_le("theorem1", "residual nonincreasing over D=32..256", worst_increase, 0.0))
    cfg = fock.FockConfig(128)
    H = fock.qho_hamiltonian(cfg) + fock.poisson_perturbation(cfg, alpha)
    psi = fock.coherent_state(cfg, alpha)
    rq = float(np.real(np.vdot(psi, H @ psi)))
    checks.append(_le("theorem1", "Rayleigh quotient - 1/2", abs(rq - 0.5), 1e-8))
    return checks


def limits():
    checks = []
    ns = (10, 100, 1000, 10000)
    for lam in (1.0, 4.0):
        ref = hilbert.build_state(dist.poisson(lam), 1e-14)
        gaps = [hilbert.l2_distance(hilbert.build_state(dist.binomial(n, lam / n)), ref) for n in ns]
        step = max(b - a for a, b in zip(gaps, gaps[1:]))
        checks.append(
            Check("limits", f"l2 gap strictly decreasing, lambda={lam:g}", step, 0.0, step < 0.0)
        )
        checks.append(_le("limits", f"l2 gap at n=1e4, lambda={lam:g}", gaps[-1], 1e-3))
    for p in (0.1, 1 / 6, 0.5, 0.9, 0.999):
        ok = hilbert.nb_hierarchy_check(p)
        checks.append(Check("limits", f"NB(1,p) == Geometric(p), p={p:.4g}", float(not ok), 0.0, ok))
    return checks


def conservation_grid():
    """Every (spec, M) pair: 85 cases covering all five families."""
    specs = [
        dist.poisson(0.3), dist.poisson(1), dist.poisson(4), dist.poisson(8), dist.poisson(25.5),
        dist.binomial(1, 0.5), dist.binomial(12, 1 / 6), dist.binomial(40, 0.3), dist.binomial(200, 0.9),
        dist.negative_binomial(1, 0.3), dist.negative_binomial(3, 0.4), dist.negative_binomial(4, 1 / 6, "swapped"),
        dist.negative_binomial(10, 0.8),
        dist.geometric(1 / 6), dist.geometric(0.9),
        dist.hypergeometric(10, 4, 5), dist.hypergeometric(50, 20, 25),
    ]
    moduli = (2, 3, 4, 7, 16)
    return [(s, m) for s in specs for m in moduli]


def conservation():
    checks = []
    worst_sum = worst_route = worst_bound = 0.0
    cases = conservation_grid()
    for spec, M in cases:
        direct = modproj.project_direct(spec, M)
        via_cf = modproj.project_cf(spec, M)
        worst_sum = max(worst_sum, abs(direct.total - 1.0), abs(via_cf.total - 1.0))
        worst_route = max(worst_route, float(np.abs(direct.probs - via_cf.probs).max()))
        worst_bound = max(worst_bound, direct.max_abs_deviation - direct.cf_bound)
    checks.append(_le("conservation", f"max |sum probs - 1| over {len(cases)} cases", worst_sum, 1e-12))
    checks.append(_le("conservation", "direct vs DFT route, max cell gap", worst_route, 1e-10))
    checks.append(_le("conservation", "deviation minus CF bound", worst_bound, 1e-10))
    return checks


def dynamics():
    checks = []
    rng = np.random.default_rng(20240601)
    worst_norm = worst_comp = 0.0
    for _ in range(20):
        d = int(rng.integers(2, 33))
        X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        H = 0.5 * (X + X.conj().T)
        psi = rng.normal(size=d) + 1j * rng.normal(size=d)
        psi /= np.linalg.norm(psi)
        for t in (0.1, 1.0, 10.0):
            worst_norm = max(worst_norm, abs(np.linalg.norm(fock.evolve(H, psi, t)) - 1.0))
        both = fock.evolve(H, psi, 1.7)
        split = fock.evolve(H, fock.evolve(H, psi, 0.6), 1.1)
        worst_comp = max(worst_comp, float(np.abs(both - split).max()))
    checks.append(_le("dynamics", "norm drift, 20 random systems", worst_norm, 1e-9))
    checks.append(_le("dynamics", "composition evolve(t1+t2)", worst_comp, 1e-9))

    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    rabi = fock.evolve(sx, [1, 0], math.pi / 2)
    checks.append(_le("dynamics", "two-level |<1|psi(pi/2)>| - 1", abs(abs(rabi[1]) - 1.0), 1e-9))

    bell = fock.joint_state(np.diag([1, 1]) / math.sqrt(2))
    checks.append(
        _le("dynamics", "Bell pair entropy - ln 2", abs(fock.entanglement_entropy(bell) - math.log(2)), 1e-10)
    )
    prod = fock.product_state(fock.coherent_state(8, 0.7), fock.basis_state(3, 1))
    checks.append(_le("dynamics", "product state entropy", abs(fock.entanglement_entropy(prod)), 1e-12))

    a = fock.annihilation(2)
    rho = np.array([[0, 0], [0, 1]], dtype=complex)
    out = fock.lindblad_step(np.zeros((2, 2)), a, rho, 1e-3, 1000)
    checks.append(
        _le("dynamics", "amplitude damping |p1(1) - e^-1|", abs(out[1, 1].real - math.exp(-1)), 1e-4)
    )
    checks.append(_le("dynamics", "Lindblad trace drift", abs(np.trace(out).real - 1.0), 1e-8))
    return checks


SUITES = {
    "theorem1": theorem1,
    "limits": limits,
    "conservation": conservation,
    "dynamics": dynamics,
}


def run(suite="all"):
    names = list(SUITES) if suite == "all" else [suite]
    checks = []
    for name in names:
        checks.extend(SUITES[name]())
    return checks
