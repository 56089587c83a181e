"""Dense operators on a truncated oscillator (Fock) space.

Everything lives on the basis ``|0>, ..., |D-1>``. Energies are in units of
``energy_scale`` (hbar * omega, default 1) and time is measured so that the
propagator is ``exp(-i H t)``.

Truncation artifacts are real: ``[a, a^dagger]`` has ``-(D-1)`` in its last
diagonal entry and the truncated displacement operator is only unitary away
from the boundary. Checks in this module look at interior blocks for that
reason.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import linalg as sla

from .errors import AccuracyWarning, DomainError, NumericalError

MAX_DIMENSION = 512
MAX_COMPOSITE_DIMENSION = 4096


@dataclass(frozen=True)
class FockConfig:
    dimension: int
    energy_scale: float = 1.0

    def __post_init__(self):
        if int(self.dimension) != self.dimension or not 2 <= self.dimension <= MAX_DIMENSION:
            raise DomainError(f"dimension must be an integer in [2, {MAX_DIMENSION}]")
        if not self.energy_scale > 0:
            raise DomainError("energy_scale must be positive")


def _cfg(cfg):
    return cfg if isinstance(cfg, FockConfig) else FockConfig(int(cfg))


# -- ladder operators and the oscillator ------------------------------------


def annihilation(cfg):
    """a with a|n> = sqrt(n)|n-1>: sqrt(1..D-1) on the first superdiagonal."""
    d = _cfg(cfg).dimension
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), 1).astype(complex)


def creation(cfg):
    return annihilation(cfg).conj().T


def number_operator(cfg):
    d = _cfg(cfg).dimension
    return np.diag(np.arange(d, dtype=float)).astype(complex)


def qho_hamiltonian(cfg):
    """hbar omega (N + 1/2)."""
    cfg = _cfg(cfg)
    return cfg.energy_scale * np.diag(np.arange(cfg.dimension) + 0.5).astype(complex)


def basis_state(cfg, n):
    d = _cfg(cfg).dimension
    if not 0 <= n < d:
        raise DomainError(f"basis index {n} outside [0, {d})")
    v = np.zeros(d, dtype=complex)
    v[n] = 1.0
    return v


def check_hermitian(H, rtol=1e-12):
    """Return H as a complex square array; DomainError if it is not Hermitian."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DomainError("operator must be a square matrix")
    scale = float(np.abs(H).max()) if H.size else 0.0
    if np.abs(H - H.conj().T).max(initial=0.0) > rtol * max(scale, 1e-300):
        raise DomainError("operator is not Hermitian")
    return H


# -- coherent states and displacement ---------------------------------------


def _envelope(cfg, alpha):
    if abs(alpha) ** 2 > cfg.dimension / 4:
        warnings.warn(
            f"|alpha|^2 = {abs(alpha) ** 2:g} exceeds D/4 = {cfg.dimension / 4:g}; "
            "truncation error is not controlled",
            AccuracyWarning,
            stacklevel=3,
        )


def matrix_exponential(A, t=1.0):
    """exp(A t) by scaling and squaring with a Pade core."""
    A = np.asarray(A, dtype=complex)
    with np.errstate(over="raise", invalid="raise"):
        try:
            out = sla.expm(A * t)
        except FloatingPointError as exc:
            raise NumericalError(f"matrix exponential overflowed: {exc}") from None
    if not np.all(np.isfinite(out)):
        raise NumericalError("matrix exponential overflowed")
    return out


def displacement(cfg, alpha):
    """Truncated D(alpha) = exp(alpha a^dagger - conj(alpha) a)."""
    cfg = _cfg(cfg)
    _envelope(cfg, alpha)
    a = annihilation(cfg)
    return matrix_exponential(alpha * a.conj().T - np.conj(alpha) * a)


def coherent_state(cfg, alpha):
    """Series coherent state exp(-|alpha|^2/2) sum alpha^n / sqrt(n!) |n>, renormalized."""
    cfg = _cfg(cfg)
    _envelope(cfg, alpha)
    coeffs = np.empty(cfg.dimension, dtype=complex)
    coeffs[0] = math.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, cfg.dimension):
        coeffs[n] = coeffs[n - 1] * alpha / math.sqrt(n)
    return coeffs / np.linalg.norm(coeffs)


def poisson_perturbation(cfg, alpha):
    """hbar omega (-alpha a^dagger - conj(alpha) a + |alpha|^2).

    Added to the oscillator Hamiltonian it makes the coherent state |alpha> an
    exact eigenstate with eigenvalue hbar omega / 2.
    """
    cfg = _cfg(cfg)
    a = annihilation(cfg)
    dv = -alpha * a.conj().T - np.conj(alpha) * a + abs(alpha) ** 2 * np.eye(cfg.dimension)
    return cfg.energy_scale * dv


def poisson_eigen_residual(cfg, alpha):
    """|| (H_QHO + dV_Pois - hbar omega / 2) |alpha> || for the series coherent state."""
    cfg = _cfg(cfg)
    H = qho_hamiltonian(cfg) + poisson_perturbation(cfg, alpha)
    psi = coherent_state(cfg, alpha)
    return float(np.linalg.norm(H @ psi - 0.5 * cfg.energy_scale * psi))


def synthesize_perturbation(target, cfg):
    """Perturbation making ``target`` the unique ground state of H_QHO + dV.

    dV = hbar omega (I - |psi><psi|) - H_QHO, so the perturbed Hamiltonian has
    ground energy 0 and every other level at hbar omega.
    """
    cfg = _cfg(cfg)
    amps = np.asarray(target.amplitudes, dtype=float)
    lost = float(target.tail_mass) + math.fsum(amps[cfg.dimension :] ** 2)
    if lost > 1e-10:
        raise DomainError(f"target has mass {lost:.3e} outside the first {cfg.dimension} levels")
    psi = np.zeros(cfg.dimension)
    k = min(amps.size, cfg.dimension)
    psi[:k] = amps[:k]
    psi /= np.linalg.norm(psi)
    projector = np.outer(psi, psi)
    return cfg.energy_scale * (np.eye(cfg.dimension) - projector) - qho_hamiltonian(cfg)


# -- Hermitian eigensolver --------------------------------------------------


@lru_cache(maxsize=64)
def _round_robin(n):
    """Disjoint (p, q) pair sets covering every p < q once (circle method)."""
    m = n + (n % 2)
    idx = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(idx[i], idx[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n]
        if pairs:
            rounds.append((np.array([p for p, _ in pairs]), np.array([q for _, q in pairs])))
        idx = [idx[0], idx[-1]] + idx[1:-1]
    return tuple(rounds)


def hermitian_eigen(H, tol=1e-12, max_sweeps=100):
    """Eigenvalues (ascending) and orthonormal eigenvector columns of a Hermitian matrix.

    Cyclic Jacobi with complex rotations; each round rotates a set of
    disjoint index pairs at once. Stops when the off-diagonal Frobenius norm
    drops below ``tol * ||H||_F``.
    """
    A = check_hermitian(H).copy()
    A = 0.5 * (A + A.conj().T)
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    scale = np.linalg.norm(A)
    if n == 1 or scale == 0.0:
        return np.real(np.diag(A)).copy(), V
    rounds = _round_robin(n)
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= tol * scale:
            break
        for ps, qs in rounds:
            apq = A[ps, qs]
            mag = np.abs(apq)
            keep = mag > 0.0
            if not np.any(keep):
                continue
            p, q, apq, mag = ps[keep], qs[keep], apq[keep], mag[keep]
            a_pp = A[p, p].real
            a_qq = A[q, q].real
            theta = (a_qq - a_pp) / (2.0 * mag)
            sign = np.where(theta >= 0.0, 1.0, -1.0)
            big = np.abs(theta) > 1e150
            t = np.where(
                big,
                0.5 / np.where(big, theta, 1.0),
                sign / (np.abs(theta) + np.sqrt(np.where(big, 0.0, theta) ** 2 + 1.0)),
            )
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            phase = np.conj(apq / mag)
            g00, g01, g10, g11 = c, s, -s * phase, c * phase
            # columns: A <- A G, V <- V G
            for M in (A, V):
                cp, cq = M[:, p].copy(), M[:, q]
                M[:, p] = cp * g00 + cq * g10
                M[:, q] = cp * g01 + cq * g11
            # rows: A <- G^dagger A
            rp, rq = A[p, :].copy(), A[q, :]
            A[p, :] = np.conj(g00)[:, None] * rp + np.conj(g10)[:, None] * rq
            A[q, :] = np.conj(g01)[:, None] * rp + np.conj(g11)[:, None] * rq
            A[p, q] = 0.0
            A[q, p] = 0.0
    else:
        raise NumericalError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    w = np.real(np.diag(A))
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


# -- dynamics ---------------------------------------------------------------


def _check_state(psi, tol=1e-10):
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise DomainError("state must be a vector")
    if abs(np.linalg.norm(psi) - 1.0) > tol:
        raise DomainError("state is not normalized")
    return psi


def propagator(H, t):
    """exp(-i H t) through the spectral decomposition of H."""
    w, V = hermitian_eigen(H)
    return (V * np.exp(-1j * w * t)) @ V.conj().T


def evolve(H, psi0, t):
    """|psi(t)> = sum_k exp(-i E_k t) <phi_k|psi0> |phi_k>."""
    psi0 = _check_state(psi0)
    w, V = hermitian_eigen(H)
    if V.shape[0] != psi0.size:
        raise DomainError("operator and state dimensions differ")
    return V @ (np.exp(-1j * w * t) * (V.conj().T @ psi0))


# -- bipartite states -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CompositeState:
    """Pure state sum c_nm |n> (x) |m> on H_A (x) H_B."""

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=complex)
        if c.ndim != 2:
            raise DomainError("coefficients must form a D_A x D_B matrix")
        if c.size > MAX_COMPOSITE_DIMENSION:
            raise DomainError(f"composite dimension exceeds {MAX_COMPOSITE_DIMENSION}")
        norm2 = math.fsum(np.abs(c).ravel() ** 2)
        if abs(norm2 - 1.0) > 1e-10:
            raise DomainError(f"coefficients are not normalized (sum |c|^2 = {norm2!r})")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def joint_probabilities(self):
        return np.abs(self.coefficients) ** 2

    @property
    def marginal_a(self):
        return self.joint_probabilities.sum(axis=1)

    @property
    def marginal_b(self):
        return self.joint_probabilities.sum(axis=0)

    def reduced_density(self, subsystem="A"):
        """Partial trace over the other factor."""
        c = self.coefficients
        if subsystem == "A":
            return c @ c.conj().T
        if subsystem == "B":
            return c.T @ c.conj()
        raise DomainError("subsystem must be 'A' or 'B'")


def joint_state(c):
    return CompositeState(c)


def product_state(psi_a, psi_b):
    return CompositeState(np.outer(psi_a, psi_b))


def von_neumann_entropy(rho):
    """-Tr(rho ln rho) in nats, with 0 ln 0 = 0."""
    w, _ = hermitian_eigen(rho)
    w = w[w > 0.0]
    return float(-math.fsum(w * np.log(w)))


def entanglement_entropy(state, subsystem="A"):
    """Entropy of the reduced density operator of one factor, in nats."""
    if not isinstance(state, CompositeState):
        state = CompositeState(state)
    return von_neumann_entropy(state.reduced_density(subsystem))


# -- open-system dynamics ---------------------------------------------------


def check_density(rho, tol=1e-10, positivity_tol=1e-8):
    """Validate a density operator: Hermitian, unit trace, no significant negative eigenvalue."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DomainError("density operator must be square")
    if np.abs(rho - rho.conj().T).max() > tol:
        raise DomainError("density operator is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise DomainError("density operator does not have unit trace")
    if np.linalg.eigvalsh(rho).min() < -positivity_tol:
        raise DomainError("density operator is not positive semidefinite")
    return rho


def lindblad_rhs(H0, V, rho):
    """-i[H0, rho] + V rho V^dagger - (V^dagger V rho + rho V^dagger V) / 2."""
    vd = V.conj().T
    vdv = vd @ V
    return -1j * (H0 @ rho - rho @ H0) + V @ rho @ vd - 0.5 * (vdv @ rho + rho @ vdv)


def lindblad_step(H0, V, rho, dt, steps=1):
    """Advance rho by ``steps`` fixed RK4 steps of size ``dt``.

    Requires ``dt <= 1e-2 / ||H0||``. Raises NumericalError if the result
    has an eigenvalue below -1e-6.
    """
    H0 = check_hermitian(H0)
    V = np.asarray(V, dtype=complex)
    rho = check_density(rho)
    if V.shape != H0.shape or rho.shape != H0.shape:
        raise DomainError("H0, V and rho must share one dimension")
    steps = int(steps)
    if steps < 0 or not math.isfinite(dt * steps):
        raise DomainError("dt * steps must be finite and steps nonnegative")
    hnorm = np.linalg.norm(H0, 2)
    if hnorm > 0 and abs(dt) > 1e-2 / hnorm * (1 + 1e-12):
        raise DomainError(f"dt = {dt:g} exceeds 1e-2 / ||H0|| = {1e-2 / hnorm:g}")
    for _ in range(steps):
        k1 = lindblad_rhs(H0, V, rho)
        k2 = lindblad_rhs(H0, V, rho + 0.5 * dt * k1)
        k3 = lindblad_rhs(H0, V, rho + 0.5 * dt * k2)
        k4 = lindblad_rhs(H0, V, rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    lowest = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
    if lowest < -1e-6:
        raise NumericalError(f"positivity lost (min eigenvalue {lowest:.2e}); use a smaller dt")
    return rho


def purity(rho):
    return float(np.real(np.trace(rho @ rho)))


# -- serialization ----------------------------------------------------------


def matrix_to_json(M):
    """Row-major nested lists of [re, im] pairs."""
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def matrix_from_json(rows):
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)
