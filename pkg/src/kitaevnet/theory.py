"""Closed-form factorization point and the odd-parity factorized state.

The cyclic XY chain in field ``h`` has a fully product ground state at
``h = 2 sqrt(J^2 - gamma^2)``. Projected onto odd parity this state reads
``sum_{k odd} f_{N,k}(theta) (S^-)^k |up...up>`` and, mapped through the
Jordan-Wigner transformation, is the Kitaev ground state at
``mu* = 2 sqrt(w^2 - Delta^2)`` with ``w = J``, ``Delta = gamma``.

Orientation: spin up is an occupied site (``sigma_z = 2 n - 1``). With this
choice the XY chain maps onto the Kitaev chain with ``mu = +h`` and the
all-up reference ket is the completely filled chain.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .rdm import all_pair_rdms
from .solver import QuantumState, parity_expectation

logger = logging.getLogger(__name__)

NORM_TOL = 1e-10


@dataclass(frozen=True)
class FactorizationPoint:
    """Factorization data for hopping ``w`` (= J) and pairing ``Delta`` (= gamma)."""

    mu_star: float
    theta: float
    phi: float
    hopping: float
    pairing: float


def factorization_potential(w, delta) -> float:
    """``mu* = 2 sqrt(w^2 - Delta^2)``.

    Raises
    ------
    DomainError
        If ``|Delta| > |w|``.
    """
    if abs(delta) > abs(w):
        raise DomainError(f"|Delta|={abs(delta)} exceeds |w|={abs(w)}; mu* is not real")
    return 2.0 * math.sqrt(w * w - delta * delta)


def factorization_angle(coupling, gamma) -> float:
    """``theta = arctan(sqrt(tan phi))`` with ``phi = arcsin(gamma / J) / 2``."""
    if coupling <= 0:
        raise DomainError(f"coupling J must be positive, got {coupling}")
    if gamma < 0:
        raise DomainError("negative anisotropy: use |gamma| (the two are related by a "
                          "pi/2 spin rotation about z)")
    if gamma > coupling:
        raise DomainError(f"gamma={gamma} exceeds J={coupling}")
    phi = 0.5 * math.asin(gamma / coupling)
    return math.atan(math.sqrt(math.tan(phi)))


def factorization_point(w, delta) -> FactorizationPoint:
    mu_star = factorization_potential(w, delta)
    j, g = abs(w), abs(delta)
    phi = 0.5 * math.asin(g / j) if j > 0 else math.nan
    return FactorizationPoint(mu_star, factorization_angle(j, g), phi, w, delta)


@dataclass(frozen=True)
class FactorizedState:
    """Spin-basis amplitudes (bit j set = site j up) with the weights used."""

    amplitudes: np.ndarray
    weights: dict
    theta: float
    n_sites: int
    norm_before: float
    parity: int = -1


def _lower_all(vec, n):
    """Apply the collective lowering operator ``S^- = sum_j s^-_j``."""
    out = np.zeros_like(vec)
    labels = np.arange(vec.shape[0])
    for j in range(n):
        up = (labels >> j) & 1 == 1
        out[labels[up] ^ (1 << j)] += vec[up]
    return out


def factorized_weight(n, k, theta) -> float:
    """``f_{N,k} = sqrt(2) sin^k(theta) cos^(N-k)(theta) / (k! sqrt(1 - cos^N(2 theta)))``."""
    denom = math.factorial(k) * math.sqrt(1.0 - math.cos(2 * theta) ** n)
    return math.sqrt(2.0) * math.sin(theta) ** k * math.cos(theta) ** (n - k) / denom


def build_factorized_odd_state(n_sites, theta) -> FactorizedState:
    """Odd-k projection of the factorized state, built literally from ``(S^-)^k``.

    Every configuration with ``k`` lowered spins appears ``k!`` times in
    ``(S^-)^k``, which the ``1/k!`` in ``f_{N,k}`` cancels, so the literal sum
    is normalized. The norm is checked anyway; a deviation above ``1e-10``
    is logged and divided out.
    """
    if n_sites < 2:
        raise ValueError(f"n_sites must be >= 2, got {n_sites}")
    if not 0.0 < theta <= math.pi / 4 + 1e-15:
        if theta == 0.0:
            raise DomainError("theta = 0 leaves the odd component with zero weight")
        raise DomainError(f"theta must lie in (0, pi/4], got {theta}")
    dim = 1 << n_sites
    term = np.zeros(dim)
    term[dim - 1] = 1.0
    amps = np.zeros(dim)
    weights = {}
    for k in range(1, n_sites + 1):
        term = _lower_all(term, n_sites)
        if k % 2:
            weights[k] = factorized_weight(n_sites, k, theta)
            amps += weights[k] * term
    norm = float(np.linalg.norm(amps))
    if abs(norm - 1.0) > NORM_TOL:
        logger.warning("factorized state norm %.3g differs from 1; renormalizing", norm)
        amps = amps / norm
    return FactorizedState(amps, weights, theta, n_sites, norm)


def jw_image(state: FactorizedState) -> QuantumState:
    """Fermionic state with the same amplitude on every basis label.

    The Jordan-Wigner strings act on operators, not on basis labels, so the
    map is a relabeling: spin up on site j becomes an occupied site j.
    """
    amps = np.array(state.amplitudes, dtype=np.float64)
    return QuantumState(amps, None, parity_expectation(amps))


def permutation_invariance_deviation(state) -> float:
    """``max_{i<j} max |rho_ij - rho_01|`` over all pair density matrices."""
    _, rhos = all_pair_rdms(state)
    return float(np.max(np.abs(rhos - rhos[0])))


def pair_inhomogeneity(state) -> float:
    """``sum_{i<j} ||rho_ij - mean rho||_F^2``, a smooth function of the state.

    Zero exactly when every pair matrix is the same. Unlike the max-norm
    deviation it is differentiable in the parameters, so it can be
    minimized by bracketing searches.
    """
    _, rhos = all_pair_rdms(state)
    return float(np.sum(np.abs(rhos - rhos.mean(axis=0)) ** 2))
