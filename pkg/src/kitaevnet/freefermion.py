"""Single-particle (Bogoliubov-de Gennes) description of the Kitaev chain.

With the Nambu vector ``Psi = (a_1..a_N, a_1^+..a_N^+)`` the Hamiltonian is
``H = 1/2 Psi^+ M Psi`` where ``M = [[h, D], [D^+, -h^T]]``. The constant
``mu N / 2`` in the chemical-potential term cancels the ``-tr(h)/2`` produced
by anticommuting the hole block, so the ground energy of the quadratic form is
exactly ``-1/2 * sum`` of the positive eigenvalues of ``M``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ChainSpec, _bonds
from .solver import quasiparticle_spectrum


@dataclass(frozen=True)
class BdGMatrix:
    """Real symmetric ``2N x 2N`` BdG matrix, particle block first."""

    matrix: np.ndarray
    n_sites: int
    particle_hole: bool = True

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.matrix)


def bdg_matrix(spec: ChainSpec) -> BdGMatrix:
    n = spec.n_sites
    w, mu, delta = spec.hopping, spec.chemical_potential, spec.pairing
    h = np.diag(np.full(n, -mu))
    d = np.zeros((n, n))
    for p, q in _bonds(n, spec.periodic):
        h[p, q] -= w
        h[q, p] -= w
        # Delta a_q^+ a_p^+ = 1/2 (D_qp a_q^+ a_p^+ + D_pq a_p^+ a_q^+)
        d[q, p] += delta
        d[p, q] -= delta
    m = np.block([[h, d], [d.T, -h.T]])
    return BdGMatrix(m, n)


def bdg_spectrum(spec: ChainSpec) -> np.ndarray:
    """The N nonnegative quasiparticle energies, ascending."""
    ev = np.linalg.eigvalsh(bdg_matrix(spec).matrix)
    # eigenvalues come in +-lambda pairs; the upper half holds one of each
    return np.sort(np.abs(ev[spec.n_sites:]))


def bdg_ground_energy(spec: ChainSpec) -> float:
    """``-1/2 * sum`` of the positive BdG eigenvalues (no parity constraint)."""
    return -0.5 * float(np.sum(bdg_spectrum(spec)))


def min_bdg_gap(spec: ChainSpec) -> float:
    """Smallest quasiparticle energy; zero at a single-particle zero mode.

    Periodic chains use the closed-form ``Lambda_k``, which the BdG spectrum
    reproduces to rounding but which is exactly zero at ``mu = +-2w``.
    """
    if spec.periodic:
        return float(np.min(quasiparticle_spectrum(spec).lambdas))
    return float(bdg_spectrum(spec)[0])


@dataclass(frozen=True)
class ZeroModeTable:
    """Closed-form zero-mode potentials.

    ``mu`` lists ``mu_n`` ascending with ``modes`` holding the matching
    ``n``. ``in_domain`` is False (and both are empty) when ``|Delta| > |w|``.
    """

    mu: np.ndarray
    modes: np.ndarray
    in_domain: bool

    @property
    def positive(self):
        return self.mu[self.mu > 0]


def majorana_zero_mode_potentials(n_sites, w=1.0, delta=0.0) -> ZeroModeTable:
    """``mu_n = 2 sqrt(w^2 - Delta^2) cos(pi n / (N + 1))`` for ``n = 1..N``."""
    if n_sites < 1:
        raise ValueError(f"n_sites must be positive, got {n_sites}")
    if abs(delta) > abs(w):
        return ZeroModeTable(np.empty(0), np.empty(0, dtype=int), False)
    n = np.arange(1, n_sites + 1)
    mu = 2.0 * math.sqrt(w * w - delta * delta) * np.cos(np.pi * n / (n_sites + 1))
    # n = (N+1)/2 gives cos(pi/2), which rounds to 6e-17 rather than 0
    mu[2 * n == n_sites + 1] = 0.0
    order = np.argsort(mu, kind="stable")
    return ZeroModeTable(mu[order], n[order], True)
