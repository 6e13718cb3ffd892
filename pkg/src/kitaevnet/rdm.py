"""One- and two-site reduced density matrices in the occupation basis.

The default ``spin`` convention is the qubit-style partial trace of the
amplitude vector (identical to the spin-chain RDM under the label-preserving
Jordan-Wigner map). The ``fermionic`` convention first reorders modes i, j
to the front, which inserts the string sign between them into the
coherences.

Pair matrices use the ordered basis ``|n_i n_j>`` with index ``2 n_i + n_j``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import parity_of_labels

SPIN, FERMIONIC = "spin", "fermionic"
DEFINITE_PARITY_TOL = 1e-8


@dataclass(frozen=True)
class PairDensityMatrix:
    entries: np.ndarray
    site_pair: tuple


@dataclass(frozen=True)
class SiteDensityMatrix:
    entries: np.ndarray
    site: int


@dataclass(frozen=True)
class PairCorrelators:
    """Independent entries of a definite-parity pair matrix.

    ``offdiag_hop`` is entry ``<01|rho|10>`` and ``offdiag_pair`` entry
    ``<00|rho|11>``.
    """

    n_i: float
    n_j: float
    n_ij: float
    offdiag_hop: complex
    offdiag_pair: complex

    def assemble(self):
        """Rebuild the 4x4 X-state."""
        rho = np.zeros((4, 4), dtype=np.complex128)
        rho[0, 0] = 1.0 - self.n_i - self.n_j + self.n_ij
        rho[1, 1] = self.n_j - self.n_ij
        rho[2, 2] = self.n_i - self.n_ij
        rho[3, 3] = self.n_ij
        rho[1, 2] = self.offdiag_hop
        rho[2, 1] = np.conj(self.offdiag_hop)
        rho[0, 3] = self.offdiag_pair
        rho[3, 0] = np.conj(self.offdiag_pair)
        return rho


def _amplitudes(state):
    amps = getattr(state, "amplitudes", state)
    amps = np.asarray(amps)
    n = amps.shape[0].bit_length() - 1
    if amps.ndim != 1 or (1 << n) != amps.shape[0]:
        raise ValueError("amplitude vector length must be a power of two")
    return amps, n


def _check_sites(n, *sites):
    for s in sites:
        if not 0 <= s < n:
            raise IndexError(f"site {s} out of range for N={n}")
    if len(sites) == 2 and sites[0] == sites[1]:
        raise ValueError("pair sites must differ")


def _fermionic_signs(n, i, j):
    """Sign moving a_i^+ then a_j^+ to the front of the ordered product."""
    labels = np.arange(1 << n, dtype=np.int64)
    lo, hi = min(i, j), max(i, j)
    bit_lo = (labels >> lo) & 1
    bit_hi = (labels >> hi) & 1
    below_lo = np.bitwise_count((labels & ((1 << lo) - 1)).astype(np.uint64)).astype(np.int64)
    below_hi = np.bitwise_count((labels & ((1 << hi) - 1)).astype(np.uint64)).astype(np.int64)
    odd = (bit_lo * below_lo + bit_hi * (below_hi - bit_lo)) & 1
    if i > j:
        # front order a_i^+ a_j^+ = -a_j^+ a_i^+
        odd ^= bit_lo & bit_hi
    return 1 - 2 * odd


def _reduce(amps, n, sites):
    t = amps.reshape((2,) * n)
    axes = [n - 1 - s for s in sites]
    m = np.moveaxis(t, axes, list(range(len(sites)))).reshape(1 << len(sites), -1)
    return m @ m.conj().T


def reduce_to_pair(state, i, j, convention=SPIN) -> PairDensityMatrix:
    """Partial trace onto sites ``(i, j)``; ``i`` labels the high bit of the index.

    Satisfies ``Tr(rho_ij O) = <state|O|state>`` for operators acting on the
    two qubit factors.
    """
    amps, n = _amplitudes(state)
    _check_sites(n, i, j)
    if convention == FERMIONIC:
        amps = amps * _fermionic_signs(n, i, j)
    elif convention != SPIN:
        raise ValueError(f"unknown RDM convention {convention!r}")
    return PairDensityMatrix(_reduce(amps, n, (i, j)), (i, j))


def reduce_to_site(state, i) -> SiteDensityMatrix:
    amps, n = _amplitudes(state)
    _check_sites(n, i)
    return SiteDensityMatrix(_reduce(amps, n, (i,)), i)


def has_definite_parity(state, tol=DEFINITE_PARITY_TOL):
    amps, _ = _amplitudes(state)
    p = float(np.dot(np.abs(amps) ** 2, parity_of_labels(np.arange(amps.shape[0]))))
    return abs(p) > 1.0 - tol


def pair_correlators(state, i, j) -> PairCorrelators:
    """X-state entries of ``reduce_to_pair(state, i, j)``.

    States without definite parity are not X-states; their correlators are
    read off the full reduction instead.
    """
    amps, n = _amplitudes(state)
    _check_sites(n, i, j)
    if not has_definite_parity(amps):
        rho = reduce_to_pair(amps, i, j).entries
        return PairCorrelators(float(rho[2, 2].real + rho[3, 3].real),
                               float(rho[1, 1].real + rho[3, 3].real),
                               float(rho[3, 3].real), complex(rho[1, 2]), complex(rho[0, 3]))
    occ, nn, hop, pair = kernels.pair_correlators(np.ascontiguousarray(amps, np.complex128), n)
    return _record(occ, nn, hop, pair, i, j)


def _record(occ, nn, hop, pair, i, j):
    if i < j:
        return PairCorrelators(float(occ[i]), float(occ[j]), float(nn[i, j]),
                               complex(hop[i, j]), complex(pair[i, j]))
    # swapped labels: <0_i 1_j|rho|1_i 0_j> is the conjugate of the (j, i) hop
    return PairCorrelators(float(occ[i]), float(occ[j]), float(nn[j, i]),
                           complex(np.conj(hop[j, i])), complex(pair[j, i]))


def all_pair_rdms(state, convention=SPIN):
    """Pair matrices for every ``i < j``.

    Returns
    -------
    pairs : list of (int, int)
    rhos : ndarray, shape (len(pairs), 4, 4)
    """
    amps, n = _amplitudes(state)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    rhos = np.empty((len(pairs), 4, 4), dtype=np.complex128)
    if convention == SPIN and has_definite_parity(amps):
        occ, nn, hop, pair = kernels.pair_correlators(np.ascontiguousarray(amps, np.complex128), n)
        for k, (i, j) in enumerate(pairs):
            rhos[k] = _record(occ, nn, hop, pair, i, j).assemble()
    else:
        for k, (i, j) in enumerate(pairs):
            rhos[k] = reduce_to_pair(amps, i, j, convention).entries
    return pairs, rhos
