"""Bipartite correlation measures on reduced density matrices."""

from __future__ import annotations

import math
from enum import Enum

import numpy as np

from .errors import InvalidStateError
from .rdm import reduce_to_pair

EIGEN_FLOOR = 1e-14
TRACE_TOL = 1e-8


class MeasureKind(str, Enum):
    MUTUAL_INFORMATION = "mutual_information"
    CONCURRENCE = "concurrence"
    L1_COHERENCE = "l1_coherence"


class LogBase(str, Enum):
    NATURAL = "natural"
    BASE2 = "base2"


_YY = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])


def _validated(rho, hermitian_tol=1e-10):
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"density matrix must be square, got shape {rho.shape}")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"trace {tr!r} differs from 1")
    if np.max(np.abs(rho - rho.conj().T)) > hermitian_tol:
        raise InvalidStateError("density matrix is not Hermitian")
    return rho


def von_neumann_entropy(rho, log_base=LogBase.NATURAL) -> float:
    """``-sum lambda log lambda`` over eigenvalues above ``EIGEN_FLOOR``."""
    rho = _validated(rho)
    lam = np.linalg.eigvalsh(rho)
    lam = lam[lam > EIGEN_FLOOR]
    s = float(-np.sum(lam * np.log(lam)))
    if LogBase(log_base) is LogBase.BASE2:
        s /= math.log(2)
    return max(s, 0.0)


def _marginals(rho4):
    t = rho4.reshape(2, 2, 2, 2)
    return np.einsum("ajbj->ab", t), np.einsum("iaib->ab", t)


def mutual_information_from_rdm(rho4, log_base=LogBase.NATURAL) -> float:
    """``S(rho_i) + S(rho_j) - S(rho_ij)`` for a 4x4 pair matrix."""
    rho4 = _validated(rho4)
    rho_i, rho_j = _marginals(rho4)
    mi = (von_neumann_entropy(rho_i, log_base) + von_neumann_entropy(rho_j, log_base)
          - von_neumann_entropy(rho4, log_base))
    return max(mi, 0.0) if mi > -1e-12 else mi


def mutual_information(state, i, j, log_base=LogBase.NATURAL, convention="spin") -> float:
    return mutual_information_from_rdm(reduce_to_pair(state, i, j, convention).entries, log_base)


def concurrence(rho) -> float:
    """Wootters concurrence of a two-qubit state.

    ``lambda_k`` are the square roots of the eigenvalues of ``rho rho~`` with
    ``rho~ = (Y x Y) conj(rho) (Y x Y)``; the result is
    ``max(0, l1 - l2 - l3 - l4)``.

    The ``lambda_k`` are taken as singular values of
    ``sqrt(rho) (Y x Y) conj(sqrt(rho))``. Square roots of the eigenvalues
    of ``rho rho~`` would turn rounding at 1e-16 into errors near 1e-8 for
    rank-deficient ``rho``.
    """
    rho = _validated(getattr(rho, "entries", rho))
    if rho.shape != (4, 4):
        raise InvalidStateError("concurrence needs a 4x4 matrix")
    ev, u = np.linalg.eigh(rho)
    root = (u * np.sqrt(np.clip(ev, 0.0, None))) @ u.conj().T
    lam = np.linalg.svd(root @ _YY @ root.conj(), compute_uv=False)
    return float(min(1.0, max(0.0, lam[0] - lam[1] - lam[2] - lam[3])))


def concurrence_x_state(rho) -> float:
    """Closed form for X-states: ``2 max(0, |r14| - sqrt(r22 r33), |r23| - sqrt(r11 r44))``."""
    rho = np.asarray(getattr(rho, "entries", rho))
    d = rho.diagonal().real
    a = abs(rho[0, 3]) - math.sqrt(max(d[1] * d[2], 0.0))
    b = abs(rho[1, 2]) - math.sqrt(max(d[0] * d[3], 0.0))
    return float(min(1.0, 2.0 * max(0.0, a, b)))


def l1_coherence(rho) -> float:
    """Sum of moduli of the off-diagonal entries (occupation basis)."""
    rho = _validated(getattr(rho, "entries", rho))
    a = np.abs(rho)
    return float(a.sum() - np.trace(a))


def evaluate(kind, rho, log_base=LogBase.NATURAL) -> float:
    kind = MeasureKind(kind)
    if kind is MeasureKind.MUTUAL_INFORMATION:
        return mutual_information_from_rdm(rho, log_base)
    if kind is MeasureKind.CONCURRENCE:
        return concurrence(rho)
    return l1_coherence(rho)
