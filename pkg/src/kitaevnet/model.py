"""Many-body operators on the 2^N occupation basis.

Conventions
-----------
* Site ``j`` (0-based) is bit ``j`` of the basis label: ``n_j = (b >> j) & 1``.
* A fermionic ladder operator on site ``j`` picks up ``(-1)`` to the number of
  occupied sites with index ``< j``.
* Spin operators use the orientation spin-up <-> occupied, so
  ``sigma_z = 2 n - 1`` and ``sigma^- = (string) a``. With this choice the
  Jordan-Wigner map is label preserving and the XY field ``h`` corresponds to
  the chemical potential ``mu`` with the same sign.

Operators are stored as a table of two-ladder-operator terms plus a diagonal
``const + sum_j onsite_j n_j``; applying them is matrix-free (see
``kernels``). An explicit CSR copy is available through ``to_sparse``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from . import kernels
from .errors import CapacityError, SymmetryError

MAX_SITES = int(os.environ.get("KITAEVNET_MAX_SITES", "16"))


class Boundary(str, Enum):
    PERIODIC = "periodic"
    OPEN = "open"


def _check_sites(n_sites, minimum=2):
    if isinstance(n_sites, bool) or int(n_sites) != n_sites:
        raise ValueError(f"n_sites must be an integer, got {n_sites!r}")
    if n_sites < minimum:
        raise ValueError(f"n_sites must be >= {minimum}, got {n_sites}")
    if n_sites > MAX_SITES:
        raise CapacityError(
            f"n_sites={n_sites} exceeds the configured maximum {MAX_SITES} "
            "(set KITAEVNET_MAX_SITES or model.MAX_SITES to raise it)"
        )


def _check_finite(**values):
    for name, value in values.items():
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class ChainSpec:
    """Parameters of one Kitaev chain, energies in units of the hopping.

    Parameters
    ----------
    n_sites : int
        Number of sites N.
    hopping : float
        Hopping amplitude w.
    chemical_potential : float
        Chemical potential mu.
    pairing : float
        p-wave pairing Delta (real).
    boundary : Boundary
        ``periodic`` identifies site N+1 with site 1; ``open`` drops the
        wrap-around bond.
    """

    n_sites: int
    hopping: float = 1.0
    chemical_potential: float = 0.0
    pairing: float = 0.0
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        _check_sites(self.n_sites)
        object.__setattr__(self, "n_sites", int(self.n_sites))
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        for name in ("hopping", "chemical_potential", "pairing"):
            object.__setattr__(self, name, float(getattr(self, name)))
        _check_finite(hopping=self.hopping, chemical_potential=self.chemical_potential,
                      pairing=self.pairing)

    @property
    def periodic(self):
        return self.boundary is Boundary.PERIODIC

    def with_mu(self, mu):
        return replace(self, chemical_potential=mu)


@dataclass(frozen=True)
class XYSpec:
    """Cyclic XY chain with ``J = Jx + Jy`` and anisotropy ``gamma = Jx - Jy``."""

    n_sites: int
    coupling_sum: float = 1.0
    anisotropy: float = 0.0
    field: float = 0.0

    def __post_init__(self):
        _check_sites(self.n_sites)
        object.__setattr__(self, "n_sites", int(self.n_sites))
        for name in ("coupling_sum", "anisotropy", "field"):
            object.__setattr__(self, name, float(getattr(self, name)))
        _check_finite(coupling_sum=self.coupling_sum, anisotropy=self.anisotropy,
                      field=self.field)

    @property
    def jx(self):
        return 0.5 * (self.coupling_sum + self.anisotropy)

    @property
    def jy(self):
        return 0.5 * (self.coupling_sum - self.anisotropy)


# ---------------------------------------------------------------------------
# basis


@dataclass(frozen=True, eq=False)
class Basis:
    """Ordered set of basis labels, either the full space or one parity sector.

    ``states[k]`` is the full-space label of basis vector ``k`` and
    ``lookup[label]`` the inverse map (``-1`` outside the basis).
    """

    n_sites: int
    parity: int | None
    states: np.ndarray = field(repr=False)
    lookup: np.ndarray = field(repr=False)

    @property
    def dim(self):
        return self.states.shape[0]

    def embed(self, vec):
        """Scatter a basis-coefficient vector into the full 2^N space."""
        full = np.zeros(1 << self.n_sites, dtype=np.result_type(vec, np.float64))
        full[self.states] = vec
        return full

    def restrict(self, full):
        return np.asarray(full)[self.states]


def parity_of_labels(labels):
    """``(-1)**popcount`` of each label."""
    labels = np.asarray(labels, dtype=np.uint64)
    return 1 - 2 * (np.bitwise_count(labels).astype(np.int64) & 1)


@lru_cache(maxsize=64)
def get_basis(n_sites, parity=None):
    """Full basis (``parity=None``) or fixed-parity sector, cached and read-only."""
    if parity not in (None, 1, -1):
        raise ValueError(f"parity must be +1, -1 or None, got {parity!r}")
    if n_sites > MAX_SITES:
        raise CapacityError(f"n_sites={n_sites} exceeds the configured maximum {MAX_SITES}")
    dim = 1 << n_sites
    labels = np.arange(dim, dtype=np.int64)
    if parity is None:
        states = labels
    else:
        states = labels[parity_of_labels(labels) == parity]
    lookup = np.full(dim, -1, dtype=np.int64)
    lookup[states] = np.arange(states.shape[0], dtype=np.int64)
    states.setflags(write=False)
    lookup.setflags(write=False)
    return Basis(n_sites, parity, states, lookup)


# ---------------------------------------------------------------------------
# operators

ANNIHILATE, CREATE = 0, 1


class TermTable:
    """Columnar table of ``coef * O1(site1) O2(site2)`` terms (O2 acts first).

    ``set`` is 1 for an operator that fills a site (a^dagger, sigma^+) and 0
    for one that empties it. ``fermionic`` attaches the ordering sign;
    ``pweight`` multiplies the term by the fermion parity P.
    """

    _fields = ("site1", "set1", "site2", "set2", "fermionic", "pweight")

    def __init__(self, rows=()):
        rows = [r for r in rows if r[-1] != 0.0]
        if any(r[0] == r[2] for r in rows):
            raise ValueError("terms must act on two distinct sites; use onsite for n_j")
        for name_idx, name in enumerate(self._fields):
            col = np.array([r[name_idx] for r in rows], dtype=np.int64)
            setattr(self, name, col)
        self.coef = np.array([r[-1] for r in rows], dtype=np.float64)

    def __len__(self):
        return self.coef.shape[0]

    def rows(self):
        cols = [getattr(self, f).tolist() for f in self._fields] + [self.coef.tolist()]
        return list(zip(*cols))

    def __add__(self, other):
        return TermTable(self.rows() + other.rows())

    def args(self):
        return tuple(getattr(self, f) for f in self._fields) + (self.coef,)


class ManyBodyOperator:
    """Hermitian operator on a :class:`Basis`, applied matrix-free.

    Either a term table (with diagonal ``const + onsite . n``) or an explicit
    sparse matrix over the basis backs the operator.
    """

    def __init__(self, n_sites, terms=None, onsite=None, const=0.0, basis=None,
                 matrix=None, name=""):
        self.n_sites = n_sites
        self.basis = basis if basis is not None else get_basis(n_sites)
        self.terms = terms if terms is not None else TermTable()
        self.onsite = (np.zeros(n_sites) if onsite is None
                       else np.asarray(onsite, dtype=np.float64))
        self.const = float(const)
        self.name = name
        self._matrix = None if matrix is None else sp.csr_matrix(matrix)
        self._diag = None
        self._sparse = None

    @classmethod
    def from_matrix(cls, n_sites, matrix, basis=None, name=""):
        return cls(n_sites, basis=basis, matrix=matrix, name=name)

    @property
    def dim(self):
        return self.basis.dim

    @property
    def shape(self):
        return (self.dim, self.dim)

    @property
    def index_map(self):
        """Full-space label of each basis vector."""
        return self.basis.states

    def diagonal_part(self):
        if self._diag is None:
            states = self.basis.states
            d = np.full(states.shape[0], self.const)
            for j, eps in enumerate(self.onsite):
                if eps != 0.0:
                    d += eps * ((states >> j) & 1)
            d.setflags(write=False)
            self._diag = d
        return self._diag

    def _apply_real(self, v):
        out = np.zeros(self.dim)
        b = self.basis
        escaped = kernels.apply_terms(b.states, b.lookup, *self.terms.args(),
                                      self.diagonal_part(), v, out)
        if escaped:
            raise SymmetryError(f"{self.name or 'operator'} maps {escaped} basis "
                                f"states out of the parity-{b.parity} sector")
        return out

    def matvec(self, v):
        v = np.asarray(v)
        if v.shape != (self.dim,):
            raise ValueError(f"expected vector of length {self.dim}, got shape {v.shape}")
        if self._matrix is not None:
            return self._matrix @ v
        if np.iscomplexobj(v):
            return self._apply_real(np.ascontiguousarray(v.real)) + \
                1j * self._apply_real(np.ascontiguousarray(v.imag))
        return self._apply_real(np.ascontiguousarray(v, dtype=np.float64))

    def __matmul__(self, v):
        return self.matvec(v)

    def __add__(self, other):
        if not isinstance(other, ManyBodyOperator):
            return NotImplemented
        if other.n_sites != self.n_sites or other.basis is not self.basis:
            raise ValueError("operators live on different bases")
        if self._matrix is not None or other._matrix is not None:
            return ManyBodyOperator.from_matrix(self.n_sites, self.to_sparse() + other.to_sparse(),
                                                basis=self.basis)
        return ManyBodyOperator(self.n_sites, self.terms + other.terms,
                                self.onsite + other.onsite, self.const + other.const,
                                basis=self.basis, name=f"{self.name}+{other.name}")

    def to_sparse(self):
        """CSR matrix over the basis (cached)."""
        if self._matrix is not None:
            return self._matrix
        if self._sparse is None:
            b = self.basis
            rows, cols, vals = kernels.term_action(b.states, b.lookup, *self.terms.args())
            if np.any(rows < 0):
                raise SymmetryError(f"{self.name or 'operator'} leaves the parity-{b.parity} sector")
            m = sp.coo_matrix((vals, (rows, cols)), shape=self.shape).tocsr()
            m = m + sp.diags(self.diagonal_part())
            self._sparse = m.tocsr()
        return self._sparse

    def to_dense(self):
        return self.to_sparse().toarray()

    def restricted(self, basis):
        """Same operator acting on another basis (no symmetry check)."""
        if self._matrix is not None:
            full = self._matrix
            if self.basis.parity is not None:
                raise ValueError("explicit-matrix operator is already sector restricted")
            sub = full[basis.states][:, basis.states]
            return ManyBodyOperator.from_matrix(self.n_sites, sub, basis=basis, name=self.name)
        return ManyBodyOperator(self.n_sites, self.terms, self.onsite, self.const,
                                basis=basis, name=self.name)

    def __repr__(self):
        kind = "matrix" if self._matrix is not None else f"{len(self.terms)} terms"
        return (f"ManyBodyOperator({self.name or 'unnamed'}, N={self.n_sites}, "
                f"dim={self.dim}, parity={self.basis.parity}, {kind})")


def _bonds(n_sites, periodic):
    bonds = [(j, j + 1) for j in range(n_sites - 1)]
    if periodic:
        bonds.append((n_sites - 1, 0))
    return bonds


def build_kitaev_hamiltonian(spec: ChainSpec, basis=None) -> ManyBodyOperator:
    """Kitaev chain ``sum_j [-w(a_j^+ a_{j+1} + h.c.) - mu(n_j - 1/2)
    + Delta(a_j a_{j+1} + a_{j+1}^+ a_j^+)]``.

    The periodic chain uses the literal identification ``a_{N+1} = a_1``.
    """
    w, mu, delta, n = spec.hopping, spec.chemical_potential, spec.pairing, spec.n_sites
    rows = []
    for p, q in _bonds(n, spec.periodic):
        rows += [
            (p, CREATE, q, ANNIHILATE, 1, 0, -w),
            (q, CREATE, p, ANNIHILATE, 1, 0, -w),
            (p, ANNIHILATE, q, ANNIHILATE, 1, 0, delta),
            (q, CREATE, p, CREATE, 1, 0, delta),
        ]
    return ManyBodyOperator(n, TermTable(rows), np.full(n, -mu), mu * n / 2,
                            basis=basis, name="kitaev")


def build_parity_operator(n_sites, basis=None) -> ManyBodyOperator:
    """Diagonal ``P = prod_j (1 - 2 n_j)``."""
    _check_sites(n_sites, minimum=1)
    basis = basis if basis is not None else get_basis(n_sites)
    diag = parity_of_labels(basis.states).astype(np.float64)
    return ManyBodyOperator.from_matrix(n_sites, sp.diags(diag), basis=basis, name="parity")


def build_number_operator(n_sites, basis=None) -> ManyBodyOperator:
    """Total occupation ``sum_j n_j``."""
    return ManyBodyOperator(n_sites, TermTable(), np.ones(n_sites), 0.0, basis=basis,
                            name="number")


def build_xy_hamiltonian(spec: XYSpec, basis=None) -> ManyBodyOperator:
    """Cyclic ``-sum_i (Jx sx_i sx_{i+1} + Jy sy_i sy_{i+1}) - h/2 sum_i sz_i``.

    Written with ladder operators: the bond term is
    ``J (s+ s- + s- s+) + gamma (s+ s+ + s- s-)``.
    """
    n, j, g, h = spec.n_sites, spec.coupling_sum, spec.anisotropy, spec.field
    rows = []
    for p, q in _bonds(n, True):
        rows += [
            (p, CREATE, q, ANNIHILATE, 0, 0, -j),
            (p, ANNIHILATE, q, CREATE, 0, 0, -j),
            (p, CREATE, q, CREATE, 0, 0, -g),
            (p, ANNIHILATE, q, ANNIHILATE, 0, 0, -g),
        ]
    # -h/2 sz with sz = 2n - 1
    return ManyBodyOperator(n, TermTable(rows), np.full(n, -h), h * n / 2,
                            basis=basis, name="xy")


def build_xy_open_image(spec: XYSpec, basis=None) -> ManyBodyOperator:
    """Fermionic image of the XY chain without the wrap-around bond.

    Equal to the open Kitaev chain with ``w = J``, ``Delta = gamma``, ``mu = h``.
    """
    chain = ChainSpec(spec.n_sites, spec.coupling_sum, spec.field, spec.anisotropy,
                      Boundary.OPEN)
    op = build_kitaev_hamiltonian(chain, basis=basis)
    op.name = "xy_open_image"
    return op


def build_jw_boundary_term(spec: XYSpec, basis=None) -> ManyBodyOperator:
    """``P (J a_N^+ a_1 + gamma a_N^+ a_1^+ + h.c.)``.

    Added to :func:`build_xy_open_image` it reproduces the XY chain exactly;
    in the odd sector (P = -1) it becomes the periodic Kitaev wrap bond.
    """
    n, j, g = spec.n_sites, spec.coupling_sum, spec.anisotropy
    last, first = n - 1, 0
    rows = [
        (last, CREATE, first, ANNIHILATE, 1, 1, j),
        (first, CREATE, last, ANNIHILATE, 1, 1, j),
        (last, CREATE, first, CREATE, 1, 1, g),
        (first, ANNIHILATE, last, ANNIHILATE, 1, 1, g),
    ]
    return ManyBodyOperator(n, TermTable(rows), None, 0.0, basis=basis, name="jw_boundary")


def commutator_norm(a, b, vectors):
    """Largest ``|| [A, B] v ||`` over the given vectors."""
    return max(float(np.linalg.norm(a @ (b @ v) - b @ (a @ v))) for v in vectors)


def random_unit_vectors(dim, count, seed=0, complex_=True):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        v = rng.standard_normal(dim)
        if complex_:
            v = v + 1j * rng.standard_normal(dim)
        out.append(v / np.linalg.norm(v))
    return out


def sector_project(op: ManyBodyOperator, parity: int, n_probes=4, tol=1e-12):
    """Restrict ``op`` to the fixed-parity subspace.

    The returned operator's ``index_map`` gives the full-space label of each
    sector basis vector.

    Raises
    ------
    SymmetryError
        If ``op`` does not commute with the parity operator.
    """
    if parity not in (1, -1):
        raise ValueError(f"parity must be +1 or -1, got {parity!r}")
    if op.basis.parity is not None:
        raise ValueError("operator is already sector restricted")
    p = build_parity_operator(op.n_sites)
    probes = random_unit_vectors(op.dim, n_probes, seed=12345, complex_=False)
    scale = max(1.0, max(float(np.linalg.norm(op @ v)) for v in probes))
    err = commutator_norm(op, p, probes)
    if err > tol * scale:
        raise SymmetryError(f"[op, P] does not vanish (||[op,P]v|| = {err:.3e})")
    return op.restricted(get_basis(op.n_sites, parity))
