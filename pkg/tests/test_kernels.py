import numpy as np
import pytest

from kitaevnet import kernels
from kitaevnet.model import ChainSpec, XYSpec, build_jw_boundary_term, build_kitaev_hamiltonian, get_basis

pytestmark = pytest.mark.skipif(not kernels.compiled_available(),
                                reason="compiled kernels not built")


def _ops():
    yield build_kitaev_hamiltonian(ChainSpec(9, 1.0, 0.4, 0.8))
    yield build_kitaev_hamiltonian(ChainSpec(8, 0.7, -1.2, 0.3, "open"), basis=get_basis(8, -1))
    yield build_jw_boundary_term(XYSpec(7, 1.1, 0.6, 0.0))


@pytest.mark.parametrize("op", list(_ops()), ids=["full", "odd-sector", "pweighted"])
def test_apply_terms_agree(op):
    rng = np.random.default_rng(0)
    v = rng.standard_normal(op.dim)
    b = op.basis
    outs = []
    for name in ("compiled", "python"):
        out = np.zeros(op.dim)
        escaped = kernels.get_backend(name).apply_terms(
            b.states, b.lookup, *op.terms.args(), op.diagonal_part(), v, out)
        assert escaped == 0
        outs.append(out)
    assert np.max(np.abs(outs[0] - outs[1])) < 1e-13


@pytest.mark.parametrize("op", list(_ops()), ids=["full", "odd-sector", "pweighted"])
def test_term_action_agree(op):
    b = op.basis
    mats = []
    for name in ("compiled", "python"):
        r, c, v = kernels.get_backend(name).term_action(b.states, b.lookup, *op.terms.args())
        m = np.zeros((op.dim, op.dim))
        np.add.at(m, (r, c), v)
        mats.append(m)
    assert np.array_equal(mats[0], mats[1])


def test_pair_correlators_agree():
    rng = np.random.default_rng(1)
    n = 7
    psi = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    psi /= np.linalg.norm(psi)
    a = kernels.get_backend("compiled").pair_correlators(psi, n)
    b = kernels.get_backend("python").pair_correlators(psi, n)
    for x, y in zip(a, b):
        assert np.max(np.abs(np.asarray(x) - np.asarray(y))) < 1e-14


def test_backend_selection():
    assert kernels.BACKEND in ("compiled", "python")
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")
