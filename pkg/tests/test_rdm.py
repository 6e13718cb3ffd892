import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kitaevnet.model import ChainSpec
from kitaevnet.rdm import (
    FERMIONIC,
    all_pair_rdms,
    has_definite_parity,
    pair_correlators,
    reduce_to_pair,
    reduce_to_site,
)
from kitaevnet.solver import ground_state
from oracles import annihilator, brute_pair_rdm


def basis_state(n, occupied):
    psi = np.zeros(1 << n)
    psi[sum(1 << j for j in occupied)] = 1.0
    return psi


def test_product_state_example():
    # |1010>: sites 0 and 2 occupied
    rho = reduce_to_pair(basis_state(4, [0, 2]), 0, 1).entries
    assert np.allclose(rho, np.diag([0, 0, 1, 0]))


def test_ghz_example():
    psi = np.zeros(16)
    psi[0] = psi[15] = 1 / np.sqrt(2)
    for i, j in [(0, 1), (1, 3), (2, 0)]:
        assert np.allclose(reduce_to_pair(psi, i, j).entries, np.diag([0.5, 0, 0, 0.5]))


def test_site_examples():
    assert np.allclose(reduce_to_site(basis_state(2, [0]), 0).entries, np.diag([0, 1]))
    g = ground_state(ChainSpec(8, 1.0, 0.8, 0.6))
    ref = reduce_to_site(g, 0).entries
    for i in range(1, 8):
        assert np.max(np.abs(reduce_to_site(g, i).entries - ref)) < 1e-10
    rho = reduce_to_pair(g, 2, 5).entries.reshape(2, 2, 2, 2)
    assert np.max(np.abs(np.einsum("ajbj->ab", rho) - reduce_to_site(g, 2).entries)) < 1e-12
    assert np.max(np.abs(np.einsum("iaib->ab", rho) - reduce_to_site(g, 5).entries)) < 1e-12


@given(st.floats(-3, 3), st.floats(-2, 2), st.sampled_from([4, 6, 7, 8]),
       st.sampled_from(["periodic", "open"]))
def test_fast_path_matches_brute_force(mu, delta, n, boundary):
    g = ground_state(ChainSpec(n, 1.0, mu, delta, boundary))
    pairs, rhos = all_pair_rdms(g)
    assert len(pairs) == n * (n - 1) // 2
    for (i, j), rho in zip(pairs, rhos):
        assert np.max(np.abs(rho - brute_pair_rdm(g.amplitudes, n, i, j))) < 1e-12


def test_properties_and_x_structure():
    g = ground_state(ChainSpec(8, 1.0, 1.1, 0.7, "open"))
    for (i, j), rho in zip(*all_pair_rdms(g)):
        assert np.max(np.abs(rho - rho.conj().T)) < 1e-12
        assert abs(np.trace(rho) - 1) < 1e-12
        assert np.linalg.eigvalsh(rho).min() > -1e-10
        for r, c in [(0, 1), (0, 2), (1, 3), (2, 3)]:
            assert abs(rho[r, c]) < 1e-10


def test_reversed_pair_order():
    rng = np.random.default_rng(0)
    psi = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    psi /= np.linalg.norm(psi)
    swap = np.eye(4)[[0, 2, 1, 3]]
    a = reduce_to_pair(psi, 1, 4).entries
    b = reduce_to_pair(psi, 4, 1).entries
    assert np.max(np.abs(swap @ a @ swap - b)) < 1e-14
    assert np.max(np.abs(brute_pair_rdm(psi, 6, 4, 1) - b)) < 1e-14


def test_pair_correlators():
    g = ground_state(ChainSpec(8, 1.0, 1.3, 0.5))
    for i, j in [(0, 1), (2, 6), (5, 3)]:
        rec = pair_correlators(g, i, j)
        assert np.max(np.abs(rec.assemble() - reduce_to_pair(g, i, j).entries)) < 1e-12
    vac = pair_correlators(basis_state(5, []), 1, 3)
    assert vac.n_i == vac.n_j == vac.n_ij == 0 and vac.offdiag_hop == vac.offdiag_pair == 0
    # no definite parity: full reduction
    psi = (basis_state(3, []) + basis_state(3, [1])) / np.sqrt(2)
    assert not has_definite_parity(psi)
    rec = pair_correlators(psi, 0, 1)
    assert abs(rec.n_j - 0.5) < 1e-15


def test_correlators_uniform_at_mu_star():
    g = ground_state(ChainSpec(10, 1.0, np.sqrt(3), 0.5))
    ref = pair_correlators(g, 0, 1)
    for i, j in [(0, 5), (3, 4), (2, 9)]:
        r = pair_correlators(g, i, j)
        for f in ("n_i", "n_j", "n_ij", "offdiag_hop", "offdiag_pair"):
            assert abs(getattr(r, f) - getattr(ref, f)) < 1e-10


def test_fermionic_convention_matches_mode_operators():
    n = 6
    g = ground_state(ChainSpec(n, 1.0, 0.9, 0.6, "open"))
    psi = g.amplitudes
    a = [annihilator(n, k) for k in range(n)]
    for i, j in [(1, 4), (4, 1), (0, 5)]:
        rho = reduce_to_pair(g, i, j, FERMIONIC).entries
        # <01|rho|10> = <a_i^+ a_j>, <00|rho|11> = <a_j a_i>
        hop = psi @ (a[i].T @ a[j]) @ psi
        pair = psi @ (a[j] @ a[i]) @ psi
        assert abs(rho[1, 2] - hop) < 1e-12
        assert abs(rho[0, 3] - pair) < 1e-12


def test_site_errors():
    psi = basis_state(3, [0])
    with pytest.raises(IndexError):
        reduce_to_pair(psi, 0, 3)
    with pytest.raises(ValueError):
        reduce_to_pair(psi, 1, 1)
    with pytest.raises(ValueError):
        reduce_to_pair(np.ones(6), 0, 1)
    with pytest.raises(ValueError):
        reduce_to_pair(psi, 0, 1, "bogus")
