import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kitaevnet.freefermion import (
    bdg_ground_energy,
    bdg_matrix,
    bdg_spectrum,
    majorana_zero_mode_potentials,
    min_bdg_gap,
)
from kitaevnet.model import ChainSpec
from kitaevnet.solver import ground_state, quasiparticle_spectrum


def test_dimer():
    spec = ChainSpec(2, 1.0, 0.0, 0.0, "open")
    assert np.allclose(bdg_spectrum(spec), [1.0, 1.0], rtol=0, atol=1e-14)


@given(st.floats(-3, 3), st.floats(-2, 2), st.sampled_from([4, 5, 6, 9, 12]))
def test_periodic_spectrum_matches_closed_form(mu, delta, n):
    spec = ChainSpec(n, 1.0, mu, delta)
    assert np.allclose(bdg_spectrum(spec), np.sort(quasiparticle_spectrum(spec).lambdas),
                       rtol=0, atol=1e-12)


@given(st.floats(-3, 3), st.floats(-2, 2), st.sampled_from(["open", "periodic"]))
def test_particle_hole_symmetry(mu, delta, boundary):
    m = bdg_matrix(ChainSpec(7, 0.8, mu, delta, boundary))
    assert np.allclose(m.matrix, m.matrix.T)
    ev = m.eigenvalues()
    assert np.allclose(np.sort(ev), np.sort(-ev), rtol=0, atol=1e-12)


def test_zero_mode_examples():
    table = majorana_zero_mode_potentials(8, 1.0, 0.5)
    assert table.in_domain
    expected = [1.62760, 1.32683, 0.86603, 0.30077]
    assert np.allclose(np.sort(table.positive)[::-1], expected, rtol=0, atol=5e-6)
    assert np.all(np.diff(table.mu) >= 0)
    assert np.all(majorana_zero_mode_potentials(6, 1.0, 1.0).mu == 0)
    out = majorana_zero_mode_potentials(6, 1.0, 2.0)
    assert not out.in_domain and out.mu.size == 0


@pytest.mark.parametrize("n", range(2, 14))
def test_zero_mode_count(n):
    pos = majorana_zero_mode_potentials(n, 1.0, 0.3).positive
    assert pos.size == n // 2
    assert np.all(pos < 2.0)


@pytest.mark.parametrize("delta", [0.1, 0.5, 0.9])
@pytest.mark.parametrize("n", [6, 8, 9])
def test_gap_closes_at_every_mu_n(n, delta):
    for mu in majorana_zero_mode_potentials(n, 1.0, delta).mu:
        assert min_bdg_gap(ChainSpec(n, 1.0, mu, delta, "open")) <= 1e-8


def test_gap_examples():
    mu = majorana_zero_mode_potentials(8, 1.0, 0.5).positive
    mu2, mu3 = np.sort(mu)[::-1][1:3]
    assert min_bdg_gap(ChainSpec(8, 1.0, 0.5 * (mu2 + mu3), 0.5, "open")) > 1e-3
    assert min_bdg_gap(ChainSpec(8, 1.0, 2.0, 0.5)) == 0.0


@pytest.mark.parametrize("boundary", ["open", "periodic"])
@pytest.mark.parametrize("n", [4, 7, 10])
def test_many_body_cross_check(n, boundary):
    rng = np.random.default_rng(n)
    for _ in range(4):
        spec = ChainSpec(n, 1.0, rng.uniform(-3, 3), rng.uniform(-1.5, 1.5), boundary)
        g = ground_state(spec)
        assert abs(g.energy - bdg_ground_energy(spec)) < 1e-10
        # the other parity sector starts one quasiparticle higher
        gap = abs(g.sector_energies["even"] - g.sector_energies["odd"])
        assert abs(gap - min_bdg_gap(spec)) < 1e-10
