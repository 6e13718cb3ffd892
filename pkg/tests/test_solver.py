import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kitaevnet.errors import ConvergenceError, UnsupportedBoundaryError
from kitaevnet.model import ChainSpec, build_kitaev_hamiltonian
from kitaevnet.solver import (
    QuantumState,
    fidelity,
    ground_energy_analytic,
    ground_state,
    lanczos_ground_state,
    quasiparticle_spectrum,
    sector_ground_state,
)
from oracles import kitaev_dense


def test_energy_example():
    spec = ChainSpec(8, 1.0, 0.0, 1.0)
    assert abs(ground_energy_analytic(spec) + 8.0) < 1e-12
    assert abs(ground_state(spec).energy + 8.0) < 1e-10


@pytest.mark.parametrize("mu,parity", [(0.0, -1), (3.0, 1)])
def test_parity_examples(mu, parity):
    g = ground_state(ChainSpec(14, 1.0, mu, 0.5))
    assert abs(g.parity_expectation - parity) < 1e-8
    assert g.parity == parity


def test_spectrum_examples():
    assert np.allclose(quasiparticle_spectrum(ChainSpec(4, 1.0, 0.0, 1.0)).lambdas, 2.0)
    spec = ChainSpec(6, 1.3, 0.7, 0.4)
    lam = quasiparticle_spectrum(spec).lambdas
    assert abs(lam[0] - abs(0.7 + 2.6)) < 1e-14
    assert abs(lam[3] - abs(2.6 - 0.7)) < 1e-14
    assert quasiparticle_spectrum(ChainSpec(6, 1.0, 2.0, 0.4)).lambdas[3] == 0.0
    with pytest.raises(UnsupportedBoundaryError):
        quasiparticle_spectrum(ChainSpec(6, boundary="open"))
    assert abs(ground_energy_analytic(ChainSpec(6, 0.0, 1.5, 0.0)) + 6 * 1.5 / 2) < 1e-14


@given(st.floats(0, 3), st.floats(0.1, 2), st.sampled_from([4, 6, 8, 10]))
def test_energy_identity(mu, delta, n):
    spec = ChainSpec(n, 1.0, mu, delta)
    e = ground_state(spec).energy
    assert abs(e - ground_energy_analytic(spec)) <= 1e-10 * max(1.0, abs(e))


@pytest.mark.parametrize("boundary", ["periodic", "open"])
@pytest.mark.parametrize("n", [5, 8, 10])
def test_sector_minimum_matches_dense_oracle(n, boundary):
    rng = np.random.default_rng(n)
    mu, delta = rng.uniform(-3, 3), rng.uniform(-2, 2)
    spec = ChainSpec(n, 1.0, mu, delta, boundary)
    g = ground_state(spec)
    e0 = np.linalg.eigvalsh(kitaev_dense(n, 1.0, mu, delta, boundary == "periodic"))[0]
    assert abs(g.energy - e0) < 1e-10
    assert abs(np.linalg.norm(g.amplitudes) - 1) < 1e-10
    h = build_kitaev_hamiltonian(spec)
    assert np.linalg.norm(h @ g.amplitudes - g.energy * g.amplitudes) < 1e-8


@pytest.mark.parametrize("parity", [1, -1])
def test_lanczos_vs_dense_and_sparse(parity):
    spec = ChainSpec(10, 1.0, 1.4, 0.6)
    e_l, x_l, _ = sector_ground_state(spec, parity)
    e_d, x_d, _ = sector_ground_state(spec, parity, method="dense")
    e_s, x_s, _ = sector_ground_state(spec, parity, storage="sparse")
    assert abs(e_l - e_d) < 1e-10 and abs(e_s - e_d) < 1e-10
    assert abs(abs(np.dot(x_l, x_d)) - 1) < 1e-10


def test_parity_rule_grid():
    for mu in np.concatenate([np.linspace(-3, -2.001, 3), np.linspace(-1.999, 1.999, 5),
                              np.linspace(2.001, 3, 3)]):
        g = ground_state(ChainSpec(8, 1.0, mu, 0.7))
        assert g.parity == (-1 if abs(mu) < 2 else 1)


def test_degenerate_tie_break():
    # open chain at a zero-mode potential: both sectors degenerate
    mu = 2 * np.sqrt(1 - 0.25) * np.cos(np.pi / 7)
    g = ground_state(ChainSpec(6, 1.0, mu, 0.5, "open"))
    assert g.degenerate and g.parity == -1
    assert abs(g.sector_energies["even"] - g.sector_energies["odd"]) < 1e-10


def test_lanczos_convergence_error():
    h = np.diag(np.linspace(0, 1, 400))
    with pytest.raises(ConvergenceError) as info:
        lanczos_ground_state(lambda v: h @ v, 400, max_krylov=3, max_restarts=0)
    assert info.value.residual > 0


def test_lanczos_exact_small_space():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((50, 50))
    a = a + a.T
    e, x, res = lanczos_ground_state(lambda v: a @ v, 50)
    assert abs(e - np.linalg.eigvalsh(a)[0]) < 1e-10 and res < 1e-10


def test_fidelity():
    spec = ChainSpec(10, 1.0, 1.0, 0.5)
    a = ground_state(spec)
    b = ground_state(spec.with_mu(1.3))
    assert abs(fidelity(a, a) - 1) < 1e-12
    assert fidelity(a, b) == fidelity(b, a)
    assert fidelity(a, ground_state(spec.with_mu(2.5))) <= 1e-10
    with pytest.raises(ValueError):
        fidelity(a, ground_state(ChainSpec(8, 1.0, 1.0, 0.5)))


def test_from_amplitudes():
    s = QuantumState.from_amplitudes([0, 3.0, 4.0, 0])
    assert abs(np.linalg.norm(s.amplitudes) - 1) < 1e-15
    assert s.parity == -1 and s.n_sites == 2
    assert QuantumState.from_amplitudes([1.0, 1.0, 0, 0]).parity == 0
    with pytest.raises(ValueError):
        QuantumState.from_amplitudes([0.0, 0.0])
