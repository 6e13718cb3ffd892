import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kitaevnet.measures import MeasureKind
from kitaevnet.model import ChainSpec
from kitaevnet.network import (
    CorrelationNetwork,
    Normalization,
    build_network,
    clustering,
    densities,
    export_network,
    load_network,
    network_report,
    node_density,
)
from kitaevnet.solver import QuantumState, ground_state
from oracles import triple_loop_clustering


def uniform(n, value):
    return CorrelationNetwork(value * (1 - np.eye(n)))


def random_network(rng, n):
    w = rng.uniform(0, 1, (n, n))
    w = np.triu(w, 1)
    return CorrelationNetwork(w + w.T)


def test_validation():
    with pytest.raises(ValueError):
        CorrelationNetwork(np.array([[0, 1], [0.5, 0]]))
    with pytest.raises(ValueError):
        CorrelationNetwork(np.eye(3))
    with pytest.raises(ValueError):
        CorrelationNetwork(-uniform(3, 1).weights)
    with pytest.raises(ValueError):
        CorrelationNetwork(np.zeros((2, 3)))


def test_density_examples():
    net = uniform(5, 0.3)
    assert np.allclose(densities(net), 0.3, rtol=0, atol=1e-15)
    assert node_density(uniform(4, 0.0), 2) == 0.0
    w = np.zeros((3, 3))
    w[0, 1] = w[1, 0] = 1.0
    single = CorrelationNetwork(w)
    assert node_density(single, 0) == 0.5 and node_density(single, 2) == 0.0
    with pytest.raises(IndexError):
        node_density(single, 3)


def test_clustering_examples():
    for value in (0.3, 1e-6, 7.0):
        assert abs(clustering(uniform(6, value)) - 1) < 1e-14
    assert abs(clustering(uniform(5, 0.3), Normalization.RAW) - 0.3) < 1e-14
    star = np.zeros((5, 5))
    star[0, 1:] = star[1:, 0] = 0.8
    assert clustering(CorrelationNetwork(star)) == 0.0
    assert math.isnan(clustering(uniform(4, 0.0)))
    # weights below the noise floor count as zero
    assert math.isnan(clustering(uniform(4, 1e-15)))
    with pytest.raises(ValueError):
        clustering(uniform(2, 1.0))


def test_report():
    rep = network_report(uniform(5, 0.3))
    assert list(rep) == ["densities", "mean_density", "clustering"]
    assert abs(rep["mean_density"] - 0.3) < 1e-15 and abs(rep["clustering"] - 1) < 1e-14


def test_triple_loop_oracle():
    rng = np.random.default_rng(8)
    worst = 0.0
    for n in range(3, 21):
        for _ in range(3):
            net = random_network(rng, n)
            # sparsify to get a mix of open and closed triplets
            w = net.weights * (rng.uniform(size=(n, n)) < 0.6)
            net = CorrelationNetwork(np.triu(w, 1) + np.triu(w, 1).T)
            if not np.any(net.weights):
                continue
            for norm in Normalization:
                e = net.weights / net.weights.max() if norm is Normalization.MAX_NORMALIZED \
                    else net.weights
                worst = max(worst, abs(clustering(net, norm) - triple_loop_clustering(e)))
    assert worst < 1e-12


@given(st.integers(0, 10_000), st.integers(3, 12))
def test_permutation_invariance(seed, n):
    rng = np.random.default_rng(seed)
    net = random_network(rng, n)
    perm = rng.permutation(n)
    moved = net.permuted(perm)
    assert abs(clustering(moved) - clustering(net)) < 1e-14
    assert np.allclose(densities(moved), densities(net)[perm], rtol=0, atol=1e-15)
    assert 0.0 <= clustering(net) <= 1.0


@given(st.integers(0, 10_000), st.floats(0.01, 5))
def test_clustering_one_only_when_uniform(seed, value):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 9))
    w = value * (1 - np.eye(n))
    i, j = rng.choice(n, 2, replace=False)
    w[i, j] = w[j, i] = value * rng.uniform(0.0, 0.99)
    assert clustering(CorrelationNetwork(w)) < 1 - 1e-10


def test_export_roundtrip(tmp_path):
    rng = np.random.default_rng(4)
    w = random_network(rng, 7).weights
    net = CorrelationNetwork(w, MeasureKind.CONCURRENCE, Normalization.RAW)
    path, sidecar = export_network(net, tmp_path / "net.csv")
    back = load_network(path)
    assert np.array_equal(back.weights, net.weights)
    assert back.measure is MeasureKind.CONCURRENCE and back.normalization is Normalization.RAW
    assert sidecar.name == "net.json"


def test_product_state_gives_zero_network():
    amps = np.zeros(1 << 6)
    amps[0b010011] = 1.0
    net = build_network(QuantumState.from_amplitudes(amps), MeasureKind.MUTUAL_INFORMATION)
    assert not np.any(net.weights)


@pytest.mark.parametrize("measure", list(MeasureKind))
def test_periodic_network_is_cyclic(measure):
    n = 10
    net = build_network(ground_state(ChainSpec(n, 1.0, 1.2, 0.6)), measure)
    shift = np.roll(np.arange(n), 1)
    assert np.max(np.abs(net.permuted(shift).weights - net.weights)) < 1e-10
    d = densities(net)
    assert np.ptp(d) < 1e-10


def test_open_chain_densities_vary():
    net = build_network(ground_state(ChainSpec(10, 1.0, 1.2, 0.6, "open")),
                        MeasureKind.MUTUAL_INFORMATION)
    assert np.ptp(densities(net)) > 1e-3


def test_uniform_weights_at_factorization_point():
    n = 10
    net = build_network(ground_state(ChainSpec(n, 1.0, math.sqrt(3), 0.5)),
                        MeasureKind.CONCURRENCE)
    off = net.weights[~np.eye(n, dtype=bool)]
    assert np.ptp(off) < 1e-8 and off.min() > 0
    assert abs(clustering(net) - 1) < 1e-6
