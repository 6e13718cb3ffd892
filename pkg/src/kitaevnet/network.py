"""Weighted correlation networks over chain sites and their metrics.

Clustering divides the weights by their maximum before the triangle sums
(``max_normalized``, the default). The triangle formula is homogeneous of
degree one, so without this step a uniform network of weight ``e`` would
report ``C = e`` rather than 1. ``raw`` keeps the unnormalized value.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .measures import LogBase, MeasureKind, evaluate
from .rdm import SPIN, all_pair_rdms

ZERO_WEIGHT = 1e-14


class Normalization(str, Enum):
    RAW = "raw"
    MAX_NORMALIZED = "max_normalized"


@dataclass(frozen=True)
class CorrelationNetwork:
    """Symmetric, nonnegative, zero-diagonal weight matrix over N sites."""

    weights: np.ndarray
    measure: MeasureKind | None = None
    normalization: Normalization = Normalization.MAX_NORMALIZED

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"weights must be square, got shape {w.shape}")
        if not np.allclose(w, w.T, rtol=0, atol=1e-12):
            raise ValueError("weights must be symmetric")
        if np.any(np.diag(w) != 0):
            raise ValueError("weights must have a zero diagonal")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "normalization", Normalization(self.normalization))
        if self.measure is not None:
            object.__setattr__(self, "measure", MeasureKind(self.measure))

    @property
    def n_nodes(self):
        return self.weights.shape[0]

    def permuted(self, perm):
        perm = np.asarray(perm)
        return CorrelationNetwork(self.weights[np.ix_(perm, perm)], self.measure,
                                  self.normalization)


def build_network(state, measure, *, normalization=Normalization.MAX_NORMALIZED,
                  log_base=LogBase.NATURAL, convention=SPIN) -> CorrelationNetwork:
    """Network with ``e_ij`` = measure of the pair matrix of sites i and j."""
    measure = MeasureKind(measure)
    pairs, rhos = all_pair_rdms(state, convention)
    n = rhos.shape[0] and pairs[-1][1] + 1
    w = np.zeros((n, n))
    for (i, j), rho in zip(pairs, rhos):
        w[i, j] = w[j, i] = evaluate(measure, rho, log_base)
    return CorrelationNetwork(w, measure, normalization)


def node_density(net: CorrelationNetwork, i) -> float:
    """``d_i = sum_{j != i} e_ij / (N - 1)`` on raw weights."""
    if not 0 <= i < net.n_nodes:
        raise IndexError(f"node {i} out of range for N={net.n_nodes}")
    return float(net.weights[i].sum() / (net.n_nodes - 1))


def densities(net: CorrelationNetwork) -> np.ndarray:
    return net.weights.sum(axis=1) / (net.n_nodes - 1)


def clustering_weights(net: CorrelationNetwork, normalization=None):
    normalization = Normalization(normalization or net.normalization)
    w = np.where(net.weights < ZERO_WEIGHT, 0.0, net.weights)
    if normalization is Normalization.MAX_NORMALIZED:
        top = w.max()
        if top > 0:
            w = w / top
    return w


def clustering(net: CorrelationNetwork, normalization=None) -> float:
    """Weighted clustering over ordered triples of distinct nodes.

    ``C = sum e_ij e_jk e_ki / sum_k sum_{i != j} e_ik e_jk``, evaluated as
    ``tr(E^3) / (sum_k s_k^2 - sum e^2)`` with node strengths ``s_k``.
    Returns ``nan`` (undefined) for an all-zero network.
    """
    if net.n_nodes < 3:
        raise ValueError("clustering needs at least 3 nodes")
    w = clustering_weights(net, normalization)
    strength = w.sum(axis=1)
    open_triplets = float(np.dot(strength, strength) - np.sum(w * w))
    if open_triplets <= 0.0:
        return math.nan
    closed = float(np.einsum("ij,jk,ki->", w, w, w))
    return closed / open_triplets


def network_report(net: CorrelationNetwork, normalization=None) -> dict:
    """Per-node densities, their mean, and the clustering coefficient."""
    d = densities(net)
    return {
        "densities": [float(x) for x in d],
        "mean_density": float(d.mean()),
        "clustering": clustering(net, normalization) if net.n_nodes >= 3 else math.nan,
    }


def export_network(net: CorrelationNetwork, path):
    """Write the weight matrix as CSV and a JSON sidecar next to it."""
    path = Path(path)
    np.savetxt(path, net.weights, fmt="%.17g", delimiter=",")
    sidecar = path.with_suffix(".json")
    meta = {
        "n": net.n_nodes,
        "measure": net.measure.value if net.measure else None,
        "normalization": net.normalization.value,
    }
    sidecar.write_text(json.dumps(meta, indent=2) + "\n")
    return path, sidecar


def load_network(path) -> CorrelationNetwork:
    path = Path(path)
    w = np.loadtxt(path, delimiter=",", ndmin=2)
    meta = json.loads(path.with_suffix(".json").read_text())
    if meta["n"] != w.shape[0]:
        raise ValueError(f"sidecar says n={meta['n']}, matrix has {w.shape[0]} rows")
    return CorrelationNetwork(w, meta["measure"], meta["normalization"])
