"""Sweeps in the chemical potential and detection of critical features.

A sweep solves the ground state on a grid of mu values and evaluates the
density and clustering of one or more correlation networks at each point.
Ground-state parity switches are the authoritative discontinuity detector
and are refined by bisection; jumps in the network metrics are reported
alongside them, or as anomalies when no parity switch accompanies them.
"""

from __future__ import annotations

import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ConvergenceError, KitaevNetError
from .freefermion import majorana_zero_mode_potentials
from .measures import LogBase, MeasureKind
from .model import ChainSpec
from .network import Normalization, build_network, clustering, network_report
from .rdm import SPIN
from .solver import fidelity, ground_state, sector_ground_state
from .theory import factorization_potential, pair_inhomogeneity

logger = logging.getLogger(__name__)

DEFAULT_RESOLUTION = 1e-3
C1_RESOLUTION = 1e-4
C1_THRESHOLD = 1e-3
NUDGE = 1e-9
JUMP_FACTOR = 10.0
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def default_workers():
    return max(1, int(os.environ.get("KITAEVNET_WORKERS", "1")))


@dataclass(frozen=True)
class SweepSpec:
    """Grid sweep over mu with every other chain parameter held fixed.

    ``mu_range`` with ``lo == hi`` collapses to a single point.
    """

    template: ChainSpec
    mu_range: tuple = (0.0, 3.0)
    base_points: int = 301
    resolution: float = DEFAULT_RESOLUTION
    measures: tuple = (MeasureKind.CONCURRENCE,)
    metrics: tuple = ("density", "clustering")
    normalization: Normalization = Normalization.MAX_NORMALIZED
    log_base: LogBase = LogBase.NATURAL
    convention: str = SPIN

    def __post_init__(self):
        lo, hi = (float(x) for x in self.mu_range)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError("mu range must be finite")
        if lo > hi:
            raise ValueError(f"mu range lower bound {lo} exceeds upper bound {hi}")
        if self.base_points < 2 and lo != hi:
            raise ValueError("base_points must be >= 2")
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")
        bad = set(self.metrics) - {"density", "clustering"}
        if bad:
            raise ValueError(f"unknown metrics {sorted(bad)}")
        object.__setattr__(self, "mu_range", (lo, hi))
        object.__setattr__(self, "measures", tuple(MeasureKind(m) for m in self.measures))
        object.__setattr__(self, "normalization", Normalization(self.normalization))
        object.__setattr__(self, "log_base", LogBase(self.log_base))

    def grid(self):
        lo, hi = self.mu_range
        if lo == hi:
            return np.array([lo])
        return nudge_grid(np.linspace(lo, hi, self.base_points), predicted_degeneracies(self.template),
                          lo, hi)


@dataclass
class MetricRecord:
    clustering: float
    mean_density: float
    densities: list


@dataclass
class SweepRecord:
    """One grid point; ``failed`` carries the error message of a solver failure."""

    mu: float
    parity: int
    energy: float
    degenerate: bool
    metrics: dict = field(default_factory=dict)
    failed: str | None = None


def predicted_degeneracies(template: ChainSpec):
    """mu values where the two parity sectors are expected to cross."""
    w = abs(template.hopping)
    if template.periodic:
        return [-2.0 * w, 2.0 * w]
    table = majorana_zero_mode_potentials(template.n_sites, template.hopping, template.pairing)
    return list(table.mu)


def nudge_grid(grid, points, lo, hi):
    """Move grid values lying within NUDGE of a predicted crossing off it, inward."""
    grid = grid.copy()
    for p in points:
        near = np.abs(grid - p) < NUDGE
        for k in np.nonzero(near)[0]:
            step = NUDGE if p + NUDGE <= hi else -NUDGE
            if p - NUDGE < lo:
                step = NUDGE
            grid[k] = p + step
    return grid


def _nan_metric(n):
    return MetricRecord(math.nan, math.nan, [math.nan] * n)


def evaluate_point(spec: ChainSpec, measures, normalization=Normalization.MAX_NORMALIZED,
                   log_base=LogBase.NATURAL, convention=SPIN, metrics=("density", "clustering"),
                   method="lanczos", storage="matrix_free") -> SweepRecord:
    """Solve one chain and evaluate the requested networks; failures are recorded."""
    n = spec.n_sites
    try:
        state = ground_state(spec, method=method, storage=storage)
    except ConvergenceError as exc:
        logger.warning("mu=%r: %s (residual %.3g)", spec.chemical_potential, exc, exc.residual)
        return SweepRecord(spec.chemical_potential, 0, math.nan, False,
                           {MeasureKind(m).value: _nan_metric(n) for m in measures}, str(exc))
    out = {}
    for m in measures:
        m = MeasureKind(m)
        net = build_network(state, m, normalization=normalization, log_base=log_base,
                            convention=convention)
        rep = network_report(net)
        rec = MetricRecord(rep["clustering"], rep["mean_density"], rep["densities"])
        if "clustering" not in metrics:
            rec.clustering = math.nan
        if "density" not in metrics:
            rec.mean_density, rec.densities = math.nan, [math.nan] * n
        out[m.value] = rec
    return SweepRecord(spec.chemical_potential, state.parity, state.energy, state.degenerate, out)


def _evaluate_job(args):
    spec, sweep = args
    return evaluate_point(spec, sweep.measures, sweep.normalization, sweep.log_base,
                          sweep.convention, sweep.metrics)


def run_sweep(sweep: SweepSpec, workers=None) -> list:
    """Evaluate every grid point; the result is sorted by mu.

    ``workers > 1`` spreads points over a process pool. Each point is
    independent and deterministic, so the output does not depend on it.
    """
    workers = default_workers() if workers is None else workers
    jobs = [(sweep.template.with_mu(float(mu)), sweep) for mu in sweep.grid()]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_evaluate_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        records = [_evaluate_job(j) for j in jobs]
    records.sort(key=lambda r: r.mu)
    return records


# ---------------------------------------------------------------------------
# discontinuities


def ground_parity(spec: ChainSpec) -> int:
    """+1 or -1 from the sector ground energies (odd wins ties)."""
    e_even = sector_ground_state(spec, 1)[0]
    e_odd = sector_ground_state(spec, -1)[0]
    return 1 if e_even < e_odd - 1e-10 * max(1.0, abs(e_odd)) else -1


def bisect_parity(template: ChainSpec, lo, hi, parity_lo, resolution):
    """Shrink ``[lo, hi]`` around a parity flip until ``hi - lo <= resolution``."""
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if ground_parity(template.with_mu(mid)) == parity_lo:
            lo = mid
        else:
            hi = mid
    return lo, hi


@dataclass
class Discontinuity:
    """A located feature. ``kind`` is ``parity`` or ``anomaly``.

    ``metric_jumps`` maps ``measure/metric`` to ``(jump, jump / median
    adjacent difference)`` across the grid interval containing the feature.
    """

    location: float
    uncertainty: float
    kind: str
    parity_before: int
    parity_after: int
    metric_jumps: dict = field(default_factory=dict)
    metric: str | None = None
    jump: float | None = None


def _metric_series(records):
    series = {}
    for r in records:
        for name, m in r.metrics.items():
            series.setdefault(f"{name}/mean_density", []).append(m.mean_density)
            series.setdefault(f"{name}/clustering", []).append(m.clustering)
    return {k: np.asarray(v, dtype=float) for k, v in series.items()}


def _jumps(values, factor):
    """Per-interval ``|diff|`` and ratio to the median; indices of flagged jumps."""
    diff = np.abs(np.diff(values))
    finite = diff[np.isfinite(diff)]
    median = float(np.median(finite)) if finite.size else math.nan
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = diff / median if median > 0 else np.where(diff > 0, np.inf, 0.0)
    flagged = np.nonzero((diff > factor * median) & (diff > 1e-12))[0] if finite.size else []
    return diff, ratio, flagged


def _runs(indices):
    """Split sorted interval indices into runs of consecutive values."""
    runs = []
    for k in indices:
        if runs and k == runs[-1][-1] + 1:
            runs[-1].append(int(k))
        else:
            runs.append([int(k)])
    return runs


def detect_discontinuities(records, template: ChainSpec | None = None,
                           resolution=DEFAULT_RESOLUTION, jump_factor=JUMP_FACTOR) -> list:
    """Parity switches between adjacent records, plus metric-jump anomalies.

    With a ``template`` each switch is bisected to ``resolution``; without
    one the location is the interval midpoint. Fewer than three records give
    no detections.
    """
    records = [r for r in records if r.failed is None]
    if len(records) < 3:
        return []
    mus = np.array([r.mu for r in records])
    parities = [r.parity for r in records]
    series = {k: _jumps(v, jump_factor) for k, v in _metric_series(records).items()}

    found = []
    claimed = set()
    for k in range(len(records) - 1):
        if parities[k] == parities[k + 1] or 0 in (parities[k], parities[k + 1]):
            continue
        lo, hi = mus[k], mus[k + 1]
        if template is not None:
            lo, hi = bisect_parity(template, lo, hi, parities[k], resolution)
        jumps = {name: (float(d[k]), float(r[k])) for name, (d, r, _) in series.items()}
        found.append(Discontinuity(float(0.5 * (lo + hi)), float(0.5 * (hi - lo)), "parity",
                                   parities[k], parities[k + 1], jumps))
        claimed.add(k)
    for name, (d, r, flagged) in series.items():
        for run in _runs(flagged):
            # a run of jumps next to a parity switch belongs to that switch
            if any(k + s in claimed for k in run for s in (-1, 0, 1)):
                continue
            k = max(run, key=lambda i: d[i])
            a, b = mus[run[0]], mus[run[-1] + 1]
            found.append(Discontinuity(0.5 * (a + b), 0.5 * (b - a), "anomaly",
                                       parities[run[0]], parities[run[-1] + 1],
                                       {name: (float(d[k]), float(r[k]))}, name, float(d[k])))
    found.sort(key=lambda x: (x.location, x.kind))
    return found


# ---------------------------------------------------------------------------
# clustering peak


@dataclass
class C1Result:
    """Outcome of the search for the C = 1 point.

    ``found`` is False when ``|Delta| >= w`` (unless the domain check is
    bypassed) or when the best clustering stays below ``1 - 1e-3``.
    ``search`` names the refined objective: ``clustering`` or ``homogeneity``.
    """

    found: bool
    mu: float
    clustering: float
    measure: str
    predicted: float
    reason: str = ""
    search: str = ""


def weight_dispersion(net) -> float:
    """Standard deviation over mean of the off-diagonal weights (0 iff uniform)."""
    e = net.weights[np.triu_indices(net.n_nodes, 1)]
    mean = e.mean()
    return float(e.std() / mean) if mean > 0 else math.inf


def golden_max(f, lo, hi, tol):
    """Maximizer of a unimodal ``f`` on ``[lo, hi]`` to within ``tol``."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


class _PointCache:
    """Ground states and networks keyed by mu, so no point is solved twice."""

    def __init__(self, template, measure, normalization):
        self.template, self.measure, self.normalization = template, measure, normalization
        self._states, self._nets = {}, {}

    def state(self, mu):
        if mu not in self._states:
            self._states[mu] = ground_state(self.template.with_mu(mu))
        return self._states[mu]

    def network(self, mu):
        if mu not in self._nets:
            self._nets[mu] = build_network(self.state(mu), self.measure,
                                           normalization=self.normalization)
        return self._nets[mu]

    def clustering(self, mu):
        c = clustering(self.network(mu))
        return -math.inf if math.isnan(c) else c

    def homogeneity(self, mu):
        return -pair_inhomogeneity(self.state(mu))


def locate_c1_point(template: ChainSpec, delta, measure=MeasureKind.CONCURRENCE, *,
                    resolution=C1_RESOLUTION, polish_tol=1e-10, coarse_spacing=0.02,
                    normalization=Normalization.MAX_NORMALIZED, check_domain=True) -> C1Result:
    """Maximize clustering over ``mu`` in ``(0, 2w)`` for pairing ``delta``.

    A coarse grid brackets the peak. When the coarse maximum is a clean
    local peak already reaching ``1 - 1e-3``, golden-section search on the
    clustering refines it to ``resolution`` and then ``polish_tol``.

    The peak can be much narrower than the coarse spacing, and ragged near
    its top, because long-range concurrences vanish except very close to
    it. Then the search falls back on the pair matrices themselves: C = 1
    requires every pair matrix to give the same weight, so the smooth
    ``pair_inhomogeneity`` is minimized instead, from the coarse point with
    the most uniform weights, and the clustering is read off at its minimum.
    """
    measure = MeasureKind(measure)
    w = abs(template.hopping)
    template = ChainSpec(template.n_sites, template.hopping, 0.0, delta, template.boundary)
    try:
        predicted = factorization_potential(w, delta)
    except KitaevNetError:
        predicted = math.nan
    if check_domain and abs(delta) >= w:
        return C1Result(False, math.nan, math.nan, measure.value, predicted,
                        "|Delta| >= w: no factorization point")

    cache = _PointCache(template, measure, normalization)
    grid = nudge_grid(np.arange(coarse_spacing, 2 * w, coarse_spacing),
                      predicted_degeneracies(template), 0.0, 2 * w)
    values = np.array([cache.clustering(float(mu)) for mu in grid])
    if not np.any(np.isfinite(values)):
        return C1Result(False, math.nan, math.nan, measure.value, predicted,
                        "clustering undefined on the whole grid", "coarse")
    k = int(np.argmax(values))
    last = len(grid) - 1
    clean = (0 < k < last and values[k - 1] < values[k] > values[k + 1]
             and values[k] >= 1.0 - C1_THRESHOLD)
    if clean:
        search = "clustering"
        lo, hi = grid[k - 1], grid[k + 1]
        mu, c = golden_max(cache.clustering, lo, hi, resolution)
        if polish_tol is not None and polish_tol < resolution:
            mu, c = golden_max(cache.clustering, mu - resolution, mu + resolution, polish_tol)
    else:
        search = "homogeneity"
        k = int(np.argmin([weight_dispersion(cache.network(float(mu))) for mu in grid]))
        lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, last)]
        tol = resolution if polish_tol is None else min(resolution, polish_tol)
        mu, _ = golden_max(cache.homogeneity, lo, hi, tol)
        c = cache.clustering(mu)
    if c < 1.0 - C1_THRESHOLD:
        return C1Result(False, float(mu), c, measure.value, predicted,
                        f"maximum clustering {c:.6g} below 1 - {C1_THRESHOLD:g}", search)
    return C1Result(True, float(mu), c, measure.value, predicted, "", search)


# ---------------------------------------------------------------------------
# fidelity


@dataclass
class FidelitySeries:
    reference_mu: float
    mu: np.ndarray
    fidelity: np.ndarray


def fidelity_sweep(reference_mu, mu_values, template: ChainSpec) -> FidelitySeries:
    """``F(mu) = |<G(reference_mu)|G(mu)>|`` on the given grid."""
    mu_values = np.asarray(mu_values, dtype=float)
    ref = ground_state(template.with_mu(reference_mu))
    f = np.array([fidelity(ref, ground_state(template.with_mu(float(m)))) for m in mu_values])
    return FidelitySeries(float(reference_mu), mu_values, f)


# ---------------------------------------------------------------------------
# report


@dataclass
class CriticalPointReport:
    discontinuities: list
    c1_points: list
    predictions: dict
    extrema_offsets: dict

    def to_dict(self):
        return _jsonable(asdict(self))

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return None if not math.isfinite(x) else x
    if isinstance(x, np.integer):
        return int(x)
    return x


def extrema_offsets(records):
    """Per measure, ``mu`` of the clustering maximum minus ``mu`` of the density minimum."""
    out = {}
    mus = np.array([r.mu for r in records])
    for name, s in _metric_series(records).items():
        measure, metric = name.split("/")
        if metric != "clustering" or np.all(np.isnan(s)):
            continue
        dens = _metric_series(records)[f"{measure}/mean_density"]
        if np.all(np.isnan(dens)):
            continue
        mu_c = float(mus[np.nanargmax(s)])
        mu_d = float(mus[np.nanargmin(dens)])
        out[measure] = {"mu_clustering_max": mu_c, "mu_density_min": mu_d,
                        "offset": mu_c - mu_d}
    return out


def build_report(records, template: ChainSpec, discontinuities, c1_points=(),
                 tolerance=DEFAULT_RESOLUTION) -> CriticalPointReport:
    """Match detections against the closed-form predictions."""
    w, delta = abs(template.hopping), template.pairing
    switches = [d.location for d in discontinuities if d.kind == "parity"]
    lo = min(r.mu for r in records) if records else math.nan
    hi = max(r.mu for r in records) if records else math.nan

    def status(mu):
        if not lo <= mu <= hi:
            return "out_of_range"
        return "matched" if any(abs(s - mu) <= tolerance for s in switches) else "unmatched"

    predictions = {}
    if template.periodic:
        predictions["mu_c"] = [{"mu": m, "status": status(m)} for m in (-2 * w, 2 * w)]
    else:
        table = majorana_zero_mode_potentials(template.n_sites, template.hopping, delta)
        predictions["mu_n"] = [{"n": int(n), "mu": float(m), "status": status(m)}
                               for n, m in zip(table.modes, table.mu)]
        predictions["zero_modes_in_domain"] = table.in_domain
    try:
        mu_star = factorization_potential(w, delta)
        matched = any(c.found and abs(c.mu - mu_star) <= tolerance for c in c1_points)
        predictions["mu_star"] = {"mu": mu_star,
                                  "status": "matched" if matched else
                                  ("not_searched" if not c1_points else "unmatched")}
    except KitaevNetError:
        predictions["mu_star"] = {"mu": None, "status": "out_of_domain"}
    return CriticalPointReport(list(discontinuities), list(c1_points), predictions,
                               extrema_offsets(records))
