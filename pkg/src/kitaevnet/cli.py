"""Command-line entry point.

Commands
--------
point       ground state and network metrics at one mu (JSON)
sweep       metrics over a mu grid (CSV)
detect      sweep plus parity-switch detection and predictions (JSON)
zero-modes  closed-form zero-mode potentials of the open chain (CSV)
validate    built-in numerical self-checks

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import logging
import math
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import kernels
from .errors import CapacityError, ConvergenceError, KitaevNetError
from .freefermion import bdg_spectrum, majorana_zero_mode_potentials, min_bdg_gap
from .measures import LogBase, MeasureKind
from .model import (
    MAX_SITES,
    Boundary,
    ChainSpec,
    XYSpec,
    build_kitaev_hamiltonian,
    build_xy_hamiltonian,
    get_basis,
)
from .network import Normalization
from .rdm import FERMIONIC, SPIN, all_pair_rdms, reduce_to_pair
from .scan import (
    SweepSpec,
    build_report,
    default_workers,
    detect_discontinuities,
    evaluate_point,
    locate_c1_point,
    run_sweep,
)
from .solver import ground_energy_analytic, ground_state, quasiparticle_spectrum, sector_ground_state

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
COMMANDS = ("point", "sweep", "detect", "zero-modes", "validate")


class ConfigError(KitaevNetError, ValueError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass
class RunConfig:
    command: str = "point"
    n: int = 14
    w: float = 1.0
    mu: float = 0.0
    delta: float = 0.5
    boundary: str = "periodic"
    mu_range: tuple = (0.0, 3.0)
    points: int = 301
    resolution: float = 1e-3
    measures: tuple = ("concurrence",)
    normalization: str = "max_normalized"
    log_base: str = "natural"
    convention: str = SPIN
    find_c1: bool = False
    output: str | None = None
    report: str | None = None
    workers: int = 1
    seed: int = 7

    def chain(self) -> ChainSpec:
        return ChainSpec(self.n, self.w, self.mu, self.delta, self.boundary)


CONFIG_KEYS = {f.name for f in fields(RunConfig)}


def _parse_range(text):
    if isinstance(text, (list, tuple)):
        if len(text) != 2:
            raise ValueError("expected two values")
        return float(text[0]), float(text[1])
    parts = str(text).split(":")
    if len(parts) != 2:
        raise ValueError(f"expected lo:hi, got {text!r}")
    return float(parts[0]), float(parts[1])


def _choice(key, value, allowed):
    if value not in allowed:
        raise ConfigError(key, f"{value!r} is not one of {sorted(allowed)}")
    return value


def validate_config(raw: dict) -> RunConfig:
    """Coerce and check every field; raises ConfigError naming the bad key."""
    unknown = sorted(set(raw) - CONFIG_KEYS)
    if unknown:
        raise ConfigError(unknown[0], "unknown configuration key")
    cfg = RunConfig()
    converters = {
        "n": int, "points": int, "workers": int, "seed": int,
        "w": float, "mu": float, "delta": float, "resolution": float,
        "mu_range": _parse_range, "find_c1": bool,
    }
    for key, value in raw.items():
        try:
            if key in converters:
                if key in ("n", "points", "workers", "seed") and isinstance(value, float) \
                        and not value.is_integer():
                    raise ValueError(f"expected an integer, got {value!r}")
                value = converters[key](value)
            elif key == "measures":
                value = (value,) if isinstance(value, str) else tuple(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(key, str(exc)) from None
        setattr(cfg, key, value)

    _choice("command", cfg.command, set(COMMANDS))
    _choice("boundary", cfg.boundary, {b.value for b in Boundary})
    _choice("normalization", cfg.normalization, {n.value for n in Normalization})
    _choice("log_base", cfg.log_base, {b.value for b in LogBase})
    _choice("convention", cfg.convention, {SPIN, FERMIONIC})
    if not cfg.measures:
        raise ConfigError("measures", "at least one measure is required")
    for m in cfg.measures:
        _choice("measures", m, {k.value for k in MeasureKind})
    cfg.measures = tuple(dict.fromkeys(cfg.measures))
    for key in ("w", "mu", "delta", "resolution"):
        if not math.isfinite(getattr(cfg, key)):
            raise ConfigError(key, "must be finite")
    if not 2 <= cfg.n <= MAX_SITES:
        raise ConfigError("n", f"must lie in [2, {MAX_SITES}], got {cfg.n}")
    if cfg.points < 1:
        raise ConfigError("points", "must be positive")
    if cfg.resolution <= 0:
        raise ConfigError("resolution", "must be positive")
    if cfg.workers < 1:
        raise ConfigError("workers", "must be >= 1")
    lo, hi = cfg.mu_range
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
        raise ConfigError("mu_range", f"need finite lo <= hi, got {lo}:{hi}")
    if lo < hi and cfg.points < 2:
        raise ConfigError("points", "a range needs at least 2 points")
    return cfg


def build_parser():
    parser = argparse.ArgumentParser(prog="kitaevnet",
                                     description="Correlation networks of Kitaev chain ground states.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="flat JSON object of defaults; flags override it")
    common.add_argument("--n", type=int, help="number of sites (default 14)")
    common.add_argument("--w", type=float, help="hopping (default 1)")
    common.add_argument("--delta", type=float, help="pairing (default 0.5)")
    common.add_argument("--boundary", choices=[b.value for b in Boundary])
    common.add_argument("--workers", type=int,
                        help="process count for sweeps (default $KITAEVNET_WORKERS or 1)")
    net = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    net.add_argument("--measure", dest="measures", action="append",
                     choices=[m.value for m in MeasureKind],
                     help="edge measure; repeat for several (default concurrence)")
    net.add_argument("--normalization", choices=[n.value for n in Normalization],
                     help="clustering weights (default max_normalized)")
    net.add_argument("--raw-clustering", dest="normalization", action="store_const",
                     const=Normalization.RAW.value, help="same as --normalization raw")
    net.add_argument("--log-base", dest="log_base", choices=[b.value for b in LogBase])
    net.add_argument("--convention", choices=[SPIN, FERMIONIC], help="pair RDM convention")
    grid = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    grid.add_argument("--mu-range", dest="mu_range", type=str,
                      help="lo:hi (write --mu-range=-3:0 for negative bounds)")
    grid.add_argument("--points", type=int, help="base grid points (default 301)")
    grid.add_argument("--resolution", type=float, help="bisection resolution (default 1e-3)")
    grid.add_argument("-o", "--output", help="CSV path (default stdout)")

    p = sub.add_parser("point", parents=[common, net], argument_default=argparse.SUPPRESS,
                       help="one parameter point")
    p.add_argument("--mu", type=float)
    p.add_argument("--report", help="JSON path (default stdout)")
    sub.add_parser("sweep", parents=[common, net, grid], argument_default=argparse.SUPPRESS,
                   help="metrics over a mu grid")
    p = sub.add_parser("detect", parents=[common, net, grid], argument_default=argparse.SUPPRESS,
                       help="locate parity switches and the C = 1 point")
    p.add_argument("--report", help="JSON path (default stdout)")
    p.add_argument("--find-c1", dest="find_c1", action="store_true",
                   help="also search for the C = 1 point of each measure")
    p = sub.add_parser("zero-modes", parents=[common], argument_default=argparse.SUPPRESS,
                       help="closed-form zero-mode potentials")
    p.add_argument("-o", "--output", help="CSV path (default stdout)")
    p = sub.add_parser("validate", parents=[common], argument_default=argparse.SUPPRESS,
                       help="numerical self-checks")
    p.add_argument("--seed", type=int)
    return parser


def parse_config(argv=None) -> RunConfig:
    """Merge defaults, the optional JSON file and the flags (in that order)."""
    ns = vars(build_parser().parse_args(argv))
    ns.pop("verbose", None)
    raw = {}
    path = ns.pop("config", None)
    if path is not None:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", str(exc)) from None
        if not isinstance(data, dict):
            raise ConfigError("config", "file must hold a single JSON object")
        raw.update(data)
    raw.update(ns)
    if "workers" not in raw:
        raw["workers"] = default_workers()
    return validate_config(raw)


# ---------------------------------------------------------------------------
# serialization


def fmt(x):
    """Shortest round-trip text for floats; ``nan`` for missing values."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def csv_header(n):
    return (["mu", "N", "delta", "w", "boundary", "parity", "energy", "degenerate",
             "measure", "clustering", "mean_density"] + [f"d_{i}" for i in range(n)])


def write_sweep_csv(records, template: ChainSpec, measures, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(csv_header(template.n_sites))
    for r in records:
        for m in measures:
            met = r.metrics[MeasureKind(m).value]
            writer.writerow([fmt(v) for v in (
                r.mu, template.n_sites, template.pairing, template.hopping,
                template.boundary.value, r.parity, r.energy, r.degenerate,
                MeasureKind(m).value, met.clustering, met.mean_density, *met.densities)])


def _open_out(path):
    return open(path, "w", newline="") if path else contextlib.nullcontext(sys.stdout)


def _emit_json(obj, path):
    text = json.dumps(obj, indent=2, allow_nan=False) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _finite(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _sweep_spec(cfg: RunConfig) -> SweepSpec:
    return SweepSpec(cfg.chain(), cfg.mu_range, cfg.points, cfg.resolution, cfg.measures,
                     normalization=cfg.normalization, log_base=cfg.log_base,
                     convention=cfg.convention)


# ---------------------------------------------------------------------------
# commands


def cmd_point(cfg: RunConfig):
    spec = cfg.chain()
    rec = evaluate_point(spec, cfg.measures, cfg.normalization, cfg.log_base, cfg.convention)
    if rec.failed:
        raise ConvergenceError(rec.failed, math.nan)
    out = {
        "mu": spec.chemical_potential, "N": spec.n_sites, "delta": spec.pairing,
        "w": spec.hopping, "boundary": spec.boundary.value, "parity": rec.parity,
        "energy": rec.energy, "degenerate": rec.degenerate,
        "networks": {k: {"clustering": _finite(v.clustering), "mean_density": v.mean_density,
                         "densities": v.densities} for k, v in rec.metrics.items()},
    }
    if spec.periodic:
        out["energy_closed_form"] = ground_energy_analytic(spec)
    _emit_json(out, cfg.report)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig):
    sweep = _sweep_spec(cfg)
    records = run_sweep(sweep, workers=cfg.workers)
    with _open_out(cfg.output) as stream:
        write_sweep_csv(records, sweep.template, sweep.measures, stream)
    failed = [r.mu for r in records if r.failed]
    if failed:
        logger.error("%d grid points failed to converge, first at mu=%r", len(failed), failed[0])
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_detect(cfg: RunConfig):
    sweep = _sweep_spec(cfg)
    records = run_sweep(sweep, workers=cfg.workers)
    if cfg.output:
        with open(cfg.output, "w", newline="") as fh:
            write_sweep_csv(records, sweep.template, sweep.measures, fh)
    found = detect_discontinuities(records, sweep.template, cfg.resolution)
    c1 = []
    if cfg.find_c1:
        c1 = [locate_c1_point(sweep.template, cfg.delta, m, normalization=cfg.normalization)
              for m in sweep.measures]
    report = build_report(records, sweep.template, found, c1, tolerance=cfg.resolution)
    out = report.to_dict()
    out["parity_switches"] = sum(d.kind == "parity" for d in found)
    _emit_json(out, cfg.report)
    return EXIT_NUMERIC if any(r.failed for r in records) else EXIT_OK


def cmd_zero_modes(cfg: RunConfig):
    table = majorana_zero_mode_potentials(cfg.n, cfg.w, cfg.delta)
    if not table.in_domain:
        sys.stderr.write(f"|Delta| > |w| (|{cfg.delta!r}| > |{cfg.w!r}|): zero-mode potentials "
                         "are complex; no real mu_n\n")
        return EXIT_OK
    with _open_out(cfg.output) as stream:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["n", "mu_n", "bdg_gap"])
        for n, mu in sorted(zip(table.modes, table.mu)):
            gap = min_bdg_gap(ChainSpec(cfg.n, cfg.w, float(mu), cfg.delta, Boundary.OPEN))
            writer.writerow([fmt(n), fmt(mu), fmt(gap)])
    return EXIT_OK


def _check(name, error, tol, lines):
    ok = bool(error <= tol)
    lines.append((name, ok, error, tol))
    return ok


def run_validation(n, seed=7):
    """Oracle checks at ``n`` sites; returns ``(name, ok, error, tol)`` tuples."""
    rng = np.random.default_rng(seed)
    lines = []
    pts = [(float(rng.uniform(-3, 3)), float(rng.uniform(-2, 2))) for _ in range(4)]

    err = 0.0
    for mu, d in pts:
        spec = ChainSpec(n, 1.0, mu, d)
        for parity in (1, -1):
            e_it = sector_ground_state(spec, parity)[0]
            e_dn = sector_ground_state(spec, parity, method="dense")[0]
            err = max(err, abs(e_it - e_dn) / max(1.0, abs(e_dn)))
    _check("iterative vs dense sector energies", err, 1e-10, lines)

    err = 0.0
    for mu, d in pts:
        spec = ChainSpec(n, 1.0, mu, d)
        e = ground_state(spec).energy
        err = max(err, abs(e - ground_energy_analytic(spec)) / max(1.0, abs(e)))
    _check("ground energy vs -1/2 sum Lambda_k", err, 1e-10, lines)

    err = 0.0
    for mu, d in pts[:2]:
        spec = ChainSpec(n, 1.0, mu, d)
        lam = np.sort(quasiparticle_spectrum(spec).lambdas)
        err = max(err, float(np.max(np.abs(lam - bdg_spectrum(spec)))))
    _check("BdG spectrum vs Lambda_k", err, 1e-12, lines)

    m = min(n, 8)
    odd = get_basis(m, -1)
    err = 0.0
    for mu, d in pts[:2]:
        xy = build_xy_hamiltonian(XYSpec(m, 1.0, d, mu), basis=odd).to_dense()
        kit = build_kitaev_hamiltonian(ChainSpec(m, 1.0, mu, d), basis=odd).to_dense()
        err = max(err, float(np.max(np.abs(np.linalg.eigvalsh(xy) - np.linalg.eigvalsh(kit)))))
    _check(f"XY vs Kitaev odd-sector spectrum (N={m})", err, 1e-10, lines)

    state = ground_state(ChainSpec(m, 1.0, *pts[0]))
    pairs, rhos = all_pair_rdms(state)
    err = max(float(np.max(np.abs(rho - reduce_to_pair(state, i, j).entries)))
              for (i, j), rho in zip(pairs, rhos))
    _check(f"pair RDM fast path vs partial trace (N={m})", err, 1e-12, lines)
    return lines


def cmd_validate(cfg: RunConfig):
    lines = run_validation(cfg.n, cfg.seed)
    for name, ok, error, tol in lines:
        sys.stdout.write(f"{'PASS' if ok else 'FAIL'}  {name}: error {error:.3e} (tol {tol:.0e})\n")
    sys.stdout.write(f"backend: {kernels.BACKEND}\n")
    return EXIT_OK if all(ok for _, ok, _, _ in lines) else EXIT_NUMERIC


HANDLERS = {
    "point": cmd_point,
    "sweep": cmd_sweep,
    "detect": cmd_detect,
    "zero-modes": cmd_zero_modes,
    "validate": cmd_validate,
}


def execute(cfg: RunConfig) -> int:
    try:
        return HANDLERS[cfg.command](cfg)
    except ConvergenceError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except CapacityError as exc:
        sys.stderr.write(f"error: n: {exc}\n")
        return EXIT_CONFIG


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if "-v" in argv or "--verbose" in argv:
        logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    return execute(cfg)


if __name__ == "__main__":
    sys.exit(main())
