"""Batch front end: config files, subcommands, file outputs.

Config files are flat key = value text with # comments and dotted
section prefixes (grid.N = 4096).  Numeric bulk output is CSV, scalar
summaries are JSON, and every command writes a manifest recording the
config hash, the grid, and the library versions, so a run can be
reproduced from its output directory alone.

Exit codes: 0 success, 1 module error, 2 config error, 3 verification
failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import os
import sys
from dataclasses import dataclass, replace

import numpy as np
import scipy

from . import __version__
from .classify import (
    NOT_APPLICABLE,
    ClassificationEntry,
    classify_intercritical,
    classify_mass_critical,
    classify_sets,
    optimal_frequency,
)
from .evolve import EvolutionConfig, evolve, trace_to_csv
from .grid import RadialField, RadialGrid, build_grid, field_from_csv, field_to_csv
from .groundstate import GroundState, petviashvili_solve
from .params import Criticality, ProblemParams, derive_exponents
from .potential import PotentialSpec, check_assumptions


class ConfigError(Exception):
    """Malformed or inconsistent configuration."""


_REQUIRED = object()

_INITIAL_KINDS = ("ground_state_multiple", "gaussian", "from_file")


class _ConfigView:
    """Typed access to parsed key-value pairs with line diagnostics."""

    def __init__(self, pairs: dict[str, tuple[str, int]]):
        self.pairs = pairs
        self.used: set[str] = set()

    def _raw(self, key: str, default):
        if key in self.pairs:
            self.used.add(key)
            return self.pairs[key][0]
        if default is _REQUIRED:
            raise ConfigError(f"missing required key {key!r}")
        return default

    def line(self, key: str) -> int:
        return self.pairs[key][1]

    def get_str(self, key: str, default=_REQUIRED) -> str:
        v = self._raw(key, default)
        return v if isinstance(v, str) else v

    def get_float(self, key: str, default=_REQUIRED) -> float:
        v = self._raw(key, default)
        if isinstance(v, float):
            return v
        try:
            return float(v)
        except ValueError:
            raise ConfigError(
                f"line {self.line(key)}: key {key!r} expects a number, got {v!r}"
            ) from None

    def get_int(self, key: str, default=_REQUIRED) -> int:
        v = self._raw(key, default)
        if isinstance(v, int):
            return v
        try:
            return int(v)
        except ValueError:
            raise ConfigError(
                f"line {self.line(key)}: key {key!r} expects an integer, got {v!r}"
            ) from None

    def get_bool(self, key: str, default=_REQUIRED) -> bool:
        v = self._raw(key, default)
        if isinstance(v, bool):
            return v
        low = v.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise ConfigError(
            f"line {self.line(key)}: key {key!r} expects true/false, got {v!r}"
        )

    def reject_unknown(self) -> None:
        unknown = sorted(set(self.pairs) - self.used)
        if unknown:
            k = unknown[0]
            raise ConfigError(f"line {self.line(k)}: unknown key {k!r}")


def parse_config_text(text: str) -> dict[str, tuple[str, int]]:
    """Parse flat key = value lines into {key: (value, line_number)}."""
    pairs: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in pairs:
            raise ConfigError(
                f"line {lineno}: duplicate key {key!r} (first on line {pairs[key][1]})"
            )
        pairs[key] = (value, lineno)
    return pairs


def config_hash(pairs: dict[str, tuple[str, int]]) -> str:
    """Order- and comment-insensitive digest of the parsed pairs."""
    canon = "\n".join(f"{k}={v}" for k, (v, _) in sorted(pairs.items()))
    return hashlib.sha256(canon.encode()).hexdigest()


@dataclass(frozen=True)
class RunConfig:
    """Fully validated configuration of one run."""

    params: ProblemParams
    potential: PotentialSpec
    r_max: float
    num_cells: int
    grading: float
    initial_kind: str
    initial_alpha: float
    initial_amplitude: float
    initial_width: float
    initial_path: str | None
    evolution: EvolutionConfig
    classify_omega: float | None  # None selects the optimized frequency
    sweep_key: str | None
    sweep_values: tuple[str, ...]
    out_dir: str
    sha: str


def build_run_config(pairs: dict[str, tuple[str, int]], out_override: str | None = None) -> RunConfig:
    view = _ConfigView(pairs)
    try:
        params = ProblemParams(
            n=view.get_int("params.n"),
            b=view.get_float("params.b"),
            c=view.get_float("params.c"),
            p=view.get_float("params.p"),
            omega=view.get_float("params.omega", 1.0),
        )
    except ValueError as e:
        raise ConfigError(f"params: {e}") from None

    family = view.get_str("potential.family", "zero")
    try:
        potential = PotentialSpec(
            family,
            view.get_float("potential.a", 0.0),
            view.get_float("potential.s", 0.0 if family != "inverse_power" else 1.0),
        )
    except ValueError as e:
        raise ConfigError(f"potential: {e}") from None

    kind = view.get_str("initial.kind", "ground_state_multiple")
    if kind not in _INITIAL_KINDS:
        raise ConfigError(
            f"initial.kind must be one of {_INITIAL_KINDS}, got {kind!r}"
        )
    alpha = view.get_float("initial.alpha", 1.0)
    if not alpha > 0:
        raise ConfigError(f"initial.alpha must be positive, got {alpha}")
    path = view.get_str("initial.path", None)
    if kind == "from_file":
        if path is None:
            raise ConfigError("initial.kind = from_file requires initial.path")
        if not os.path.exists(path):
            raise ConfigError(f"initial.path does not exist: {path}")

    try:
        evolution = EvolutionConfig(
            dt0=view.get_float("evolve.dt0", 1e-3),
            t_end=view.get_float("evolve.t_end", 1.0),
            sample_every=view.get_int("evolve.sample_every", 10),
            blowup_factor=view.get_float("evolve.blowup_factor", 100.0),
            dt_min=view.get_float("evolve.dt_min", 1e-9),
            adaptivity=view.get_bool("evolve.adaptivity", True),
        )
    except RuntimeError as e:
        raise ConfigError(f"evolve: {e}") from None

    omega_raw = view.get_str("classify.omega", "optimal")
    classify_omega: float | None
    if omega_raw == "optimal":
        classify_omega = None
    else:
        try:
            classify_omega = float(omega_raw)
        except ValueError:
            raise ConfigError(
                f"classify.omega expects 'optimal' or a number, got {omega_raw!r}"
            ) from None
        if not classify_omega > 0:
            raise ConfigError(f"classify.omega must be positive, got {classify_omega}")

    sweep_key = view.get_str("sweep.key", None)
    sweep_raw = view.get_str("sweep.values", None)
    sweep_values: tuple[str, ...] = ()
    if sweep_raw is not None:
        sweep_values = tuple(s.strip() for s in sweep_raw.split(",") if s.strip())
        if not sweep_values:
            raise ConfigError("sweep.values is empty")

    out_dir = view.get_str("output.dir", "out")
    if out_override is not None:
        out_dir = out_override

    cfg = RunConfig(
        params=params,
        potential=potential,
        r_max=view.get_float("grid.r_max", 30.0),
        num_cells=view.get_int("grid.N", 4096),
        grading=view.get_float("grid.gamma", 2.0),
        initial_kind=kind,
        initial_alpha=alpha,
        initial_amplitude=view.get_float("initial.amplitude", 1.0),
        initial_width=view.get_float("initial.width", 1.0),
        initial_path=path,
        evolution=evolution,
        classify_omega=classify_omega,
        sweep_key=sweep_key,
        sweep_values=sweep_values,
        out_dir=out_dir,
        sha=config_hash(pairs),
    )
    view.reject_unknown()
    return cfg


def load_run_config(path: str, out_override: str | None = None) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    return build_run_config(parse_config_text(text), out_override)


def _make_grid(cfg: RunConfig) -> RadialGrid:
    return build_grid(
        cfg.params.n, cfg.params.b, r_max=cfg.r_max, N=cfg.num_cells, grading=cfg.grading
    )


def build_initial(cfg: RunConfig, grid: RadialGrid) -> RadialField:
    """Construct the initial datum declared by the config."""
    if cfg.initial_kind == "ground_state_multiple":
        gs = petviashvili_solve(cfg.params, grid=grid)
        return RadialField(grid, cfg.initial_alpha * gs.profile.values)
    if cfg.initial_kind == "gaussian":
        vals = cfg.initial_amplitude * np.exp(-((grid.nodes / cfg.initial_width) ** 2))
        return RadialField(grid, vals)
    return field_from_csv(grid, cfg.initial_path)


def _write_json(path: str, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_manifest(cfg: RunConfig, command: str, outputs: list[str]) -> None:
    manifest = {
        "command": command,
        "config_sha256": cfg.sha,
        "grid": {
            "r_max": cfg.r_max,
            "N": cfg.num_cells,
            "gamma": cfg.grading,
            "n": cfg.params.n,
            "b": cfg.params.b,
        },
        "versions": {
            "inls-lab": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "outputs": sorted(outputs),
    }
    _write_json(os.path.join(cfg.out_dir, "manifest.json"), manifest)


def cmd_groundstate(cfg: RunConfig) -> int:
    grid = _make_grid(cfg)
    gs = petviashvili_solve(cfg.params, grid=grid)
    os.makedirs(cfg.out_dir, exist_ok=True)
    field_to_csv(gs.profile, os.path.join(cfg.out_dir, "profile.csv"))
    _write_json(os.path.join(cfg.out_dir, "groundstate.json"), gs.as_dict())
    write_manifest(cfg, "groundstate", ["profile.csv", "groundstate.json"])
    print(f"groundstate: residual {gs.residual:.3e}, action {gs.m_omega:.12g}")
    return 0


def cmd_check_potential(cfg: RunConfig) -> int:
    report = check_assumptions(cfg.potential, cfg.params)
    os.makedirs(cfg.out_dir, exist_ok=True)
    _write_json(os.path.join(cfg.out_dir, "assumptions.json"), report.as_dict())
    write_manifest(cfg, "check-potential", ["assumptions.json"])
    for name, verdict in report.verdicts().items():
        print(f"({name}): {verdict.status}")
    print(f"omega1 = {report.omega1:.12g}")
    return 0


def _classification_entries(
    cfg: RunConfig, u0: RadialField, gs1: GroundState
) -> tuple[list[ClassificationEntry], dict | None]:
    """All three routes plus the frequency report when it exists."""
    entries = [
        classify_mass_critical(u0, cfg.params, cfg.potential, gs1),
        classify_intercritical(u0, cfg.params, cfg.potential, gs1),
    ]
    freq = None
    crit = derive_exponents(cfg.params).criticality
    omega = cfg.classify_omega
    if crit is Criticality.INTERCRITICAL:
        freq = optimal_frequency(u0, cfg.params, gs1, cfg.potential).as_dict()
    elif omega is None:
        omega = gs1.omega  # optimized frequency undefined off the intercritical range
    entries.append(classify_sets(u0, cfg.params, cfg.potential, gs1, omega))
    return entries, freq


def headline_verdict(entries: list[ClassificationEntry]) -> str:
    """First applicable verdict in route order, else NotApplicable."""
    for e in entries:
        if e.verdict != NOT_APPLICABLE:
            return e.verdict
    return NOT_APPLICABLE


def _solve_reference_state(cfg: RunConfig, grid: RadialGrid) -> GroundState:
    return petviashvili_solve(cfg.params.with_omega(1.0), grid=grid)


def cmd_classify(cfg: RunConfig) -> int:
    grid = _make_grid(cfg)
    gs1 = _solve_reference_state(cfg, grid)
    u0 = build_initial(cfg, grid)
    entries, freq = _classification_entries(cfg, u0, gs1)
    os.makedirs(cfg.out_dir, exist_ok=True)
    _write_json(
        os.path.join(cfg.out_dir, "classification.json"),
        [e.as_dict() for e in entries],
    )
    outputs = ["classification.json"]
    if freq is not None:
        _write_json(os.path.join(cfg.out_dir, "frequency.json"), freq)
        outputs.append("frequency.json")
    write_manifest(cfg, "classify", outputs)
    for e in entries:
        print(f"{e.theorem}: {e.verdict}")
    return 0


def cmd_evolve(cfg: RunConfig) -> int:
    grid = _make_grid(cfg)
    u0 = build_initial(cfg, grid)
    trace = evolve(u0, cfg.evolution, cfg.params, cfg.potential)
    os.makedirs(cfg.out_dir, exist_ok=True)
    trace_to_csv(trace, os.path.join(cfg.out_dir, "trace.csv"))
    write_manifest(cfg, "evolve", ["trace.csv", "trace.events.json"])
    kind, t = trace.events[-1]
    growth = trace.grad_norm[-1] / trace.grad_norm[0] if trace.grad_norm[0] > 0 else 0.0
    print(f"evolve: {kind} at t = {t:.6g}, gradient growth {growth:.6g}")
    return 0


def _run_sweep_point(args: tuple) -> tuple[int, str, str, str, float, float]:
    """One sweep point: classify and evolve in its own directory."""
    idx, pairs, key, value, point_dir = args
    pairs = dict(pairs)
    pairs[key] = (value, 0)
    cfg = build_run_config(pairs, out_override=point_dir)
    grid = _make_grid(cfg)
    gs1 = _solve_reference_state(cfg, grid)
    u0 = build_initial(cfg, grid)
    entries, freq = _classification_entries(cfg, u0, gs1)
    trace = evolve(u0, cfg.evolution, cfg.params, cfg.potential)

    os.makedirs(cfg.out_dir, exist_ok=True)
    _write_json(
        os.path.join(cfg.out_dir, "classification.json"),
        [e.as_dict() for e in entries],
    )
    outputs = ["classification.json", "trace.csv", "trace.events.json"]
    if freq is not None:
        _write_json(os.path.join(cfg.out_dir, "frequency.json"), freq)
        outputs.append("frequency.json")
    trace_to_csv(trace, os.path.join(cfg.out_dir, "trace.csv"))
    write_manifest(cfg, "sweep-point", outputs)

    kind, t = trace.events[-1]
    growth = trace.grad_norm[-1] / trace.grad_norm[0] if trace.grad_norm[0] > 0 else 0.0
    return idx, value, headline_verdict(entries), kind, t, growth


def cmd_sweep(cfg: RunConfig, pairs: dict[str, tuple[str, int]], jobs: int) -> int:
    if cfg.sweep_key is None or not cfg.sweep_values:
        raise ConfigError("sweep requires sweep.key and sweep.values")
    if cfg.sweep_key not in pairs:
        # The axis may introduce a key the base config leaves at default.
        known_prefixes = ("params.", "potential.", "grid.", "initial.", "evolve.", "classify.")
        if not cfg.sweep_key.startswith(known_prefixes):
            raise ConfigError(f"sweep.key {cfg.sweep_key!r} is not a config key")

    os.makedirs(cfg.out_dir, exist_ok=True)
    tasks = [
        (i, pairs, cfg.sweep_key, v, os.path.join(cfg.out_dir, f"point_{i:03d}"))
        for i, v in enumerate(cfg.sweep_values)
    ]
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_sweep_point, tasks))
    else:
        rows = [_run_sweep_point(t) for t in tasks]
    rows.sort(key=lambda r: r[0])

    summary = os.path.join(cfg.out_dir, "summary.csv")
    with open(summary, "w", newline="") as fh:
        fh.write("index,key,value,verdict,event,event_time,grad_growth\n")
        for idx, value, verdict, kind, t, growth in rows:
            fh.write(
                f"{idx},{cfg.sweep_key},{value},{verdict},{kind},{t:.17g},{growth:.17g}\n"
            )
    write_manifest(cfg, "sweep", ["summary.csv"])
    for idx, value, verdict, kind, t, growth in rows:
        print(f"point {idx:03d} {cfg.sweep_key}={value}: {verdict}, {kind} at t={t:.6g}")
    return 0


def cmd_verify() -> int:
    from .verification import run_all

    results = run_all()
    failed = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: measured {r.measured:.6g} vs tolerance {r.tolerance:.6g}"
              + (f" ({r.detail})" if r.detail else ""))
        failed += 0 if r.passed else 1
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="inls-lab",
        description="Ground states, classification, and evolution for the weighted NLS",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("groundstate", "check-potential", "classify", "evolve", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to key = value config file")
        p.add_argument("--out", default=None, help="output directory (overrides output.dir)")
        p.add_argument("--jobs", type=int, default=1, help="parallel workers (sweep only)")
    sub.add_parser("verify")
    return parser


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "verify":
        return cmd_verify()
    cfg = load_run_config(args.config, args.out)
    if args.command == "groundstate":
        return cmd_groundstate(cfg)
    if args.command == "check-potential":
        return cmd_check_potential(cfg)
    if args.command == "classify":
        return cmd_classify(cfg)
    if args.command == "evolve":
        return cmd_evolve(cfg)
    with open(args.config) as fh:
        pairs = parse_config_text(fh.read())
    return cmd_sweep(cfg, pairs, max(1, args.jobs))


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # any module error maps to the generic failure code
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
