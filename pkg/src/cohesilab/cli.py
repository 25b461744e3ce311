"""Command-line entry point.

::

    cohesilab <cmd> --config study.toml [--out DIR] [--kinds L12,D1] [--ell 10,5,1]

Commands: ``catalog``, ``respond``, ``profiles``, ``oracle``, ``verify`` and
``sweep``. Work is split into (kind, internal length) cells that run in
parallel; ``COHESILAB_THREADS`` caps the number of worker processes.

Exit status: 0 success, 1 failed invariant, 2 configuration error, 3 numeric
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, model_functions
from .catalog import FAMILY, KINDS, bilinear_derive, normalization_cw, tsl_closed_form
from .config import StudyConfig, parse_config
from .errors import CohesilabError, ConfigError, ModelError, NumericError, StepUnderflow, ValidationError
from .identification import framework_constants, solve_ks
from .io import Dataset, PlotSpec, atomic_write, json_safe, plot_svg, write_dataset
from .numerics import QUAD_TOL, ROOT_TOL
from .oracle import BarMesh, OracleOptions, softening_deviation, trace_response
from .response import (
    RTOL,
    BarFitWarning,
    displacement_profile,
    global_response,
    half_width,
    softening_branch,
    ultimate_opening,
)
from .verify import kind_checks, oracle_checks

COMMANDS = ("catalog", "respond", "profiles", "oracle", "verify", "sweep")
EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
ORACLE_TOL = 0.02


@dataclass
class CellResult:
    """What a worker hands back: written files, console lines and a status."""

    status: int = EXIT_OK
    files: list = field(default_factory=list)
    lines: list = field(default_factory=list)
    row: list | None = None
    checks: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# Shared plumbing
# ---------------------------------------------------------------------------

def worker_count(cfg: StudyConfig, n_tasks: int) -> int:
    """Workers from the config (or the CPU count), capped by ``COHESILAB_THREADS``."""
    n = cfg.threads or os.cpu_count() or 1
    env = os.environ.get("COHESILAB_THREADS")
    if env is not None:
        try:
            cap = int(env)
        except ValueError:
            raise ValidationError("COHESILAB_THREADS", "must be a positive integer") from None
        if cap < 1:
            raise ValidationError("COHESILAB_THREADS", "must be a positive integer")
        n = min(n, cap)
    return max(1, min(n, n_tasks))


def run_cells(fn, tasks: list, workers: int) -> list:
    """Apply ``fn`` to every task; results come back in task order."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _ell_tag(ell: float) -> str:
    return f"ell_{ell:g}"


def provenance(cfg: StudyConfig, kind: str | None, ell: float | None, **extra) -> dict:
    mat = cfg.material if ell is None else cfg.material.with_ell(ell)
    block = {
        "tool": "cohesilab",
        "version": __version__,
        "material": {"L": mat.L, "E": mat.E, "Gc": mat.Gc, "sigma_c": mat.sigma_c, "ell": mat.ell},
        "tolerances": {"quadrature": QUAD_TOL, "quadrature_rtol": RTOL, "root": ROOT_TOL},
        "grid": {
            "count": cfg.grid.count, "clustering": cfg.grid.clustering, "min": cfg.grid.min, "max": cfg.grid.max,
        },
        "partial": False,
        "notes": [],
    }
    if kind is not None:
        block["kind"] = kind
        block["family"] = FAMILY[kind]
        if kind == "B":
            block["bilinear"] = {"beta": cfg.bilinear[0], "gamma": cfg.bilinear[1]}
    block.update(extra)
    return block


def emit(ds: Dataset, folder: Path, cfg: StudyConfig, plots: tuple = ()) -> list[str]:
    """Write ``ds`` in the enabled formats plus one SVG per plot spec.

    Without JSON output the provenance goes to a ``.provenance.json`` sidecar.
    """
    stem = folder / ds.name
    written = []
    if cfg.emit.csv:
        written.append(write_dataset(ds, stem.with_suffix(".csv"), "csv"))
        if not cfg.emit.json:
            text = json.dumps(json_safe(ds.provenance), sort_keys=True, indent=1, allow_nan=False) + "\n"
            written.append(atomic_write(folder / f"{ds.name}.provenance.json", text))
    if cfg.emit.json:
        written.append(write_dataset(ds, stem.with_suffix(".json"), "json"))
    if cfg.emit.svg and ds.rows.shape[0] > 0:
        for suffix, spec in plots:
            written.append(plot_svg(ds, spec, folder / f"{ds.name}{suffix}.svg"))
    return [str(p) for p in written]


def write_json(path: Path, doc: dict) -> str:
    text = json.dumps(json_safe(doc), sort_keys=True, indent=1, allow_nan=False) + "\n"
    return str(atomic_write(path, text))


def _capture(fn, *args, **kwargs):
    """Call ``fn`` and return its result with the bar-fit warnings it raised."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", BarFitWarning)
        out = fn(*args, **kwargs)
    notes = sorted({str(w.message) for w in caught if issubclass(w.category, BarFitWarning)})
    return out, notes


# ---------------------------------------------------------------------------
# Cells
# ---------------------------------------------------------------------------

def catalog_cell(task) -> CellResult:
    kind, cfg = task
    mat = cfg.material
    extra = bilinear_derive(*cfg.bilinear, mat) if kind == "B" else None
    fns = model_functions(kind, mat, cfg.bilinear)
    ks = solve_ks(kind, mat, extra)
    k = framework_constants(mat).k
    law = tsl_closed_form(kind, mat, extra)
    row = [
        float(KINDS.index(kind)), normalization_cw(fns.model), ks, ks * k, law.delta_bar, ultimate_opening(fns),
    ]
    line = f"{kind:4s} cw={row[1]:.12f} ks={ks:.6g} k*ks={ks * k:.6g} delta_bar={law.delta_bar:.6g} mm"
    return CellResult(row=row, lines=[line])


def _response_datasets(kind: str, ell: float, cfg: StudyConfig):
    fns = model_functions(kind, cfg.material.with_ell(ell), cfg.bilinear)
    grid = cfg.grid.points()
    curve, notes = _capture(global_response, fns, grid)
    name = f"{kind}_{_ell_tag(ell)}"
    prov = provenance(cfg, kind, ell, notes=list(notes))
    if curve.snap_back is not None:
        sb = curve.snap_back
        prov["snap_back"] = {"alpha_star": sb.alpha_crit, "delta": sb.delta_crit, "U": sb.U_crit}
    glob = Dataset(f"{name}_global", curve.COLUMNS, curve.UNITS, curve.table(), prov)
    delta, sigma = curve.delta[2:], curve.sigma[2:]
    extra = bilinear_derive(*cfg.bilinear, fns.material) if kind == "B" else None
    closed = np.asarray(tsl_closed_form(kind, fns.material, extra)(delta), dtype=float)
    tsl_rows = np.column_stack([curve.alpha_star[2:], delta, sigma, closed, curve.branch[2:]])
    tsl = Dataset(
        f"{name}_tsl",
        ("alpha_star", "delta", "sigma", "sigma_closed_form", "branch"),
        ("-", "mm", "MPa", "MPa", "-"),
        tsl_rows,
        prov,
    )
    return curve, glob, tsl


def _profile_dataset(kind: str, ell: float, cfg: StudyConfig) -> Dataset:
    fns = model_functions(kind, cfg.material.with_ell(ell), cfg.bilinear)
    blocks, notes, truncated = [], [], False
    for a in cfg.profiles.alpha_star:
        prof, msgs = _capture(displacement_profile, fns, float(a), ell, cfg.profiles.n_points)
        notes.extend(msgs)
        truncated = truncated or prof.truncated
        blocks.append(np.column_stack([np.full(prof.x.size, prof.alpha_star), prof.x, prof.alpha, prof.u]))
    prov = provenance(cfg, kind, ell, notes=sorted(set(notes)), truncated_window=truncated)
    return Dataset(
        f"{kind}_{_ell_tag(ell)}_profiles",
        ("alpha_star", "x", "alpha", "u"),
        ("-", "mm", "-", "mm"),
        np.vstack(blocks),
        prov,
    )


GLOBAL_PLOT = (("", PlotSpec("U", "sigma", title="end displacement vs stress")),)
TSL_PLOT = (("", PlotSpec("delta", "sigma", title="traction-separation law")),)
PROFILE_PLOTS = (
    ("_alpha", PlotSpec("x", "alpha", group="alpha_star", title="phase-field profiles")),
    ("_u", PlotSpec("x", "u", group="alpha_star", title="displacement profiles")),
)


def respond_cell(task) -> CellResult:
    kind, ell, cfg, root = task
    folder = Path(root) / "respond" / kind / _ell_tag(ell)
    curve, glob, tsl = _response_datasets(kind, ell, cfg)
    files = emit(glob, folder, cfg, GLOBAL_PLOT) + emit(tsl, folder, cfg, TSL_PLOT)
    line = f"{kind} ell={ell:g}: {curve.alpha_star.size} samples"
    if curve.snap_back is not None:
        line += f", snap-back at U={curve.snap_back.U_crit:.6g} mm"
    return CellResult(files=files, lines=[line])


def profiles_cell(task) -> CellResult:
    kind, ell, cfg, root = task
    folder = Path(root) / "profiles" / kind / _ell_tag(ell)
    ds = _profile_dataset(kind, ell, cfg)
    files = emit(ds, folder, cfg, PROFILE_PLOTS)
    note = " (window, localization wider than the bar)" if ds.provenance["truncated_window"] else ""
    return CellResult(files=files, lines=[f"{kind} ell={ell:g}: {len(cfg.profiles.alpha_star)} profiles{note}"])


def sweep_cell(task) -> CellResult:
    kind, ell, cfg, root = task
    folder = Path(root) / "sweep" / kind / _ell_tag(ell)
    curve, glob, tsl = _response_datasets(kind, ell, cfg)
    prof = _profile_dataset(kind, ell, cfg)
    files = emit(glob, folder, cfg, GLOBAL_PLOT) + emit(tsl, folder, cfg, TSL_PLOT) + emit(prof, folder, cfg, PROFILE_PLOTS)
    soft = curve.branch != 0
    D = curve.D[soft]
    row = [
        float(KINDS.index(kind)), ell, float(D[0]), float(D[-1]), float(np.max(curve.delta)),
        float(np.max(curve.U)), float(curve.E_total[-1]),
    ]
    return CellResult(files=files, row=row, lines=[f"{kind} ell={ell:g}: done"])


def _boundary(cfg: StudyConfig, fns) -> str:
    if cfg.oracle.boundary != "auto":
        return cfg.oracle.boundary
    # ends stay undamaged only when the localization fits inside the bar
    return "zero" if half_width(fns, 0.5) <= 0.5 * fns.material.L else "free"


def oracle_cell(task) -> CellResult:
    kind, ell, cfg, root = task
    mat = cfg.material.with_ell(ell)
    fns = model_functions(kind, mat, cfg.bilinear)
    o = cfg.oracle
    boundary = _boundary(cfg, fns)
    opts = OracleOptions(boundary=boundary, irreversible=o.irreversible, seed=o.seed)
    schedule = np.linspace(o.U_max / o.steps, o.U_max, o.steps)
    underflow = None
    try:
        states = trace_response(BarMesh(o.n_nodes, mat.L), schedule, mat, fns, opts)
    except StepUnderflow as exc:
        states, underflow = exc.states, exc.U_reached
    curve = global_response(fns, cfg.grid.points(), with_energies=False, with_support=False)
    U_ref, s_ref = softening_branch(curve)
    dev = softening_deviation(states, U_ref, s_ref, mat)
    sb = curve.snap_back
    partial = underflow is not None
    U = np.array([s.U for s in states])
    inside = (U >= U_ref[0]) & (U <= U_ref[-1])
    ref = np.where(inside, np.interp(U, U_ref, s_ref), np.nan)
    rows = np.array(
        [[s.U, s.sigma, s.alpha_max, s.energy, s.am_iterations, float(s.converged), r] for s, r in zip(states, ref)]
    ).reshape(len(states), 7)
    prov = provenance(
        cfg, kind, ell, partial=partial,
        oracle={"n_nodes": o.n_nodes, "steps": o.steps, "U_max": o.U_max, "boundary": boundary,
                "irreversible": o.irreversible, "seed": o.seed, "am_tol": opts.am_tol, "kkt_tol": opts.kkt_tol},
    )
    if partial:
        prov["notes"].append(f"load stepping stopped at U = {underflow:.6g} mm")
    ds = Dataset(
        f"{kind}_{_ell_tag(ell)}_trace",
        ("U", "sigma", "alpha_max", "energy", "am_iterations", "converged", "sigma_semi_analytic"),
        ("mm", "MPa", "-", "N/mm", "-", "-", "MPa"),
        rows,
        prov,
    )
    folder = Path(root) / "oracle" / kind / _ell_tag(ell)
    files = emit(ds, folder, cfg, (("", PlotSpec("U", "sigma", title="oracle end displacement vs stress")),))
    report = {
        "kind": kind,
        "ell": ell,
        "n_nodes": o.n_nodes,
        "boundary": boundary,
        "states": len(states),
        "deviation": {
            "max_over_sigma_c": dev.max_deviation, "U_at_max": dev.U_at_max, "compared": dev.n_compared,
            "tolerance": ORACLE_TOL, "passed": dev.passed(ORACLE_TOL),
        },
        "snap_back": None if sb is None else {"alpha_star": sb.alpha_crit, "delta": sb.delta_crit, "U": sb.U_crit},
        "underflow_U": underflow,
        "partial": partial,
    }
    files.append(write_json(folder / "report.json", report))
    line = f"{kind} ell={ell:g}: {len(states)} states, deviation {dev.max_deviation:.3e} of sigma_c over {dev.n_compared} states"
    lines = [line]
    status = EXIT_OK
    if dev.n_compared > 0 and not dev.passed(ORACLE_TOL):
        lines.append(f"  deviation exceeds the tolerance {ORACLE_TOL:g}")
        status = EXIT_INVARIANT
    if sb is not None:
        lines.append(f"  semi-analytic snap-back at U = {sb.U_crit:.6g} mm (alpha* = {sb.alpha_crit:.4g})")
    if partial:
        lines.append(f"  oracle load stepping stopped at U = {underflow:.6g} mm")
        # a stress drop is expected past a snap-back; anywhere else it is a solver failure
        if sb is None:
            status = EXIT_NUMERIC
    return CellResult(status=status, files=files, lines=lines)


def verify_cell(task) -> CellResult:
    kind, cfg = task
    if kind is None:
        o = cfg.oracle
        checks = oracle_checks(cfg.material, o.n_nodes, o.steps, o.U_max)
    else:
        checks = kind_checks(kind, cfg.material, cfg.bilinear, cfg.profiles.alpha_star, cfg.profiles.n_points)
    return CellResult(checks=checks)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _pairs(cfg: StudyConfig, root: Path) -> list:
    return [(kind, float(ell), cfg, str(root)) for kind in cfg.kinds for ell in cfg.ells]


def _kind_map(cfg: StudyConfig) -> dict:
    return {str(KINDS.index(k)): k for k in cfg.kinds}


def run_command(cmd: str, config: StudyConfig, *, out=None) -> int:
    """Run one command and return its exit status.

    Files go under ``out`` (default ``config.out``). Console lines are printed
    to stdout as cells finish, in task order.
    """
    if cmd not in COMMANDS:
        raise ValidationError("command", f"unknown command {cmd!r}; expected one of {', '.join(COMMANDS)}")
    cfg = config
    root = Path(out if out is not None else cfg.out)
    if cmd == "catalog":
        tasks = [(k, cfg) for k in cfg.kinds]
        results = run_cells(catalog_cell, tasks, worker_count(cfg, len(tasks)))
        ds = Dataset(
            "catalog",
            ("kind_index", "cw", "ks", "k_ks", "delta_bar", "delta_ultimate"),
            ("-", "-", "-", "-", "mm", "mm"),
            np.array([r.row for r in results]),
            provenance(cfg, None, None, kinds=_kind_map(cfg)),
        )
        emit(ds, root / "catalog", cfg)
        _print(results)
        return EXIT_OK
    if cmd == "verify":
        tasks = [(k, cfg) for k in cfg.kinds] + [(None, cfg)]
        results = run_cells(verify_cell, tasks, worker_count(cfg, len(tasks)))
        checks = [c for r in results for c in r.checks]
        for c in checks:
            print(c.line())
        failed = [c for c in checks if not c.ok]
        doc = {
            "passed": not failed,
            "counts": {s: sum(c.status == s for c in checks) for s in ("pass", "fail", "skip", "error")},
            "checks": [
                {"name": c.name, "status": c.status, "value": c.value, "limit": c.limit, "detail": c.detail}
                for c in checks
            ],
            "provenance": provenance(cfg, None, None, kinds=list(cfg.kinds)),
        }
        write_json(root / "verify" / "report.json", doc)
        atomic_write(root / "verify" / "report.txt", "".join(c.line() + "\n" for c in checks))
        print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
        return EXIT_INVARIANT if failed else EXIT_OK
    cell = {"respond": respond_cell, "profiles": profiles_cell, "oracle": oracle_cell, "sweep": sweep_cell}[cmd]
    tasks = _pairs(cfg, root)
    results = run_cells(cell, tasks, worker_count(cfg, len(tasks)))
    _print(results)
    if cmd == "sweep":
        ds = Dataset(
            "summary",
            ("kind_index", "ell", "D_first", "D_last", "delta_max", "U_max", "E_total_last"),
            ("-", "mm", "mm", "mm", "mm", "mm", "N/mm"),
            np.array([r.row for r in results]),
            provenance(cfg, None, None, kinds=_kind_map(cfg)),
        )
        emit(ds, root / "sweep", cfg)
    return max(r.status for r in results)


def _print(results) -> None:
    for r in results:
        for line in r.lines:
            print(line)


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _split(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _parse_kinds(text: str) -> list[str]:
    return list(KINDS) if text.strip().lower() == "all" else _split(text)


def _parse_ells(text: str) -> list[float]:
    try:
        return [float(t) for t in _split(text)]
    except ValueError:
        raise ValidationError("ell", f"cannot read internal lengths from {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cohesilab", description="Cohesive phase-field fracture studies for a 1D bar.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", type=Path, help="TOML study file; defaults apply when omitted")
    p.add_argument("--out", type=Path, help="output directory (overrides the config)")
    p.add_argument("--kinds", help="comma-separated model kinds, or 'all'")
    p.add_argument("--ell", help="comma-separated internal lengths in mm")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config) if args.config is not None else StudyConfig()
        cfg = cfg.with_overrides(
            kinds=_parse_kinds(args.kinds) if args.kinds else None,
            ells=_parse_ells(args.ell) if args.ell else None,
            out=args.out,
        )
        return run_command(args.command, cfg)
    except (ConfigError, ModelError) as exc:
        print(f"cohesilab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"cohesilab: numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"cohesilab: cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CohesilabError as exc:
        print(f"cohesilab: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
