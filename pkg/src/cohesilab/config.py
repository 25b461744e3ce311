"""Study configuration read from TOML files.

Every table is optional; missing entries fall back to the reference bar
(``L = 200 mm, E = 30000 MPa, Gc = 0.12 N/mm, sigma_c = 3 MPa``), the kind
``L12`` and the internal lengths ``10, 5, 1 mm``.

Example::

    kinds = ["L12", "D1"]
    ell = [10, 5, 1]
    out = "results"

    [material]
    E = 30000.0

    [grid]
    count = 200
    clustering = "cosine"
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .catalog import KINDS, REFERENCE_BAR, MaterialParams
from .errors import ParseError, ValidationError

try:  # Python >= 3.11
    import tomllib as _toml
except ModuleNotFoundError:  # pragma: no cover - exercised on 3.10
    import tomli as _toml

DEFAULT_ELLS = (10.0, 5.0, 1.0)


@dataclass(frozen=True)
class GridSpec:
    """Peak values ``alpha*`` for response studies."""

    count: int = 200
    clustering: str = "cosine"
    min: float = 1e-6
    max: float = 1.0 - 1e-6

    def points(self) -> np.ndarray:
        from .response import alpha_grid

        return alpha_grid(self.count, self.clustering, self.min, self.max)


@dataclass(frozen=True)
class OracleSettings:
    """Finite-difference bar settings; ``boundary = "auto"`` picks per kind."""

    n_nodes: int = 2001
    steps: int = 100
    U_max: float = 0.1
    boundary: str = "auto"
    irreversible: bool = False
    seed: float = 1e-3


@dataclass(frozen=True)
class ProfileSettings:
    alpha_star: tuple = (0.1, 0.5, 0.9)
    n_points: int = 101


@dataclass(frozen=True)
class EmitFlags:
    csv: bool = True
    json: bool = True
    svg: bool = True


@dataclass(frozen=True)
class StudyConfig:
    """Validated study description."""

    kinds: tuple = ("L12",)
    material: MaterialParams = REFERENCE_BAR
    ells: tuple = DEFAULT_ELLS
    grid: GridSpec = field(default_factory=GridSpec)
    bilinear: tuple = (0.3, 2.5)
    oracle: OracleSettings = field(default_factory=OracleSettings)
    profiles: ProfileSettings = field(default_factory=ProfileSettings)
    emit: EmitFlags = field(default_factory=EmitFlags)
    out: str = "out"
    threads: int | None = None

    def with_overrides(self, kinds=None, ells=None, out=None) -> "StudyConfig":
        """Apply command-line overrides with the same validation as the file."""
        cfg = self
        if kinds is not None:
            cfg = replace(cfg, kinds=_kinds(list(kinds), "kinds"))
        if ells is not None:
            ells = _positive_list(list(ells), "ell")
            if any(ell >= cfg.material.L for ell in ells):
                raise ValidationError("ell", "internal lengths must be smaller than the bar length")
            cfg = replace(cfg, ells=ells)
        if out is not None:
            cfg = replace(cfg, out=str(out))
        return cfg


# ---------------------------------------------------------------------------
# Validation helpers
# ---------------------------------------------------------------------------

def _number(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(name, "must be a number")
    value = float(value)
    if not np.isfinite(value):
        raise ValidationError(name, "must be finite")
    return value


def _positive(value, name: str) -> float:
    value = _number(value, name)
    if value <= 0:
        raise ValidationError(name, "must be positive")
    return value


def _integer(value, name: str, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(name, "must be an integer")
    if value < minimum:
        raise ValidationError(name, f"must be at least {minimum}")
    return int(value)


def _boolean(value, name: str) -> bool:
    if not isinstance(value, bool):
        raise ValidationError(name, "must be true or false")
    return value


def _positive_list(value, name: str) -> tuple:
    if not isinstance(value, list) or not value:
        raise ValidationError(name, "must be a non-empty list")
    return tuple(_positive(v, name) for v in value)


def _kinds(value, name: str) -> tuple:
    if isinstance(value, str):
        value = [value]
    if not isinstance(value, list) or not value:
        raise ValidationError(name, "must name at least one model kind")
    out = []
    for v in value:
        if v not in KINDS:
            raise ValidationError(name, f"unknown kind {v!r}; expected one of {', '.join(KINDS)}")
        if v not in out:
            out.append(v)
    return tuple(out)


def _table(data: dict, key: str) -> dict:
    value = data.get(key, {})
    if not isinstance(value, dict):
        raise ValidationError(key, "must be a table")
    return value


def _reject_unknown(table: dict, allowed: set, prefix: str = "") -> None:
    for key in table:
        if key not in allowed:
            raise ValidationError(f"{prefix}{key}", "unknown key")


def _material(table: dict) -> MaterialParams:
    _reject_unknown(table, {"L", "E", "Gc", "sigma_c"}, "material.")
    values = {
        name: _positive(table.get(name, getattr(REFERENCE_BAR, name)), f"material.{name}")
        for name in ("L", "E", "Gc", "sigma_c")
    }
    return MaterialParams(ell=REFERENCE_BAR.ell, **values)


def _grid(table: dict) -> GridSpec:
    _reject_unknown(table, {"count", "clustering", "min", "max"}, "grid.")
    base = GridSpec()
    count = _integer(table.get("count", base.count), "grid.count", 2)
    clustering = table.get("clustering", base.clustering)
    if clustering not in ("cosine", "uniform"):
        raise ValidationError("grid.clustering", "must be 'cosine' or 'uniform'")
    lo = _number(table.get("min", base.min), "grid.min")
    hi = _number(table.get("max", base.max), "grid.max")
    if not 0.0 < lo < hi < 1.0:
        raise ValidationError("grid.min", "grid bounds must satisfy 0 < min < max < 1")
    return GridSpec(count, clustering, lo, hi)


def _oracle(table: dict) -> OracleSettings:
    _reject_unknown(table, {"n_nodes", "steps", "U_max", "boundary", "irreversible", "seed"}, "oracle.")
    base = OracleSettings()
    boundary = table.get("boundary", base.boundary)
    if boundary not in ("auto", "zero", "free"):
        raise ValidationError("oracle.boundary", "must be 'auto', 'zero' or 'free'")
    seed = _number(table.get("seed", base.seed), "oracle.seed")
    if not 0.0 <= seed < 1.0:
        raise ValidationError("oracle.seed", "must lie in [0, 1)")
    return OracleSettings(
        n_nodes=_integer(table.get("n_nodes", base.n_nodes), "oracle.n_nodes", 3),
        steps=_integer(table.get("steps", base.steps), "oracle.steps", 1),
        U_max=_positive(table.get("U_max", base.U_max), "oracle.U_max"),
        boundary=boundary,
        irreversible=_boolean(table.get("irreversible", base.irreversible), "oracle.irreversible"),
        seed=seed,
    )


def _profiles(table: dict) -> ProfileSettings:
    _reject_unknown(table, {"alpha_star", "n_points"}, "profiles.")
    base = ProfileSettings()
    values = table.get("alpha_star", list(base.alpha_star))
    if not isinstance(values, list) or not values:
        raise ValidationError("profiles.alpha_star", "must be a non-empty list")
    stars = tuple(_number(v, "profiles.alpha_star") for v in values)
    if any(not 0.0 < a < 1.0 for a in stars):
        raise ValidationError("profiles.alpha_star", "values must lie in (0, 1)")
    return ProfileSettings(stars, _integer(table.get("n_points", base.n_points), "profiles.n_points", 2))


def _emit(table: dict) -> EmitFlags:
    _reject_unknown(table, {"csv", "json", "svg"}, "emit.")
    base = EmitFlags()
    flags = {k: _boolean(table.get(k, getattr(base, k)), f"emit.{k}") for k in ("csv", "json", "svg")}
    if not (flags["csv"] or flags["json"]):
        raise ValidationError("emit", "at least one of csv or json must be enabled")
    return EmitFlags(**flags)


def _bilinear(table: dict) -> tuple:
    _reject_unknown(table, {"beta", "gamma"}, "bilinear.")
    beta = _number(table.get("beta", 0.3), "bilinear.beta")
    gamma = _number(table.get("gamma", 2.5), "bilinear.gamma")
    if not 0.0 < beta < 1.0:
        raise ValidationError("bilinear.beta", "must lie in (0, 1)")
    if not gamma > 1.0:
        raise ValidationError("bilinear.gamma", "must exceed 1")
    return beta, gamma


TOP_LEVEL = {"kind", "kinds", "ell", "out", "threads", "material", "grid", "bilinear", "oracle", "profiles", "emit"}


def config_from_dict(data: dict) -> StudyConfig:
    """Validate a parsed TOML document.

    Raises
    ------
    ValidationError
        Naming the offending field.
    """
    _reject_unknown(data, TOP_LEVEL)
    if "kind" in data and "kinds" in data:
        raise ValidationError("kinds", "give either 'kind' or 'kinds', not both")
    kinds = _kinds(data["kind"], "kind") if "kind" in data else _kinds(data.get("kinds", ["L12"]), "kinds")
    ells = _positive_list(data.get("ell", list(DEFAULT_ELLS)), "ell")
    out = data.get("out", "out")
    if not isinstance(out, str) or not out:
        raise ValidationError("out", "must be a non-empty path")
    threads = data.get("threads")
    if threads is not None:
        threads = _integer(threads, "threads", 1)
    material = _material(_table(data, "material"))
    if any(ell >= material.L for ell in ells):
        raise ValidationError("ell", "internal lengths must be smaller than the bar length")
    return StudyConfig(
        kinds=kinds,
        material=material,
        ells=ells,
        grid=_grid(_table(data, "grid")),
        bilinear=_bilinear(_table(data, "bilinear")),
        oracle=_oracle(_table(data, "oracle")),
        profiles=_profiles(_table(data, "profiles")),
        emit=_emit(_table(data, "emit")),
        out=out,
        threads=threads,
    )


_POSITION = re.compile(r"line (\d+), column (\d+)")


def parse_config(path: str | Path) -> StudyConfig:
    """Read and validate a TOML study file.

    Raises
    ------
    ParseError
        Invalid TOML, with the line and column of the problem.
    ValidationError
        A field is missing its constraints; the field name is attached.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        data = _toml.loads(text)
    except _toml.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        column = getattr(exc, "colno", None)
        if line is None:
            match = _POSITION.search(str(exc))
            if match:
                line, column = int(match.group(1)), int(match.group(2))
        message = getattr(exc, "msg", str(exc))
        raise ParseError(f"invalid TOML in {path}: {message}", line, column) from exc
    return config_from_dict(data)
