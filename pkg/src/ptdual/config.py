"""Run configuration: flat ``key = value`` files plus command-line overrides.

Example::

    # two-level model
    model = matrix2
    r = 1
    s = 1
    theta = pi/6
    levels = 2
    tol.gram_tol = 1e-8

Numeric values accept plain literals and simple arithmetic on ``pi``
(``pi/6``, ``2*pi/3``).  Explicit matrices are written row by row, rows
separated by ``;`` and entries by ``,``; entries are Python complex literals
(``2+1j``).
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .model import GridSpec, OperatorTriple, build_explicit, build_grid_hamiltonian, build_matrix_model
from .tolerances import Tolerances

MODELS = ("grid", "matrix2", "explicit")
FORMATS = ("json", "csv")
#: Levels reported when none are requested explicitly.
DEFAULT_LEVELS = 10
SWEEP_PARAMS = {"grid": ("nu",), "matrix2": ("r", "s", "theta"), "explicit": ()}


class ConfigError(ValueError):
    """Malformed configuration; the CLI maps this to exit code 2."""


_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_NAMES = {"pi": math.pi, "e": math.e}


def _eval_node(node: ast.AST) -> float:
    if isinstance(node, ast.Expression):
        return _eval_node(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        value = _eval_node(node.operand)
        return -value if isinstance(node.op, ast.USub) else value
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    raise ValueError("unsupported expression")


def parse_number(text: str) -> float:
    """Parse ``1e-3``, ``pi/6``, ``-2*pi`` and similar."""
    text = str(text).strip()
    try:
        return float(text)
    except ValueError:
        pass
    try:
        return float(_eval_node(ast.parse(text, mode="eval")))
    except (SyntaxError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse number {text!r}") from exc


def parse_matrix(text: str) -> np.ndarray:
    rows = [r for r in str(text).split(";") if r.strip()]
    try:
        data = [[complex(x.strip().replace(" ", "")) for x in row.split(",")] for row in rows]
    except ValueError as exc:
        raise ConfigError(f"cannot parse matrix {text!r}: {exc}") from exc
    if not data or len({len(r) for r in data}) != 1:
        raise ConfigError(f"matrix rows have unequal lengths: {text!r}")
    return np.array(data, dtype=complex)


def _parse_bool(text: str) -> bool:
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"cannot parse boolean {text!r}")


@dataclass
class SweepSpec:
    param: str
    start: float
    stop: float
    steps: int
    bisect_width: float = 1e-6

    def validate(self, model: str) -> None:
        if self.param not in SWEEP_PARAMS.get(model, ()):
            raise ConfigError(
                f"parameter {self.param!r} not applicable to model {model!r} "
                f"(sweepable: {', '.join(SWEEP_PARAMS.get(model, ())) or 'none'})"
            )
        if not self.start < self.stop:
            raise ConfigError(f"sweep range must satisfy from < to, got [{self.start}, {self.stop}]")
        if self.steps < 2:
            raise ConfigError(f"sweep needs at least 2 steps, got {self.steps}")
        if not self.bisect_width > 0:
            raise ConfigError("bisect width must be positive")

    def points(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


@dataclass
class RunConfig:
    model: str = "matrix2"
    nu: float = 1.0
    L: float = 12.0
    N: int = 601
    r: float = 1.0
    s: float = 1.0
    theta: float = math.pi / 6
    hamiltonian: np.ndarray | None = None
    parity: np.ndarray | None = None
    metric_weight: float = 1.0
    tolerances: Tolerances = field(default_factory=Tolerances)
    levels: int | None = None
    format: str = "csv"
    out: str | None = None
    timestamp: bool = True
    sweep: SweepSpec | None = None

    def validate(self) -> None:
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; choose one of {', '.join(MODELS)}")
        if self.format not in FORMATS:
            raise ConfigError(f"unknown format {self.format!r}; choose json or csv")
        if self.model == "explicit" and (self.hamiltonian is None or self.parity is None):
            raise ConfigError("explicit model needs both 'hamiltonian' and 'parity'")
        if self.levels is not None and self.levels < 1:
            raise ConfigError(f"levels must be positive, got {self.levels}")

    def build(self) -> OperatorTriple:
        """Construct the operator triple; ModelError propagates unchanged."""
        self.validate()
        if self.model == "grid":
            return build_grid_hamiltonian(GridSpec(self.L, self.N), self.nu)
        if self.model == "matrix2":
            return build_matrix_model(self.r, self.s, self.theta)
        return build_explicit(self.hamiltonian, self.parity, self.metric_weight)

    def with_param(self, name: str, value: float) -> RunConfig:
        clone = RunConfig(**{f.name: getattr(self, f.name) for f in fields(self)})
        setattr(clone, name, value)
        return clone

    def resolved_levels(self, dimension: int) -> int:
        k = self.levels if self.levels is not None else min(dimension, DEFAULT_LEVELS)
        if k > dimension:
            raise ConfigError(f"levels ({k}) exceeds the dimension ({dimension})")
        return k


_FLOAT_KEYS = ("nu", "L", "r", "s", "theta", "metric_weight")


def read_config_file(path: str | Path) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)


def parse_config_text(text: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        entries[key] = value
    return entries


def build_config(entries: dict[str, str]) -> RunConfig:
    """Turn raw key/value strings into a validated RunConfig."""
    cfg = RunConfig()
    tol_overrides: dict[str, float] = {}
    sweep: dict[str, str] = {}
    for key, value in entries.items():
        if key in _FLOAT_KEYS:
            setattr(cfg, key, parse_number(value))
        elif key == "N":
            number = parse_number(value)
            if number != int(number):
                raise ConfigError(f"N must be an integer, got {value!r}")
            cfg.N = int(number)
        elif key == "model":
            cfg.model = value
        elif key == "levels":
            cfg.levels = int(parse_number(value))
        elif key == "format":
            cfg.format = value
        elif key == "out":
            cfg.out = value
        elif key == "timestamp":
            cfg.timestamp = _parse_bool(value)
        elif key in ("hamiltonian", "parity"):
            setattr(cfg, key, parse_matrix(value))
        elif key.startswith("tol."):
            tol_overrides[key[4:]] = parse_number(value)
        elif key.startswith("sweep."):
            sweep[key[6:]] = value
        else:
            raise ConfigError(f"unknown config key {key!r}")
    if tol_overrides:
        try:
            cfg.tolerances = cfg.tolerances.with_overrides(**tol_overrides)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if sweep:
        unknown = set(sweep) - {"param", "from", "to", "steps", "bisect_width"}
        if unknown:
            raise ConfigError(f"unknown sweep key(s): {', '.join(sorted(unknown))}")
        missing = {"param", "from", "to", "steps"} - set(sweep)
        if missing:
            raise ConfigError(f"sweep is missing: {', '.join(sorted(missing))}")
        cfg.sweep = SweepSpec(
            param=sweep["param"],
            start=parse_number(sweep["from"]),
            stop=parse_number(sweep["to"]),
            steps=int(parse_number(sweep["steps"])),
            bisect_width=parse_number(sweep.get("bisect_width", "1e-6")),
        )
    cfg.validate()
    return cfg
