"""Sweep configuration, figure presets and sweep evaluation.

Config files are plain ``key = value`` lines; ``#`` starts a comment. Every
numeric value may carry a trailing ``pi`` factor (``phi = 0.25 pi``).
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .dispersion import CircuitParams, DispersionError, dispersion
from .fock import DsfsParams
from .moments import MomentVariant, Units, normalization_F, variance
from .nri import NriError, nri_from_fluctuation

__all__ = [
    "ConfigError",
    "ParseError",
    "ValidationError",
    "LinkedRule",
    "SweepConfig",
    "CurvePoint",
    "CSV_HEADER",
    "REQUIRED_KEYS",
    "SWEEPABLE",
    "parse_config",
    "serialize_config",
    "preset",
    "PRESETS",
    "run_sweep",
    "sweep_samples",
    "to_csv",
    "to_json",
]

CSV_HEADER = ("sweep_value", "sigma", "beta", "F", "variance", "n_r_printed", "n_r_rederived", "warnings")

CIRCUIT_KEYS = ("R", "G", "L", "C", "z0", "omega")
STATE_KEYS = ("alpha_mag", "theta", "xi_mag", "phi", "n")
SWEEPABLE = CIRCUIT_KEYS + STATE_KEYS + ("ell", "var_j_input")
REQUIRED_KEYS = ("omega",)


class ConfigError(ValueError):
    pass


class ParseError(ConfigError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class ValidationError(ConfigError):
    def __init__(self, key: str, reason: str):
        super().__init__(f"{key}: {reason}")
        self.key = key
        self.reason = reason


@dataclass(frozen=True)
class LinkedRule:
    """``target = coeff / source`` or ``target = coeff * source``."""

    target: str
    coeff: float
    op: str
    source: str

    def apply(self, values: dict) -> None:
        src = values[self.source]
        if self.op == "/":
            if src == 0:
                raise ZeroDivisionError(f"{self.target} undefined at {self.source}=0")
            values[self.target] = self.coeff / src
        else:
            values[self.target] = self.coeff * src

    def __str__(self) -> str:
        return f"{self.target} = {self.coeff!r} {self.op} {self.source}"


@dataclass(frozen=True)
class SweepConfig:
    """Base point, one swept field, optional linked parameters and curve family.

    Defaults are those of :data:`DEFAULTS`; only ``omega`` must be given.
    ``series_param``/``series_values`` repeat the sweep once per value (the
    different curves of a figure).
    """

    omega: float
    R: float = 0.0
    G: float = 0.0
    L: float = 398e-6
    C: float = 995e-12
    z0: float = 4e-6
    alpha_mag: float = 1.0
    theta: float = 0.0
    xi_mag: float = 0.5
    phi: float = math.pi / 3
    n: int = 0
    ell: float = 1e-6
    var_j_input: float | None = None
    units: Units = Units.SI
    variant: MomentVariant = MomentVariant.REDERIVED
    trunc: int = 64
    omega_convention: str = "angular"
    sweep_param: str = "ell"
    sweep_range: tuple[float, float, int] = (0.0, 4e-6, 40)
    sweep_open_lo: bool = True
    linked_rules: tuple[LinkedRule, ...] = ()
    series_param: str | None = None
    series_values: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        _validate(self)

    @property
    def omega_rad(self) -> float:
        """Angular frequency after applying the ``omega_convention`` override."""
        return self.omega * (2 * math.pi if self.omega_convention == "cyclic" else 1.0)

    def point_values(self) -> dict:
        return {k: getattr(self, k) for k in SWEEPABLE}

    def single_series(self) -> list[tuple[float | None, "SweepConfig"]]:
        if self.series_param is None:
            return [(None, self)]
        out = []
        for v in self.series_values:
            cfg = replace(self, series_param=None, series_values=())
            cfg = replace(cfg, **{self.series_param: _coerce(self.series_param, v)})
            out.append((v, cfg))
        return out


def _coerce(key: str, value: float):
    if key == "n":
        if float(value) != int(value):
            raise ValidationError(key, f"must be an integer, got {value!r}")
        return int(value)
    return float(value)


def _validate(cfg: SweepConfig) -> None:
    if cfg.sweep_param not in SWEEPABLE:
        raise ValidationError(cfg.sweep_param, "no such parameter")
    lo, hi, count = cfg.sweep_range
    if not lo < hi:
        raise ValidationError("sweep_range", f"need lo < hi, got {lo!r}, {hi!r}")
    if int(count) != count or count < 2:
        raise ValidationError("sweep_range", f"count must be an integer >= 2, got {count!r}")
    if cfg.omega <= 0 or not math.isfinite(cfg.omega):
        raise ValidationError("omega", "must be positive and finite")
    if cfg.trunc < 2:
        raise ValidationError("trunc", "must be >= 2")
    if cfg.omega_convention not in ("angular", "cyclic"):
        raise ValidationError("omega_convention", "must be 'angular' or 'cyclic'")
    if cfg.n < 0 or int(cfg.n) != cfg.n:
        raise ValidationError("n", "must be a nonnegative integer")
    if not isinstance(cfg.units, Units):
        raise ValidationError("units", "must be a Units member")
    if not isinstance(cfg.variant, MomentVariant):
        raise ValidationError("variant", "must be a MomentVariant member")
    if cfg.series_param is not None:
        if cfg.series_param not in SWEEPABLE or cfg.series_param == cfg.sweep_param:
            raise ValidationError(cfg.series_param, "not a valid series parameter")
        if not cfg.series_values:
            raise ValidationError("series_values", "empty")
        for v in cfg.series_values:
            _coerce(cfg.series_param, v)
    elif cfg.series_values:
        raise ValidationError("series_values", "given without series_param")
    targets = set()
    for rule in cfg.linked_rules:
        for name in (rule.target, rule.source):
            if name not in SWEEPABLE:
                raise ValidationError(name, "no such parameter")
        if rule.op not in ("*", "/"):
            raise ValidationError("linked_rules", f"unsupported operator {rule.op!r}")
        if rule.target in (cfg.sweep_param, cfg.series_param):
            raise ValidationError(rule.target, "a linked target cannot also be swept")
        if rule.target in targets:
            raise ValidationError(rule.target, "linked more than once")
        targets.add(rule.target)
    _check_acyclic(cfg.linked_rules)


def _check_acyclic(rules: tuple[LinkedRule, ...]) -> None:
    deps = {r.target: r.source for r in rules}
    for start in deps:
        seen = {start}
        node = start
        while node in deps:
            node = deps[node]
            if node in seen:
                raise ValidationError("linked_rules", f"cycle through {node}")
            seen.add(node)


def _ordered_rules(rules: tuple[LinkedRule, ...]) -> list[LinkedRule]:
    # a rule runs after any rule that produces its source
    by_target = {r.target: r for r in rules}
    done: list[LinkedRule] = []

    def visit(rule: LinkedRule) -> None:
        if rule in done:
            return
        if rule.source in by_target:
            visit(by_target[rule.source])
        done.append(rule)

    for r in rules:
        visit(r)
    return done


# --- text format -----------------------------------------------------------

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)?\s*(pi)?\s*$")
_RULE = re.compile(r"^\s*(\w+)\s*=\s*(.+?)\s*([*/])\s*(\w+)\s*$")

_FIELD_NAMES = tuple(f.name for f in fields(SweepConfig))
DEFAULTS = {f.name: f.default for f in fields(SweepConfig) if f.name != "omega"}


def _number(text: str, line: int) -> float:
    m = _NUMBER.match(text)
    if not m or (m.group(1) is None and m.group(2) is None):
        raise ParseError(line, f"not a number: {text.strip()!r}")
    value = float(m.group(1)) if m.group(1) is not None else 1.0
    return value * math.pi if m.group(2) else value


def _parse_value(key: str, text: str, line: int):
    text = text.strip()
    if key in ("units",):
        try:
            return Units(text)
        except ValueError:
            raise ValidationError(key, f"expected si or natural, got {text!r}") from None
    if key == "variant":
        try:
            return MomentVariant(text)
        except ValueError:
            raise ValidationError(key, f"expected printed or rederived, got {text!r}") from None
    if key in ("sweep_param", "omega_convention"):
        return text
    if key == "series_param":
        return None if text in ("", "none") else text
    if key == "sweep_open_lo":
        if text.lower() not in ("true", "false"):
            raise ParseError(line, f"expected true or false, got {text!r}")
        return text.lower() == "true"
    if key == "var_j_input":
        return None if text in ("", "none") else _number(text, line)
    if key in ("n", "trunc"):
        value = _number(text, line)
        if value != int(value):
            raise ValidationError(key, f"must be an integer, got {text!r}")
        return int(value)
    if key == "sweep_range":
        parts = text.split(",")
        if len(parts) != 3:
            raise ParseError(line, "sweep_range needs lo, hi, count")
        lo, hi, count = (_number(x, line) for x in parts)
        if count != int(count):
            raise ValidationError(key, "count must be an integer")
        return (lo, hi, int(count))
    if key == "series_values":
        return tuple(_number(x, line) for x in text.split(",") if x.strip())
    if key == "linked_rules":
        rules = []
        for chunk in filter(str.strip, text.split(";")):
            m = _RULE.match(chunk)
            if not m:
                raise ParseError(line, f"cannot read linked rule {chunk.strip()!r}")
            rules.append(LinkedRule(m.group(1), _number(m.group(2), line), m.group(3), m.group(4)))
        return tuple(rules)
    return _number(text, line)


def parse_config(text: str) -> SweepConfig:
    """Parse and validate a ``key = value`` document."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ParseError(lineno, "expected 'key = value'")
        key, value = (s.strip() for s in body.split("=", 1))
        if key not in _FIELD_NAMES:
            raise ValidationError(key, "unknown key")
        if key in values:
            raise ParseError(lineno, f"duplicate key {key!r}")
        values[key] = _parse_value(key, value, lineno)
    missing = [k for k in REQUIRED_KEYS if k not in values]
    if missing:
        raise ValidationError(", ".join(missing), "missing required key")
    if "series_values" in values and values.get("series_param") == "n":
        values["series_values"] = tuple(float(v) for v in values["series_values"])
    return SweepConfig(**values)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(cfg: SweepConfig) -> str:
    """Inverse of :func:`parse_config`; every field is written explicitly."""
    lines = []
    for f in fields(SweepConfig):
        value = getattr(cfg, f.name)
        if f.name == "sweep_range":
            text = f"{value[0]!r}, {value[1]!r}, {value[2]}"
        elif f.name == "linked_rules":
            text = "; ".join(str(r) for r in value)
        elif f.name == "series_values":
            text = ", ".join(repr(float(v)) for v in value)
        elif f.name == "sweep_open_lo":
            text = "true" if value else "false"
        elif isinstance(value, (Units, MomentVariant)):
            text = value.value
        elif value is None:
            text = "none"
        else:
            text = _fmt(value)
        lines.append(f"{f.name} = {text}".rstrip())
    return "\n".join(lines) + "\n"


# --- presets ---------------------------------------------------------------

_FIG2_BASE = dict(
    omega=3e9,
    var_j_input=10.0,
    phi=math.pi / 3,
    n=2,
    z0=4e-6,
    ell=1e-6,
    L=398e-6,
    C=995e-12,
    units=Units.NATURAL,
)


def _fig2() -> SweepConfig:
    return SweepConfig(
        **_FIG2_BASE,
        xi_mag=0.25 * math.pi,
        sweep_param="R",
        sweep_range=(0.0, 2.0, 200),
        sweep_open_lo=False,
        linked_rules=(LinkedRule("G", 1e-2, "/", "R"),),
        # the figure steps |xi| by 0.05 pi; its starting value is not stated
        series_param="xi_mag",
        series_values=(0.20 * math.pi, 0.25 * math.pi, 0.30 * math.pi),
    )


def _fig3() -> SweepConfig:
    return SweepConfig(
        **{**_FIG2_BASE, "n": 1},
        xi_mag=2.8 * math.pi,
        G=0.2,
        R=0.2,
        sweep_param="phi",
        sweep_range=(0.0, math.pi, 181),
        sweep_open_lo=False,
        series_param="n",
        series_values=(1.0, 2.0, 15.0),
    )


def _fig4() -> SweepConfig:
    return SweepConfig(
        **{**_FIG2_BASE, "n": 5, "phi": math.pi / 5},
        xi_mag=2.8 * math.pi,
        G=0.02,
        R=0.02,
        sweep_param="ell",
        sweep_range=(0.0, 4e-6, 200),
        sweep_open_lo=True,
        series_param="xi_mag",
        series_values=(2.6 * math.pi, 2.8 * math.pi, 3.0 * math.pi),
    )


PRESETS = {"fig2": _fig2, "fig3": _fig3, "fig4": _fig4}


def preset(name: str) -> SweepConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


# --- evaluation ------------------------------------------------------------


@dataclass(frozen=True)
class CurvePoint:
    sweep_value: float
    sigma: float | None = None
    beta: float | None = None
    F: float | None = None
    variance: float | None = None
    n_r_printed: float | None = None
    n_r_rederived: float | None = None
    warnings: tuple[str, ...] = ()
    series_value: float | None = None


def sweep_samples(cfg: SweepConfig) -> np.ndarray:
    lo, hi, count = cfg.sweep_range
    if cfg.sweep_open_lo:
        return np.linspace(lo, hi, count + 1)[1:]
    return np.linspace(lo, hi, count)


def _evaluate(cfg: SweepConfig, x: float, series_value: float | None) -> CurvePoint:
    values = cfg.point_values()
    warnings: list[str] = []
    try:
        values[cfg.sweep_param] = _coerce(cfg.sweep_param, x)
    except ValidationError as exc:
        return CurvePoint(x, warnings=(f"invalid {exc}",), series_value=series_value)
    try:
        for rule in _ordered_rules(cfg.linked_rules):
            rule.apply(values)
    except ZeroDivisionError as exc:
        return CurvePoint(x, warnings=(str(exc),), series_value=series_value)

    try:
        omega = values["omega"] * (2 * math.pi if cfg.omega_convention == "cyclic" else 1.0)
        p = CircuitParams(*(values[k] for k in ("R", "G", "L", "C", "z0")), omega=omega)
        q = DsfsParams(*(values[k] for k in STATE_KEYS))
        d = dispersion(p)
    except (ValueError, DispersionError) as exc:
        return CurvePoint(x, warnings=(f"invalid parameters: {exc}",), series_value=series_value)

    ell = values["ell"]
    F = normalization_F(p, cfg.units)
    var_in = values["var_j_input"]
    if var_in is None:
        var_in = variance(F, d, q, ell, cfg.variant)

    n_r = {}
    for variant in MomentVariant:
        try:
            res = nri_from_fluctuation(var_in, p, q, ell, variant, cfg.units, ell_ref=cfg.ell)
        except (NriError, ValueError) as exc:
            n_r[variant] = None
            warnings.append(f"{variant.value}: {type(exc).__name__}")
            continue
        n_r[variant] = res.n_r
        if not res.small_angle_ok and "small-angle" not in warnings:
            warnings.append("small-angle")
    return CurvePoint(
        sweep_value=x,
        sigma=d.sigma,
        beta=d.beta,
        F=F,
        variance=var_in,
        n_r_printed=n_r[MomentVariant.PRINTED],
        n_r_rederived=n_r[MomentVariant.REDERIVED],
        warnings=tuple(warnings),
        series_value=series_value,
    )


def run_sweep(cfg: SweepConfig, workers: int | None = None) -> list[CurvePoint]:
    """Evaluate every sample of every series, in order.

    Points are independent, so ``workers > 1`` fans them out to a thread pool;
    the result order is the same as for serial evaluation.
    """
    jobs = [
        (sub, float(x), sv)
        for sv, sub in cfg.single_series()
        for x in sweep_samples(sub)
    ]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda job: _evaluate(*job), jobs))
    return [_evaluate(*job) for job in jobs]


# --- output ----------------------------------------------------------------


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, tuple):
        return ";".join(value)
    return repr(float(value))


def _header(points: list[CurvePoint]) -> tuple[str, ...]:
    if any(p.series_value is not None for p in points):
        return ("series_value",) + CSV_HEADER
    return CSV_HEADER


def to_csv(points: list[CurvePoint]) -> str:
    """CSV with the fixed header; multi-series runs get a leading ``series_value`` column."""
    header = _header(points)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for p in points:
        writer.writerow([_cell(getattr(p, name)) for name in header])
    return buf.getvalue()


def to_json(points: list[CurvePoint]) -> str:
    header = _header(points)
    records = []
    for p in points:
        rec = asdict(p)
        rec["warnings"] = list(p.warnings)
        records.append({k: rec[k] for k in header})
    return json.dumps(records, indent=1) + "\n"
