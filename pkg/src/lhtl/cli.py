"""``lhtl`` command line.

Point commands (``dispersion``, ``moments``, ``nri``) evaluate the base point of
a config; ``sweep`` and ``preset`` run whole sweeps; ``verify`` runs the
invariant suite. Exit codes: 0 success, 1 configuration error, 2 verification
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from .dispersion import CircuitParams, DispersionError, dispersion, xy_terms
from .fock import DsfsParams, TruncationError, build_space, oracle_moments
from .moments import MomentVariant, closed_form_moments, normalization_F, variance
from .nri import NriError, nri_from_beta, nri_from_fluctuation
from .sweep import (
    ConfigError,
    SweepConfig,
    parse_config,
    preset,
    run_sweep,
    serialize_config,
    to_csv,
    to_json,
)
from .verify import verify_suite

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY = 0, 1, 2


def _shared(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--variant", choices=[v.value for v in MomentVariant])
    parser.add_argument("--units", choices=("si", "natural"))
    parser.add_argument("--trunc", type=int, metavar="N")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lhtl", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    for name, text in (
        ("dispersion", "attenuation and phase constant at the base point"),
        ("moments", "closed-form current moments at the base point"),
        ("nri", "refractive index from beta and from the current variance"),
        ("sweep", "run the sweep described by --config"),
    ):
        p = sub.add_parser(name, help=text)
        _shared(p)
        if name == "moments":
            p.add_argument("--oracle", action="store_true",
                           help="also evaluate the truncated Fock-space oracle at --trunc")
        if name == "sweep":
            p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("preset", help="run a figure preset (fig2, fig3, fig4)")
    p.add_argument("name")
    _shared(p)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--show-config", action="store_true", help="print the preset config and exit")

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--full", action="store_true", help="N=128 and 1000 oracle draws")
    p.add_argument("--out")
    return parser


def _key(line: str) -> str | None:
    body = line.split("#", 1)[0]
    return body.split("=", 1)[0].strip() if "=" in body else None


def _overrides(args) -> dict[str, str]:
    out = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    for key in ("variant", "units", "trunc"):
        if getattr(args, key, None) is not None:
            out[key] = str(getattr(args, key))
    return out


def _merge(text: str, overrides: dict[str, str]) -> str:
    lines = [ln for ln in text.splitlines() if _key(ln) not in overrides]
    lines += [f"{k} = {v}" for k, v in overrides.items()]
    return "\n".join(lines) + "\n"


def _pairs(text: str) -> dict[str, str]:
    out = {}
    for line in text.splitlines():
        key = _key(line)
        if key:
            out[key] = line.split("#", 1)[0].split("=", 1)[1].strip()
    return out


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc


def load_config(args) -> SweepConfig:
    text = _read(args.config) if args.config else ""
    return parse_config(_merge(text, _overrides(args)))


def _base_point(cfg: SweepConfig) -> tuple[CircuitParams, DsfsParams]:
    p = CircuitParams(cfg.R, cfg.G, cfg.L, cfg.C, cfg.z0, cfg.omega_rad)
    q = DsfsParams(cfg.alpha_mag, cfg.theta, cfg.xi_mag, cfg.phi, cfg.n)
    return p, q


def _rows_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: "" if v is None else (repr(v) if isinstance(v, float) else v)
                         for k, v in row.items()})
    return buf.getvalue()


def _render(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=1) + "\n"
    return _rows_csv(rows)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_dispersion(cfg: SweepConfig, args) -> list[dict]:
    p, _ = _base_point(cfg)
    d = dispersion(p)
    x, y = xy_terms(p)
    return [{"x": x, "y": y, "sigma": d.sigma, "beta": d.beta}]


def _cmd_moments(cfg: SweepConfig, args) -> list[dict]:
    p, q = _base_point(cfg)
    d = dispersion(p)
    F = normalization_F(p, cfg.units)
    rows = []
    for variant in MomentVariant:
        m = closed_form_moments(F, d, q, cfg.ell, variant)
        rows.append({"source": variant.value, "mean_j": m.mean_j, "mean_j2": m.mean_j2,
                     "var_j": m.var_j, "F": F})
    if args.oracle:
        o = oracle_moments(build_space(cfg.trunc), q, F, d, cfg.ell)
        rows.append({"source": f"oracle_N{cfg.trunc}", "mean_j": o.mean_j, "mean_j2": o.mean_j2,
                     "var_j": o.var_j, "F": F})
    return rows


def _cmd_nri(cfg: SweepConfig, args) -> list[dict]:
    p, q = _base_point(cfg)
    d = dispersion(p)
    var_j = cfg.var_j_input
    if var_j is None:
        var_j = variance(normalization_F(p, cfg.units), d, q, cfg.ell, cfg.variant)
    rows = [{"method": "beta", "n_r": nri_from_beta(d, p.omega).n_r, "var_j": None, "warnings": ""}]
    for variant in MomentVariant:
        res = nri_from_fluctuation(var_j, p, q, cfg.ell, variant, cfg.units, ell_ref=cfg.ell)
        rows.append({"method": f"fluctuation_{variant.value}", "n_r": res.n_r, "var_j": var_j,
                     "warnings": ";".join(res.warnings)})
    return rows


def _run_points(cfg: SweepConfig, args) -> str:
    points = run_sweep(cfg, workers=getattr(args, "workers", None))
    return to_json(points) if args.format == "json" else to_csv(points)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            report = verify_suite("full" if args.full else "quick")
            _emit(report.format() + "\n", args.out)
            return EXIT_OK if report.ok else EXIT_VERIFY
        if args.command == "preset":
            cfg = preset(args.name)
            overrides = _overrides(args)
            if args.config or overrides:
                # config file and flags override the preset key by key
                text = serialize_config(cfg)
                if args.config:
                    text = _merge(text, _pairs(_read(args.config)))
                cfg = parse_config(_merge(text, overrides))
            if args.show_config:
                _emit(serialize_config(cfg), args.out)
            else:
                _emit(_run_points(cfg, args), args.out)
            return EXIT_OK
        cfg = load_config(args)
        if args.command == "sweep":
            _emit(_run_points(cfg, args), args.out)
        else:
            handler = {"dispersion": _cmd_dispersion, "moments": _cmd_moments, "nri": _cmd_nri}
            _emit(_render(handler[args.command](cfg, args), args.format), args.out)
        return EXIT_OK
    except (ConfigError, ValueError, DispersionError, NriError, TruncationError, OSError) as exc:
        print(f"lhtl: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
