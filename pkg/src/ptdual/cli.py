"""Command-line interface: ``ptdual spectrum|verify|sweep|cmatrix``.

Exit codes: 0 success, 1 a gated residual failed (verify), 2 configuration or
model error, 3 a numerical stage refused.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import sys
from dataclasses import fields
from typing import Sequence

from .config import ConfigError, RunConfig, build_config, read_config_file
from .errors import ModelError, PTDualError
from .ptcore import build_c_operator, build_pt_basis
from .spectral import classify_eigenvalues, eigendecompose
from .sweep import run_sweep
from .tolerances import Tolerances
from .verify import full_report

log = logging.getLogger("ptdual")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_REFUSED = 3

def fmt(x: float) -> str:
    """17 significant digits: round-trip exact for doubles."""
    return "%.17g" % x

def _csv_value(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return fmt(value)
    text = str(value)
    if any(ch in text for ch in ',"\n'):
        text = '"' + text.replace('"', '""') + '"'
    return text

def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)

def _json(doc: object) -> str:
    return json.dumps(doc, indent=1) + "\n"

def _signature_text(sig: Sequence[int]) -> str:
    return " ".join(f"{s:+d}" for s in sig)

# -- subcommands --------------------------------------------------------------

def cmd_spectrum(cfg: RunConfig) -> int:
    t = cfg.build()
    k = cfg.resolved_levels(t.dimension)
    tol = cfg.tolerances
    system = eigendecompose(t, tol, levels=None if k == t.dimension else k)
    spectrum = system.spectrum[:k]
    cls = classify_eigenvalues(system.eigenvalues[:k], tol.reality_tol)
    sig: tuple[int, ...] = ()
    if cls.all_real:
        sig = build_pt_basis(system, tol).signature[:k]

    if cfg.format == "json":
        doc: dict[str, object] = {"label": t.label, "dimension": t.dimension, "levels": k, "all_real": cls.all_real,
                                  "broken_pairs": cls.broken_pairs, "max_imag_over_scale": cls.max_imag_over_scale}
        for n, e in enumerate(spectrum):
            doc[f"energy.{n}.re"] = float(e.real)
            doc[f"energy.{n}.im"] = float(e.imag)
            doc[f"reality.{n}"] = cls.reality[n].value
            if sig:
                doc[f"signature.{n}"] = sig[n]
        text = _json(doc)
    else:
        buf = io.StringIO()
        buf.write("n,re,im,reality,signature\n")
        for n, e in enumerate(spectrum):
            s = f"{sig[n]:+d}" if sig else ""
            buf.write(f"{n},{fmt(e.real)},{fmt(e.imag)},{cls.reality[n].value},{s}\n")
        text = buf.getvalue()
    _write(text, cfg.out)
    return EXIT_OK

def cmd_verify(cfg: RunConfig) -> int:
    t = cfg.build()
    k = cfg.resolved_levels(t.dimension)
    report = full_report(t, cfg.tolerances, levels=k, timestamp=cfg.timestamp)
    flat = report.to_flat()
    if cfg.format == "json":
        text = _json(flat)
    else:
        text = "key,value\n" + "".join(f"{key},{_csv_value(v)}\n" for key, v in flat.items())
    _write(text, cfg.out)
    for name in report.failures:
        entry = report.entries[name]
        log.warning("%s failed: %s", name, entry.note or f"{entry.value!r} > {entry.tolerance!r}")
    return EXIT_OK if report.passed else EXIT_FAILED

def cmd_sweep(cfg: RunConfig) -> int:
    spec = cfg.sweep
    if spec is None:
        raise ConfigError("sweep needs --param, --from, --to and --steps (or sweep.* config keys)")
    points, boundaries = run_sweep(cfg, spec)
    k = len(points[0].eigenvalues) if points else 0
    cols = ["kind", spec.param, "all_real", "broken_pairs", "max_imag_over_scale", "bracket_lower", "bracket_upper"]
    cols += [f"E{n}_{part}" for n in range(k) for part in ("re", "im")]
    cols.append("signature")
    if cfg.format == "json":
        rows = []
        for p in points:
            row = {"kind": "point", spec.param: p.value, "all_real": p.all_real, "broken_pairs": p.broken_pairs,
                   "max_imag_over_scale": p.max_imag_over_scale, "signature": _signature_text(p.signature)}
            for n, e in enumerate(p.eigenvalues):
                row[f"E{n}_re"], row[f"E{n}_im"] = float(e.real), float(e.imag)
            rows.append(row)
        for b in boundaries:
            rows.append({"kind": "boundary", spec.param: b.estimate, "bracket_lower": b.lower,
                         "bracket_upper": b.upper, "real_side": b.real_side})
        _write(_json({"label": cfg.build().label, "param": spec.param, "rows": rows}), cfg.out)
        return EXIT_OK

    buf = io.StringIO()
    buf.write(",".join(cols) + "\n")
    for p in points:
        vals: list[object] = ["point", p.value, p.all_real, p.broken_pairs, p.max_imag_over_scale, None, None]
        for e in p.eigenvalues:
            vals += [float(e.real), float(e.imag)]
        vals.append(_signature_text(p.signature))
        buf.write(",".join(_csv_value(v) for v in vals) + "\n")
    for b in boundaries:
        vals = ["boundary", b.estimate, None, None, None, b.lower, b.upper] + [None] * (2 * k) + [None]
        buf.write(",".join(_csv_value(v) for v in vals) + "\n")
    _write(buf.getvalue(), cfg.out)
    return EXIT_OK

def cmd_cmatrix(cfg: RunConfig) -> int:
    t = cfg.build()
    tol = cfg.tolerances
    system = eigendecompose(t, tol)
    basis = build_pt_basis(system, tol)
    c = build_c_operator(basis)
    unit = c.matrix
    cont = c.continuum(t.metric_weight)
    n = t.dimension
    if cfg.format == "json":
        doc = {
            "dimension": n,
            "model": t.label,
            "metric_weight": t.metric_weight,
            "scalings": ["unit_metric", "continuum"],
            "unit_metric_re": unit.real.tolist(),
            "unit_metric_im": unit.imag.tolist(),
            "continuum_re": cont.real.tolist(),
            "continuum_im": cont.imag.tolist(),
        }
        _write(_json(doc), cfg.out)
        return EXIT_OK
    buf = io.StringIO()
    buf.write(f"# dimension={n} model={t.label} metric_weight={fmt(t.metric_weight)} "
              "scalings=unit_metric,continuum(unit_metric/metric_weight)\n")
    buf.write("i,j,unit_re,unit_im,continuum_re,continuum_im\n")
    for i in range(n):
        for j in range(n):
            buf.write(f"{i},{j},{fmt(unit[i, j].real)},{fmt(unit[i, j].imag)},"
                      f"{fmt(cont[i, j].real)},{fmt(cont[i, j].imag)}\n")
    _write(buf.getvalue(), cfg.out)
    return EXIT_OK

COMMANDS = {
    "spectrum": cmd_spectrum,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "cmatrix": cmd_cmatrix,
}

# -- argument handling --------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse exits 2 as well; keep the message uniform
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")

def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--levels", type=int, help="number of lowest levels to report")
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field")
    common.add_argument("--model", choices=("grid", "matrix2", "explicit"))
    for name in ("nu", "L", "r", "s", "theta"):
        common.add_argument(f"--{name}", dest=name, metavar="X")
    common.add_argument("--N", dest="N", metavar="K")
    for f in fields(Tolerances):
        common.add_argument(f"--tol.{f.name}", dest=f"tol.{f.name}", metavar="X")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="ptdual", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("spectrum", parents=[common], help="eigenvalues, reality and signatures")
    sub.add_parser("verify", parents=[common], help="run every residual check")
    sw = sub.add_parser("sweep", parents=[common], help="scan a parameter across the PT transition")
    sw.add_argument("--param")
    sw.add_argument("--from", dest="sweep_from", metavar="X")
    sw.add_argument("--to", dest="sweep_to", metavar="X")
    sw.add_argument("--steps")
    sw.add_argument("--bisect-width", dest="bisect_width", metavar="X")
    sub.add_parser("cmatrix", parents=[common], help="write the charge operator C")
    return parser

def config_from_args(args: argparse.Namespace) -> RunConfig:
    entries: dict[str, str] = read_config_file(args.config) if args.config else {}
    for key in ("model", "nu", "L", "N", "r", "s", "theta", "levels", "format", "out"):
        value = getattr(args, key, None)
        if value is not None:
            entries[key] = str(value)
    if args.no_timestamp:
        entries["timestamp"] = "false"
    for f in fields(Tolerances):
        value = getattr(args, f"tol.{f.name}", None)
        if value is not None:
            entries[f"tol.{f.name}"] = value
    for key, attr in (("param", "param"), ("from", "sweep_from"), ("to", "sweep_to"),
                      ("steps", "steps"), ("bisect_width", "bisect_width")):
        value = getattr(args, attr, None)
        if value is not None:
            entries[f"sweep.{key}"] = str(value)
    return build_config(entries)

def main(argv: Sequence[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(levelname)s: %(message)s")
    try:
        cfg = config_from_args(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, ModelError) as exc:
        print(f"ptdual: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PTDualError as exc:
        print(f"ptdual: refused at stage {exc.stage}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head); not our failure
        sys.stderr.close()
        return EXIT_OK

if __name__ == "__main__":
    sys.exit(main())
