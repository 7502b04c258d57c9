"""Command-line driver: ``python -m fractalforms <subcommand> [options]``.

Results go to standard output (or ``--output``) as JSON or CSV.  Errors go to
standard error as a single JSON object ``{"error": CODE, "message": ...}``;
the exit status is 2 for invalid input and 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .bridge import energy_report
from .cotangent import Form1
from .embedding import build_chart, frame_rows
from .energy import base_energy, extend_to_level, graph_energy
from .errors import (
    DegenerateCellError,
    DomainError,
    FractalFormsError,
    InvariantViolation,
    ParseError,
    ResourceLimitError,
    SolverError,
)
from .expr import parse, random_expr
from .gasket import DEFAULT_MAX_LEVEL, Vertex, build_level_graph, check_level
from .intrinsic import intrinsic_metric
from .paths import EdgePath, endpoint_difference, integrate_form
from .zfield import kusuoka_table, z_field

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3

_USAGE_ERRORS = (DomainError, ParseError, ResourceLimitError)
_NUMERIC_ERRORS = (SolverError, DegenerateCellError, InvariantViolation, ArithmeticError)


@dataclass(frozen=True)
class RunConfig:
    level: int = 1
    refinement: int = 0
    output: str | None = None
    format: str = "json"
    seed: int = 0
    max_level: int = DEFAULT_MAX_LEVEL
    tolerance: float = 1e-9

    def __post_init__(self):
        if self.format not in ("json", "csv"):
            raise DomainError(f"unknown format {self.format!r}")
        if self.level < 0 or self.refinement < 0:
            raise DomainError("level and refinement must be nonnegative")
        check_level(self.level + self.refinement, self.max_level)


@dataclass
class Result:
    """A JSON document and, optionally, a table for CSV output."""

    document: dict
    header: Sequence[str] | None = None
    rows: list[list] | None = None


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


# ---------------------------------------------------------------- subcommands


def cmd_gasket(cfg: RunConfig, args) -> Result:
    g = build_level_graph(cfg.level, cfg.max_level)
    rows = [[i, float(x), float(y)] for i, (x, y) in enumerate(g.points)]
    return Result(g.to_json(), ["id", "x", "y"], rows)


def cmd_chart(cfg: RunConfig, args) -> Result:
    chart = build_chart(cfg.level, cfg.max_level)
    doc = chart.to_json()
    rows = frame_rows(cfg.level, cfg.max_level)
    doc["cells"] = [{"w": r[0], "frame": [r[1:3], r[3:5], r[5:7]]} for r in rows]
    return Result(doc, ["w", "x0", "y0", "x1", "y1", "x2", "y2"], rows)


def cmd_kusuoka(cfg: RunConfig, args) -> Result:
    t = kusuoka_table(cfg.level, cfg.max_level)
    rows = [[w, float(v)] for w, v in t.items()]
    doc = {"level": cfg.level, "total": t.total(), "cells": [{"w": w, "nu": v} for w, v in rows]}
    return Result(doc, ["w", "nu"], rows)


def cmd_zfield(cfg: RunConfig, args) -> Result:
    zf = z_field(cfg.level, cfg.max_level)
    return Result(zf.to_json(), ["w", "nu", "z11", "z12", "z22"], zf.rows())


def cmd_energy(cfg: RunConfig, args) -> Result:
    F = parse(args.f)
    rep = energy_report(F, cfg.level, cfg.max_level)
    doc = {"f": F.to_source(), **rep}
    return Result(doc, list(doc), [list(doc.values())])


def _path_result(spec: str, res, extra: dict | None = None) -> Result:
    doc = {"path": spec, **res.to_json(), **(extra or {})}
    return Result(doc, list(doc), [list(doc.values())])


def cmd_integrate(cfg: RunConfig, args) -> Result:
    omega = Form1((parse(args.wx), parse(args.wy)))
    p = EdgePath.from_spec(args.path)
    res = integrate_form(omega, p, cfg.refinement, max_level=cfg.max_level)
    return _path_result(args.path, res)


def cmd_ftli(cfg: RunConfig, args) -> Result:
    F = parse(args.f)
    p = EdgePath.from_spec(args.path)
    res = integrate_form(Form1.exact(F), p, cfg.refinement, max_level=cfg.max_level)
    exact = endpoint_difference(F, p)
    return _path_result(args.path, res, {"endpoint_difference": exact, "error": abs(res.value - exact)})


def cmd_distance(cfg: RunConfig, args) -> Result:
    x = Vertex.from_address(args.from_)
    y = Vertex.from_address(args.to)
    est = intrinsic_metric(x, y, cfg.level, max_level=cfg.max_level)
    doc = {"x": args.from_, "y": args.to, **est.to_json()}
    return Result(doc, list(doc), [list(doc.values())])


def cmd_check(cfg: RunConfig, args) -> Result:
    """Randomized spot checks, reproducible from ``--seed``."""
    rng = np.random.default_rng(cfg.seed)
    m = cfg.level
    worst_energy = 0.0
    for _ in range(args.trials):
        u = rng.normal(size=3)
        e0 = base_energy(u)
        e = graph_energy(extend_to_level(u, m, cfg.max_level).values, m, cfg.max_level)
        worst_energy = max(worst_energy, abs(e - e0) / max(e0, 1e-300))
    worst_roundtrip = 0
    for _ in range(args.trials):
        e = random_expr(rng)
        worst_roundtrip += parse(e.to_source()) != e
    trace = float(np.max(np.abs(np.trace(z_field(m, cfg.max_level).matrices, axis1=1, axis2=2) - 1.0)))
    ok = worst_energy <= cfg.tolerance and worst_roundtrip == 0 and trace <= cfg.tolerance
    doc = {
        "seed": cfg.seed,
        "level": m,
        "trials": args.trials,
        "energy_relative_error": worst_energy,
        "roundtrip_failures": int(worst_roundtrip),
        "z_trace_error": trace,
        "ok": bool(ok),
    }
    if not ok:
        raise InvariantViolation(json.dumps(doc))
    return Result(doc, list(doc), [list(doc.values())])


COMMANDS: dict[str, Callable[[RunConfig, argparse.Namespace], Result]] = {
    "gasket": cmd_gasket,
    "chart": cmd_chart,
    "kusuoka": cmd_kusuoka,
    "zfield": cmd_zfield,
    "energy": cmd_energy,
    "integrate": cmd_integrate,
    "ftli": cmd_ftli,
    "distance": cmd_distance,
    "check": cmd_check,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--level", type=int, default=None, help="gasket level m")
    common.add_argument("--refine", type=int, default=0, help="path refinement k")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", default=None, help="write to this file instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--max-level", type=int, default=DEFAULT_MAX_LEVEL, help="resource cap on levels")
    common.add_argument("--tol", type=float, default=1e-9, help="tolerance used by 'check'")

    parser = _Parser(prog="fractalforms", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in ("gasket", "chart", "kusuoka", "zfield"):
        sub.add_parser(name, parents=[common])
    sub.add_parser("energy", parents=[common]).add_argument("--f", required=True)
    p = sub.add_parser("integrate", parents=[common])
    p.add_argument("--wx", required=True)
    p.add_argument("--wy", required=True)
    p.add_argument("--path", required=True)
    p = sub.add_parser("ftli", parents=[common])
    p.add_argument("--f", required=True)
    p.add_argument("--path", required=True)
    p = sub.add_parser("distance", parents=[common])
    p.add_argument("--from", dest="from_", required=True)
    p.add_argument("--to", required=True)
    sub.add_parser("check", parents=[common]).add_argument("--trials", type=int, default=20)
    return parser


def _default_level(command: str) -> int:
    # paths are given at their own level; the refinement carries the resolution
    return 0 if command in ("integrate", "ftli") else 1


def render(result: Result, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(result.document) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(result.header)
    for row in result.rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _fail(code: str, message: str, status: int, stderr) -> int:
    stderr.write(json.dumps({"error": code, "message": message}) + "\n")
    return status


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        level = _default_level(args.command) if args.level is None else args.level
        cfg = RunConfig(level, args.refine, args.output, args.format, args.seed, args.max_level, args.tol)
        text = render(COMMANDS[args.command](cfg, args), cfg.format)
        if cfg.output:
            with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            stdout.write(text)
    except _UsageError as exc:
        return _fail("USAGE_ERROR", str(exc), EXIT_USAGE, stderr)
    except _USAGE_ERRORS as exc:
        return _fail(exc.code, str(exc), EXIT_USAGE, stderr)
    except _NUMERIC_ERRORS as exc:
        code = exc.code if isinstance(exc, FractalFormsError) else "NUMERIC_ERROR"
        return _fail(code, str(exc), EXIT_NUMERIC, stderr)
    except OSError as exc:
        return _fail("IO_ERROR", str(exc), EXIT_USAGE, stderr)
    return EXIT_OK
