"""Command line front end: ``uncert <command> ...``.

Every command writes one JSON result document with the fields ``command``,
``inputs``, ``values``, ``reports`` and ``solver`` (plus ``meta`` unless
``--no-meta``). ``figure-data --format csv`` writes a CSV table instead.

Exit codes: 0 success, 1 a checked inequality or gallery report failed,
2 bad input, 3 the SDP solver did not converge.
"""
from __future__ import annotations

import argparse
import csv
import io as _stdio
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext

import numpy as np

from . import __version__
from .bounds import (
    GaussianParams,
    check_corollary1,
    check_theorem1,
    check_theorem2,
    demerit_bound,
    gaussian_bound,
    optimal_sigma_f,
    overlap_bound,
)
from .channels import Basis, ChoiOperator, Instrument, computational_basis, conjugate_basis
from .gallery import REPORTS, all_reports, figure_data
from .io import DocumentError, document_metadata, dumps, format_number, load_channel
from .measures import MeasureResult, complementarity, diamond_distance, epsilon, eta, eta_hat, nu
from .sdp import SolverFailure

EXIT_OK, EXIT_VIOLATED, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3

MEASURES = {"epsilon": epsilon, "nu": nu, "eta": eta, "eta-hat": eta_hat}


class InputError(ValueError):
    pass


# ---------------------------------------------------------------------------
# argument helpers


def parse_basis(spec: str) -> Basis:
    """``conjugate:D:X``, ``conjugate:D:Z``, ``computational:D`` or ``file:PATH``.

    ``Z`` is the computational basis and ``X`` its Fourier conjugate. A basis
    file holds ``{"vectors": rows}`` (or just the rows), one row per basis
    vector, each entry a number or a ``[re, im]`` pair.
    """
    kind, _, rest = spec.partition(":")
    if kind == "conjugate":
        dim, _, which = rest.partition(":")
        d = _dimension(dim, spec)
        if which not in ("X", "Z"):
            raise InputError(f"basis {spec!r}: expected X or Z after the dimension")
        z, x = conjugate_basis(d)
        return x if which == "X" else z
    if kind == "computational":
        return computational_basis(_dimension(rest, spec))
    if kind == "file":
        try:
            with open(rest, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"basis file {rest!r}: {exc}") from exc
        rows = raw.get("vectors") if isinstance(raw, dict) else raw
        try:
            vec = np.array([[complex(*e) if isinstance(e, list) else complex(e) for e in row] for row in rows])
            return Basis(vec, label=rest)
        except (TypeError, ValueError) as exc:
            raise InputError(f"basis file {rest!r}: {exc}") from exc
    raise InputError(f"unknown basis spec {spec!r}")


def _dimension(text: str, spec: str) -> int:
    try:
        d = int(text)
    except ValueError:
        raise InputError(f"basis {spec!r}: bad dimension {text!r}") from None
    if d < 2:
        raise InputError(f"basis {spec!r}: dimension must be at least 2")
    return d


def _load(path: str, raw: bool = False):
    try:
        return load_channel(path, raw=raw)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    except DocumentError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _instrument(path: str) -> Instrument:
    dev = _load(path)
    if not isinstance(dev, Instrument):
        raise InputError(f"{path}: expected an instrument (document with 'outcomes')")
    return dev


def _same_dim(*bases: Basis, dim: int | None = None):
    dims = {b.dim for b in bases} | ({dim} if dim is not None else set())
    if len(dims) != 1:
        raise InputError(f"dimension mismatch: {sorted(dims)}")


def _solver_summary(results) -> dict:
    results = [r for r in results if isinstance(r, MeasureResult)]
    if not results:
        return {"gap": None, "iterations": 0, "status": "not-used"}
    status = "optimal" if all(r.status == "optimal" for r in results) else "degraded"
    return {"gap": max(r.gap for r in results), "iterations": int(sum(r.iterations for r in results)),
            "status": status}


def _measure_dict(r: MeasureResult) -> dict:
    return {"value": r.value, "lower": r.lower, "upper": r.upper, "gap": r.gap, "status": r.status,
            "iterations": r.iterations}


def _doc(command: str, inputs: dict, values: dict, reports=(), solver=None) -> dict:
    return {"command": command, "inputs": inputs, "values": values, "reports": list(reports),
            "solver": solver or _solver_summary([])}


def _executor(threads: int):
    return ThreadPoolExecutor(max_workers=threads) if threads > 1 else nullcontext(None)


# ---------------------------------------------------------------------------
# commands; each returns (document, exit code)


def cmd_validate(a):
    dev = _load(a.channel, raw=a.raw)
    kind = "instrument" if isinstance(dev, Instrument) else "channel"
    values = {"kind": kind, "dim_in": dev.dim_in, "dim_out": dev.dim_out,
              "n_outcomes": dev.n_outcomes if kind == "instrument" else 1}
    with open(a.channel, "rb") as fh:
        values["metadata"] = document_metadata(fh.read())
    return _doc("validate", {"channel": a.channel, "raw": a.raw}, values), EXIT_OK


def cmd_diamond(a):
    e1, e2 = _load(a.channel), _load(a.other)
    r = diamond_distance(e1, e2, a.tol)
    return _doc("diamond", {"channel": a.channel, "other": a.other},
                {"delta": r.value, "delta_upper": r.upper, "gap": r.gap}, solver=_solver_summary([r])), EXIT_OK


def cmd_measure(a):
    e = _instrument(a.channel)
    b = parse_basis(a.basis)
    _same_dim(b, dim=e.dim_in)
    r = MEASURES[a.kind](e, b, a.tol)
    return _doc("measure", {"kind": a.kind, "channel": a.channel, "basis": a.basis},
                {a.kind: r.value, "detail": _measure_dict(r)}, solver=_solver_summary([r])), EXIT_OK


def cmd_complementarity(a):
    x, z = parse_basis(a.x), parse_basis(a.z)
    _same_dim(x, z)
    cm, cp, ch = complementarity(x, z, a.tol)
    values = {"c_M": cm.value, "c_P": cp.value, "c_P_hat": ch.value,
              "overlap_bound": overlap_bound(x, z), "demerit_bound": demerit_bound(x, z)}
    return _doc("complementarity", {"x": a.x, "z": a.z}, values, solver=_solver_summary([cm, cp, ch])), EXIT_OK


def cmd_bound(a):
    x, z = parse_basis(a.x), parse_basis(a.z)
    _same_dim(x, z)
    if a.kind == "overlap":
        v = overlap_bound(x, z)
    else:
        v = demerit_bound(x, z, a.variant)
    return _doc("bound", {"kind": a.kind, "variant": a.variant, "x": a.x, "z": a.z}, {a.kind: v}), EXIT_OK


def cmd_verify(a):
    x, z = parse_basis(a.x), parse_basis(a.z)
    _same_dim(x, z)
    if a.theorem == "corollary1":
        dev = _load(a.channel)
        if not isinstance(dev, ChoiOperator):
            raise InputError(f"{a.channel}: expected a channel (document without 'outcomes')")
        reports = [check_corollary1(dev, x, z, tol=a.tol)]
    else:
        e = _instrument(a.channel)
        _same_dim(x, dim=e.dim_in)
        check = check_theorem1 if a.theorem == "1" else check_theorem2
        reports = list(check(e, x, z, tol=a.tol))
    gaps = [g for r in reports for g in r.components.get("gaps", {}).values()]
    solver = {"gap": max(gaps) if gaps else None, "iterations": None, "status": "optimal"}
    ok = all(r.satisfied for r in reports)
    doc = _doc("verify", {"theorem": a.theorem, "channel": a.channel, "x": a.x, "z": a.z},
               {"satisfied": ok, "min_slack": min(r.slack for r in reports)},
               [r.as_dict() for r in reports], solver)
    return doc, EXIT_OK if ok else EXIT_VIOLATED


def cmd_gaussian(a):
    try:
        p = GaussianParams(a.sigma_q, a.sigma_p)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    values = {"c": p.c, "bound": gaussian_bound(p, a.kind)}
    if a.kind == "measurement" and p.c < 1:
        values["optimal_sigma_f"] = optimal_sigma_f(p)
    return _doc("gaussian", {"sigma_q": a.sigma_q, "sigma_p": a.sigma_p, "kind": a.kind}, values), EXIT_OK


def cmd_gallery(a):
    names = None if a.all or not a.name else a.name
    try:
        with _executor(a.threads) as pool:
            reports = all_reports(a.tol, names, executor=pool)
    except ValueError as exc:
        if "unknown gallery" in str(exc):
            raise InputError(str(exc)) from exc
        raise
    ok = all(r.passed for r in reports)
    values = {"pass": ok, "n_reports": len(reports)}
    return _doc("gallery", {"names": names or list(REPORTS)}, values, [r.as_dict() for r in reports]), \
        EXIT_OK if ok else EXIT_VIOLATED


def cmd_figure_data(a):
    if a.grid < 2:
        raise InputError("--grid must be at least 2")
    with _executor(a.threads) as pool:
        rows = figure_data(a.which, a.grid, a.tol, executor=pool)
    if a.format == "csv":
        buf = _stdio.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(rows[0]))
        for row in rows:
            w.writerow([format_number(v) for v in row.values()])
        return buf.getvalue(), EXIT_OK
    return _doc("figure-data", {"which": a.which, "grid": a.grid}, {"rows": rows}), EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "diamond": cmd_diamond,
    "measure": cmd_measure,
    "complementarity": cmd_complementarity,
    "bound": cmd_bound,
    "verify": cmd_verify,
    "gaussian": cmd_gaussian,
    "gallery": cmd_gallery,
    "figure-data": cmd_figure_data,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the result here instead of stdout")
    common.add_argument("--no-meta", action="store_true", help="omit version and timing information")
    common.add_argument("--tol", type=float, default=None, help="SDP tolerance (default from UNCERT_SDP_TOL or 1e-8)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for gallery and figure-data")

    p = argparse.ArgumentParser(prog="uncert", description="Error/disturbance computations for finite quantum devices.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common], help="check a channel document")
    s.add_argument("channel")
    s.add_argument("--raw", action="store_true", help="skip invariant checks")

    s = sub.add_parser("diamond", parents=[common], help="half diamond norm distance of two devices")
    s.add_argument("channel")
    s.add_argument("other")

    s = sub.add_parser("measure", parents=[common], help="error or disturbance of an instrument")
    s.add_argument("--kind", required=True, choices=sorted(MEASURES))
    s.add_argument("--channel", required=True)
    s.add_argument("--basis", required=True)

    s = sub.add_parser("complementarity", parents=[common], help="complementarity of two bases")
    s.add_argument("--x", required=True)
    s.add_argument("--z", required=True)

    s = sub.add_parser("bound", parents=[common], help="closed-form complementarity bounds")
    s.add_argument("--kind", required=True, choices=["overlap", "demerit"])
    s.add_argument("--variant", default="uniform", choices=["uniform", "rowP"])
    s.add_argument("--x", required=True)
    s.add_argument("--z", required=True)

    s = sub.add_parser("verify", parents=[common], help="check an uncertainty relation on a device")
    s.add_argument("--theorem", required=True, choices=["1", "2", "corollary1"])
    s.add_argument("--channel", required=True)
    s.add_argument("--x", required=True)
    s.add_argument("--z", required=True)

    s = sub.add_parser("gaussian", parents=[common], help="position/momentum closed forms")
    s.add_argument("--sigma-q", type=float, required=True)
    s.add_argument("--sigma-p", type=float, required=True)
    s.add_argument("--kind", default="measurement", choices=["measurement", "preparation"])

    s = sub.add_parser("gallery", parents=[common], help="run worked examples")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--all", action="store_true")
    g.add_argument("--name", action="append", choices=sorted(REPORTS))

    s = sub.add_parser("figure-data", parents=[common], help="tabulate curve data")
    s.add_argument("--which", required=True, choices=["fig5", "fig7"])
    s.add_argument("--format", default="json", choices=["json", "csv"])
    s.add_argument("--grid", type=int, default=21)
    return p


def _write(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.tol is not None and not args.tol > 0:
        print("uncert: error: --tol must be positive", file=sys.stderr)
        return EXIT_INPUT
    if args.threads < 1:
        print("uncert: error: --threads must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    start = time.perf_counter()
    try:
        result, code = COMMANDS[args.command](args)
    except (InputError, DocumentError, ValueError) as exc:
        print(f"uncert: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverFailure as exc:
        print(f"uncert: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    if isinstance(result, dict):
        if not args.no_meta:
            result["meta"] = {"version": __version__, "elapsed_seconds": time.perf_counter() - start,
                              "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
                              "sdp_tol_env": os.environ.get("UNCERT_SDP_TOL")}
        result = dumps(result)
    _write(result, args.out)
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
