"""Command-line interface: ``loqc run|grover|sweep|fidelity|gates``.

Exit codes: 0 success, 1 contract or validation failure, 2 usage, input or
parse error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Optional, Sequence

import numpy as np

from . import dsl
from .circuit import run_circuit
from .elements import GATE_WAVEPLATES, compose, one_qubit_gate, waveplate_unitary
from .errors import ContractViolation, ParseError, ValidationError
from .fock import DEFAULT_PHOTON_CAP, DEFAULT_TOLERANCE
from .gates import (
    CNOT,
    CSIGN,
    ETA2,
    P_COINCIDENCE,
    P_SCALABLE,
    action_matches,
    build_coincidence_cnot,
    build_coincidence_csign,
    build_scalable_cnot,
    build_scalable_csign,
    gate_action_matrix,
)
from .grover import GroverVariant, cross_check, run_grover
from .metrics import distribution_fidelity, oracle_distinguishability
from .qubit_reference import MARKED_ITEMS

EXIT_OK, EXIT_CONTRACT, EXIT_USAGE = 0, 1, 2
SIG_DIGITS = 12
SWEEP_PARAMS = ("eta_d", "delta_r")
CHECK_ATOL = 1e-12
CONTRACT_ATOL = 1e-10

log = logging.getLogger("loqc")


class UsageError(Exception):
    """Bad input that argparse cannot catch (unreadable files, bad grids)."""


# -- formatting ----------------------------------------------------------------


def _num(x) -> str:
    if isinstance(x, bool) or not isinstance(x, (int, float, np.floating)):
        return str(x)
    return format(float(x), f".{SIG_DIGITS}g")


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _num(v) for k, v in row.items()})
    return buf.getvalue()


def _table(rows: list[dict]) -> str:
    if not rows:
        return ""
    cols = list(rows[0])
    cells = [[_num(r[c]) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            out[key] = json.dumps(v)
        else:
            out[key] = v
    return out


def _emit(payload, fmt: str, rows: Optional[list[dict]] = None) -> str:
    if fmt == "json":
        return json.dumps(payload, indent=2, sort_keys=False) + "\n"
    rows = rows if rows is not None else [_flatten(payload)]
    return _csv(rows) if fmt == "csv" else _table(rows)


def _complex_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


# -- run ---------------------------------------------------------------------


def cmd_run(args) -> tuple[int, str]:
    doc = _load(args.file, args.eta_convention)
    if doc.is_gate:
        bp = dsl.to_blueprint(doc)
        action, success = gate_action_matrix(
            bp, photon_cap=args.photon_cap, tolerance=args.tolerance
        )
        payload = {
            "file": args.file,
            "name": bp.name,
            "kind": "gate",
            "acceptance": bp.acceptance,
            "success_probability": success,
            "action": _complex_matrix(action),
        }
        code = EXIT_OK
        if bp.target is not None:
            ok = action_matches(action, bp.target, bp.up_to_phase, atol=CONTRACT_ATOL)
            payload["contract"] = "pass" if ok else "fail"
            code = EXIT_OK if ok else EXIT_CONTRACT
        rows = [
            {"input": f"{i:02b}", **{f"out_{j:02b}": _num_c(action[j, i]) for j in range(4)}}
            for i in range(4)
        ]
        if args.format != "json":
            for row in rows:
                row["success"] = success
        return code, _emit(payload, args.format, rows)

    circuit = dsl.to_circuit(doc)
    result = run_circuit(
        circuit,
        eta_d=args.eta_d,
        bucket=args.bucket,
        photon_cap=args.photon_cap,
        tolerance=args.tolerance,
    )
    readings = {
        ",".join(map(str, k)): p for k, p in sorted(result.accepted.items()) if p > 0.0
    }
    payload = {
        "file": args.file,
        "name": circuit.name,
        "kind": "circuit",
        "acceptance_probability": result.acceptance_probability,
        "detectors": [d.name for d in circuit.detectors],
        "accepted_readings": readings,
        "counts": circuit.tally(),
    }
    if result.logical is not None:
        payload["conditional_distribution"] = result.logical.to_dict()
    rows = [{"reading": k, "probability": p} for k, p in readings.items()]
    return EXIT_OK, _emit(payload, args.format, rows)


def _num_c(z: complex) -> str:
    if abs(z.imag) < 1e-15:
        return _num(z.real)
    return f"{_num(z.real)}{'+' if z.imag >= 0 else '-'}{_num(abs(z.imag))}j"


def _load(path: str, eta_convention: str) -> dsl.CircuitDocument:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    except UnicodeDecodeError:
        raise UsageError(f"{path} is not UTF-8 text") from None
    try:
        return dsl.parse(text, eta_convention=eta_convention)
    except ParseError as exc:
        raise UsageError(f"{path}: {exc}") from None


# -- grover ------------------------------------------------------------------


def _marked_list(value: str) -> list[str]:
    return list(MARKED_ITEMS) if value == "all" else [value]


def cmd_grover(args) -> tuple[int, str]:
    reports = []
    for marked in _marked_list(args.marked):
        rep = run_grover(
            args.variant,
            marked,
            eta_d=args.eta_d,
            bucket=args.bucket,
            delta_r=args.delta_r,
            photon_cap=args.photon_cap,
            tolerance=args.tolerance,
        )
        d = rep.to_dict()
        if args.cross_check:
            d["cross_check"] = cross_check(
                args.variant, marked, photon_cap=args.photon_cap, tolerance=args.tolerance
            )
        reports.append(d)
    payload = reports[0] if len(reports) == 1 else {"reports": reports}
    failed = args.cross_check and not all(r["cross_check"] for r in reports)
    rows = [
        {
            "variant": r["variant"],
            "marked": r["marked"],
            "success_probability": r["success_probability"],
            "answer": r["answer"],
            **{f"p_{k}": v for k, v in r["conditional_distribution"].items()},
        }
        for r in reports
    ]
    return (EXIT_CONTRACT if failed else EXIT_OK), _emit(payload, args.format, rows)


# -- sweep -------------------------------------------------------------------


def _grid(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"grid must be comma-separated numbers, got {text!r}") from None
    if not values or not all(math.isfinite(v) for v in values):
        raise UsageError(f"grid must contain finite numbers, got {text!r}")
    return values


def _sweep_point(task) -> list[dict]:
    variant, param, value, marked, bucket, photon_cap, tolerance = task
    settings = {"eta_d": 1.0, "delta_r": 0.0, param: value}
    reports = [
        run_grover(
            variant, m, bucket=bucket, photon_cap=photon_cap, tolerance=tolerance, **settings
        )
        for m in MARKED_ITEMS
    ]
    fid = None
    if not any(r.degenerate for r in reports):
        fid = oracle_distinguishability(reports)
    rows = []
    for r in reports:
        if r.marked not in marked:
            continue
        rows.append(
            {
                "variant": r.variant.value,
                "param": param,
                "value": value,
                "marked": r.marked,
                "acceptance": r.overall_success_probability,
                "p_correct": r.conditional_distribution[r.marked],
                "ideal_fidelity": fid.ideal_fidelity[r.marked] if fid else float("nan"),
                "max_pairwise_fidelity": fid.max_pairwise_fidelity if fid else float("nan"),
                "min_pairwise_distinguishability": (
                    fid.min_pairwise_distinguishability if fid else float("nan")
                ),
            }
        )
    return rows


def cmd_sweep(args) -> tuple[int, str]:
    grid = _grid(args.grid)
    if args.param == "eta_d" and not all(0.0 <= v <= 1.0 for v in grid):
        raise UsageError("eta_d grid values must lie in [0, 1]")
    if GroverVariant.parse(args.variant) is GroverVariant.ABSTRACT:
        raise UsageError("sweeps need an optical variant")
    marked = _marked_list(args.marked)
    tasks = [
        (args.variant, args.param, v, marked, args.bucket, args.photon_cap, args.tolerance)
        for v in grid
    ]
    workers = args.workers or min(len(tasks), os.cpu_count() or 1)
    if workers <= 1 or len(tasks) == 1:
        results = [_sweep_point(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map() yields in submission order, so rows come out in grid order
            results = list(pool.map(_sweep_point, tasks))
    rows = [row for point in results for row in point]
    fmt = args.format if args.format_given else "csv"
    return EXIT_OK, _emit({"rows": rows}, fmt, rows)


# -- fidelity ----------------------------------------------------------------


def _distribution_from_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc.msg}, line {exc.lineno})") from None
    if isinstance(data, dict) and "conditional_distribution" in data:
        data = data["conditional_distribution"]
    if not isinstance(data, dict) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in data.values()
    ):
        raise UsageError(f"{path}: expected a report or an outcome -> probability mapping")
    return {str(k): float(v) for k, v in data.items()}


def cmd_fidelity(args) -> tuple[int, str]:
    p = _distribution_from_json(args.report_a)
    q = _distribution_from_json(args.report_b)
    try:
        f = distribution_fidelity(p, q)
    except ValidationError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    payload = {"fidelity": f, "distinguishability": 1.0 - f}
    if args.format == "text":
        return EXIT_OK, f"{_num(f)}\n"
    return EXIT_OK, _emit(payload, args.format)


# -- gates -------------------------------------------------------------------

_GATE_MATRICES = {
    "R": np.array([[1, 1], [1, -1]]) / math.sqrt(2),
    "T": np.diag([1, np.exp(1j * math.pi / 4)]),
    "X": np.array([[0, 1], [1, 0]]),
    "Z": np.diag([1, -1]),
    "Y": np.array([[0, -1j], [1j, 0]]),
}


def _phase_free_distance(a: np.ndarray, b: np.ndarray) -> float:
    k = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    phase = a[k] / b[k]
    if abs(phase) == 0:
        return float("inf")
    return float(np.max(np.abs(a - phase / abs(phase) * b)))


def gate_checks(photon_cap: int = DEFAULT_PHOTON_CAP, tolerance: float = DEFAULT_TOLERANCE):
    rows = []
    for name, expected in _GATE_MATRICES.items():
        if name in GATE_WAVEPLATES:
            phi, alpha = GATE_WAVEPLATES[name]
            got = waveplate_unitary(phi, alpha)
            err = float(np.max(np.abs(got - expected)))
            rule = "exact"
        else:
            got = compose(one_qubit_gate(name))
            err = _phase_free_distance(got, expected)
            rule = "up to global phase"
        rows.append(
            {
                "check": f"one-qubit {name}",
                "expected": rule,
                "measured": err,
                "tolerance": CHECK_ATOL,
                "result": "PASS" if err <= CHECK_ATOL else "FAIL",
            }
        )
    gates = [
        ("coincidence CSIGN", build_coincidence_csign, CSIGN, P_COINCIDENCE, True),
        ("coincidence CNOT", build_coincidence_cnot, CNOT, P_COINCIDENCE, True),
        ("heralded CSIGN", build_scalable_csign, CSIGN, P_SCALABLE, True),
        ("heralded CNOT", build_scalable_cnot, CNOT, P_SCALABLE, True),
    ]
    for label, builder, unit, p_expected, phase_free in gates:
        try:
            bp = builder()
            action, success = gate_action_matrix(bp, photon_cap=photon_cap, tolerance=tolerance)
        except ContractViolation as exc:
            rows.append(
                {
                    "check": f"{label} action",
                    "expected": "contract",
                    "measured": str(exc),
                    "tolerance": CONTRACT_ATOL,
                    "result": "FAIL",
                }
            )
            continue
        scale = math.sqrt(p_expected)
        err = _phase_free_distance(action, scale * unit)
        rows.append(
            {
                "check": f"{label} action",
                "expected": f"{_num(scale)} x {'CSIGN' if unit is CSIGN else 'CNOT'} up to phase",
                "measured": err,
                "tolerance": CONTRACT_ATOL,
                "result": "PASS" if err <= CONTRACT_ATOL else "FAIL",
            }
        )
        rows.append(
            {
                "check": f"{label} success",
                "expected": _num(p_expected),
                "measured": success,
                "tolerance": CONTRACT_ATOL,
                "result": "PASS" if abs(success - p_expected) <= CONTRACT_ATOL else "FAIL",
            }
        )
        if unit is CSIGN and p_expected == P_SCALABLE:
            mags = np.abs(np.diag(action))
            signs = np.sign(np.real(np.diag(action) / action[0, 0]))
            ok = np.allclose(mags, ETA2, atol=CONTRACT_ATOL) and list(signs) == [1, 1, 1, -1]
            rows.append(
                {
                    "check": f"{label} amplitudes",
                    "expected": f"|a|={_num(ETA2)}, relative signs (+,+,+,-)",
                    "measured": float(np.max(np.abs(mags - ETA2))),
                    "tolerance": CONTRACT_ATOL,
                    "result": "PASS" if ok else "FAIL",
                }
            )
    return rows


def cmd_gates(args) -> tuple[int, str]:
    rows = gate_checks(args.photon_cap, args.tolerance)
    failed = any(r["result"] != "PASS" for r in rows)
    fmt = args.format if args.format_given else "text"
    code = EXIT_CONTRACT if (args.check and failed) else EXIT_OK
    return code, _emit({"checks": rows, "all_pass": not failed}, fmt, rows)


# -- parser ------------------------------------------------------------------


def _global_options(parser: argparse.ArgumentParser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument(
        "--photon-cap", type=int, default=d(DEFAULT_PHOTON_CAP),
        help="largest total photon number a state may hold",
    )
    parser.add_argument(
        "--tolerance", type=float, default=d(DEFAULT_TOLERANCE),
        help="amplitudes below this magnitude are dropped",
    )
    parser.add_argument("--format", choices=("json", "csv", "text"), default=d(None))
    parser.add_argument(
        "--eta-convention", choices=dsl.ETA_CONVENTIONS, default=d("amplitude"),
        help="read beamsplitter values in circuit files as amplitude or intensity reflectivities",
    )
    parser.add_argument(
        "--seed", type=int, default=d(None),
        help="accepted for scripting compatibility; the simulation is exact and ignores it",
    )
    parser.add_argument("-v", "--verbose", action="store_true", default=d(False))


def _imperfections(parser: argparse.ArgumentParser, delta_r: bool = True):
    parser.add_argument("--eta-d", type=float, default=1.0, help="detector efficiency")
    parser.add_argument("--bucket", action="store_true", help="non-photon-number-resolving detectors")
    if delta_r:
        parser.add_argument(
            "--delta-r", type=float, default=0.0, help="shift of every beamsplitter reflectivity"
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loqc", description="Exact simulation of polarization-encoded linear-optics circuits."
    )
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a .lqc circuit or gate file")
    _global_options(p, suppress=True)
    p.add_argument("file")
    _imperfections(p, delta_r=False)
    p.set_defaults(func=cmd_run)

    variants = [v.value for v in GroverVariant]
    marked = list(MARKED_ITEMS) + ["all"]
    p = sub.add_parser("grover", help="run a Grover variant for one or all marked items")
    _global_options(p, suppress=True)
    p.add_argument("--variant", required=True, choices=variants)
    p.add_argument("--marked", required=True, choices=marked)
    p.add_argument("--cross-check", action="store_true", help="compare with the dense reference")
    _imperfections(p)
    p.set_defaults(func=cmd_grover)

    p = sub.add_parser("sweep", help="sweep one imperfection over a grid; CSV by default")
    _global_options(p, suppress=True)
    p.add_argument("--variant", required=True, choices=[v for v in variants if v != "abstract"])
    p.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p.add_argument("--grid", required=True, help="comma-separated values, e.g. 1.0,0.95,0.9")
    p.add_argument("--marked", default="all", choices=marked)
    p.add_argument("--bucket", action="store_true", help="non-photon-number-resolving detectors")
    p.add_argument("--workers", type=int, default=0, help="processes (default: one per grid point)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fidelity", help="classical fidelity of two reports or distributions")
    _global_options(p, suppress=True)
    p.add_argument("report_a")
    p.add_argument("report_b")
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("gates", help="check one-qubit matrices, gate actions and success rates")
    _global_options(p, suppress=True)
    p.add_argument("--check", action="store_true", help="exit 1 if any check fails")
    p.set_defaults(func=cmd_gates)
    return parser


def main(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=stderr)
    args.format_given = args.format is not None
    if args.format is None:
        args.format = "json"
    if args.photon_cap < 1 or args.tolerance < 0:
        print("loqc: error: --photon-cap must be positive and --tolerance non-negative", file=stderr)
        return EXIT_USAGE
    try:
        code, text = args.func(args)
    except UsageError as exc:
        print(f"loqc: error: {exc}", file=stderr)
        return EXIT_USAGE
    except (ContractViolation, ValidationError) as exc:
        print(f"loqc: contract violation: {exc}", file=stderr)
        return EXIT_CONTRACT
    except ValueError as exc:
        print(f"loqc: error: {exc}", file=stderr)
        return EXIT_USAGE
    stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
