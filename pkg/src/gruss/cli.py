"""Command-line entry point.

Exit codes: 0 when every check passes, 1 when a violation is found, 2 for
usage, input or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import transforms
from .certificate import TIGHTNESS_TOL
from .errors import GrussError, InstanceIOError, ParseError
from .harness import FLAVOR_CHOICES, SCAN_IDS, SuiteConfig, run_suite, tightness_scan, witness_certificate
from .instance import load_instance
from .report import emit_report

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2
SLACK_ENV = "GRUSS_SLACK_SCALE"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gruss", description="Numerical verification of Grüss-type inequalities in matrix modules")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="run the randomized verification suite")
    v.add_argument("--config", type=Path, help="JSON file with SuiteConfig fields")
    v.add_argument("--seed", type=int)
    v.add_argument("--trials", type=int)
    v.add_argument("--flavor", choices=FLAVOR_CHOICES)
    v.add_argument("--strict-radius", action="store_true", default=None, help="check transform radii for every index")
    v.add_argument("--json", action="store_true", help="machine-readable report")

    s = sub.add_parser("scan", help="tightness scan for one inequality")
    s.add_argument("--ineq", required=True, help=f"one of {', '.join(SCAN_IDS)}")
    s.add_argument("--trials", type=int, default=200)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--json", action="store_true")

    w = sub.add_parser("witness", help="evaluate the two-point sharpness instance")
    w.add_argument("--ineq", required=True, choices=("3.8", "5.2"))
    w.add_argument("--k", type=int, default=2)
    w.add_argument("--d", type=int, default=1)
    w.add_argument("--r", type=float, default=1.0)
    w.add_argument("--s", type=float, default=1.0)
    w.add_argument("--json", action="store_true")

    t = sub.add_parser("transform", help="Fourier or Mellin transform of a stored instance")
    t.add_argument("--kind", required=True, choices=("fourier", "mellin"))
    t.add_argument("--input", required=True, type=Path)
    t.add_argument("--omega", type=float)
    t.add_argument("--m", required=True, type=int)
    t.add_argument("--certify", action="store_true", help="also certify the mean-based approximation and pair bound")
    t.add_argument("--json", action="store_true")
    return parser


def _slack_scale(default: float) -> float:
    raw = os.environ.get(SLACK_ENV)
    if raw is None or raw == "":
        return default
    try:
        return float(raw)
    except ValueError:
        raise UsageError(f"{SLACK_ENV} must be a number, got {raw!r}") from None


def _write(out, text: str) -> None:
    out.write(text)
    out.flush()


def _load_config(args) -> SuiteConfig:
    data = {}
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text(encoding="utf-8"))
        except OSError as exc:
            raise InstanceIOError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno, exc.colno) from None
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
    for key in ("seed", "trials", "flavor"):
        if getattr(args, key) is not None:
            data[key] = getattr(args, key)
    if args.strict_radius:
        data["strict_radius_mode"] = True
    data["slack_scale"] = _slack_scale(float(data.get("slack_scale", 1.0)))
    try:
        return SuiteConfig.from_mapping(data)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid configuration: {exc}") from None


def _emit(report, as_json: bool, out) -> int:
    _write(out, emit_report(report, "json" if as_json else "text").decode())
    return EXIT_OK if report.all_passed else EXIT_VIOLATION


def cmd_verify(args, out) -> int:
    return _emit(run_suite(_load_config(args)), args.json, out)


def cmd_scan(args, out) -> int:
    try:
        cfg = SuiteConfig(seed=args.seed, trials=args.trials, slack_scale=_slack_scale(1.0))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return _emit(tightness_scan(cfg, args.ineq), args.json, out)


def cmd_witness(args, out) -> int:
    cert = witness_certificate(args.ineq, args.k, args.d, args.r, args.s, slack_scale=_slack_scale(1.0))
    ok = cert.passed and abs(cert.tightness - 1.0) <= TIGHTNESS_TOL
    if args.json:
        _write(out, json.dumps({**cert.to_dict(), "sharp": ok}, indent=2) + "\n")
    else:
        _write(out, f"{cert.name}: lhs={cert.lhs:.17g} bound={cert.rhs_chain[-1]:.17g} tightness={cert.tightness:.17g} "
                    f"{'sharp' if ok else 'NOT SHARP'}\n")
    return EXIT_OK if ok else EXIT_VIOLATION


def _pairs(arr) -> list:
    arr = np.asarray(arr)
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def cmd_transform(args, out) -> int:
    inst = load_instance(args.input)
    slack_scale = _slack_scale(1.0)
    if args.kind == "fourier":
        if args.omega is None:
            raise UsageError("--omega is required for --kind fourier")
        value = transforms.fourier(inst.xs, args.omega, args.m)
    else:
        value = transforms.mellin(inst.xs, args.m)
    certs = []
    if args.certify:
        r = inst.r if inst.flavor == "cstar" else None
        if args.kind == "fourier":
            certs.append(transforms.fourier_mean_approx(inst.xs, args.omega, args.m, inst.a, r, slack_scale=slack_scale).as_bound())
            certs.append(transforms.check_fourier_pair_bound(inst.xs, inst.ys, args.omega, args.m, inst.a, inst.b, slack_scale=slack_scale))
        else:
            certs.append(transforms.mellin_mean_approx(inst.xs, args.m, inst.a, r, slack_scale=slack_scale).as_bound())
            certs.append(transforms.check_mellin_pair_bound(inst.xs, inst.ys, args.m, inst.a, inst.b, slack_scale=slack_scale))
    ok = all(c.passed for c in certs)
    if args.json:
        payload = {"kind": args.kind, "m": args.m, "omega": args.omega, "value": _pairs(value),
                   "certificates": [c.to_dict() for c in certs], "all_passed": ok}
        _write(out, json.dumps(payload, indent=2) + "\n")
    else:
        lines = [f"{args.kind} transform at m={args.m}: {value.shape[0]} part(s) of size {value.shape[1]}x{value.shape[2]}",
                 np.array2string(value, precision=6)]
        for c in certs:
            lines.append(f"{c.name}: lhs={c.lhs:.6g} bound={c.rhs_chain[-1]:.6g} tightness={c.tightness:.6g} "
                         f"{'ok' if c.passed else 'FAIL'}")
        _write(out, "\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_VIOLATION


COMMANDS = {"verify": cmd_verify, "scan": cmd_scan, "witness": cmd_witness, "transform": cmd_transform}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(exc, file=sys.stderr)
    except (GrussError, ValueError, OSError) as exc:
        print(f"gruss: {type(exc).__name__}: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
