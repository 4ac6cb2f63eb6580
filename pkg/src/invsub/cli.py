"""Command-line interface.

Usage::

    invsub renewal --model m.json --h 0.5 --T 2
    invsub moment --model m.json --t 1,2 --m 1,1
    invsub moment --model m.json --t 1 --gamma 0.5
    invsub covariance --model m.json --s 1 --t 1,2 [--verify]
    invsub htilde --model m.json --s 0.5,1.2 --lam 1,2
    invsub simulate --model m.json --t 1,2 [--m 1,1] --paths 100000 --seed 7
    invsub verify --model m.json

Exit codes: 0 success, 1 verification failure, 2 validation error,
3 numeric error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Sequence

from . import jointlaw, mc, moments, renewal, verify
from .errors import DomainError, HorizonError, NumericError, UnsupportedError, ValidationError
from .exponent import load_model
from .laplace import InversionConfig

EXIT_OK, EXIT_VERIFY, EXIT_VALIDATION, EXIT_NUMERIC = 0, 1, 2, 3


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _flatten(chunks):
    return None if chunks is None else [x for chunk in chunks for x in chunk]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", required=True, help="JSON model file")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--h", type=float, help="renewal grid step")
    common.add_argument("--T", type=float, help="renewal grid horizon")
    common.add_argument("--t", type=_float_list, nargs="+", help="times, comma or space separated")
    common.add_argument("--method", choices=("talbot", "stehfest", "gaver-stehfest"))
    common.add_argument("--terms", type=int, default=16, help="Gaver-Stehfest order")
    common.add_argument("--paths", type=int, default=20_000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--delta", type=float, default=mc.DEFAULT_GRID_STEP, help="simulation grid step")

    parser = argparse.ArgumentParser(prog="invsub", description="Statistics of inverse subordinators.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("renewal", parents=[common], help="renewal function U(t) on a grid")
    p = sub.add_parser("moment", parents=[common], help="joint integer or fractional moments")
    p.add_argument("--m", type=_int_list, nargs="+", help="integer orders, one per time")
    p.add_argument("--gamma", type=float, help="fractional order (single-time moments)")
    p = sub.add_parser("covariance", parents=[common], help="Cov(E(s), E(t)) table")
    p.add_argument("--s", type=_float_list, nargs="+")
    p.add_argument("--verify", action="store_true", help="compare with Monte Carlo")
    p = sub.add_parser("htilde", parents=[common], help="joint tail transform and PDE residual")
    p.add_argument("--s", type=_float_list, nargs="+", required=True)
    p.add_argument("--lam", type=_float_list, nargs="+", required=True)
    p.add_argument("--fd-step", type=float, default=1e-4)
    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo estimators")
    p.add_argument("--m", type=_int_list, nargs="+")
    sub.add_parser("verify", parents=[common], help="run every invariant suite for the model")
    return parser


def _config(args) -> InversionConfig | None:
    if args.method is None:
        return None
    return InversionConfig(method=args.method, terms=args.terms)


def _emit(args, header: Sequence[str], rows: list[Sequence]) -> None:
    if args.format == "json":
        text = json.dumps([dict(zip(header, row)) for row in rows], indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(x)) if isinstance(x, float) else x for x in row])
        text = buf.getvalue()
    _write(args, text)


def _write(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _require(value, name: str):
    if value is None:
        raise ValidationError(f"--{name} is required for this command")
    return value


def cmd_renewal(args, model) -> int:
    cfg = _config(args)
    if args.t:
        times = _flatten(args.t)
    else:
        T = _require(args.T, "T")
        h = args.h or T / renewal.DEFAULT_NODES
        n = int(round(T / h))
        times = [h * j for j in range(1, n + 1)]
    rows = [(t, renewal.renewal_function(model, t, cfg)) for t in times]
    _emit(args, ["t", "U"], rows)
    return EXIT_OK


def _grid_for(args, model, tmax: float) -> renewal.RenewalGrid:
    T = args.T or tmax
    if T < tmax:
        raise DomainError(f"--T={T} is below the largest requested time {tmax}")
    return renewal.build_renewal_grid(model, args.h, T, _config(args))


def cmd_moment(args, model) -> int:
    times = _flatten(_require(args.t, "t"))
    if args.gamma is not None:
        cfg = _config(args)
        rows = [(t, moments.fractional_moment(model, t, args.gamma, cfg)) for t in times]
        _emit(args, ["t1", "value"], rows)
        return EXIT_OK
    orders = _flatten(_require(args.m, "m"))
    spec = moments.MomentSpec(tuple(times), tuple(orders))
    grid = _grid_for(args, model, max(times))
    value = moments.joint_moment(grid, spec)
    header = [f"t{i + 1}" for i in range(spec.n)] + ["value"]
    _emit(args, header, [(*spec.times, value)])
    return EXIT_OK


def cmd_covariance(args, model) -> int:
    ts = _flatten(_require(args.t, "t"))
    ss = _flatten(args.s) or ts
    grid = _grid_for(args, model, max(ss + ts))
    cov = moments.covariance_matrix(grid, ss, ts)
    header = ["s", "t", "cov"]
    rows = []
    failed = False
    for i, s in enumerate(ss):
        for j, t in enumerate(ts):
            row = [s, t, float(cov[i, j])]
            if args.verify:
                r = mc.estimate_covariance(model, s, t, args.paths, args.seed, args.delta)
                allow = verify.grid_bias_allowance(model, args.delta)
                ok = abs(r.estimate - cov[i, j]) <= 3 * r.std_error + allow
                failed |= not ok
                row += [r.estimate, r.std_error, "pass" if ok else "fail"]
            rows.append(row)
    if args.verify:
        header += ["mc", "mc_se", "status"]
    _emit(args, header, rows)
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_htilde(args, model) -> int:
    p = jointlaw.JointPoint(tuple(_flatten(args.s)), tuple(_flatten(args.lam)))
    value = jointlaw.htilde(model, p)
    try:
        residual = jointlaw.pde_residual(model, p, args.fd_step)
    except DomainError:
        residual = math.nan
    _emit(args, ["htilde", "pde_residual"], [(value, residual)])
    return EXIT_OK


def cmd_simulate(args, model) -> int:
    times = _flatten(_require(args.t, "t"))
    header = ["estimate", "std_error", "n_paths", "seed"]
    if args.m:
        spec = moments.MomentSpec(tuple(times), tuple(_flatten(args.m)))
        r = mc.estimate_joint_moment(model, spec, args.paths, args.seed, args.delta)
        _emit(args, [f"t{i + 1}" for i in range(spec.n)] + header, [(*spec.times, r.estimate, r.std_error, r.n_paths, r.seed)])
        return EXIT_OK
    rows = []
    for t in times:
        r = mc.estimate_joint_moment(model, moments.MomentSpec((t,), (1,)), args.paths, args.seed, args.delta)
        rows.append((t, r.estimate, r.std_error, r.n_paths, r.seed))
    _emit(args, ["t"] + header, rows)
    return EXIT_OK


def cmd_verify(args, model) -> int:
    checks = verify.run_checks(model, args.paths, args.seed, args.delta)
    _write(args, json.dumps(verify.report(checks), indent=2) + "\n")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VERIFY


COMMANDS = {
    "renewal": cmd_renewal,
    "moment": cmd_moment,
    "covariance": cmd_covariance,
    "htilde": cmd_htilde,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        model = load_model(args.model)
        return COMMANDS[args.command](args, model)
    except (ValidationError, DomainError, UnsupportedError) as exc:
        print(f"invsub: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericError, HorizonError) as exc:
        print(f"invsub: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
