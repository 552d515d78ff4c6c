"""Command-line interface.

Exit codes: 0 clean, 2 input error, 3 entanglement certified, 4 numerical
failure (non-convergence or a reproduction row out of tolerance).
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import logging
import math
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .criteria import QUBIT_CRITERIA, evaluate_all, h2_floor
from .entropy import LN2
from .kernels import BACKEND
from .observables import SET_NAMES, get_set
from .qstate import StateValidationError, is_ppt, load_state
from .sepmin import MinConfig, minimize_global, minimize_sep, projection_cap_check
from .werner import CLOSED_FORMS, sweep, threshold

log = logging.getLogger("entrosep")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_ENTANGLED = 3
EXIT_NUMERICAL = 4

REFERENCE_THRESHOLDS = {
    "E8-XY": 0.78,
    "E12-XYZ": 0.65,
    "E14-1_3": 0.68,
    "E16-1_1_2": 0.72,
    "E18-1111": 0.74,
    "E22-SPIN": 0.55,
}


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


@contextlib.contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _csv_writer(fh):
    return csv.writer(fh, lineterminator="\n")


def cmd_check(args) -> int:
    try:
        rho = load_state(args.state)
    except StateValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: cannot read {args.state}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if rho.dimA != rho.dimB:
        print(f"error: state is {rho.dimA}x{rho.dimB}, criteria need d x d", file=sys.stderr)
        return EXIT_INPUT
    verdicts = evaluate_all(rho)
    ppt, min_eig = is_ppt(rho)
    scale = 1 / LN2 if args.bits else 1.0
    unit = "bits" if args.bits else "nats"
    with _output(args.out) as fh:
        if args.json:
            json.dump(
                {
                    "unit": unit,
                    "verdicts": [
                        {
                            "id": v.criterion_id,
                            "value": v.value * scale,
                            "bound": v.bound * scale,
                            "margin": v.margin * scale,
                            "violated": v.violated,
                        }
                        for v in verdicts
                    ],
                    "ppt": ppt,
                    "pt_min_eigenvalue": min_eig,
                },
                fh,
                indent=2,
            )
            fh.write("\n")
        else:
            fh.write(f"{'criterion':<16} {'value':>17} {'bound':>17} {'margin':>17}  violated   [{unit}]\n")
            for v in verdicts:
                fh.write(
                    f"{v.criterion_id:<16} {fmt(v.value * scale):>17} {fmt(v.bound * scale):>17} "
                    f"{fmt(v.margin * scale):>17}  {fmt(v.violated)}\n"
                )
            exact = " (exact separability test)" if rho.dim == 4 else " (necessary condition only)"
            fh.write(f"PPT: {fmt(ppt)}  min eigenvalue of partial transpose {fmt(min_eig)}{exact}\n")
            if any(v.violated for v in verdicts) and ppt and rho.dim == 4:
                fh.write("WARNING: entropic criterion fired on a PPT two-qubit state\n")
    return EXIT_ENTANGLED if any(v.violated for v in verdicts) else EXIT_OK


def _criteria_arg(text: str) -> list[str]:
    if text == "all":
        return list(QUBIT_CRITERIA)
    ids = [c.strip() for c in text.split(",") if c.strip()]
    unknown = [c for c in ids if c not in CLOSED_FORMS]
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown criteria: {', '.join(unknown)}")
    return ids


def cmd_werner_sweep(args) -> int:
    if not 0.0 <= args.p_min <= args.p_max <= 1.0 or args.steps < 1:
        print("error: need 0 <= p-min <= p-max <= 1 and steps >= 1", file=sys.stderr)
        return EXIT_INPUT
    grid = np.linspace(args.p_min, args.p_max, args.steps) if args.steps > 1 else np.array([args.p_min])
    rows = sweep(args.criteria, grid)
    header = ["p"]
    for c in args.criteria:
        header += [f"{c}_value", f"{c}_violated"]
    header.append("ppt_flag")
    with _output(args.csv or args.out) as fh:
        w = _csv_writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(row[h]) for h in header])
    return EXIT_OK


def _config(args, starts=None) -> MinConfig:
    return MinConfig(
        starts=starts if starts is not None else args.starts,
        seed=args.seed,
        backend=getattr(args, "backend", None),
        workers=getattr(args, "workers", 1),
    )


def cmd_minimize(args) -> int:
    try:
        opset = get_set(args.set, args.d)
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    cfg = _config(args)
    sep = minimize_sep(opset, args.d, cfg)
    glob = minimize_global(opset, _config(args, args.global_starts))
    if args.csv:
        with _output(args.csv) as fh:
            w = _csv_writer(fh)
            n = len(sep.records[0].params)
            w.writerow(["start", "initial_value", "value", "nfev", "converged"] + [f"x{i}" for i in range(n)])
            for r in sep.records:
                w.writerow([r.index, fmt(r.initial_value), fmt(r.value), r.nfev, fmt(r.converged)]
                           + [fmt(x) for x in r.params])
    with _output(args.out) as fh:
        fh.write(f"set: {opset.name}  d={opset.d}  starts={sep.starts}  seed={args.seed}\n")
        fh.write(f"E_sep = {fmt(sep.value)}  (claimed floor {fmt(opset.sep_floor)})\n")
        fh.write(f"E     = {fmt(glob.value)}\n")
        fh.write(f"gap   = {fmt(sep.value - glob.value)}\n")
        if sep.kind == 0:
            p = sep.product_params()
            fh.write(
                f"argmin: alpha={fmt(p.alpha)} beta={fmt(p.beta)} delta={fmt(p.delta)} gamma={fmt(p.gamma)}\n"
            )
        else:
            ket = sep.ket
            fh.write("argmin ket: " + " ".join(f"{fmt(z.real)}{z.imag:+.6g}j" for z in ket) + "\n")
        if opset.d > 2:
            fh.write("status: floor numerically supported, not certified\n")
    if not (sep.converged and glob.converged):
        log.error("local refinement did not converge for the best start")
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_bellset(args) -> int:
    try:
        opset = get_set(args.set, args.d)
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    with _output(args.out) as fh:
        json.dump(opset.to_json(), fh)
        fh.write("\n")
    return EXIT_OK


@dataclass
class ReproRow:
    name: str
    reference: float
    computed: float
    tol: float
    seconds: float
    upper_bound: bool = False

    @property
    def ok(self) -> bool:
        if self.upper_bound:
            return self.computed <= self.reference + self.tol
        return abs(self.computed - self.reference) <= self.tol


def reproduce_rows(dims=(), starts=None, seed=0) -> list[ReproRow]:
    rows = []
    for cid, ref in REFERENCE_THRESHOLDS.items():
        t = time.perf_counter()
        rows.append(ReproRow(f"threshold {cid}", ref, threshold(cid), 0.01, time.perf_counter() - t))
    for name in ("xy", "xyz", "1_3", "1_1_2", "1111", "spin"):
        opset = get_set(name)
        t = time.perf_counter()
        res = minimize_sep(opset, 2, MinConfig(starts=starts or 512, seed=seed))
        rows.append(ReproRow(f"E_sep {name}", opset.sep_floor, res.value, 1e-3, time.perf_counter() - t))
    for name in ("xyz", "1111", "spin"):
        t = time.perf_counter()
        res = minimize_global(get_set(name), MinConfig(starts=64, seed=seed))
        rows.append(ReproRow(f"E {name}", 0.0, res.value, 1e-6, time.perf_counter() - t))
    for d in (2, 3, 4):
        t = time.perf_counter()
        rep = projection_cap_check(d, 10_000, seed)
        rows.append(ReproRow(f"max Q_v d={d}", 1 / d, rep.max_projection, 1e-9,
                             time.perf_counter() - t, upper_bound=True))
    for d in dims:
        for name, floor in (("extreme", math.log(d)), ("onerest", h2_floor(d))):
            t = time.perf_counter()
            res = minimize_sep(get_set(name, d), d, MinConfig(starts=starts or 4096, seed=seed))
            rows.append(ReproRow(f"E_sep {name}-{d}", floor, res.value, 5e-3, time.perf_counter() - t))
    return rows


def cmd_reproduce(args) -> int:
    rows = reproduce_rows(args.d or (), args.starts, args.seed)
    with _output(args.out) as fh:
        fh.write(f"{'quantity':<24} {'reference':>17} {'computed':>17} {'tol':>8} {'sec':>7}  result\n")
        for r in rows:
            fh.write(
                f"{r.name:<24} {fmt(r.reference):>17} {fmt(r.computed):>17} {r.tol:>8.0e} {r.seconds:>7.2f}  "
                f"{'PASS' if r.ok else 'FAIL'}\n"
            )
        n_fail = sum(not r.ok for r in rows)
        fh.write(f"{len(rows) - n_fail}/{len(rows)} rows pass\n")
    return EXIT_OK if n_fail == 0 else EXIT_NUMERICAL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for all sampling (default 0)")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="entrosep", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"entrosep {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="evaluate every criterion on a state file")
    p.add_argument("state", help="JSON state file")
    p.add_argument("--bits", action="store_true", help="report entropies in bits")
    p.add_argument("--json", action="store_true", help="emit JSON instead of a table")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("werner-sweep", parents=[common], help="tabulate criteria along the Werner family")
    p.add_argument("--criteria", type=_criteria_arg, default=list(QUBIT_CRITERIA),
                   help="'all' or comma-separated criterion ids")
    p.add_argument("--p-min", type=float, default=0.0)
    p.add_argument("--p-max", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=101)
    p.add_argument("--csv", default=None, help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_werner_sweep)

    p = sub.add_parser("minimize", parents=[common], help="compute E_sep, E and the gap for a set")
    p.add_argument("--set", required=True, choices=SET_NAMES)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--starts", type=int, default=None)
    p.add_argument("--global-starts", type=int, default=64)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--backend", choices=("cython", "python"), default=None)
    p.add_argument("--csv", default=None, help="one row per start for convergence audits")
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("bellset", parents=[common], help="export an operator set as JSON")
    p.add_argument("--set", required=True, choices=SET_NAMES)
    p.add_argument("--d", type=int, default=2)
    p.set_defaults(func=cmd_bellset)

    p = sub.add_parser("reproduce", parents=[common], help="recompute the reference numbers")
    p.add_argument("--d", type=int, action="append", help="also run the d x d floors (repeatable)")
    p.add_argument("--starts", type=int, default=None)
    p.set_defaults(func=cmd_reproduce)
    return parser


def _setup_logging(verbose: bool) -> None:
    # own handler so the run header is printed even if the root logger is configured
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(logging.DEBUG if verbose else logging.INFO)
    log.propagate = False


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.verbose)
    log.info("version %s  backend=%s  seed=%d", __version__, BACKEND, args.seed)
    try:
        return args.func(args)
    except FloatingPointError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
