"""Command-line front end: ``matorsion <command> ...``.

Exit codes: 0 success, 1 a check or computation failed, 2 usage or input error.
Every command accepts ``--config FILE``, a JSON object whose keys are long flag
names (``t-list`` or ``t_list``); explicit flags take precedence.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from . import body as bodymod
from . import checks, expansion, io, sphere, torsion

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

REPORT_SCHEMA = "matorsion.body-report/1"
RATIO_SCHEMA = "matorsion.ratio-summary/1"
SOLVE_SCHEMA = "matorsion.ma-solve/1"
VERIFY_SCHEMA = "matorsion.verify/1"


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers


def _atomic_write(path, write):
    """Call ``write(tmp_path)`` and move the result onto ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    os.close(fd)
    try:
        write(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path, obj):
    def w(tmp):
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, indent=2, default=_jsonable)
            fh.write("\n")

    _atomic_write(path, w)


def _write_text(path, text):
    def w(tmp):
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)

    _atomic_write(path, w)


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


def _float_list(text):
    try:
        vals = [float(v) for v in str(text).replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _int_pair(text):
    try:
        a, b = (int(v) for v in str(text).split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NR,NTHETA, got {text!r}") from None
    return a, b


def _status_table(results):
    w = max(len(r.name) for r in results)
    lines = [f"{'status':6}  {'check':{w}}  {'time':>7}  detail"]
    for r in results:
        lines.append(f"{r.status:6}  {r.name:{w}}  {r.seconds:6.2f}s  {r.detail}")
    return "\n".join(lines)


def _fmt(x):
    return "n/a" if x is None else f"{x:.10g}"


# ---------------------------------------------------------------------------
# commands


def cmd_identities(args) -> int:
    results = checks.identity_checks(dimension=args.dimension, seed=args.seed)
    code, counts = checks.summarize(results)
    print(f"identity suite, dimension {args.dimension}, seed {args.seed}")
    print(_status_table(results))
    for r in results:
        if r.status == checks.FAIL:
            print(f"FAILED: {r.name} ({r.identity})", file=sys.stderr)
    print(", ".join(f"{k} {v}" for k, v in counts.items()))
    if args.output:
        _write_json(args.output, {"seed": args.seed, "dimension": args.dimension,
                                  "results": [r.to_dict() for r in results]})
    return code


def _body_report(bf: io.BodyFile) -> tuple[dict, list]:
    b = bf.body
    n = b.n
    prof = bodymod.quermass(b)
    warn = []
    if b.convex:
        chain = prof.af_chain_holds()
    else:
        chain = None
        warn.append("body is not convex at the grid nodes; Alexandrov-Fenchel chain check skipped")
    report = {
        "schema": REPORT_SCHEMA,
        "kind": bf.kind,
        "n": n,
        "grid": list(b.grid.shape),
        "convex": b.convex,
        "W": list(prof.W),
        "zeta": list(prof.zeta),
        "af_chain_holds": chain,
        "delta_AF": bodymod.af_deficit(prof),
        "warnings": warn,
    }
    if bf.axes is not None:
        report["axes"] = list(bf.axes)
        if n == 2:
            a, c = bf.axes
            lam = math.pi / prof.W[1]
            report["delta_AF_closed_form"] = 1 - (lam * a * lam * c) ** 4
    return report, warn


def cmd_body_report(args) -> int:
    bf = io.load_body(args.file)
    report, warn = _body_report(bf)
    print(f"body: {args.file} ({report['kind']}, n={report['n']}, grid {tuple(report['grid'])})")
    print(f"convex: {report['convex']}")
    for j, w in enumerate(report["W"]):
        print(f"W_{j} = {w:.12g}")
    print("zeta: " + " <= ".join(f"{z:.12g}" for z in report["zeta"]))
    print(f"AF chain holds: {'skipped' if report['af_chain_holds'] is None else report['af_chain_holds']}")
    print(f"delta_AF = {report['delta_AF']:.6e}")
    if "delta_AF_closed_form" in report:
        print(f"delta_AF closed form 1-(ab)^4 at W_1 = pi: {report['delta_AF_closed_form']:.6e}")
    for w in warn:
        print(f"warning: {w}", file=sys.stderr)
    if args.output:
        _write_json(args.output, report)
    return EXIT_OK


def cmd_ratio_limit(args) -> int:
    n, k = args.n, args.mode
    if n not in (2, 3):
        raise UsageError("--n must be 2 or 3")
    if k < 2:
        raise UsageError("--mode must be >= 2")
    order = args.order if args.order is not None else (k if n == 2 else 0)
    try:
        V = sphere.ModeVector.from_modes(n, {(k, order): args.amplitude})
    except sphere.InvalidInput as exc:
        raise UsageError(str(exc)) from None
    ts = tuple(args.t_list)
    if any(t <= 0 for t in ts):
        raise UsageError("--t-list entries must be positive")
    fam = expansion.build_family(V, n, t_values=ts)
    solver = {}
    if args.grid:
        solver["grid"] = tuple(args.grid)
    if args.scheme:
        solver["scheme"] = args.scheme
    ex = expansion.ratio_experiment(fam, args.oracle, solver=solver or None, tol=args.tol, workers=args.workers)
    summary = {"schema": RATIO_SCHEMA, **ex.summary, "mode": k, "order": order, "amplitude": args.amplitude}
    stem = Path(args.out_dir) / f"ratio_n{n}_k{k}_{args.oracle}"
    csv_path = Path(args.csv) if args.csv else stem.with_suffix(".csv")
    json_path = Path(args.summary) if args.summary else stem.with_suffix(".json")
    _atomic_write(csv_path, ex.write_csv)
    _write_json(json_path, summary)

    print(f"n={n}, mode k={k} (order {order}), oracle {ex.oracle}")
    print(f"{'t':>8}  {'deltaT':>14}  {'deltaAF':>14}  {'ratio':>10}")
    for r in ex.reports:
        print(f"{r.t:8.4g}  {r.deltaT_oracle:14.6e}  {r.deltaAF_oracle:14.6e}  {_fmt(r.ratio_oracle):>10}")
    err = summary["oracle_ratio_limit_error"]
    print(f"oracle ratio (t -> 0): {_fmt(summary['oracle_ratio_limit'])}"
          + ("" if err is None or not np.isfinite(err) else f" +- {err:.1e}"))
    print(f"expansion ratio f(k): {_fmt(summary['expansion_ratio'])}")
    print(f"derivative-cofactor ratio (n+1)/(k+n-1): {_fmt(summary['expansion_ratio_derivative_cofactor'])}")
    print(f"c_n = {summary['c_n']:.6g}; ratios >= c_n - tol: {summary['ratios_at_least_c_n']}; "
          f"ratios <= 1 + tol: {summary['ratios_at_most_one']}")
    print(f"wrote {csv_path} and {json_path}")
    return EXIT_OK


def cmd_ma_solve(args) -> int:
    bf = io.load_body(args.file)
    if bf.body.n != 2:
        raise UsageError("ma-solve needs a planar body (n = 2)")
    kw = {"scheme": args.scheme, "mapping": args.mapping, "maxiter": args.maxiter,
          "richardson": args.richardson, "error_estimate": args.error_estimate}
    if args.grid:
        kw["grid"] = tuple(args.grid)
    if args.tol is not None:
        kw["tol"] = args.tol
    sol = torsion.ma_solve_2d(bf.body, **kw)
    prof = bodymod.quermass(bf.body)
    dT = torsion.torsion_deficit(sol.T, prof)
    dAF = bodymod.af_deficit(prof)
    summary = {"schema": SOLVE_SCHEMA, **sol.summary(), "deltaT": dT, "deltaAF": dAF,
               "residual_history": list(sol.residual_history)}
    if bf.axes is not None:
        summary["T_closed_form"] = torsion.ellipsoid_torsion(bf.axes)[1]
    print(f"T = {sol.T:.12g}  (int -u = {sol.integral:.12g})")
    if "T_closed_form" in summary:
        Tc = summary["T_closed_form"]
        print(f"closed form T = {Tc:.12g}, relative difference {abs(sol.T - Tc) / Tc:.2e}")
    print(f"residual {sol.residual:.2e} after {sol.iterations} Newton steps, discrete convexity {sol.convex}")
    if sol.T_error:
        print(f"estimated error in T: {sol.T_error:.1e}")
    print(f"deltaT = {dT:.6e}, deltaAF = {dAF:.6e}")
    if args.csv:
        _atomic_write(args.csv, sol.to_csv)
    if args.output:
        _write_json(args.output, summary)
    return EXIT_OK


def _markdown(results, seed, strict):
    lines = ["# Verification report", "", f"seed: {seed}; strict: {strict}", "",
             "| status | check | what is checked | detail |", "|---|---|---|---|"]
    for r in results:
        detail = r.detail.replace("|", "\\|")
        lines.append(f"| {r.status} | {r.name} | {r.identity} | {detail} |")
    return "\n".join(lines) + "\n"


def cmd_verify_paper(args) -> int:
    results = checks.acceptance_checks(seed=args.seed, extended=not args.quick)
    if args.strict:
        for r in results:
            if r.status == checks.WARN:
                r.status = checks.FAIL
    code, counts = checks.summarize(results, strict=args.strict)
    if args.json:
        json.dump({"schema": VERIFY_SCHEMA, "seed": args.seed, "strict": args.strict, "counts": counts,
                   "results": [r.to_dict() for r in results]}, sys.stdout, indent=2, default=_jsonable)
        print()
    else:
        text = _markdown(results, args.seed, args.strict)
        print(text)
        print(", ".join(f"{k} {v}" for k, v in counts.items()))
    if args.output:
        _write_text(args.output, _markdown(results, args.seed, args.strict))
    return code


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="matorsion", description="Monge-Ampere torsion and quermassintegral checks.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with default values for the long flags")

    s = sub.add_parser("identities", parents=[common], help="run the identity suite")
    s.add_argument("--dimension", type=int, choices=(2, 3), default=2,
                   help="highest sphere dimension n for the calculus checks (3 adds S^2 Hessian checks)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--output", help="write results as JSON")
    s.set_defaults(func=cmd_identities)

    s = sub.add_parser("body-report", parents=[common], help="quermassintegrals and deficits of a body file")
    s.add_argument("file")
    s.add_argument("--output", help="write the report as JSON")
    s.set_defaults(func=cmd_body_report)

    s = sub.add_parser("ratio-limit", parents=[common], help="deficit ratio along a single-mode family")
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--mode", type=int, default=2, help="harmonic degree k >= 2")
    s.add_argument("--order", type=int, default=None, help="intra-degree index m (default: k for n=2, 0 for n=3)")
    s.add_argument("--amplitude", type=float, default=1.0)
    s.add_argument("--oracle", choices=("ellipsoid", "ma2d"), default="ellipsoid")
    s.add_argument("--t-list", type=_float_list, default=list(expansion.DEFAULT_T))
    s.add_argument("--grid", type=_int_pair, default=None, help="solver grid NR,NTHETA (ma2d)")
    s.add_argument("--scheme", choices=("fd", "spectral"), default=None)
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out-dir", default=".")
    s.add_argument("--csv", help="CSV path (default: OUT_DIR/ratio_n<N>_k<K>_<oracle>.csv)")
    s.add_argument("--summary", help="JSON summary path (default alongside the CSV)")
    s.set_defaults(func=cmd_ratio_limit)

    s = sub.add_parser("ma-solve", parents=[common], help="solve det D^2 u = 1 on a planar body file")
    s.add_argument("file")
    s.add_argument("--scheme", choices=("fd", "spectral"), default="fd")
    s.add_argument("--mapping", choices=("blend", "radial"), default="blend")
    s.add_argument("--grid", type=_int_pair, default=None)
    s.add_argument("--tol", type=float, default=None)
    s.add_argument("--maxiter", type=int, default=40)
    s.add_argument("--richardson", action="store_true")
    s.add_argument("--error-estimate", action="store_true")
    s.add_argument("--csv", help="write rho,theta,u nodal values")
    s.add_argument("--output", help="write the JSON summary")
    s.set_defaults(func=cmd_ma_solve)

    s = sub.add_parser("verify-paper", parents=[common], help="run the acceptance suite")
    s.add_argument("--strict", action="store_true", help="treat WARN as FAIL")
    s.add_argument("--json", action="store_true", help="machine-readable output on stdout")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--quick", action="store_true", help="skip the informational k = 6 run")
    s.add_argument("--output", help="also write the markdown report to this file")
    s.set_defaults(func=cmd_verify_paper)
    return p


def _apply_config(parser, argv):
    """Re-parse with config-file values as defaults so explicit flags win."""
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    cfg = io.load_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    dests = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, val in cfg.items():
        dest = key.replace("-", "_")
        if dest not in dests or dest in ("help", "config", "file"):
            raise UsageError(f"{args.config}: unknown key {key!r} for {args.command}")
        action = dests[dest]
        if action.type is not None and not isinstance(val, (list, bool)):
            try:
                val = action.type(val)
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"{args.config}: bad value for {key!r}: {exc}") from None
        if action.choices is not None and val not in action.choices:
            raise UsageError(f"{args.config}: {key!r} must be one of {list(action.choices)}")
        defaults[dest] = val
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except SystemExit as exc:  # argparse
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except (UsageError, io.BodyFileError, expansion.OracleUnavailable, expansion.FamilyNotConvex) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (torsion.NonConvergence, torsion.NonConvexBody) as exc:
        print(f"error: {exc}", file=sys.stderr)
        hist = getattr(exc, "history", None)
        if hist:
            print("residual history: " + ", ".join(f"{h:.2e}" for h in hist), file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
