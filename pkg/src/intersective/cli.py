"""Command-line front end: JSON/CSV reports over every module."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import time
from fractions import Fraction

from . import __version__
from .classify import deligne_certify, dimension_lower, rank_estimate, strongly_deligne_scan
from .diffset import (
    ForbiddenSet,
    bounds_report,
    generate_image,
    inheritance_check,
    scaling_csv,
    scaling_report,
    solve_exact,
    solve_greedy,
)
from .errors import BudgetExceeded, ParameterError
from .expsum import (
    ExpSumReport,
    complete_sum_mod_p,
    major_arc_compare,
    minor_arc_report,
    paper_schedule,
    rational_approximation,
    sieved_local_sum,
    sieved_weyl_sum,
    vdc_fit,
)
from .padic import RootSelection, build_auxiliary, intersectivity_scan
from .poly import IntPolynomial, parse_polynomial
from .sieve import SieveProfile, sieve_count_check

THREADS_ENV = "INTERSECTIVE_THREADS"
EXIT_OK, EXIT_USAGE, EXIT_REFUTED, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# ---------------------------------------------------------------------------
# emission


def _snap(x: float, scale: float) -> float:
    return 0.0 if abs(x) < 1e-11 * max(1.0, scale) else x


def _fmt_float(x: float):
    if math.isnan(x) or math.isinf(x):
        return str(x)
    return float(f"{x:.12g}")


def normalize(obj):
    """JSON-ready copy: 12 significant digits, complex as [re, im], rationals as strings."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, complex):
        s = abs(obj)
        return [_fmt_float(_snap(obj.real, s)), _fmt_float(_snap(obj.imag, s))]
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, IntPolynomial):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalars
        return normalize(obj.item())
    if hasattr(obj, "to_json"):
        return normalize(obj.to_json())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _report_json(rep: ExpSumReport):
    out = rep.to_json()
    v = rep.value
    s = abs(v)
    out["value"] = [_snap(v.real, s), _snap(v.imag, s)]
    return out


def emit_report(results, fmt: str = "json", out=None, columns=None) -> str:
    """Serialize results as canonical JSON or CSV and write to ``out`` (path or stdout)."""
    if fmt == "json":
        text = json.dumps(normalize(results), indent=None, separators=(", ", ": ")) + "\n"
    elif fmt == "csv":
        rows = results if isinstance(results, list) else [results]
        rows = [normalize(r) for r in rows]
        cols = columns or (list(rows[0].keys()) if rows else [])
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([r.get(c) for c in cols])
        text = buf.getvalue()
    else:
        raise ValueError(f"unknown format {fmt}")
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        try:
            with open(out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise ParameterError(f"cannot write {out}: {exc}") from exc
    return text


# ---------------------------------------------------------------------------
# argument helpers


def _ints(text):
    return [int(t) for t in text.split(",") if t.strip()] if text else []


def _ranges(text):
    out = []
    for part in text.split(","):
        lo, hi = part.split(":")
        out.append((int(lo), int(hi)))
    return out


def _poly(args):
    return parse_polynomial(args.poly, args.num_vars)


def _selection(h, args):
    root = getattr(args, "root", None)
    if root:
        return RootSelection.from_integer_root(h, _ints(root))
    return RootSelection.choose(h)


def _forbidden(args):
    if getattr(args, "X_file", None):
        return ForbiddenSet.read(args.X_file)
    return ForbiddenSet.from_values(_ints(args.X))


def _schedule(args, k, N):
    spec = args.paper_schedule
    if not spec:
        return None
    key, _, val = spec.partition("=")
    if key.strip() != "eta" or not val:
        raise UsageError("--paper-schedule expects eta=<float>")
    return paper_schedule(float(val), k, N)


# ---------------------------------------------------------------------------
# commands


def cmd_classify(args):
    h = _poly(args)
    dv = deligne_certify(h)
    rk = rank_estimate(h.top_part())
    out = {"poly": str(h), "deligne": dv.to_json(), "rank": rk.rank if rk.rank is not None else list(rk.interval),
           "rank_detail": rk.to_json()}
    sel = RootSelection.choose(h) if not args.root else RootSelection.from_integer_root(h, _ints(args.root))
    out["strongly_deligne"] = strongly_deligne_scan(h, sel, args.d_bound, args.scan_primes).to_json()
    out["intersective"] = intersectivity_scan(h, args.prime_bound).to_json()
    status = EXIT_OK
    if args.assert_property:
        key = {"deligne": "deligne", "strongly-deligne": "strongly_deligne", "intersective": "intersective"}[args.assert_property]
        verdict = out[key].get("status", out[key].get("verdict"))
        if verdict in ("Refuted", "NonIntersectiveWitness"):
            status = EXIT_REFUTED
    return out, status


def cmd_aux(args):
    h = _poly(args)
    sel = _selection(h, args)
    rows = [build_auxiliary(sel, d).to_json() for d in _ints(args.d)]
    return {"selection": sel.to_json(), "auxiliaries": rows}, EXIT_OK


def cmd_sieve(args):
    h = _poly(args)
    prof = SieveProfile.build(h, args.Y, args.max_gamma, args.max_points)
    out = {"profile": prof.to_json()}
    if args.box:
        out["count_check"] = sieve_count_check(prof, _ints(args.box), args.knob, args.max_points).to_json()
    return out, EXIT_OK


def cmd_expsum(args):
    h = _poly(args)
    kind = args.kind
    if kind == "complete":
        return _report_json(complete_sum_mod_p(h, args.p, args.max_points)), EXIT_OK
    if kind == "local":
        return _report_json(sieved_local_sum(h, args.q, args.a, args.Y, budget=args.max_points)), EXIT_OK
    if kind == "weyl":
        g = build_auxiliary(_selection(h, args), args.d).poly if args.d != 1 else h
        sched = _schedule(args, g.degree, args.M)
        Y = sched["Y"] if sched else args.Y
        rep = _report_json(sieved_weyl_sum(g, args.alpha, args.M, Y, beta=args.beta, budget=args.max_points))
        if sched:
            rep["schedule"] = sched
            rep["arc"] = rational_approximation(args.alpha, max(1, int(sched["Q"])), sched["gamma"]).to_json()
        return rep, EXIT_OK
    if kind == "major-compare":
        return major_arc_compare(h, args.a, args.q, args.beta, args.M, args.Y), EXIT_OK
    if kind == "minor-report":
        if args.X != int(args.X):
            raise UsageError("minor-report needs an integer --X")
        return minor_arc_report(h, args.alpha, int(args.X), args.Y, args.Z, args.q, args.a,
                                compute_sum=not args.no_sum, budget=args.max_points), EXIT_OK
    if kind == "vdc-fit":
        fit = vdc_fit(h, args.X, args.beta_min, args.beta_max, args.num)
        if args.format == "csv":
            return [{"beta": b, "abs_value": v} for b, v in fit["rows"]], EXIT_OK
        return fit, EXIT_OK
    if kind == "arc":
        sched = _schedule(args, h.degree, args.N) if args.paper_schedule else None
        Q = int(sched["Q"]) if sched else args.Q
        gamma = sched["gamma"] if sched else args.gamma
        out = rational_approximation(args.alpha, Q, gamma).to_json()
        if sched:
            out["schedule"] = sched
        return out, EXIT_OK
    raise UsageError(f"unknown expsum kind {kind}")


def cmd_diffset(args):
    kind = args.kind
    if kind == "image":
        h = _poly(args)
        X = generate_image(h, _ranges(args.box), args.cap, args.max_points)
        if args.X_out:
            X.write(args.X_out)
        return {"positives": list(X.positives), "source": X.source}, EXIT_OK
    if kind == "exact":
        res = solve_exact(_forbidden(args), args.N, args.max_nodes, args.hard_cap)
        if res.exact is None:
            raise BudgetExceeded("branch and bound", res.nodes, args.max_nodes)
        out = {"exact": res.exact, "witness": res.witness}
        if args.verbose:
            out.update(res.to_json())
        return out, EXIT_OK
    if kind == "greedy":
        size, wit = solve_greedy(_forbidden(args), args.N)
        return {"greedy": size, "witness": wit}, EXIT_OK
    if kind == "bounds":
        Y = _ints(args.Y) if args.Y else None
        return bounds_report(_forbidden(args), args.N, Y), EXIT_OK
    if kind == "scaling":
        h = _poly(args)
        sel = _selection(h, args) if args.d != 1 else None
        rep = scaling_report(h, sel, _ints(args.N_grid), args.solver, args.d, args.max_nodes)
        if args.format == "csv":
            return ("raw-csv", scaling_csv(rep)), EXIT_OK
        return rep, EXIT_OK
    if kind == "inherit":
        h = _poly(args)
        sel = _selection(h, args)
        lam = None
        if args.mutate:
            lam = sel.lam(args.q) + 1
        res = inheritance_check(h, sel, args.d, args.q, args.trials, args.seed, lam_override=lam)
        status = EXIT_REFUTED if (args.assert_property and not res.passed) else EXIT_OK
        return res.to_json(), status
    raise UsageError(f"unknown diffset kind {kind}")


def cmd_lower_dim(args):
    h = _poly(args)
    res = dimension_lower(h, args.mode, args.trial_budget, args.height)
    if res.status == "Exhausted":
        return res.to_json(), EXIT_BUDGET
    return res.to_json(), EXIT_OK


def cmd_check(args):
    from .checks import run_checks

    results = run_checks(seed=args.seed)
    ok = all(r["passed"] for r in results)
    return {"passed": ok, "checks": results}, EXIT_OK if ok else EXIT_REFUTED


# ---------------------------------------------------------------------------
# parser


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--max-points", type=int, default=10**7)
    common.add_argument("--max-nodes", type=int, default=2 * 10**6)
    common.add_argument("--max-gamma", type=int, default=12)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--manifest", default=None, help="write a run manifest to this path")
    common.add_argument("--num-vars", type=int, default=None)
    common.add_argument("--assert", dest="assert_property", nargs="?", const="deligne",
                        help="exit 2 when the named property is refuted")

    parser = _Parser(prog="intersective", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("classify", parents=[common], help="Deligne, rank, strongly Deligne, intersective")
    p.add_argument("--poly", required=True)
    p.add_argument("--root", default=None, help="integer root for the root selection, e.g. 1,1")
    p.add_argument("--prime-bound", type=int, default=100)
    p.add_argument("--scan-primes", type=int, default=50)
    p.add_argument("--d-bound", type=int, default=30)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("aux", parents=[common], help="auxiliary polynomials h_d")
    p.add_argument("--poly", required=True)
    p.add_argument("--d", required=True, help="comma-separated d values")
    p.add_argument("--root", default=None)
    p.set_defaults(func=cmd_aux)

    p = sub.add_parser("sieve", parents=[common], help="sieve profile and count check")
    p.add_argument("--poly", required=True)
    p.add_argument("--Y", type=float, required=True)
    p.add_argument("--box", default=None, help="side lengths, e.g. 12,12")
    p.add_argument("--knob", type=float, default=50.0)
    p.set_defaults(func=cmd_sieve)

    p = sub.add_parser("expsum", parents=[common], help="exponential sums")
    p.add_argument("kind", choices=("complete", "local", "weyl", "major-compare", "minor-report", "vdc-fit", "arc"))
    p.add_argument("--poly", required=True)
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--a", type=int, default=0)
    p.add_argument("--Y", type=float, default=1)
    p.add_argument("--Z", type=float, default=2)
    p.add_argument("--M", type=int, default=10)
    p.add_argument("--X", type=float, default=1.0)
    p.add_argument("--N", type=int, default=1000)
    p.add_argument("--Q", type=int, default=100)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--root", default=None)
    p.add_argument("--alpha", default="0")
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--beta-min", type=float, default=10.0)
    p.add_argument("--beta-max", type=float, default=1e4)
    p.add_argument("--num", type=int, default=25)
    p.add_argument("--no-sum", action="store_true")
    p.add_argument("--paper-schedule", default=None, help="eta=<float>")
    p.set_defaults(func=cmd_expsum)

    p = sub.add_parser("diffset", parents=[common], help="difference-set threshold D(X, N)")
    p.add_argument("kind", choices=("image", "exact", "greedy", "bounds", "scaling", "inherit"))
    p.add_argument("--poly")
    p.add_argument("--X", default="")
    p.add_argument("--X-file", default=None)
    p.add_argument("--X-out", default=None)
    p.add_argument("--N", type=int, default=10)
    p.add_argument("--Y", default=None, help="generator set for the sumset bound")
    p.add_argument("--box", default="0:3,0:3")
    p.add_argument("--cap", type=int, default=100)
    p.add_argument("--N-grid", default="")
    p.add_argument("--solver", choices=("exact", "greedy"), default="exact")
    p.add_argument("--hard-cap", type=int, default=128)
    p.add_argument("--root", default=None)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--mutate", action="store_true", help="corrupt lambda(q) (harness self-test)")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_diffset)

    p = sub.add_parser("lower-dim", parents=[common], help="dimension lowering by hyperplane sections")
    p.add_argument("--poly", required=True)
    p.add_argument("--mode", choices=("integer_root", "general"), default="integer_root")
    p.add_argument("--trial-budget", type=int, default=500)
    p.add_argument("--height", type=int, default=3)
    p.set_defaults(func=cmd_lower_dim)

    p = sub.add_parser("check", parents=[common], help="run the invariant suite")
    p.set_defaults(func=cmd_check)
    return parser


def _manifest(argv, args, text, seconds):
    inputs = {k: v for k, v in vars(args).items() if k in ("poly", "X", "X_file") and v}
    return {
        "argv": list(argv),
        "seed": args.seed,
        "budgets": {"max_points": args.max_points, "max_nodes": args.max_nodes, "max_gamma": args.max_gamma},
        "version": __version__,
        "threads": os.environ.get(THREADS_ENV, "1"),
        "wall_time": seconds,
        "input_digests": {k: hashlib.sha256(str(v).encode()).hexdigest() for k, v in inputs.items()},
        "output_digest": hashlib.sha256(text.encode()).hexdigest(),
    }


def run_command(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        t0 = time.perf_counter()
        result, status = args.func(args)
        if isinstance(result, tuple) and result and result[0] == "raw-csv":
            text = result[1]
            if args.out in (None, "-"):
                sys.stdout.write(text)
            else:
                with open(args.out, "w") as fh:
                    fh.write(text)
        else:
            text = emit_report(result, args.format, args.out)
        if args.manifest:
            with open(args.manifest, "w") as fh:
                json.dump(_manifest(argv, args, text, time.perf_counter() - t0), fh, indent=2)
        return status
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValueError, KeyError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv=None):
    sys.exit(run_command(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
