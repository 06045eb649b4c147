"""Command-line front-end: CSV (default) or JSON on stdout, progress and
error records on stderr.  Exit codes: 0 success, 2 invalid input or a
violated precondition, 3 numerical non-convergence or a failed check."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import foxh, kernels, spde, verify
from .errors import ConvergenceError, FracSPDEError, PreconditionError
from .kernels import FracParams, InitialData
from .report import config_hash, fmt, plain
from .specfun import MittagLefflerParams, mittag_leffler

DIGITS = 12


def _num(text):
    """Exact rational from '0.8', '2/3', '1e-3'."""
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        try:
            return Fraction(float(text))
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _num_list(text):
    return [_num(t) for t in text.split(",") if t.strip()]


def _pairs(text):
    """'a,A;b,B' -> [(a, A), (b, B)]."""
    out = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        parts = chunk.split(",")
        if len(parts) != 2:
            raise argparse.ArgumentTypeError(f"expected 'coef,scale' pairs, got {chunk!r}")
        out.append((float(_num(parts[0])), float(_num(parts[1]))))
    return out


def _round(x):
    """Numbers rounded to DIGITS significant digits for JSON output."""
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_round(v) for v in x]
    if isinstance(x, float) and math.isfinite(x):
        return float(fmt(x, DIGITS))
    return x


def _float_or_exact(x):
    return float(x) if isinstance(x, Fraction) else x


# --------------------------------------------------------------------------
# subcommands: each returns (resolved config, header, rows, json result)


def _params(args, exact=False):
    conv = (lambda v: v) if exact else float
    return FracParams(conv(args.alpha), conv(args.beta), args.d, float(args.nu),
                      float(args.lam))


def _noise(args, exact=False):
    conv = (lambda v: v) if exact else float
    kw = {"lambda_sq": float(args.lambda_sq)}
    if args.temporal == "riesz_time":
        if args.beta_tilde is None:
            raise PreconditionError("--temporal riesz_time needs --beta-tilde")
        kw["beta_tilde"] = float(args.beta_tilde)
    if args.noise == "white":
        return spde.NoiseSpec.white(args.temporal, **kw)
    if args.kappa is None:
        raise PreconditionError("--noise riesz needs --kappa")
    return spde.NoiseSpec.riesz(conv(args.kappa), args.temporal, **kw)


def _param_config(args):
    return {"alpha": args.alpha, "beta": args.beta, "d": args.d, "nu": args.nu, "lambda": args.lam}


def _noise_config(args):
    out = {"noise": args.noise, "temporal": args.temporal, "lambda_sq": args.lambda_sq}
    if args.kappa is not None:
        out["kappa"] = args.kappa
    if args.beta_tilde is not None:
        out["beta_tilde"] = args.beta_tilde
    return out


def cmd_foxh_eval(args):
    spec = foxh.make_spec(args.m, args.n, args.p, args.q, args.upper, args.lower)
    z = np.array([float(v) for v in args.z])
    info = foxh.eval(spec, z, return_info=True)
    rows = [[zi, v, r, e] for zi, v, r, e in zip(z, info.value, info.route, info.est_error)]
    cfg = {"m": args.m, "n": args.n, "p": args.p, "q": args.q, "upper": args.upper,
           "lower": args.lower, "z": args.z}
    return cfg, ["z", "value", "route", "est_error"], rows, None


def cmd_kernel(args):
    p = _params(args)
    rows = []
    for t in args.t:
        for r in args.r:
            rows.append([args.which, t, r, kernels.kernel(args.which, p, float(t), float(r))])
    cfg = {"which": args.which, **_param_config(args), "t": args.t, "r": args.r}
    return cfg, ["which", "t", "r", "value"], rows, None


def cmd_stable(args):
    rows = [[r, kernels.stable_density(float(args.alpha), args.d, float(r))] for r in args.r]
    cfg = {"alpha": args.alpha, "d": args.d, "r": args.r}
    return cfg, ["r", "density"], rows, None


def cmd_ml(args):
    z = np.array([float(v) for v in args.z])
    vals = mittag_leffler(MittagLefflerParams(float(args.rho), float(args.mu)), z,
                          route=args.route)
    rows = [[zi, v] for zi, v in zip(z, np.atleast_1d(vals))]
    cfg = {"rho": args.rho, "mu": args.mu, "z": args.z, "route": args.route}
    return cfg, ["z", "value"], rows, None


def cmd_check(args):
    p = _params(args, exact=True)
    noise = _noise(args, exact=True)
    noise.validate(p.d)
    res = spde.dalang_check(noise, p, smoothed=args.smoothed)
    cfg = {**_param_config(args), **_noise_config(args), "smoothed": args.smoothed}
    row = ["holds" if res.holds else "fails", res.exponent_required, res.exponent_available,
           res.smoothed]
    return cfg, ["result", "exponent_required", "exponent_available", "smoothed"], [row], None


def cmd_certify(args):
    p = _params(args)
    cert = spde.existence_certificate(_noise(args), p, float(args.t))
    cfg = {**_param_config(args), **_noise_config(args), "t": args.t}
    doc = cert.to_dict()
    header = list(doc)
    return cfg, header, [[doc[k] for k in header]], doc


def _init(args):
    if args.u1 is None:
        return InitialData.constant(float(args.u0))
    return InitialData.constant(float(args.u0), float(args.u1))


def cmd_moment(args):
    p = _params(args)
    noise = _noise(args)
    if args.smoothed:
        rep = spde.smoothed_moment_bounds(p, noise, float(args.p), float(args.t), _init(args))
    else:
        rep = spde.moment_upper_bound(p, noise, float(args.p), float(args.t), _init(args))
    cfg = {**_param_config(args), **_noise_config(args), "p": args.p, "t": args.t,
           "u0": args.u0, "u1": args.u1, "smoothed": args.smoothed}
    doc = rep.to_dict()
    header = list(doc)
    return cfg, header, [[doc[k] for k in header]], doc


def cmd_chaos(args):
    p = _params(args)
    res = spde.chaos_second_moment(p, _noise(args), float(args.u0), float(args.t),
                                   n_max=args.n_max)
    cfg = {**_param_config(args), **_noise_config(args), "u0": args.u0, "t": args.t,
           "n_max": args.n_max}
    lower = res.lower_partial_sums
    rows = []
    for n, s in enumerate(res.upper_partial_sums):
        low = lower[n] if lower is not None and n < len(lower) else ""
        rows.append([n, s, low])
    doc = res.to_dict()
    return cfg, ["n", "upper_partial_sum", "lower_partial_sum"], rows, doc


def cmd_verify(args):
    names = sorted(verify.SUITES) if args.suite == "all" else [args.suite]
    reports = [verify.verify_suite(n, quiet=args.quiet, seed=args.seed) for n in names]
    rows = [[r.suite, c.name, c.measured, c.tolerance, c.passed, c.detail]
            for r in reports for c in r.checks]
    doc = {"suites": [r.to_dict() for r in reports],
           "passed": all(r.passed for r in reports)}
    cfg = {"suite": args.suite}
    return cfg, ["suite", "check", "measured", "tolerance", "passed", "detail"], rows, doc


# --------------------------------------------------------------------------
# parser


def _add_params(sp, with_d=True):
    sp.add_argument("--alpha", type=_num, required=True)
    sp.add_argument("--beta", type=_num, required=True)
    if with_d:
        sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--nu", type=_num, default=Fraction(1))
    sp.add_argument("--lambda", dest="lam", type=_num, default=Fraction(1))


def _add_noise(sp, default="white"):
    sp.add_argument("--noise", choices=("white", "riesz"), default=default)
    sp.add_argument("--kappa", type=_num)
    sp.add_argument("--temporal", choices=("dirac", "riesz_time"), default="dirac")
    sp.add_argument("--beta-tilde", type=_num)
    sp.add_argument("--lambda-sq", type=_num, default=Fraction(1))


COMMANDS = {
    "foxh-eval": cmd_foxh_eval, "kernel": cmd_kernel, "stable": cmd_stable, "ml": cmd_ml,
    "check": cmd_check, "certify": cmd_certify, "moment": cmd_moment, "chaos": cmd_chaos,
    "verify": cmd_verify,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="fracspde", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--output", choices=("csv", "json"), default="csv")
    parser.add_argument("--seed", type=int, default=None,
                        help="recorded in the configuration; all routes are deterministic")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("foxh-eval", help="evaluate an H-function")
    for k in ("m", "n", "p", "q"):
        sp.add_argument(f"--{k}", type=int, required=True)
    sp.add_argument("--upper", type=_pairs, default=[], help="'a1,A1;a2,A2'")
    sp.add_argument("--lower", type=_pairs, default=[], help="'b1,B1;b2,B2'")
    sp.add_argument("--z", type=_num_list, required=True)

    sp = sub.add_parser("kernel", help="Z, Y or Z* at (t, r)")
    sp.add_argument("--which", choices=kernels.KERNELS, required=True)
    _add_params(sp)
    sp.add_argument("--t", type=_num_list, required=True)
    sp.add_argument("--r", type=_num_list, required=True)

    sp = sub.add_parser("stable", help="symmetric alpha-stable density")
    sp.add_argument("--alpha", type=_num, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--r", type=_num_list, required=True)

    sp = sub.add_parser("ml", help="Mittag-Leffler function E_{rho,mu}(z)")
    sp.add_argument("--rho", type=_num, required=True)
    sp.add_argument("--mu", type=_num, default=Fraction(1))
    sp.add_argument("--z", type=_num_list, required=True)
    sp.add_argument("--route", choices=("auto", "series", "foxh"), default="auto")

    sp = sub.add_parser("check", help="Dalang-type condition")
    _add_params(sp)
    _add_noise(sp)
    sp.add_argument("--smoothed", action="store_true")

    sp = sub.add_parser("certify", help="existence certificate")
    _add_params(sp)
    _add_noise(sp)
    sp.add_argument("--t", type=_num, default=Fraction(1))

    sp = sub.add_parser("moment", help="p-th moment bounds (Riesz covariance)")
    _add_params(sp)
    _add_noise(sp, default="riesz")
    sp.add_argument("--p", type=_num, default=Fraction(2))
    sp.add_argument("--t", type=_num, default=Fraction(1))
    sp.add_argument("--u0", type=_num, default=Fraction(1))
    sp.add_argument("--u1", type=_num)
    sp.add_argument("--smoothed", action="store_true")

    sp = sub.add_parser("chaos", help="chaos second-moment partial sums")
    _add_params(sp)
    _add_noise(sp, default="riesz")
    sp.add_argument("--u0", type=_num, default=Fraction(1))
    sp.add_argument("--t", type=_num, default=Fraction(1))
    sp.add_argument("--n-max", type=int, default=200)

    sp = sub.add_parser("verify", help="run an invariant suite")
    sp.add_argument("--suite", choices=sorted(verify.SUITES) + ["all"], required=True)
    sp.add_argument("--quiet", action="store_true", help="no progress on stderr")
    return parser


def _write_csv(header, rows, out):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v, DIGITS) if not isinstance(v, str) else v for v in row])


def _cell(v):
    if isinstance(v, (list, tuple, np.ndarray)):
        return json.dumps(_round(plain(v)))
    return v


def run(argv=None, stdout=None, stderr=None):
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    json_mode = args.output == "json"
    try:
        cfg, header, rows, doc = COMMANDS[args.command](args)
    except FracSPDEError as exc:
        code = exc.exit_code if isinstance(exc, (PreconditionError, ConvergenceError)) else 3
        if json_mode:
            rec = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
            cond = getattr(exc, "condition", None)
            if cond is not None:
                rec["condition"] = cond
            stderr.write(json.dumps(rec, sort_keys=True) + "\n")
        else:
            stderr.write(f"error ({type(exc).__name__}): {exc}\n")
        return code
    cfg = plain({"command": args.command, "seed": args.seed, **cfg})
    if json_mode:
        out = {"config": cfg, "config_hash": config_hash(cfg), "columns": header,
               "rows": [[_round(plain(v)) for v in row] for row in rows]}
        if doc is not None:
            out["result"] = _round(plain(doc))
        stdout.write(json.dumps(out, sort_keys=True, indent=1) + "\n")
    else:
        buf = io.StringIO()
        _write_csv(header, [[_cell(v) for v in row] for row in rows], buf)
        stdout.write(buf.getvalue())
    if args.command == "verify" and not doc["passed"]:
        return 3
    if args.command == "certify" and doc["status"] == "precondition_failed":
        return 2
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
