"""Command-line front end: ``effdim <subcommand> [flags]``.

Exit codes are 0 on success, 1 on a numerical failure (an error JSON is
written to stdout) and 2 on a usage error (message on stderr).
"""
from __future__ import annotations

import argparse
import csv
import inspect
import io
import json
import math
import os
import sys
from typing import Sequence

import numpy as np

from . import bounds as bd
from . import decompose as dc
from . import estimators as es
from . import quadrature as qd
from . import weights as wt
from .errors import EffDimError
from .integrands import REGISTRY, from_expression, get_integrand


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------- serialization
def _clean(obj):
    """Replace non-finite floats by strings and numpy scalars by Python ones."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def _json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, ensure_ascii=False) + "\n"


def _csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(_clean(list(row)))
    return buf.getvalue()


def _records_csv(records: list[dict]) -> str:
    header = list(records[0]) if records else []
    return _csv(header, [[r[k] for k in header] for r in records])


# ---------------------------------------------------------------------- argument helpers
def _scheme(text: str) -> wt.WeightScheme:
    try:
        return wt.from_json(text)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot parse --weights: {exc}") from None


def _dimension(text: str | None, scheme: wt.WeightScheme | None = None):
    if text is None:
        if scheme is not None and scheme.is_explicit:
            return scheme.explicit_d
        return wt.INF
    if text.lower() in ("inf", "infinity"):
        return wt.INF
    return int(text)


def _quad(text: str | None, seed: int):
    if text is None:
        return None
    name, *rest = text.split(":")
    nums = [int(v) for v in rest]
    if name == "gauss":
        return qd.GaussTensor(*nums)
    if name == "midpoint":
        return qd.Midpoint(*nums)
    if name == "mc":
        return qd.MonteCarlo(*nums[:2], seed=seed)
    if name == "halton":
        return qd.RandomizedHalton(*nums[:2], seed=seed)
    raise UsageError(f"unknown quadrature {text!r}; use gauss:n, midpoint:n, mc:n:reps or halton:n:reps")


def _integrand(args):
    if getattr(args, "expr", None):
        if args.d is None:
            raise UsageError("--expr needs --d")
        return from_expression(args.expr, args.d)
    params = json.loads(args.params) if args.params else {}
    if args.d is not None:
        factory = REGISTRY.get(args.fn)
        if factory is not None and "d" in inspect.signature(factory).parameters:
            params["d"] = args.d
    try:
        return get_integrand(args.fn, **params)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    except TypeError as exc:
        raise UsageError(f"bad --params for {args.fn}: {exc}") from None


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("EFFDIM_THREADS", "1")))
    except ValueError:
        return 1


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


# ---------------------------------------------------------------------- subcommands
def cmd_table1(args) -> str:
    modes = [bd.Mode.STRICT, bd.Mode.NONSTRICT] if args.mode == "both" else [bd.Mode(args.mode)]
    etas, epss = _floats(args.etas), _floats(args.eps)
    tables = {m: bd.effective_dimension_table(etas, epss, m, workers=_threads()) for m in modes}
    first = tables[modes[0]]
    if args.layout == "wide":
        header = ["epsilon"]
        for m in modes:
            suffix = "" if len(modes) == 1 else f"_{m.value}"
            header += [f"trunc_eta{_fmt(e)}{suffix}" for e in etas] + [f"super_eta{_fmt(e)}{suffix}" for e in etas]
        header += [f"trunc_boundary_eta{_fmt(e)}" for e in etas] + [f"super_boundary_eta{_fmt(e)}" for e in etas]
        rows = []
        for k, eps in enumerate(epss):
            row = [eps]
            for m in modes:
                cells = tables[m][k * len(etas):(k + 1) * len(etas)]
                row += [c.trunc for c in cells] + [c.super for c in cells]
            cells = first[k * len(etas):(k + 1) * len(etas)]
            row += [c.trunc_boundary for c in cells] + [c.super_boundary for c in cells]
            rows.append(row)
        records = [dict(zip(header, r)) for r in rows]
    else:
        records = []
        for i, cell in enumerate(first):
            rec = {"epsilon": cell.epsilon, "eta": cell.eta}
            if len(modes) == 1:
                rec.update(trunc=cell.trunc, super=cell.super)
            else:
                for m in modes:
                    rec[f"trunc_{m.value}"] = tables[m][i].trunc
                    rec[f"super_{m.value}"] = tables[m][i].super
            rec.update(trunc_boundary=cell.trunc_boundary, super_boundary=cell.super_boundary)
            records.append(rec)
    return _json(records) if args.format == "json" else _records_csv(records)


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else str(v)


def cmd_bounds(args) -> str:
    scheme = _scheme(args.weights)
    d = _dimension(args.d, scheme)
    out: dict = {"weights": scheme.to_json(), "d": d, "epsilon": args.eps}
    for key, fn in (("s_T", bd.truncation_dimension_bound), ("s_S", bd.superposition_dimension_bound)):
        strict = fn(scheme, d, args.eps, bd.Mode.STRICT)
        loose = fn(scheme, d, args.eps, bd.Mode.NONSTRICT)
        out[key] = {"nonstrict": loose.value, "strict": strict.value,
                    "boundary": loose.boundary_flag or strict.boundary_flag,
                    "notes": list(loose.notes)}
    rho = bd.critical_radius(scheme, d)
    out.update(rho_star=rho.rho, rho_argmin=str(rho.argmin_subset), rho_via=rho.via)
    eta = scheme.params.get("eta") if scheme.kind is wt.Kind.PRODUCT else None
    out["class"] = bd.tractability_class(eta).value if eta is not None else None
    return _json(out)


def cmd_interactions(args) -> str:
    scheme = _scheme(args.weights)
    d = _dimension(args.d, scheme)
    if d == wt.INF:
        raise UsageError("interactions needs a finite --d")
    found = bd.important_subsets(scheme, d, args.eps, args.max_order, bd.Mode(args.mode))
    records = [{"subset": str(u), "order": len(u), "bound": b} for u, b in found]
    if args.format == "json":
        return _json(records)
    return _csv(["subset", "order", "bound"], [[r["subset"], r["order"], r["bound"]] for r in records])


def cmd_anova(args) -> str:
    f = _integrand(args)
    spec = _quad(args.quad, args.seed)
    vd = dc.anova_variances(f, spec)
    out = vd.to_json()
    out["component_sum"] = vd.component_sum
    if vd.sigma2 > 0:
        out["effective_dimension"] = {
            sense: dc.effective_dimension(vd, args.eps, sense)
            for sense in ("truncation", "superposition", "successive")
        }
        out["mean_dimension"] = dc.mean_dimension(vd)
    out["epsilon"] = args.eps
    return _json(out)


def cmd_norm(args) -> str:
    f = _integrand(args)
    scheme = _scheme(args.weights)
    spec = _quad(args.quad, args.seed)
    mode = dc.EXACT if args.derivatives == "exact" else dc.FiniteDifference(args.h)
    norm = dc.weighted_norm(f, scheme, spec, mode)
    out = {"norm": norm, "norm2": norm**2, "gap": dc.norm_anova_gap(f, scheme, spec, mode),
           "rho_star": bd.critical_radius(scheme, f.d).rho}
    return _json(out)


def _expr_1d(expr: str):
    names = {k: getattr(np, k) for k in ("sin", "cos", "exp", "log", "sqrt", "abs", "pi", "tanh")}

    def g(x):
        return np.broadcast_to(np.asarray(eval(expr, {"__builtins__": {}}, {**names, "x": x}),  # noqa: S307
                                          dtype=np.float64), np.shape(x))
    return g


def cmd_poincare(args) -> str:
    g = _expr_1d(args.g)
    dg = _expr_1d(args.dg) if args.dg else None
    ratio = dc.poincare_ratio(g, (args.a, args.b), qd.GaussTensor(args.n), dg)
    bound = (math.pi / (args.b - args.a)) ** 2
    return _json({"ratio": ratio, "bound": bound, "excess": ratio - bound, "holds": ratio >= bound - 1e-6})


def cmd_meandim(args) -> str:
    f = _integrand(args)
    md, se = es.mean_dimension_mc(f, args.n, args.seed)
    return _json({"mean_dimension": md, "se": se, "n": args.n, "seed": args.seed})


def cmd_sobol(args) -> str:
    f = _integrand(args)
    return _json(es.total_index_estimates(f, args.n, args.seed).to_json())


def cmd_mcqmc(args) -> str:
    f = _integrand(args)
    mc, qmc = qd.mc_qmc_rmse(f, f.d, args.n, args.replicates, args.seed)
    return _json({"rmse_mc": mc, "rmse_qmc": qmc, "ratio": qmc / mc if mc > 0 else float("nan"),
                  "n": args.n, "replicates": args.replicates, "seed": args.seed})


def cmd_asymptote(args) -> str:
    a = bd.asymptote_argument(args.eps, args.eta, args.lam)
    s_t, s_s = bd.product_dimension_bounds(args.eta, args.eps)
    return _json({"A": a, "w0": bd.lambert_w0(a),
                  "log_ratio": bd.superposition_asymptote(args.eps, args.eta, args.lam),
                  "growth_bound": bd.superposition_growth_bound(args.eps, args.eta, args.lam),
                  "s_S": s_s.value, "s_T": s_t.value})


# ---------------------------------------------------------------------- parser
def _add_fn(p, n_default=None):
    p.add_argument("--fn", default="linear_sum", help=f"registry integrand: {', '.join(sorted(REGISTRY))}")
    p.add_argument("--expr", help="numpy expression in x1..xd instead of --fn")
    p.add_argument("--d", type=int, help="dimension passed to the integrand")
    p.add_argument("--params", help="extra integrand parameters as JSON")
    if n_default is not None:
        p.add_argument("--n", type=int, default=n_default)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", help="write to this file instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    parser = argparse.ArgumentParser(prog="effdim", description="Effective dimension bounds and diagnostics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table1", parents=[common], help="dimension bounds for product weights j^-eta")
    p.add_argument("--mode", choices=["strict", "nonstrict", "both"], default="both")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--layout", choices=["wide", "long"], default="wide",
                   help="wide: one row per eps with eta columns; long: one row per (eps, eta)")
    p.add_argument("--etas", default="2,1,0")
    p.add_argument("--eps", default="0.1,0.01,0.001,0.0001")
    p.set_defaults(run=cmd_table1)

    p = sub.add_parser("bounds", parents=[common], help="s_T, s_S, rho* and tractability for a weight scheme")
    p.add_argument("--weights", required=True)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--d", help="dimension (default inf, or the explicit table's d)")
    p.set_defaults(run=cmd_bounds)

    p = sub.add_parser("interactions", parents=[common], help="subsets whose variance bound reaches eps")
    p.add_argument("--weights", required=True)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--d", required=True)
    p.add_argument("--max-order", type=int, default=3)
    p.add_argument("--mode", choices=["strict", "nonstrict"], default="nonstrict")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(run=cmd_interactions)

    p = sub.add_parser("anova", parents=[common], help="ANOVA variance components and effective dimensions")
    _add_fn(p)
    p.add_argument("--quad", help="gauss:n, midpoint:n, mc:n:reps or halton:n:reps")
    p.add_argument("--eps", type=float, default=0.01)
    p.set_defaults(run=cmd_anova)

    p = sub.add_parser("norm", parents=[common], help="weighted norm and its ANOVA lower-bound gap")
    _add_fn(p)
    p.add_argument("--weights", required=True)
    p.add_argument("--quad")
    p.add_argument("--derivatives", choices=["exact", "fd"], default="exact")
    p.add_argument("--h", type=float)
    p.set_defaults(run=cmd_norm)

    p = sub.add_parser("poincare", parents=[common], help="one-dimensional Poincaré ratio")
    p.add_argument("--g", default="sin(pi*(x-0.5))", help="numpy expression in x")
    p.add_argument("--dg", help="derivative expression (default: central differences)")
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--n", type=int, default=64)
    p.set_defaults(run=cmd_poincare)

    p = sub.add_parser("meandim", parents=[common], help="pick-freeze mean dimension estimate")
    _add_fn(p, n_default=2**14)
    p.set_defaults(run=cmd_meandim)

    p = sub.add_parser("sobol", parents=[common], help="pick-freeze total Sobol' indices")
    _add_fn(p, n_default=2**14)
    p.set_defaults(run=cmd_sobol)

    p = sub.add_parser("mcqmc", parents=[common], help="RMSE of Monte Carlo against randomized Halton")
    _add_fn(p, n_default=1024)
    p.add_argument("--replicates", type=int, default=16)
    p.set_defaults(run=cmd_mcqmc)

    p = sub.add_parser("asymptote", parents=[common], help="superposition growth estimate for product weights")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--lam", type=float, default=0.9)
    p.set_defaults(run=cmd_asymptote)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text = args.run(args)
    except EffDimError as exc:
        sys.stdout.write(_json(exc.to_json()))
        return 1
    except (UsageError, ValueError, json.JSONDecodeError) as exc:
        parser.print_usage(sys.stderr)
        print(f"effdim: error: {exc}", file=sys.stderr)
        return 2
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())
