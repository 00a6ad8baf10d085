"""Command-line front end.

Exit codes: 0 success, 1 domain or convergence error, 2 usage error,
3 cut-locus error.
"""

import argparse
import io
import json
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import __version__
from .cutlocus import cut_time
from .distortion import beta as beta_fn
from .distortion import beta_monte_carlo, fd_jacobian_oracle
from .errors import ConvergenceError, CutLocusError, GrushinError
from .gentrig import F_pq, PQ, as_alpha, cos_alpha, sin_alpha
from .geodesics import connect, geodesic_flow, make_spec
from .mcp import check_bound, n_crit, solve_m

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE, EXIT_CUT = 0, 1, 2, 3


@dataclass
class RunConfig:
    alpha: float
    command: str
    fmt: str = "csv"
    output: Optional[str] = None
    seed: int = 0


def fmt_num(x):
    """Shortest round-trip representation."""
    x = float(x)
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x + 0.0)


def _pair(text):
    try:
        a, b = (float(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}")
    return a, b


def _grid(text):
    """``value`` or ``start:stop:count``."""
    try:
        if ":" in text:
            a, b, n = text.split(":")
            return np.linspace(float(a), float(b), int(n))
        return np.array([float(text)])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'start:stop:count', got {text!r}")


def _emit(cfg, header, rows, out):
    if cfg.fmt == "json":
        records = [dict(zip(header, r)) for r in rows]
        json.dump({"alpha": cfg.alpha, "command": cfg.command, "rows": records}, out)
        out.write("\n")
        return
    out.write(f"# alpha={fmt_num(cfg.alpha)}\n# command={cfg.command}\n"
              f"# seed={cfg.seed}\n# version={__version__}\n")
    out.write(",".join(header) + "\n")
    for r in rows:
        out.write(",".join(v if isinstance(v, str) else fmt_num(v) for v in r) + "\n")


# -- commands ------------------------------------------------------------------


def cmd_trig(args, cfg, out):
    ctx = as_alpha(args.alpha)
    if args.fn == "pi":
        out.write(fmt_num(ctx.pi_alpha) + "\n")
        return EXIT_OK
    parts = [_grid(x) for x in (args.x or [])] + ([_grid(args.range)] if args.range else [])
    if not parts:
        raise argparse.ArgumentTypeError("--x or --range is required")
    xs = np.concatenate(parts)
    if args.fn == "sin":
        vals = sin_alpha(ctx, xs)
    elif args.fn == "cos":
        vals = cos_alpha(ctx, xs)
    else:
        vals = F_pq(PQ(2.0, 2 * ctx.alpha), xs)
    _emit(cfg, ("x", "value"), zip(xs, np.atleast_1d(vals)), out)
    return EXIT_OK


def _fan(ctx, q0, n):
    """Initial covectors of a fan of ``n`` geodesics from ``q0``."""
    a, P = ctx.alpha, ctx.pi_alpha
    x0 = q0[0]
    if x0 == 0:
        w = np.linspace(-P, P, n + 2)[1:-1]
        w = w[w != 0]
        covs = []
        for sign in (1.0, -1.0):
            covs += [(sign, np.sign(wi) * abs(wi) ** a) for wi in w]
        return covs
    phi = (np.arange(n) + 0.5) * (2 * P / n)
    s, c = ctx.sincos(phi)
    ratio = s / x0
    return list(zip(c, ratio * np.abs(ratio) ** (a - 1)))


def _tmax(text):
    if text == "cut":
        return "cut"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("--tmax takes a number or 'cut'")


def _geodesic_rows(ctx, q0, covs, tmax, steps):
    rows = []
    for idx, (u0, v0) in enumerate(covs):
        spec = make_spec(ctx, q0, (u0, v0))
        tc = cut_time(spec)
        end = tc if tmax == "cut" else tmax
        if not np.isfinite(end):
            raise GrushinError("--tmax cut needs geodesics with a finite cut time")
        ts = np.linspace(0.0, end, steps + 1)
        x, y, u, v = geodesic_flow(ctx, q0[0], q0[1], u0, v0, ts)
        x[0], y[0], u[0] = q0[0], q0[1], u0
        for row in zip(ts, x, y, u, v):
            rows.append((str(idx),) + row + (tc,))
    return rows


def cmd_geodesic(args, cfg, out):
    ctx = as_alpha(args.alpha)
    covs = [args.cov] if args.cov is not None else _fan(ctx, args.q0, args.fan)
    rows = _geodesic_rows(ctx, args.q0, covs, args.tmax, args.steps)
    _emit(cfg, ("idx", "t", "x", "y", "u", "v", "t_cut"), rows, out)
    return EXIT_OK


def cmd_figure(args, cfg, out):
    ctx = as_alpha(args.alpha)
    q0 = (0.0, 0.0) if args.panel == "singular" else (1.0, 0.0)
    rows = _geodesic_rows(ctx, q0, _fan(ctx, q0, args.n), "cut", args.steps)
    _emit(cfg, ("idx", "t", "x", "y", "u", "v", "t_cut"), rows, out)
    return EXIT_OK


def cmd_connect(args, cfg, out):
    ctx = as_alpha(args.alpha)
    spec = connect(ctx, args.q0, args.q1)
    p = spec.polar
    row = (spec.lambda0.u, spec.lambda0.v, spec.kind,
           p.A if p else float("nan"), p.omega if p else float("nan"),
           p.phi if p else float("nan"), cut_time(spec))
    _emit(cfg, ("u0", "v0", "kind", "A", "omega", "phi", "t_cut"), [row], out)
    return EXIT_OK


def cmd_beta(args, cfg, out):
    ctx = as_alpha(args.alpha)
    ts = _grid(args.t)
    res = beta_fn(ctx, args.q0, args.q1, ts)
    values = np.atleast_1d(res.beta)
    header = ["t", "beta", "branch"]
    rows = []
    if args.oracle:
        header += ["oracle", "diff"]
        spec = connect(ctx, args.q0, args.q1)
        x0, (u0, v0) = spec.q0.x, spec.lambda0
    for t, b in zip(ts, values):
        row = [t, b, str(res.branch)]
        if args.oracle == "fd":
            o = fd_jacobian_oracle(ctx, t, x0, u0, v0) / fd_jacobian_oracle(ctx, 1.0, x0, u0, v0)
            row += [o, abs(o - b)]
        elif args.oracle == "mc":
            o = beta_monte_carlo(ctx, args.q0, args.q1, t, r=args.r, n=args.n, seed=cfg.seed)
            row += [o, abs(o - b)]
        rows.append(row)
    _emit(cfg, header, rows, out)
    return EXIT_OK


def cmd_mcp(args, cfg, out):
    a = args.alpha
    report = check_bound(a, N=args.N, family=args.family)
    data = {
        "alpha": a, "m": solve_m(a), "n_crit": n_crit(a), "family": report.family,
        "N": report.N, "min_ratio": report.min_ratio, "max_ratio": report.max_ratio,
        "n_evaluated": report.n_evaluated, "n_violations": report.n_violations,
        "violations": report.violations,
    }
    json.dump(data, out)
    out.write("\n")
    return EXIT_OK


# -- parser --------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def build_parser():
    p = _Parser(prog="grushin", description="Geodesics and distortion coefficients "
                "of the alpha-Grushin plane.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--alpha", type=float, required=True)
        sp.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
        sp.add_argument("--output", "-o")
        sp.add_argument("--seed", type=int, default=0)
        return sp

    sp = common(sub.add_parser("trig", help="generalised sine, cosine, pi and F"))
    sp.add_argument("--fn", choices=("sin", "cos", "pi", "F"), required=True)
    sp.add_argument("--x", action="append", help="value or start:stop:count; repeatable")
    sp.add_argument("--range", help="start:stop:count")

    sp = common(sub.add_parser("geodesic", help="sample geodesics"))
    sp.add_argument("--q0", type=_pair, required=True)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--cov", type=_pair)
    g.add_argument("--fan", type=int)
    sp.add_argument("--tmax", type=_tmax, default=1.0, help="end time or 'cut'")
    sp.add_argument("--steps", type=int, default=100)

    sp = common(sub.add_parser("connect", help="minimising geodesic between two points"))
    sp.add_argument("--q0", type=_pair, required=True)
    sp.add_argument("--q1", type=_pair, required=True)

    sp = common(sub.add_parser("beta", help="distortion coefficients"))
    sp.add_argument("--q0", type=_pair, required=True)
    sp.add_argument("--q1", type=_pair, required=True)
    sp.add_argument("--t", default="0:1:11", help="value or start:stop:count")
    sp.add_argument("--oracle", choices=("fd", "mc"))
    sp.add_argument("--n", type=int, default=100_000, help="Monte Carlo sample count")
    sp.add_argument("--r", type=float, default=0.01, help="Monte Carlo ball radius")

    sp = common(sub.add_parser("mcp", help="critical dimension and bound sweep"))
    sp.add_argument("--family", choices=("horizontal", "singular", "uzero", "generic"),
                    default="horizontal")
    sp.add_argument("--N", type=float)

    sp = common(sub.add_parser("figure", help="geodesic fans up to the cut time"))
    sp.add_argument("--panel", choices=("singular", "riemannian"), default="singular")
    sp.add_argument("--n", type=int, default=24)
    sp.add_argument("--steps", type=int, default=100)
    return p


COMMANDS = {
    "trig": cmd_trig, "geodesic": cmd_geodesic, "connect": cmd_connect,
    "beta": cmd_beta, "mcp": cmd_mcp, "figure": cmd_figure,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    cfg = RunConfig(alpha=args.alpha, command=args.command, fmt=args.fmt,
                    output=args.output, seed=args.seed)
    buf = io.StringIO()
    try:
        code = COMMANDS[args.command](args, cfg, buf)
    except argparse.ArgumentTypeError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"grushin: error: {exc}\n")
        return EXIT_USAGE
    except CutLocusError as exc:
        sys.stderr.write(f"grushin: cut locus: {exc}\n")
        return EXIT_CUT
    except (GrushinError, ConvergenceError) as exc:
        sys.stderr.write(f"grushin: error: {exc}\n")
        return EXIT_DOMAIN
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return code
