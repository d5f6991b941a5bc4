"""Command-line front end: one CSV-emitting subcommand per result.

Every output starts with a ``#`` manifest block (subcommand, flags, seed,
version, wall-clock time) followed by a plain CSV body.  The body depends
only on the flags and the seed.

Exit codes: 0 success, 2 bad flags, 3 numerical convergence failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from . import cv_gate, cv_teleport, dv_montecarlo, fock, nssd
from .special import UNCONDITIONED, db_to_q

SEED_ENV = "TCSIGN_SEED"
DEFAULT_SEED = 20160901
TABLE_D_ARG = ",".join(str(d) for d in cv_gate.TABLE_D)


class FlagError(ValueError):
    pass


def parse_grid(text: str, integer: bool = False) -> np.ndarray:
    """``start:stop:step`` (stop included when hit) or a comma list."""
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError
            start, stop, step = (float(p) for p in parts)
            if step <= 0 or stop < start:
                raise ValueError
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            values = start + step * np.arange(count)
        else:
            values = np.array([float(p) for p in text.split(",") if p.strip()])
    except ValueError:
        raise FlagError(f"bad grid {text!r}; expected start:stop:step or a comma list") from None
    if values.size == 0:
        raise FlagError(f"empty grid {text!r}")
    if integer:
        return np.round(values).astype(np.int64)
    return np.round(values, 12)


def parse_ints(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise FlagError(f"bad integer list {text!r}") from None


def parse_radius(text: str) -> float:
    if text.lower() in ("inf", "infinity", "none"):
        return UNCONDITIONED
    return float(text)


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x) + 0.0, ".12g")
    return str(x)


def _default_seed() -> int:
    env = os.environ.get(SEED_ENV)
    if env is None:
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise FlagError(f"{SEED_ENV} must be an integer, got {env!r}") from None


# --------------------------------------------------------------------------
# subcommands: each returns (header, rows)


def cmd_nss_verify(args):
    setup = fock.klm_nss_setup()
    got = fock.heralded_gate_coefficients(setup, args.n_max)
    rows = []
    for n, a in enumerate(got):
        ref = fock.klm_nss_alpha(n)
        rows.append(("nss_alpha", n, a.real, a.imag, ref, abs(a - ref)))
    logical = fock.csign_logical_matrix()
    target = 0.25 * np.diag([1, 1, 1, -1])
    for i in range(4):
        a = logical[i, i]
        rows.append(("csign_diagonal", i, a.real, a.imag, target[i, i], abs(a - target[i, i])))
    off = float(np.max(np.abs(logical - np.diag(np.diag(logical)))))
    rows.append(("csign_offdiagonal_max", 0, off, 0.0, 0.0, off))
    p = float(np.mean(np.abs(np.diag(logical)) ** 2))
    rows.append(("csign_success_probability", 0, p, 0.0, 1 / 16, abs(p - 1 / 16)))
    return ("quantity", "index", "value_re", "value_im", "reference", "abs_error"), rows


def cmd_nssd_synth(args):
    if not 2 <= args.d <= 7:
        raise FlagError("--d must lie in 2..7")
    p_d, spec = nssd.max_success_probability(args.d, n_points=args.x_points, tol=args.tol)
    rows = []
    for line in spec.to_record().splitlines():
        key, value = line.split(": ", 1)
        rows.append((key, value))
    rows.append(("reference_25e-d", fmt(25.0 * 10.0 ** -args.d)))
    rows.append(("self_kerr_max_error", fmt(nssd.check_self_kerr(spec))))
    return ("field", "value"), rows


def _mc_rows(curve, extra=None):
    for i, row in enumerate(curve.rows()):
        yield row + (tuple(v[i] for v in extra) if extra else ())


def cmd_dv_res_curve(args):
    grid = parse_grid(args.grid, integer=True)
    curve = dv_montecarlo.simulate_res_state_curve(
        args.route, grid, args.trials, dv_montecarlo.RngStream(args.seed), args.threads)
    header = ("route_or_N", "n_sources", "success_prob", "stderr", "trials", "master_seed")
    return header, list(_mc_rows(curve))


def cmd_grice_curve(args):
    if not 1 <= args.N <= 8:
        raise FlagError("--N must lie in 1..8")
    if args.grid:
        grid = parse_grid(args.grid, integer=True)
    else:
        grid = dv_montecarlo.default_grice_grid(max(args.N, 4))
    curve = dv_montecarlo.simulate_grice_cost(
        args.N, grid, args.trials, dv_montecarlo.RngStream(args.seed), args.threads)
    header = ("route_or_N", "n_sources", "success_prob", "stderr", "trials", "master_seed",
              "p_full")
    return header, list(_mc_rows(curve, [curve.extra["p_full"]]))


def _states(text):
    return [(n, cv_teleport.fock(n)) for n in parse_ints(text)]


def cmd_cv_tradeoff(args):
    g = args.q if args.g is None else args.g
    rows = []
    for n, psi in _states(args.states):
        for B in parse_grid(args.bgrid):
            p = cv_teleport.success_probability(psi, args.q, B)
            raw, cond = cv_teleport.average_fidelity(psi, args.q, g, B)
            row = [f"|{n}>", args.q, g, B, p, raw, cond, raw]
            if args.quad_nodes:
                from . import quadrature
                row += [quadrature.success_probability(psi, args.q, B, n_r=args.quad_nodes),
                        quadrature.fidelity_integral(psi, args.q, g, B, n_r=args.quad_nodes)]
            rows.append(row)
    header = ["state", "q", "g", "B", "P", "F_raw", "F_cond", "Q"]
    if args.quad_nodes:
        header += ["P_quadrature", "F_raw_quadrature"]
    return header, rows


def cmd_cv_gain_scan(args):
    B = parse_radius(args.B)
    rows = []
    for n, psi in _states(args.states):
        for g in parse_grid(args.ggrid):
            rows.append((f"|{n}>", args.q, g, cv_teleport.average_fidelity(psi, args.q, g, B)[1]))
        g_opt, f_opt = cv_teleport.optimize_gain(psi, args.q, B, tol=args.tol)
        rows.append((f"|{n}>_optimum", args.q, g_opt, f_opt))
    return ("state", "q", "g", "F"), rows


def _csign_curves(args, q_grid):
    ds = parse_ints(args.d)
    if any(d < 2 for d in ds):
        raise FlagError("--d values must be >= 2")
    B = parse_radius(args.B)

    def one(d):
        return cv_gate.optimize_csign(d, args.t, q_grid, B, tol=args.tol)

    threads = args.threads or os.cpu_count() or 1
    if threads == 1 or len(ds) == 1:
        return [one(d) for d in ds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, ds))


CURVE_HEADER = ("d", "t", "q", "q_db", "g_opt", "F_worst")


def cmd_cv_csign(args):
    if args.qgrid is None:
        q_grid = cv_gate.default_q_grid()
    elif args.db_axis:
        q_grid = np.array([db_to_q(x) for x in parse_grid(args.qgrid)])
    else:
        q_grid = parse_grid(args.qgrid)
    rows = []
    for c in _csign_curves(args, q_grid):
        rows.extend(c.rows())
        if args.with_optimum:
            rows.append((c.d, c.t, c.q_best, c.db_best, c.g_best, c.f_best))
    return CURVE_HEADER, rows


def cmd_cv_gopt(args):
    q_grid = parse_grid(args.qgrid)
    curves = _csign_curves(args, q_grid)
    if not args.fit:
        return CURVE_HEADER, [r for c in curves for r in c.rows()]
    rows = []
    for c in curves:
        slope, intercept = np.polyfit(c.q, c.g_opt, 1)
        rows.append((c.d, c.t, float(c.q[0]), float(c.q[-1]), slope, intercept))
    return ("d", "t", "q_min", "q_max", "slope", "intercept"), rows


def cmd_cv_cost_table(args):
    models = {"inverse-square": cv_gate.inverse_square_pd}
    pd_model = models[args.pd_model]
    ds = parse_ints(args.d)
    fmax = {}
    if args.qpoints > 0:
        q_grid = cv_gate.default_q_grid(args.qpoints)
        for d in ds:
            fmax[d] = cv_gate.optimize_csign(d, args.t, q_grid, tol=args.tol).f_best
    rows = []
    for d, p, n in cv_gate.cost_table(ds, cv_gate.TABLE_P, pd_model):
        rows.append((d, fmax.get(d, ""), p, n, cv_gate.format_count(n)))
    return ("d", "F_max", "p_CV", "n_CV", "n_CV_display"), rows


def cmd_dv_quality(args):
    rows = [("standard_bm", 1.0, 0.5, dv_montecarlo.dv_quality(1.0, 0.5)),
            ("advanced_bm", 1.0, 0.75, dv_montecarlo.dv_quality(1.0, 0.75))]
    for N in range(2, args.max_N + 1):
        p = 1.0 - 2.0 ** -N
        rows.append((f"grice_N={N}", 1.0, p, dv_montecarlo.dv_quality(1.0, p)))
    if args.p_resource is not None or args.p_bm is not None:
        pr = 1.0 if args.p_resource is None else args.p_resource
        pb = 0.5 if args.p_bm is None else args.p_bm
        rows.append(("custom", pr, pb, dv_montecarlo.dv_quality(pr, pb)))
    return ("label", "p_resource", "p_bm", "Q"), rows


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tcsign",
        description="Teleportation-assisted optical CSIGN gates: reproducible CSV outputs.")
    parser.add_argument("--version", action="version", version=f"tcsign {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="-", help="output CSV path (default: stdout)")
    common.add_argument("--seed", type=int, default=None,
                        help=f"master seed (default: ${SEED_ENV} or {DEFAULT_SEED})")
    common.add_argument("--threads", type=int, default=None,
                        help="worker cap (default: all cores)")
    common.add_argument("--tol", type=float, default=1e-6, help="optimizer tolerance")
    sub = parser.add_subparsers(dest="command", metavar="subcommand")
    sub.required = True

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_, description=help_)
        p.set_defaults(func=fn)
        return p

    p = add("nss-verify", cmd_nss_verify, "NSS coefficients and CSIGN circuit via permanents")
    p.add_argument("--n-max", type=int, default=6)

    p = add("nssd-synth", cmd_nssd_synth, "synthesize NSS_d and maximize its success probability")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--x-points", type=int, default=200, help="points of the log x scan")

    p = add("dv-res-curve", cmd_dv_res_curve, "|res> creation probability vs sources")
    p.add_argument("--route", choices=dv_montecarlo.ROUTES, default="cluster_adv")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--grid", default="100:2000:100", help="source counts start:stop:step")

    p = add("grice-curve", cmd_grice_curve, "mean Bell-measurement success vs ancilla sources")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--grid", default=None, help="source counts start:stop:step")

    p = add("cv-tradeoff", cmd_cv_tradeoff, "success probability, fidelity, quality vs B")
    p.add_argument("--q", type=float, default=0.9)
    p.add_argument("--g", type=float, default=None, help="gain (default: q)")
    p.add_argument("--states", default="0,1,2", help="Fock inputs")
    p.add_argument("--bgrid", default="0.5:5:0.5")
    p.add_argument("--quad-nodes", type=int, default=0,
                   help="radial quadrature nodes for check columns (0: off)")

    p = add("cv-gain-scan", cmd_cv_gain_scan, "unconditioned fidelity vs gain")
    p.add_argument("--q", type=float, default=0.9)
    p.add_argument("--states", default="0,1,2")
    p.add_argument("--ggrid", default="0.5:1.2:0.01")
    p.add_argument("--B", default="inf")

    for name, fn, help_, grid in (
            ("cv-gopt", cmd_cv_gopt, "optimal gain vs squeezing for the CSIGN teleportation",
             "0.85:0.98:0.005"),
            ("cv-csign", cmd_cv_csign, "worst-case CSIGN fidelity vs squeezing", None)):
        p = add(name, fn, help_)
        p.add_argument("--d", default=TABLE_D_ARG, help="comma list of d values")
        p.add_argument("--t", type=int, default=cv_gate.DEFAULT_T)
        p.add_argument("--qgrid", default=grid)
        p.add_argument("--B", default="inf")
    p.add_argument("--db-axis", action="store_true", help="read --qgrid in dB")
    p.add_argument("--with-optimum", action="store_true",
                   help="append the refined optimum of each curve")
    sub.choices["cv-gopt"].add_argument("--fit", action="store_true",
                                        help="emit the linear fit of g_opt vs q")

    p = add("cv-cost-table", cmd_cv_cost_table, "photon sources for CV CSIGN (cost table)")
    p.add_argument("--pd-model", choices=("inverse-square",), default="inverse-square")
    p.add_argument("--d", default=TABLE_D_ARG)
    p.add_argument("--t", type=int, default=cv_gate.DEFAULT_T)
    p.add_argument("--qpoints", type=int, default=400,
                   help="q grid size for the F_max column (0: skip)")

    p = add("dv-quality", cmd_dv_quality, "quality Q of DV gate teleportation")
    p.add_argument("--max-N", type=int, default=8)
    p.add_argument("--p-resource", type=float, default=None)
    p.add_argument("--p-bm", type=float, default=None)
    return parser


def _manifest(args, seconds: float) -> str:
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command")}
    lines = [f"tcsign {args.command}",
             "flags: " + " ".join(f"{k}={v}" for k, v in flags.items()),
             f"master_seed: {args.seed}",
             f"version: {__version__}",
             f"wall_clock_seconds: {seconds:.3f}"]
    return "".join(f"# {line}\n" for line in lines)


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    t0 = time.perf_counter()
    try:
        if args.seed is None:
            args.seed = _default_seed()
        if args.threads is not None and args.threads < 1:
            raise FlagError("--threads must be >= 1")
        header, rows = args.func(args)
    except (FlagError, ValueError) as exc:
        print(f"tcsign {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except ArithmeticError as exc:
        print(f"tcsign {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 3
    body = io.StringIO()
    writer = csv.writer(body, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    text = _manifest(args, time.perf_counter() - t0) + body.getvalue()
    if args.out == "-":
        stdout.write(text)
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
