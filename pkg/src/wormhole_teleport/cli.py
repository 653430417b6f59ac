"""Batch command-line front end.

Every subcommand writes one artifact (CSV or JSON) to ``--out`` or stdout.
CSV files open with a ``# schema:`` line followed by ``#`` metadata comments
and a fixed header row.  When ``--out`` is given a sidecar
``<out>.manifest.json`` records everything needed to rerun the command; the
artifact body itself carries no timestamp, so reruns are byte-identical.

Exit codes: 0 success, 2 usage or domain error, 3 numerical failure,
4 resource guard.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__, finite_size, scan, sd_solver
from .errors import DomainError, NoRootError, NumericalError, OutOfRangeError, ResourceError, WormholeError
from .model import ModelParams, TimeGrid
from .oracle import ed

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_RESOURCE = 4

SCHEMAS = {
    "trace": "wormhole.trace/1",
    "sweep": "wormhole.sweep/1",
    "boundary": "wormhole.boundary/1",
    "validate": "wormhole.validate/1",
    "oracle": "wormhole.oracle/1",
}


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def render_csv(command: str, header, rows, meta: dict | None = None) -> str:
    buf = io.StringIO()
    buf.write(f"# schema: {SCHEMAS[command]} columns={','.join(header)}\n")
    for key, value in (meta or {}).items():
        buf.write(f"# {key}: {_fmt(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def render_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _params_of(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}


def write_manifest(args, argv, out_path: str) -> str:
    manifest = {
        "command": args.command,
        "argv": list(argv),
        "params": _params_of(args),
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "outputs": [out_path],
    }
    path = out_path + ".manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_json(manifest))
    return path


# -- subcommands -----------------------------------------------------------------


def cmd_trace(args) -> str:
    params = ModelParams(gamma=args.gamma, g=args.g)
    if args.dt <= 0:
        raise DomainError("--dt must be positive")
    if args.t_max is None:
        grid = scan.default_grid(params, args.dt)
    else:
        grid = TimeGrid.from_step(args.t_max, args.dt)
    trace = scan.time_trace(params, grid, source=args.source, kick=args.kick)
    meta = {"gamma": args.gamma, "g": args.g, "t_max": grid.t_max, "dt": grid.dt, "source": args.source}
    if args.source == "numeric":
        meta["kick"] = args.kick
    return render_csv("trace", ["t", "k", "negativity", "mutual_info_ln2"], trace.rows(), meta)


def _gamma_values(lo: float, hi: float, steps: int) -> np.ndarray:
    if steps < 1:
        raise DomainError("--steps must be >= 1")
    if steps == 1:
        if lo != hi:
            raise DomainError("--steps 1 needs --gamma-min == --gamma-max")
        return np.array([lo])
    if hi < lo:
        raise DomainError("--gamma-max must be >= --gamma-min")
    return np.linspace(lo, hi, steps)


def cmd_sweep(args) -> str:
    gammas = _gamma_values(args.gamma_min, args.gamma_max, args.steps)
    if args.dt <= 0:
        raise DomainError("--dt must be positive")
    if args.ns_factor < 0:
        raise DomainError("--ns-factor must be >= 0")
    grid = None
    if args.source == "numeric" and args.t_max is not None:
        grid = TimeGrid.from_step(args.t_max, args.dt)
    rows = scan.sweep(
        gammas,
        args.g,
        grid=grid,
        source=args.source,
        kick=args.kick,
        workers=scan.worker_count(args.workers),
        dt=args.dt,
        ns_factor=args.ns_factor,
    )
    meta = {"g": args.g, "source": args.source, "ns_factor": args.ns_factor}
    if 0 < abs(args.g) <= 0.05:
        meta["gamma_q"] = scan.find_gamma_q(args.g)
        meta["gamma_c (crossover at finite g)"] = scan.find_gamma_c(args.g, args.ns_factor)
    header = ["gamma", "g", "k_max", "t_star", "neg_max", "mi_max_ln2", "regime"]
    body = ([getattr(r, h) if h != "regime" else r.regime.label for h in header] for r in rows)
    return render_csv("sweep", header, body, meta)


def cmd_boundary(args) -> str:
    if args.gamma_star:
        return f"{finite_size.gamma_star()!r}\n"
    if args.n_fermions < 2 or args.n_fermions % 2:
        raise DomainError("--N must be even and >= 2")
    header = ["r", "g_boundary"]
    meta = {"N": args.n_fermions}
    if args.r is not None:
        try:
            rows = [(args.r, finite_size.boundary_point(args.r, args.n_fermions))]
        except NoRootError as exc:
            meta["note"] = f"NoRoot: {exc}"
            rows = []
        return render_csv("boundary", header, rows, meta)
    if args.steps < 1:
        raise DomainError("--steps must be >= 1")
    rs = np.linspace(args.r_min, args.r_max, args.steps) if args.steps > 1 else np.array([args.r_min])
    rows = finite_size.boundary_curve(rs, args.n_fermions, skip_missing=True)
    missing = len(rs) - len(rows)
    if missing:
        meta["note"] = f"NoRoot for {missing} of {len(rs)} r values"
    return render_csv("boundary", header, rows, meta)


def _oracle_config(args) -> ed.OracleConfig:
    t_l = args.t if args.t_l is None else args.t_l
    t_r = args.t if args.t_r is None else args.t_r
    return ed.OracleConfig(
        n_sys=args.n_sys,
        m_env=args.m_env,
        gamma=args.gamma,
        g=args.g,
        t_l=t_l,
        t_r=t_r,
        dt_trotter=args.dt_trotter,
        n_samples=args.samples,
        seed=args.seed,
    )


def _estimate_json(est: ed.Estimate) -> dict:
    return {"mean": est.mean, "stderr": est.stderr, "samples": est.samples.tolist()}


def cmd_oracle(args) -> str:
    cfg = _oracle_config(args)
    workers = scan.worker_count(args.workers)
    body: dict = {"schema": SCHEMAS["oracle"], "mode": args.mode, "config": _params_of_config(cfg)}
    if args.mode == "kubo":
        body["k"] = _estimate_json(ed.kubo_response(cfg, workers))
    elif args.mode == "size":
        kubo, size = ed.size_identity_check(cfg, workers)
        diff = np.abs(kubo - size)
        body["k_kubo"] = kubo.tolist()
        body["k_size"] = size.tolist()
        body["abs_diff"] = float(diff.max())
    elif args.mode == "meansize":
        t = cfg.t_l
        body["t"] = t
        body["mean_shifted_size"] = _estimate_json(ed.mean_shifted_size(cfg, t, workers))
    elif args.mode == "protocol":
        res = ed.run_protocol(cfg, workers)
        body["k"] = _estimate_json(res.k)
        body["rho_real"] = res.rho.real.tolist()
        body["rho_imag"] = res.rho.imag.tolist()
        body["rho_stderr"] = res.rho_stderr.tolist()
    return render_json(body)


def _params_of_config(cfg: ed.OracleConfig) -> dict:
    return {k: getattr(cfg, k) for k in sorted(cfg.__dataclass_fields__)}


def cmd_validate(args) -> str:
    header = ["gamma", "g", "dt", "t_max", "max_abs_err", "convergence_ratio"]
    rows = []
    grid = TimeGrid.from_step(args.t_max, args.dt)
    for gamma in args.gamma:
        for g in args.g:
            params = ModelParams(gamma=gamma, g=g)
            err = sd_solver.validate(params, grid, kick=args.kick)
            ratio = sd_solver.convergence_ratio(params, args.t_max) if args.ratio else math.nan
            rows.append((gamma, g, grid.dt, grid.t_max, err, ratio))
    return render_csv("validate", header, rows, {"kick": args.kick})


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wormhole", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="output path (default: stdout)")
        return p

    p = common(sub.add_parser("trace", help="response and channel metrics along t_L = t_R = t"))
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--t-max", type=float, default=None, help="default: max(3 t*, 20)")
    p.add_argument("--dt", type=float, default=scan.DEFAULT_DT)
    p.add_argument("--source", choices=scan.SOURCES, default="analytic")
    p.add_argument("--kick", choices=sd_solver.KICKS, default="small_g")
    p.set_defaults(func=cmd_trace)

    p = common(sub.add_parser("sweep", help="peak metrics and regime over a gamma range"))
    p.add_argument("--gamma-min", type=float, default=0.0)
    p.add_argument("--gamma-max", type=float, default=1.3)
    p.add_argument("--steps", type=int, default=27)
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--dt", type=float, default=scan.DEFAULT_DT)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--source", choices=scan.SOURCES, default="analytic")
    p.add_argument("--kick", choices=sd_solver.KICKS, default="small_g")
    p.add_argument("--ns-factor", type=float, default=scan.NS_FACTOR, help="no-signal cutoff in units of |g|")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    p = common(sub.add_parser("boundary", help="finite-N entanglement boundary or gamma*"))
    p.add_argument("--gamma-star", action="store_true", help="print the gamma* root and exit")
    p.add_argument("--r", type=float, default=None, help="single r value")
    p.add_argument("--r-min", type=float, default=-0.99)
    p.add_argument("--r-max", type=float, default=0.99)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--N", dest="n_fermions", type=int, default=100)
    p.set_defaults(func=cmd_boundary)

    p = common(sub.add_parser("oracle", help="exact small-N Brownian SYK simulation (JSON)"))
    p.add_argument("--mode", choices=("kubo", "protocol", "size", "meansize"), default="kubo")
    p.add_argument("--n-sys", type=int, default=4)
    p.add_argument("--m-env", type=int, default=4)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--g", type=float, default=0.05)
    p.add_argument("--t", type=float, default=1.0, help="t_L = t_R (meansize: evolution time)")
    p.add_argument("--t-l", type=float, default=None)
    p.add_argument("--t-r", type=float, default=None)
    p.add_argument("--dt-trotter", type=float, default=0.01)
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_oracle)

    p = common(sub.add_parser("validate", help="numeric vs closed-form diagonal profile"))
    p.add_argument("--gamma", type=float, nargs="+", default=[0.1, 0.4, 1.1])
    p.add_argument("--g", type=float, nargs="+", default=[0.001, 0.01])
    p.add_argument("--t-max", type=float, default=15.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--kick", choices=sd_solver.KICKS, default="small_g")
    p.add_argument("--no-ratio", dest="ratio", action="store_false", help="skip the dt-halving ratio")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text = args.func(args)
    except (DomainError, OutOfRangeError) as exc:
        print(f"wormhole {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as exc:
        print(f"wormhole {args.command}: resource guard: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (NumericalError, WormholeError) as exc:
        print(f"wormhole {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        write_manifest(args, argv, args.out)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
