"""Command-line entry point.

Exit codes: 0 success, 2 invalid input or usage, 3 solver did not
converge, 4 numerical failure during time stepping.
"""

import argparse
import json
import os
import sys

from . import __version__
from .core import Params, RadialGrid, scale_state, support_radius
from .errors import ConvergenceError, NLKGError, NumericalFailure, ParameterError

INTERFACE_VERSION = "1.0"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONVERGENCE = 3
EXIT_NUMERICAL = 4

DEFAULT_GS_GRID = {"rmax": 20.0, "npts": 4096}
DEFAULT_DYN_GRID = {"rmax": 60.0, "npts": 2048}
DEFAULT_EVOLVE = {
    "dt": 0.01,
    "t_end": 10.0,
    "record_every": 10,
    "blowup_factor": 1e4,
    "cfl_limit": 0.5,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_config(args):
    cfg = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise ParameterError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParameterError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ParameterError("config must be a JSON object")
    params = dict(cfg.get("params", {}))
    for key in ("m1", "m2", "omega", "dim"):
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    cfg["params"] = params
    for key in ("lambda", "rho"):
        val = getattr(args, key.replace("lambda", "lam"), None)
        if val is not None:
            cfg[key] = val
    if getattr(args, "out", None):
        cfg["output_dir"] = args.out
    cfg.setdefault("output_dir", ".")
    return cfg


def _params(cfg):
    p = cfg.get("params", {})
    missing = [k for k in ("m1", "m2", "omega", "dim") if k not in p]
    if missing:
        raise ParameterError(f"missing parameters: {', '.join(missing)}")
    try:
        return Params(float(p["m1"]), float(p["m2"]), float(p["omega"]), int(p["dim"]))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ParameterError):
            raise
        raise ParameterError(f"invalid parameter value: {exc}") from exc


def _grid(cfg, key, default, dim):
    g = dict(default)
    g.update(cfg.get(key, {}))
    return RadialGrid(dim=dim, rmax=float(g["rmax"]), npts=int(g["npts"]))


def _evolve_config(cfg):
    from .evolution import EvolveConfig

    e = dict(DEFAULT_EVOLVE)
    e.update(cfg.get("evolve", {}))
    return EvolveConfig(
        dt=float(e["dt"]),
        t_end=float(e["t_end"]),
        record_every=int(e["record_every"]),
        blowup_factor=float(e["blowup_factor"]),
        cfl_limit=float(e["cfl_limit"]),
    )


def _gs_options(cfg):
    g = cfg.get("ground_state", {})
    return float(g.get("tol", 1e-10)), int(g.get("max_iter", 2000)), g


def _out(cfg, name):
    return os.path.join(cfg["output_dir"], name)


def _print_json(obj):
    from .io import _json_default

    print(json.dumps(obj, indent=2, sort_keys=True, default=_json_default))


def cmd_ground_state(cfg):
    from .groundstate import action, ground_state_summary, multi_start, solve_sp, standing_wave
    from .io import write_json, write_state_csv

    p = _params(cfg)
    grid = _grid(cfg, "grid", DEFAULT_GS_GRID, p.dim)
    tol, max_iter, opts = _gs_options(cfg)
    gs = solve_sp(p, grid, tol=tol, max_iter=max_iter)
    summary = ground_state_summary(gs)
    n_starts = int(opts.get("multi_start", 0))
    if n_starts > 0:
        others = multi_start(p, grid, n_starts, int(opts.get("seed", 42)), tol, max_iter)
        J = summary["J_omega"]
        summary["multi_start"] = {
            "converged": len(others),
            "J_omega": [action(g) for g in others],
            "max_rel_spread": max((abs(action(g) - J) / abs(J) for g in others), default=0.0),
        }
    write_state_csv(_out(cfg, "ground_state.csv"), standing_wave(gs))
    write_json(_out(cfg, "ground_state.json"), summary)
    _print_json(summary)
    return EXIT_OK


def _state_path(cfg, args):
    path = getattr(args, "state", None) or cfg.get("state_csv")
    if not path:
        raise ParameterError("no state CSV given (use --state or 'state_csv' in the config)")
    return path


def cmd_functionals(cfg, args):
    from .functionals import report
    from .io import read_state_csv, write_json

    p = _params(cfg)
    s = read_state_csv(_state_path(cfg, args), p.dim)
    out = report(s, p).as_dict()
    write_json(_out(cfg, "functionals.json"), out)
    _print_json(out)
    return EXIT_OK


def _initial_state(cfg, args, p):
    """State from CSV if configured, else the scaled standing wave on the dynamics grid."""
    from .groundstate import polish, solve_sp, standing_wave
    from .io import read_state_csv

    path = getattr(args, "state", None) or cfg.get("state_csv")
    if path:
        s = read_state_csv(path, p.dim)
    else:
        tol, max_iter, _ = _gs_options(cfg)
        gs = solve_sp(p, _grid(cfg, "grid", DEFAULT_GS_GRID, p.dim), tol=tol, max_iter=max_iter)
        dyn = _grid(cfg, "dynamics_grid", DEFAULT_DYN_GRID, p.dim)
        s = standing_wave(polish(gs, dyn, tol=tol, max_iter=max_iter))
    lam = float(cfg.get("lambda", 1.0))
    return scale_state(s, lam) if lam != 1.0 else s


def cmd_evolve(cfg, args):
    from .evolution import Outcome, evolve
    from .io import TrajectoryWriter, write_json

    p = _params(cfg)
    ecfg = _evolve_config(cfg)
    s0 = _initial_state(cfg, args, p)
    ecfg.check_cfl(s0.grid)
    rho = cfg.get("rho")
    with TrajectoryWriter(_out(cfg, "trajectory.csv")) as sink:
        res = evolve(s0, p, ecfg, rho=None if rho is None else float(rho), sink=sink)
    summary = res.summary()
    summary["support_radius"] = support_radius(s0)
    write_json(_out(cfg, "evolve_summary.json"), summary)
    _print_json(summary)
    if res.outcome is Outcome.FAILURE:
        print("numerical failure: non-finite values without norm growth", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_instability(cfg):
    from .experiments import DEFAULT_LAMBDAS, ExperimentConfig, run_instability
    from .io import write_json

    p = _params(cfg)
    tol, max_iter, _ = _gs_options(cfg)
    lams = cfg.get("lambda_list", list(DEFAULT_LAMBDAS))
    if "lambda" in cfg:
        lams = [float(cfg["lambda"])]
    ecfg = ExperimentConfig(
        params=p,
        gs_grid=_grid(cfg, "grid", DEFAULT_GS_GRID, p.dim),
        dyn_grid=_grid(cfg, "dynamics_grid", DEFAULT_DYN_GRID, p.dim),
        evolve=_evolve_config(cfg),
        lambda_list=tuple(float(x) for x in lams),
        rho=None if cfg.get("rho") is None else float(cfg["rho"]),
        gs_tol=tol,
        gs_max_iter=max_iter,
    )
    ecfg.evolve.check_cfl(ecfg.dyn_grid)
    out_dir = cfg["output_dir"]
    rep = run_instability(ecfg, out_dir=out_dir)
    d = rep.as_dict()
    for e in d["entries"]:
        if e.get("trajectory_csv"):
            e["trajectory_csv"] = os.path.basename(e["trajectory_csv"])
    write_json(os.path.join(out_dir, "report.json"), d)
    for e in rep.entries:
        print(
            f"lambda={e.lam:g} in_B={e.membership['in_B']} outcome={e.outcome} "
            f"t_final={e.t_final:g}"
        )
    return EXIT_OK


def cmd_virial_check(cfg, args):
    from .io import read_trajectory_csv, write_json
    from .virial import check_virial_identity

    path = getattr(args, "trajectory", None) or cfg.get("trajectory_csv")
    if not path:
        raise ParameterError("no trajectory CSV given (use --trajectory or 'trajectory_csv')")
    if cfg.get("rho") is None:
        raise ParameterError("rho is required")
    if getattr(args, "support_radius", None) is not None:
        cfg["support_radius"] = args.support_radius
    if cfg.get("support_radius") is None:
        # written by the evolve subcommand next to its trajectory
        summary = os.path.join(os.path.dirname(os.path.abspath(path)), "evolve_summary.json")
        if os.path.exists(summary):
            with open(summary) as fh:
                cfg["support_radius"] = json.load(fh).get("support_radius")
    if cfg.get("support_radius") is None:
        raise ParameterError("support_radius is required")
    records = read_trajectory_csv(path)
    rep = check_virial_identity(
        records,
        float(cfg["rho"]),
        float(cfg["support_radius"]),
        t_window=cfg.get("t_window"),
        tol=float(cfg.get("virial_tol", 1e-2)),
    )
    out = rep.as_dict()
    write_json(_out(cfg, "virial_check.json"), out)
    _print_json(out)
    return EXIT_OK


def cmd_g_scan(args):
    from .variational import g_scan

    ok, gmin = g_scan(args.beta, args.npts)
    print(f"min g = {gmin:.17g}")
    print("PASS" if ok else "FAIL")
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="nlkg", description=__doc__.splitlines()[0])
    parser.add_argument(
        "--version",
        action="version",
        version=f"nlkg {__version__} (interface {INTERFACE_VERSION})",
    )
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    def common(sp):
        sp.add_argument("--config", help="JSON configuration file")
        sp.add_argument("--omega", type=float)
        sp.add_argument("--m1", type=float)
        sp.add_argument("--m2", type=float)
        sp.add_argument("--dim", type=int)
        sp.add_argument("--lambda", dest="lam", type=float)
        sp.add_argument("--rho", type=float)
        sp.add_argument("--out", help="output directory")
        return sp

    common(sub.add_parser("ground-state", help="solve the stationary problem"))
    common(sub.add_parser("functionals", help="evaluate functionals of a state CSV")).add_argument(
        "--state", help="state CSV (overrides state_csv)"
    )
    common(sub.add_parser("evolve", help="time-evolve a state")).add_argument(
        "--state", help="initial state CSV (overrides state_csv)"
    )
    common(sub.add_parser("instability", help="run the scaled standing-wave experiment"))
    vc = common(sub.add_parser("virial-check", help="check the virial identity on a trajectory"))
    vc.add_argument("--trajectory", help="trajectory CSV (overrides trajectory_csv)")
    vc.add_argument("--support-radius", dest="support_radius", type=float)
    g = sub.add_parser("g-scan", help="positivity scan of the scalar function g")
    g.add_argument("--beta", type=float, required=True)
    g.add_argument("--npts", type=int, default=999)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "g-scan":
            return cmd_g_scan(args)
        cfg = _load_config(args)
        if args.command == "ground-state":
            return cmd_ground_state(cfg)
        if args.command == "functionals":
            return cmd_functionals(cfg, args)
        if args.command == "evolve":
            return cmd_evolve(cfg, args)
        if args.command == "instability":
            return cmd_instability(cfg)
        if args.command == "virial-check":
            return cmd_virial_check(cfg, args)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except NumericalFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (NLKGError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    parser.error(f"unknown command {args.command}")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
