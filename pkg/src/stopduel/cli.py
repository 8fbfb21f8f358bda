"""Command-line front end.

Subcommands: value, boundaries, equilibrium, simulate, verify, solve.
Settings resolve flag > config file > built-in default; the config file holds
UTF-8 ``key=value`` lines with keys mu, sigma, r, K, p1, p2, x, seed, n_paths,
dt, t_max, mode.  Human output rounds to 6 significant digits; CSV and JSON
files carry full precision.  Exit codes: 0 success, 1 verification failure,
2 invalid configuration, 3 no equilibrium exists.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import verify as verify_mod
from .engine import SimConfig, estimate_value, sample_outcomes
from .equilibrium import NoEquilibriumError, build_profile
from .model import GbmRealOptionModel, eta, one_player_threshold
from .regions import boundary_b, boundary_c
from .stopping import (ConvergenceError, GridSpec, ValueOracle, gbm_spec,
                       solve_value_chain)

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_USAGE = 2
EXIT_NO_EQUILIBRIUM = 3

_SIM = SimConfig()
DEFAULTS = {
    "mu": 0.0, "sigma": 0.2, "r": 0.04, "K": 1.0,
    "p1": 0.15, "p2": 0.15, "x": 1.5,
    "seed": _SIM.seed, "n_paths": _SIM.n_paths, "dt": _SIM.dt,
    "t_max": _SIM.t_max, "mode": _SIM.mode,
}
_CASTS = {"seed": int, "n_paths": int, "mode": str}


def _parse_kv_file(path, allowed, casts):
    out = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            if key not in allowed:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = casts.get(key, float)(value.strip())
    return out


class _Settings:
    """Resolved configuration: flags first, then config file, then defaults."""

    def __init__(self, args):
        self._args = args
        self._cfg = (_parse_kv_file(args.config, DEFAULTS, _CASTS)
                     if getattr(args, "config", None) else {})

    def __getattr__(self, key):
        v = getattr(self._args, key, None)
        if v is None:
            v = self._cfg.get(key, DEFAULTS[key])
        return v

    def model(self) -> GbmRealOptionModel:
        return GbmRealOptionModel(self.mu, self.sigma, self.r, self.K)

    def oracle(self) -> ValueOracle:
        path = getattr(self._args, "oracle", None)
        if path:
            return ValueOracle.from_csv(path)
        return ValueOracle.closed_form(self.model())

    def sim_config(self, n_paths=None) -> SimConfig:
        return SimConfig(
            n_paths=int(n_paths if n_paths is not None else self.n_paths),
            seed=int(self.seed), dt=float(self.dt),
            t_max=float(self.t_max), mode=self.mode)


def _emit(text, out_path):
    if out_path:
        with open(out_path, "w", newline="") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, default=float) + "\n"


def _cmd_value(args):
    s = _Settings(args)
    model = s.model()
    x = s.x
    for label, v in (("eta", eta(model)),
                     ("B", one_player_threshold(model)),
                     (f"V({x:g})", ValueOracle.closed_form(model).value(x)),
                     (f"g({x:g})", ValueOracle.closed_form(model).payoff(x))):
        print(f"{label:<8} = {v:.6g}")
    return EXIT_OK


def _cmd_boundaries(args):
    s = _Settings(args)
    oracle = s.oracle()
    xmin = args.xmin if args.xmin is not None else s.K
    xmax = args.xmax if args.xmax is not None else oracle.stop_threshold
    if not xmin < xmax:
        raise ValueError("need xmin < xmax")
    grid = np.linspace(xmin, xmax, args.n)
    b = np.asarray(boundary_b(oracle, grid), dtype=float)
    c = np.asarray(boundary_c(oracle, grid), dtype=float)
    rows = ["x,b,c"]
    rows += ["%.17g,%.17g,%.17g" % t for t in zip(grid, b, c)]
    _emit("\n".join(rows) + "\n", args.out)
    return EXIT_OK


def _cmd_equilibrium(args):
    s = _Settings(args)
    profile = build_profile(s.oracle(), s.p1, s.p2, s.x)
    _emit(_json_text(profile.to_dict()), args.out)
    return EXIT_OK


def _cmd_simulate(args):
    s = _Settings(args)
    profile = build_profile(s.oracle(), s.p1, s.p2, s.x)
    config = s.sim_config()
    if args.outcomes:
        sample_outcomes(profile, config).to_csv(args.outcomes)
    est = estimate_value(profile, args.player, config)
    _emit(_json_text(est.to_dict()), args.out)
    return EXIT_OK


def _cmd_verify(args):
    s = _Settings(args)
    n_paths = args.n_paths
    if n_paths is None:
        n_paths = s._cfg.get("n_paths", 1000)
    reports = verify_mod.run_suite(
        s.oracle(), s.p1, s.p2, s.x,
        suite=args.suite, seed=int(s.seed), n_paths=int(n_paths))
    print(verify_mod.render_table(reports))
    if args.out:
        _emit(verify_mod.reports_to_json(reports), args.out)
    failed = [r.name for r in reports if not r.passed]
    if failed:
        print("FAILED: " + ", ".join(failed))
        return EXIT_VERIFY_FAIL
    print(f"all {len(reports)} checks passed")
    return EXIT_OK


def _cmd_solve(args):
    keys = {"mu", "sigma", "r", "K", "x_min", "x_max", "n"}
    raw = _parse_kv_file(args.spec, keys, {"n": int})
    model = GbmRealOptionModel(
        raw.get("mu", DEFAULTS["mu"]), raw.get("sigma", DEFAULTS["sigma"]),
        raw.get("r", DEFAULTS["r"]), raw.get("K", DEFAULTS["K"]))
    spec_kw = {}
    if "x_min" in raw:
        spec_kw["x_min"] = raw["x_min"]
    if "x_max" in raw:
        spec_kw["x_max"] = raw["x_max"]
    diff = gbm_spec(model, **spec_kw)
    disc = GridSpec(n=raw["n"]) if "n" in raw else GridSpec()
    oracle = solve_value_chain(
        diff, lambda x: np.maximum(x - model.strike, 0.0), disc)
    oracle.to_csv(args.out)
    print(f"wrote {args.out}: {len(oracle.x)} nodes, "
          f"stop threshold {oracle.stop_threshold:.6g}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value settings file")
    for flag in ("mu", "sigma", "r", "K"):
        common.add_argument(f"--{flag}", type=float)

    parser = argparse.ArgumentParser(
        prog="stopduel",
        description="equilibria of a stopping duel with uncertain competition")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("value", parents=[common],
                       help="one-player closed forms at x")
    p.add_argument("--x", type=float)
    p.set_defaults(func=_cmd_value)

    p = sub.add_parser("boundaries", parents=[common],
                       help="belief boundaries b, c as CSV")
    p.add_argument("--xmin", type=float)
    p.add_argument("--xmax", type=float)
    p.add_argument("--n", type=int, default=101)
    p.add_argument("--oracle", help="tabulated oracle CSV instead of closed form")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_boundaries)

    p = sub.add_parser("equilibrium", parents=[common],
                       help="equilibrium profile as JSON")
    p.add_argument("--p1", type=float)
    p.add_argument("--p2", type=float)
    p.add_argument("--x", type=float)
    p.add_argument("--oracle", help="tabulated oracle CSV instead of closed form")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_equilibrium)

    p = sub.add_parser("simulate", parents=[common],
                       help="Monte Carlo value estimate as JSON")
    p.add_argument("--p1", type=float)
    p.add_argument("--p2", type=float)
    p.add_argument("--x", type=float)
    p.add_argument("--n", type=int, dest="n_paths")
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=["semi-analytic", "path"])
    p.add_argument("--dt", type=float)
    p.add_argument("--t-max", type=float, dest="t_max")
    p.add_argument("--player", type=int, choices=[1, 2], default=1)
    p.add_argument("--outcomes", help="also write per-path outcome CSV here")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("verify", parents=[common],
                       help="equilibrium verification battery")
    p.add_argument("--p1", type=float)
    p.add_argument("--p2", type=float)
    p.add_argument("--x", type=float)
    p.add_argument("--suite", choices=["all", "br", "indiff", "ids", "safety"],
                   default="all")
    p.add_argument("--seed", type=int)
    p.add_argument("--n-paths", type=int, dest="n_paths",
                   help="identity-check path count (default 1000)")
    p.add_argument("--out", help="write the JSON report array here")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("solve", help="tabulate V by value iteration")
    p.add_argument("--spec", required=True,
                   help="key=value file: mu, sigma, r, K, x_min, x_max, n")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_solve)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NoEquilibriumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_EQUILIBRIUM
    except (ValueError, OSError, ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
