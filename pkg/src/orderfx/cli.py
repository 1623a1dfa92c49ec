"""Command-line front end.

Subcommands::

    orderfx figure <id>    run a built-in figure preset to CSV
    orderfx sweep          run a user-defined scenario from flags/config file
    orderfx theory <fn>    print closed-form quantities
    orderfx selftest       run the reduced invariant suite

Exit codes: 0 success, 1 usage error, 2 runtime failure.

A config file (``--config``) holds ``key=value`` lines with ``#`` comments;
keys are the long flag names without the leading dashes.  Precedence:
command-line flag > config file > ORDERFX_SEED (for the seed) > default.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import selftest as selftest_module
from . import theory
from .experiments import (
    Scenario,
    ScenarioVariant,
    builtin_scenarios,
    get_scenario,
    run_scenario,
    write_csv,
)
from .model import FDist, GDist, VarianceMode, gamma_star
from .predictors import PosteriorAssumption, PredictorSpec
from .risk import MSE_MAX, TOTAL_LOSS

ENV_SEED = "ORDERFX_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so we control exit codes."""

    def error(self, message: str):  # noqa: D102
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


_DIST_FLAGS = {"normal": FDist.NORMAL, "laplace": FDist.LAPLACE, "locexp": FDist.LOCEXP}
_MODE_FLAGS = {
    "known": VarianceMode.KNOWN,
    "unknown-u": VarianceMode.UNKNOWN_U,
    "unknown-both": VarianceMode.UNKNOWN_BOTH,
}

# sweep flags: (name, parser, default) -- the single source for CLI, config
# files, and the round-trip test.
SWEEP_OPTIONS: dict[str, tuple] = {
    "m": (int, 100),
    "n": (int, 1),
    "mu": (float, 0.0),
    "sigma-u2": (float, 1.0),
    "sigma-e2": (float, None),
    "gamma-star": (float, None),
    "gamma-star-grid": (str, None),  # lo:hi:step
    "f": (str, "normal"),
    "g": (str, "normal"),
    "variance-mode": (str, "known"),
    "predictors": (str, "direct,linear@star,linear@sqrt_star"),
    "posterior": (str, "match"),
    "draws-k": (int, 1000),
    "reps": (int, 1000),
    "seed": (int, None),
    "workers": (int, 1),
    "scale": (float, 1.0),
    "out": (str, None),
    "config": (str, None),
}

FIGURE_OPTIONS: dict[str, tuple] = {
    "reps": (int, None),
    "draws-k": (int, None),
    "seed": (int, None),
    "workers": (int, 1),
    "scale": (float, 1.0),
    "out": (str, None),
    "config": (str, None),
}


def _add_options(parser: argparse.ArgumentParser, options: dict[str, tuple]) -> None:
    for name, (typ, _default) in options.items():
        parser.add_argument(f"--{name}", type=typ, default=None, dest=name.replace("-", "_"))


def _read_config(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = value
    return values


def _merge_options(args: argparse.Namespace, options: dict[str, tuple]) -> dict:
    """flag > config file > env (seed only) > declared default."""
    merged: dict = {}
    config_values: dict[str, str] = {}
    config_path = getattr(args, "config", None)
    if config_path:
        config_values = _read_config(config_path)
        unknown = set(config_values) - set(options)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for name, (typ, default) in options.items():
        attr = name.replace("-", "_")
        value = getattr(args, attr, None)
        if value is None and name in config_values:
            value = typ(config_values[name])
        if value is None and name == "seed" and os.environ.get(ENV_SEED):
            value = int(os.environ[ENV_SEED])
        if value is None:
            value = default
        merged[attr] = value
    return merged


def _parse_grid(text: str) -> tuple[float, ...]:
    try:
        lo, hi, step = (float(part) for part in text.split(":"))
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}, expected lo:hi:step") from exc
    if step <= 0 or hi < lo:
        raise UsageError(f"bad grid {text!r}")
    n = int(round((hi - lo) / step))
    return tuple(round(lo + i * step, 10) for i in range(n + 1))


def _print_search_lines(rows) -> None:
    seen = set()
    for row in rows:
        if row.predictor == "linear@opt" and row.gamma_used is not None:
            key = (row.scenario, row.m, row.f_dist, row.g_dist, row.gamma_star)
            if key not in seen:
                seen.add(key)
                print(
                    f"search: scenario={row.scenario} m={row.m} f={row.f_dist} "
                    f"gamma_star={row.gamma_star:g} gamma_opt={row.gamma_used:.3f}"
                )


def _cmd_figure(args: argparse.Namespace) -> int:
    opts = _merge_options(args, FIGURE_OPTIONS)
    try:
        scenario = get_scenario(args.id)
    except KeyError as exc:
        raise UsageError(str(exc)) from None
    if opts["seed"] is not None:
        scenario = _replace(scenario, master_seed=opts["seed"])
    if opts["reps"] is not None:
        scenario = _replace(scenario, replications=opts["reps"])
    if opts["scale"] != 1.0:
        scenario = scenario.scaled(opts["scale"])
    if opts["draws_k"] is not None:
        preds = tuple(
            _with_draws(p, opts["draws_k"]) for p in scenario.predictors
        )
        scenario = _replace(scenario, predictors=preds)
    rows = run_scenario(scenario, workers=opts["workers"])
    _print_search_lines(rows)
    out = opts["out"] or f"{scenario.id}.csv"
    write_csv(rows, out)
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def _replace(scenario: Scenario, **kw) -> Scenario:
    import dataclasses

    return dataclasses.replace(scenario, **kw)


def _with_draws(spec: PredictorSpec, draws_k: int) -> PredictorSpec:
    import dataclasses

    return dataclasses.replace(spec, draws_k=draws_k)


def _cmd_sweep(args: argparse.Namespace) -> int:
    opts = _merge_options(args, SWEEP_OPTIONS)
    if opts["f"] not in _DIST_FLAGS:
        raise UsageError(f"--f must be one of {sorted(_DIST_FLAGS)}")
    if opts["g"] not in ("normal", "locexp"):
        raise UsageError("--g must be normal or locexp")
    if opts["variance_mode"] not in _MODE_FLAGS:
        raise UsageError(f"--variance-mode must be one of {sorted(_MODE_FLAGS)}")

    if opts["gamma_star_grid"] is not None:
        grid = _parse_grid(opts["gamma_star_grid"])
    elif opts["gamma_star"] is not None:
        grid = (opts["gamma_star"],)
    elif opts["sigma_e2"] is not None:
        grid = (gamma_star(opts["sigma_u2"], opts["sigma_e2"], opts["n"]),)
    else:
        raise UsageError("need --gamma-star, --gamma-star-grid, or --sigma-e2")
    if opts["sigma_e2"] is not None and (
        opts["gamma_star"] is not None or opts["gamma_star_grid"] is not None
    ):
        raise UsageError("--sigma-e2 conflicts with --gamma-star/--gamma-star-grid")

    assumption = (
        PosteriorAssumption.FORCE_NORMAL
        if opts["posterior"] == "force-normal"
        else PosteriorAssumption.MATCH_TRUE
    )
    if opts["posterior"] not in ("match", "force-normal"):
        raise UsageError("--posterior must be match or force-normal")
    predictors = tuple(
        PredictorSpec.from_token(
            token, posterior_assumption=assumption, draws_k=opts["draws_k"]
        )
        for token in opts["predictors"].split(",")
        if token.strip()
    )
    if not predictors:
        raise UsageError("--predictors is empty")

    seed = opts["seed"] if opts["seed"] is not None else 0
    reps = max(2, int(round(opts["reps"] * opts["scale"])))
    scenario = Scenario(
        id="sweep",
        variants=(
            ScenarioVariant(
                m=opts["m"],
                n=opts["n"],
                f_dist=_DIST_FLAGS[opts["f"]],
                g_dist=GDist(opts["g"]),
                variance_mode=_MODE_FLAGS[opts["variance_mode"]],
            ),
        ),
        gamma_star_grid=grid,
        predictors=predictors,
        metrics=(TOTAL_LOSS, MSE_MAX),
        replications=reps,
        master_seed=seed,
        mu=opts["mu"],
        sigma_u2=opts["sigma_u2"],
    )
    rows = run_scenario(scenario, workers=opts["workers"])
    _print_search_lines(rows)
    if opts["out"]:
        write_csv(rows, opts["out"])
        print(f"wrote {len(rows)} rows to {opts['out']}")
    else:
        for row in rows:
            print(",".join(row.as_csv()))
    return 0


def _cmd_theory(args: argparse.Namespace) -> int:
    name = args.fn
    values = [float(v) for v in args.args]

    def need(k: int) -> None:
        if len(values) != k:
            raise UsageError(f"theory {name} takes {k} argument(s), got {len(values)}")

    if name == "c":
        need(0)
        print(f"{theory.pair_dominance_threshold():.6f}")
    elif name == "psi":
        need(1)
        print(f"{theory.psi(values[0]):.12f}")
    elif name == "rho":
        need(1)
        lo, hi = theory.psi_envelope(values[0])
        print(f"{lo:.12f} {hi:.12f}")
    elif name == "gamma-opt-m2":
        need(1)
        print(f"{theory.optimal_gamma_pair(values[0]):.6f}")
    elif name == "bracket":
        need(2)
        br = theory.optimal_gamma_bracket(int(values[0]), values[1])
        print(f"{br.low:.6f} {br.high:.6f}")
    elif name == "approx":
        need(2)
        print(f"{theory.optimal_gamma_approx(int(values[0]), values[1]):.6f}")
    elif name == "lower-gamma":
        need(2)
        print(f"{theory.dominance_gamma_lower(int(values[0]), values[1]):.6f}")
    elif name == "always-threshold":
        need(1)
        print(f"{theory.always_dominates_threshold(int(values[0])):.6f}")
    elif name == "star-threshold":
        need(1)
        print(f"{theory.star_dominates_threshold(int(values[0])):.6f}")
    else:
        raise UsageError(
            "unknown theory function; choose from: c, psi, rho, gamma-opt-m2, "
            "bracket, approx, lower-gamma, always-threshold, star-threshold"
        )
    return 0


def _cmd_selftest(args: argparse.Namespace) -> int:
    failures = selftest_module.run(verbose=True)
    return 0 if failures == 0 else 2


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="orderfx", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_fig = sub.add_parser("figure", help="run a built-in figure preset")
    ids = ", ".join(s.id for s in builtin_scenarios())
    p_fig.add_argument("id", help=f"preset id ({ids})")
    _add_options(p_fig, FIGURE_OPTIONS)
    p_fig.set_defaults(handler=_cmd_figure)

    p_sweep = sub.add_parser("sweep", help="run a user-defined scenario")
    _add_options(p_sweep, SWEEP_OPTIONS)
    p_sweep.set_defaults(handler=_cmd_sweep)

    p_theory = sub.add_parser("theory", help="print closed-form values")
    p_theory.add_argument("fn")
    p_theory.add_argument("args", nargs="*")
    p_theory.set_defaults(handler=_cmd_theory)

    p_self = sub.add_parser("selftest", help="run the reduced invariant suite")
    p_self.set_defaults(handler=_cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (KeyError, ValueError, OSError) as exc:
        print(f"orderfx: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
