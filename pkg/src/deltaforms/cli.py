"""Command-line front-end.

Subcommands: charge, residual, stokes, invariance, scenario, list.
Exit codes: 0 when every check passes, 1 when any check fails, 2 on
usage or configuration errors.  All randomness (the test-chain family) is
seeded, and the seed is printed in every report header; identical
invocations with identical seeds produce byte-identical CSV output.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .chains import mapped_chain, total_charge
from .conservation import (
    current_residual,
    mixed_residual,
    standard_test_chains,
    stokes_check,
)
from .errors import ConfigError, DeltaFormsError
from .expr import parse
from .exterior import SmoothMap
from .scenarios import (
    DEFAULT_SEED,
    CheckRow,
    Report,
    Scenario,
    _coordinate_law,
    build_scenario,
    builtin_names,
    builtin_scenario,
    load_config,
    run_scenario,
)
from .singular import pullback_singular


def _coordinate_law_value(scenario: Scenario) -> float | None:
    if scenario.densities is None:
        return None
    return _coordinate_law(scenario)

# orientation-preserving polynomial diffeomorphisms for invariance checks
_NAMED_MAPS = {
    "shear": ("t", "x + 0.3*z", "y", "z"),
    "stretch": ("t", "1.25*x", "0.8*y", "z + 0.1*t"),
    "warp": ("t + 0.05*x", "x", "y + 0.1*x^2", "z - 0.08*y"),
}


def _named_map(name: str) -> SmoothMap:
    if name not in _NAMED_MAPS:
        raise ConfigError(f"--map: unknown map {name!r}; choose from {', '.join(_NAMED_MAPS)}")
    return SmoothMap(tuple(parse(c) for c in _NAMED_MAPS[name]))


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="deltaforms",
        description="Distributional currents on spacetime: charges, residuals, Stokes checks.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        g = p.add_mutually_exclusive_group(required=config_required)
        g.add_argument("--config", help="scenario config file (TOML)")
        g.add_argument("--scenario", help="built-in scenario name")
        p.add_argument("--quadrature-order", type=int, default=None, metavar="N")
        p.add_argument("--epsilon", type=float, default=None, metavar="E")
        p.add_argument("--csv-out", default=None, metavar="PATH")
        p.add_argument("--tol", type=float, default=None, metavar="T")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED, metavar="S")

    common(sub.add_parser("charge", help="total charges over the scenario's chains"))
    common(sub.add_parser("residual", help="conservation residuals"))
    common(sub.add_parser("stokes", help="both sides of the integral conservation law"))
    p_inv = sub.add_parser("invariance", help="charges before/after a diffeomorphism")
    common(p_inv)
    p_inv.add_argument("--map", default="shear", metavar="M",
                       help=f"one of: {', '.join(_NAMED_MAPS)}")

    p_scen = sub.add_parser("scenario", help="run a named or configured scenario")
    scen_sub = p_scen.add_subparsers(dest="scenario_command", required=True)
    p_run = scen_sub.add_parser("run", help="run a scenario end to end")
    p_run.add_argument("name", nargs="?", default=None)
    common(p_run, config_required=False)
    scen_sub.add_parser("list", help="list built-in scenarios")

    sub.add_parser("list", help="list built-in scenarios")
    return ap


def _load_scenario(args) -> Scenario:
    if getattr(args, "config", None):
        scenario = build_scenario(load_config(args.config))
    elif getattr(args, "scenario", None):
        scenario = builtin_scenario(args.scenario)
    elif getattr(args, "name", None):
        scenario = builtin_scenario(args.name)
    else:
        raise ConfigError("a scenario is required: pass NAME, --scenario or --config")
    overrides = {}
    if args.quadrature_order is not None:
        overrides["order"] = args.quadrature_order
    if args.epsilon is not None:
        overrides["epsilon"] = args.epsilon
    if overrides:
        quad = dataclasses.replace(scenario.quadrature, **overrides)
        scenario = dataclasses.replace(scenario, quadrature=quad)
    return scenario


def _emit(report: Report, args) -> int:
    report.print_table()
    if args.csv_out:
        with open(args.csv_out, "w", encoding="utf-8", newline="") as fh:
            report.to_csv(fh)
    return 0 if report.passed else 1


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help, 2 for usage errors
        return 0 if not exc.code else 2

    try:
        if args.command == "list" or (
            args.command == "scenario" and args.scenario_command == "list"
        ):
            for name in builtin_names():
                print(name)
            return 0

        if args.command == "scenario":
            scenario = _load_scenario(args)
            print(f"# deltaforms scenario {scenario.name} seed={args.seed}")
            report = run_scenario(scenario, seed=args.seed)
            return _emit(report, args)

        scenario = _load_scenario(args)
        spec = scenario.quadrature
        print(f"# deltaforms {args.command} {scenario.name} seed={args.seed}")

        if args.command == "charge":
            tol = args.tol if args.tol is not None else 1e-6
            rows = []
            for label, chain, expected in scenario.charge_chains:
                q = total_charge(scenario.current, chain, spec)
                ref = q if expected is None else expected
                ok = True if expected is None else abs(q - expected) < tol
                rows.append(CheckRow(scenario.name, label, q, ref, tol,
                                     "pass" if ok else "fail"))
            report = Report(scenario.name, args.seed, rows)
            return _emit(report, args)

        if args.command == "residual":
            # judges conservation outright: exit 1 whenever the current fails it
            family = standard_test_chains(scenario.box4, args.seed)
            rows = []
            cov_tol = args.tol if args.tol is not None else 1e-6
            if scenario.bulk is not None:
                res = mixed_residual(scenario.current, scenario.bulk, [scenario.box4], spec)
                rows.append(CheckRow(scenario.name, "mixed-residual", res, 0.0,
                                     1e-5, "pass" if res < 1e-5 else "fail"))
            else:
                res = current_residual(scenario.current, family, spec)
                rows.append(CheckRow(scenario.name, "covariant-residual", res, 0.0,
                                     cov_tol, "pass" if res < cov_tol else "fail"))
            law = _coordinate_law_value(scenario)
            if law is not None:
                rows.append(CheckRow(scenario.name, "coordinate-law", law, 0.0,
                                     1e-10, "pass" if law < 1e-10 else "fail"))
            report = Report(scenario.name, args.seed, rows)
            return _emit(report, args)

        if args.command == "stokes":
            lhs, rhs, gap = stokes_check(scenario.current, scenario.box4, spec)
            tol = args.tol if args.tol is not None else 1e-5
            print(f"  volume integral of dJ : {lhs: .12e}")
            print(f"  boundary integral of J: {rhs: .12e}")
            rows = [CheckRow(scenario.name, "stokes-gap", gap, 0.0, tol,
                             "pass" if gap < tol else "fail")]
            report = Report(scenario.name, args.seed, rows)
            return _emit(report, args)

        if args.command == "invariance":
            m = _named_map(args.map)
            tol = args.tol if args.tol is not None else 1e-5
            pulled = pullback_singular(scenario.current, m)
            rows = []
            for label, chain, _ in scenario.charge_chains:
                q_pre = total_charge(pulled, chain, spec)
                q_post = total_charge(scenario.current, mapped_chain(m, chain), spec)
                drift = abs(q_pre - q_post)
                print(f"  {label}: pullback route {q_pre: .10e}  mapped-chain route {q_post: .10e}")
                rows.append(CheckRow(scenario.name, f"invariance:{label}", q_pre,
                                     q_post, tol, "pass" if drift < tol else "fail"))
            report = Report(scenario.name, args.seed, rows)
            return _emit(report, args)

        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DeltaFormsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:  # console-script hook
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
