"""Command-line interface.

Subcommands: eval, threshold, adopt, repair, simulate, sweep, figure, check.
Exit codes: 0 success; 1 usage or configuration error; 2 check failure;
3 a required crossing does not exist (no-crossing / saturation sentinel).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import adoption, checks, figures, repair as repair_mod, thresholds, workbench
from .errors import AlignsurfError
from .scenario import Scenario, load_scenario
from .workbench import SweepSpec, parse_grid, write_table

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CHECK_FAILED = 2
EXIT_NO_CROSSING = 3


class _Parser(argparse.ArgumentParser):
    # Usage problems must exit 1, not argparse's default 2.
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _fmt(value: float) -> str:
    return format(value, ".12g")


def _print_kv(pairs) -> None:
    for key, value in pairs:
        print(f"{key} = {_fmt(value) if isinstance(value, float) else value}")


def _load(args) -> Scenario:
    if args.scenario is None:
        raise AlignsurfError("--scenario PATH is required for this command")
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = dataclasses.replace(scenario, seed=args.seed)
    return scenario


def _cmd_eval(args) -> int:
    sc = _load(args)
    names = [
        "mu", "pwf", "F0", "F", "F_max", "h", "dF_ds", "S", "G", "C",
        "tau", "margin", "exploitable",
    ]
    values = {name: workbench.OUTPUTS[name][1](sc) for name in names}
    if args.json:
        print(json.dumps({"scenario": sc.name, "x": sc.architecture.x,
                          "s": sc.architecture.s, **values}, indent=2))
    else:
        print(f"scenario {sc.name}: x = {_fmt(sc.architecture.x)}, "
              f"s = {_fmt(sc.architecture.s)}")
        _print_kv(values.items())
    return EXIT_OK


def _cmd_threshold(args) -> int:
    sc = _load(args)
    ip = sc.intensity
    quantity = args.quantity
    if quantity == "cutoff":
        _print_kv([("tau", thresholds.intensity_cutoff(sc.target, sc.variant.k))])
        return EXIT_OK
    if quantity == "x-crit":
        value = thresholds.x_crit(sc.target, ip, sc.architecture.s)
        _print_kv([("x_crit", value)])
        return EXIT_OK
    if quantity == "x-crit-binding":
        value = thresholds.x_crit_binding(sc.target, ip, sc.econ, sc.variant)
        if value is None:
            print("no crossing: the binding path stays below the concern level")
            return EXIT_NO_CROSSING
        _print_kv([("x_crit_binding", value)])
        return EXIT_OK
    if quantity == "s-flip":
        value = thresholds.s_flip(sc.architecture.x, ip, sc.safeguards, sc.overt)
        if value is None:
            print("no flip: the codification margin does not change sign on [0,1]")
            return EXIT_NO_CROSSING
        _print_kv([("s_flip", value)])
        return EXIT_OK
    if quantity == "lambda-crit":
        value = thresholds.lambda_crit(sc.target, sc)
        if value is None:
            print("no crossing: zeta stays on one side of p_bar on the bracket")
            return EXIT_NO_CROSSING
        _print_kv([("lambda_crit", value)])
        return EXIT_OK
    # s-std-gap
    if sc.inherited is None:
        raise AlignsurfError("s-std-gap needs a [repair.inherited] section")
    if thresholds.baseline_saturated(ip, sc.target):
        print("saturated baseline: mu0 alone meets the cutoff; no amount of "
              "unwinding insider-facing standardization can return below p_bar")
        return EXIT_NO_CROSSING
    crit, gap = thresholds.s_std_crit_and_gap(
        sc.inherited.x_H, ip, sc.target, sc.inherited.s_std_H
    )
    _print_kv([("s_std_crit", crit), ("g_H", gap)])
    return EXIT_OK


def _cmd_adopt(args) -> int:
    sc = _load(args)
    result = adoption.optimize_scale(sc)
    zeta = adoption.binding_pwf(sc, result.x_star)
    _print_kv([
        ("x_star", result.x_star),
        ("u_star", result.u_star),
        ("zeta", zeta),
        ("unimodal", result.diagnostics["unimodal"]),
        ("boundary", result.diagnostics["boundary"]),
    ])
    if args.scan is not None:
        grid = parse_grid(args.scan)
        scan = adoption.scale_monotonicity_scan(sc, grid)
        table = workbench.Table(
            meta={"scenario": sc.name, "hash": sc.content_hash,
                  "concave": scan.concave},
            header=["lambda", "x_star", "zeta"],
            rows=[tuple(row) for row in scan.rows],
        )
        path = write_table(Path(args.out) / f"{sc.name}_adopt_scan.csv", table)
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_repair(args) -> int:
    sc = _load(args)
    if sc.repair is None or sc.inherited is None:
        raise AlignsurfError("repair needs [repair] and [repair.inherited] sections")
    report = repair_mod.optimize_repair(sc.inherited, sc, sc.repair)
    _print_kv([
        ("u_star", report.u_star),
        ("s_std_post", report.s_std_post),
        ("g_H", report.g_H),
        ("pwf_post", report.pwf_post),
        ("positive_marginal_at_zero", report.hypothesis_flags.positive_marginal_at_zero),
        ("cost_dominates_below_threshold",
         report.hypothesis_flags.cost_dominates_below_threshold),
        ("above_threshold_inherited", report.hypothesis_flags.above_threshold_inherited),
        ("conclusion", report.conclusion),
    ])
    return EXIT_OK


def _cmd_simulate(args) -> int:
    sc = _load(args)
    result = workbench.run_simulation(sc, jobs=args.jobs, replications=args.replications)
    _print_kv([
        ("estimate", result.estimate),
        ("std_error", result.std_error),
        ("replications", result.replications),
        ("closed_form", result.closed_form),
        ("z_score", result.z_score if result.z_score is not None else "none"),
    ])
    return EXIT_OK


def _cmd_sweep(args) -> int:
    sc = _load(args)
    sweep = SweepSpec(
        parameter_path=args.param,
        grid=parse_grid(args.grid),
        outputs=tuple(args.outputs.split(",")),
    )
    table = workbench.run_sweep(sc, sweep, jobs=args.jobs)
    safe_param = args.param.replace(".", "_")
    path = write_table(Path(args.out) / f"{sc.name}_sweep_{safe_param}.csv", table)
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_figure(args) -> int:
    sc = _load(args)
    tables = figures.emit_figure_data(sc, args.figure_id)
    for stem, table in tables.items():
        path = write_table(Path(args.out) / f"{sc.name}_{stem}.csv", table)
        note = table.meta.get("note", "ok")
        suffix = "" if note == "ok" else f"  (note: {note})"
        print(f"wrote {path}{suffix}")
    return EXIT_OK


def _cmd_check(args) -> int:
    sc = _load(args)
    report = checks.run_checks(sc, suite=args.suite, jobs=args.jobs)
    for result in report.results:
        status = "PASS" if result.passed else "FAIL"
        print(f"[{status}] {result.name}: measured={_fmt(result.measured)} "
              f"tolerance={_fmt(result.tolerance)} ({result.detail})")
    out_path = Path(args.out) / f"{sc.name}_check_{args.suite}.json"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    print(f"wrote {out_path}")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="alignsurf",
        description="Compliance-architecture fragility toolkit: evaluate the "
        "two-channel failure model, solve its critical boundaries, optimize "
        "adoption and repair, and verify every analytic claim numerically.",
    )
    parser.add_argument("--scenario", help="path to a scenario TOML file")
    parser.add_argument("--out", default="out", help="output directory for CSV/JSON")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the scenario seed")
    parser.add_argument("--jobs", type=int, default=1,
                        help="worker count; never changes results")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate the model at the architecture point")
    p.add_argument("--json", action="store_true", help="emit JSON instead of text")
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("threshold", help="solve a critical boundary")
    p.add_argument(
        "quantity",
        choices=["cutoff", "x-crit", "x-crit-binding", "s-flip", "lambda-crit",
                 "s-std-gap"],
    )
    p.set_defaults(fn=_cmd_threshold)

    p = sub.add_parser("adopt", help="optimize binding-path adoption")
    p.add_argument("--scan", default=None,
                   help="also scan pressures over a grid (lo:hi:n or list)")
    p.set_defaults(fn=_cmd_adopt)

    p = sub.add_parser("repair", help="solve the post-crisis unwinding problem")
    p.set_defaults(fn=_cmd_repair)

    p = sub.add_parser("simulate", help="run the within-form microsimulation")
    p.add_argument("--replications", type=int, default=None)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("sweep", help="sweep one parameter, emit a CSV table")
    p.add_argument("--param", required=True, help="dotted parameter path")
    p.add_argument("--grid", required=True, help="lo:hi:n or comma-separated values")
    p.add_argument("--outputs", required=True, help="comma-separated output names")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("figure", help="emit a figure dataset as CSV files")
    p.add_argument("figure_id", choices=list(figures.FIGURE_IDS))
    p.set_defaults(fn=_cmd_figure)

    p = sub.add_parser("check", help="run verification suites")
    p.add_argument("--suite", default="all",
                   choices=list(checks.SUITES) + ["all"])
    p.set_defaults(fn=_cmd_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except AlignsurfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
