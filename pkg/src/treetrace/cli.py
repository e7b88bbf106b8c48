"""Command line: ``treetrace verify | export-ball | compute-trace``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .algebra import GGroupRingElement
from .errors import BudgetExceeded, InputError, TreeTraceError
from .runner import EXIT_BUDGET, EXIT_COUNTEREXAMPLE, EXIT_INPUT, EXIT_OK, SUITES, run
from .scenario import override_run, parse_scenario, parse_word
from .transfer import verify_transfer
from .tree import BassSerreTree, export_ball_dot, export_ball_text


def _suite_list(text: str) -> list[str]:
    names = [s.strip() for s in text.split(",") if s.strip()]
    bad = [s for s in names if s not in SUITES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown suite(s) {', '.join(bad)}; choose from {', '.join(SUITES)}")
    return names


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="treetrace", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the seeded verification suites on a scenario")
    v.add_argument("--scenario", required=True, type=Path)
    v.add_argument("--suites", type=_suite_list, default=None, help=f"comma list from {','.join(SUITES)}")
    v.add_argument("--radius", type=int)
    v.add_argument("--trials", type=int, help="override every suite's trial count")
    v.add_argument("--seed", type=int)
    v.add_argument("--basepoint", help="word g; the tree basepoint becomes g times the identity vertex")
    v.add_argument("--report", type=Path, help="write the JSON report here")
    v.add_argument("--format", choices=("json", "text"), default="text")
    v.add_argument("--no-timing", action="store_true", help="omit wall-clock fields for byte-stable output")

    e = sub.add_parser("export-ball", help="print a ball of the Bass-Serre tree")
    e.add_argument("--scenario", required=True, type=Path)
    e.add_argument("--radius", type=int, required=True)
    e.add_argument("--format", choices=("dot", "text"), default="text")
    e.add_argument("--basepoint")

    c = sub.add_parser("compute-trace", help="transfer report for one group element")
    c.add_argument("--scenario", required=True, type=Path)
    c.add_argument("--element", required=True, help='whitespace-separated letters, e.g. "a t b^-1"')
    c.add_argument("--basepoint")
    c.add_argument("--no-timing", action="store_true")
    return p


def _tree(scenario, basepoint: Optional[str]) -> BassSerreTree:
    if scenario.spec is None:
        raise InputError("this scenario has no graph of groups")
    base = scenario.spec.normalize(parse_word(scenario, basepoint)) if basepoint else None
    return BassSerreTree(scenario.spec, base)


def _verify(args) -> int:
    scenario = parse_scenario(args.scenario)
    changes = {"seed": args.seed, "radius": args.radius}
    if args.trials is not None:
        for key in ("trials", "jv_samples", "poly_trials", "cyclicity_trials", "index_pairs", "norm_trials"):
            changes[key] = args.trials
    for key in ("radius", "seed", "trials"):
        val = getattr(args, key)
        if val is not None and val < 0:
            raise InputError(f"--{key} must be non-negative")
    scenario = override_run(scenario, **changes)
    base = None
    if args.basepoint:
        base = scenario.spec.normalize(parse_word(scenario, args.basepoint)) if scenario.spec else None
    report = run(scenario, args.suites, basepoint=base)
    timing = not args.no_timing
    if args.report:
        args.report.write_text(report.dumps(timing), encoding="utf-8")
    sys.stdout.write(report.dumps(timing) if args.format == "json" else report.to_text(timing))
    return report.exit_code


def _export(args) -> int:
    if args.radius < 0:
        raise InputError("--radius must be non-negative")
    scenario = parse_scenario(args.scenario)
    tree = _tree(scenario, args.basepoint)
    out = export_ball_dot(tree, args.radius) if args.format == "dot" else export_ball_text(tree, args.radius)
    sys.stdout.write(out)
    return EXIT_OK


def _compute_trace(args) -> int:
    scenario = parse_scenario(args.scenario)
    tree = _tree(scenario, args.basepoint)
    g = scenario.spec.normalize(parse_word(scenario, args.element))
    rep = verify_transfer(tree, GGroupRingElement.of(scenario.spec, g))
    sys.stdout.write(json.dumps(rep.to_json(timing=not args.no_timing), sort_keys=True) + "\n")
    return EXIT_OK if rep.equal else EXIT_COUNTEREXAMPLE


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    handler = {"verify": _verify, "export-ball": _export, "compute-trace": _compute_trace}[args.command]
    try:
        return handler(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InputError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except TreeTraceError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COUNTEREXAMPLE


if __name__ == "__main__":
    sys.exit(main())
