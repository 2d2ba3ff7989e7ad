"""Command-line entry point: ``dgla-deform run|validate|selftest``."""

from __future__ import annotations

import argparse
import json
import sys

from . import selftest
from .errors import (BadParams, BadWindow, CocycleError, CoverMismatch, DeformError, HypothesisViolated, KTooLarge,
                     ParseError, ShapeMismatch, UnknownCheck)
from .scenario import render_text, run_scenario, validate_scenario

EXIT_OK, EXIT_INPUT, EXIT_HYPOTHESIS, EXIT_CHECK = 0, 1, 2, 3
INPUT_ERRORS = (ParseError, UnknownCheck, BadWindow, BadParams, CocycleError, CoverMismatch, ShapeMismatch, KTooLarge)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dgla-deform", description="Exact deformation-theory checks on scenario files.")
    sub = p.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="run the checks of a scenario")
    r.add_argument("scenario")
    r.add_argument("--window", type=int, default=None, help="override the scenario window D")
    r.add_argument("--format", choices=["json", "text"], default="json")
    v = sub.add_parser("validate", help="parse a scenario and resolve its references")
    v.add_argument("scenario")
    s = sub.add_parser("selftest", help="run the built-in invariant suites")
    s.add_argument("--seed", type=int, default=0)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.cmd == "selftest":
        return EXIT_OK if selftest.run(args.seed) else EXIT_CHECK
    if args.cmd == "validate":
        diags = validate_scenario(args.scenario)
        for d in diags:
            print(d, file=sys.stderr)
        if not diags:
            print("ok")
        return EXIT_INPUT if diags else EXIT_OK
    try:
        report = run_scenario(args.scenario, args.window)
    except INPUT_ERRORS as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INPUT
    except HypothesisViolated as e:
        print(f"HypothesisViolated: {e}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except DeformError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_CHECK
    if args.format == "json":
        print(json.dumps(report, indent=2, ensure_ascii=False))
    else:
        print(render_text(report))
    return EXIT_OK if report["verdict"] == "pass" else EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
