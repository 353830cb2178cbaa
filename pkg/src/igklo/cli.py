"""Command-line front end.

Commands: validate, check, lemmas, theta.  Exit codes: 0 all pass,
1 at least one identity failure, 2 usage or input error.  JSON output is
the machine contract; text is a human summary.  Timings are zeroed unless
--timing is given so identical invocations stay byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys

from .cartan import InstanceError, load_instance_file, validate
from .gklo import GKLO
from .verifier import (DEFAULT_WINDOW, LEMMAS, RELATIONS, Engine,
                       run_lemmas, run_relations)

TAMPER_KEYS = ("rho", "rhoPrime", "tauSq", "gamma", "sym")


def _parser():
    p = argparse.ArgumentParser(prog="igklo",
                                description="exact verifier for the shifted-pair difference-operator construction")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, window=True):
        sp.add_argument("instance", help="instance JSON file")
        sp.add_argument("--format", choices=("text", "json"), default="text")
        sp.add_argument("--no-validate", action="store_true",
                        help="skip the coweight identity check on load")
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--timing", action="store_true",
                        help="emit real elapsed_ms (breaks byte-identical output)")
        sp.add_argument("--tamper", action="append", default=[],
                        metavar="NAME=VALUE",
                        help="perturb a named constant (negative-control hook; "
                             "output no longer certifies anything)")
        if window:
            sp.add_argument("--window", type=int, default=None)

    sp = sub.add_parser("validate", help="validate an instance document")
    sp.add_argument("instance")
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.add_argument("--no-validate", action="store_true")

    sp = sub.add_parser("check", help="run relation suites")
    common(sp)
    sp.add_argument("--relations", default="all",
                    help=f"comma list from {','.join(RELATIONS)} or 'all'")

    sp = sub.add_parser("lemmas", help="run lemma checkers")
    common(sp)
    sp.add_argument("--which", default="all",
                    help=f"comma list from {','.join(LEMMAS)} or 'all'")

    sp = sub.add_parser("theta", help="dump a mode table")
    common(sp, window=False)
    sp.add_argument("--vertex", required=True)
    sp.add_argument("--lo", type=int, required=True)
    sp.add_argument("--hi", type=int, required=True)
    sp.add_argument("--flavor", choices=("acute", "plain"), default="acute")
    return p


def _parse_tamper(specs) -> dict:
    out = {}
    for spec in specs:
        if "=" not in spec:
            raise InstanceError(f"bad tamper spec {spec!r} (want NAME=VALUE)")
        name, _, value = spec.partition("=")
        if name not in TAMPER_KEYS:
            raise InstanceError(f"unknown tamper target {name!r}")
        if name == "sym":
            if value != "avg":
                raise InstanceError("sym tamper supports only 'avg'")
            out[name] = value
        else:
            try:
                out[name] = int(value)
            except ValueError as e:
                raise InstanceError(f"tamper value for {name!r} must be an integer") from e
    return out


def _emit_reports(reports, fmt, timing, out):
    fail = False
    for rep in reports:
        if not timing:
            rep.elapsed_ms = 0
        if rep.status == "fail":
            fail = True
        if fmt == "json":
            out.write(json.dumps(rep.to_json_obj(), sort_keys=True) + "\n")
        else:
            mark = {"pass": "ok", "fail": "FAIL", "skipped": "skip"}[rep.status]
            line = f"[{mark:>4}] {rep.identity} (window {rep.window})"
            if rep.status == "fail":
                e, r = rep.failures[0]
                line += f"  first failure at {list(e)}: {r[:160]}"
            out.write(line + "\n")
    return 1 if fail else 0


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    out = sys.stdout
    try:
        strict = not getattr(args, "no_validate", False)
        inst = load_instance_file(args.instance, strict=strict)
    except (OSError, InstanceError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    if args.command == "validate":
        report = validate(inst, strict=strict)
        if args.format == "json":
            out.write(json.dumps({"errors": list(report.errors),
                                  "warnings": list(report.warnings)},
                                 sort_keys=True) + "\n")
        else:
            for msg in report.errors:
                out.write(f"error: {msg}\n")
            for msg in report.warnings:
                out.write(f"warning: {msg}\n")
            if report.ok and not report.warnings:
                out.write("ok\n")
        return 0 if report.ok else 1

    try:
        tamper = _parse_tamper(args.tamper)
    except InstanceError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if tamper:
        print("warning: tampered constants; results do not certify anything",
              file=sys.stderr)
    gk = GKLO(inst, tamper=tamper)
    engine = Engine(gk)

    if args.command == "theta":
        if args.lo > args.hi:
            print("error: empty mode range", file=sys.stderr)
            return 2
        if args.vertex not in inst.vertices:
            print(f"error: unknown vertex {args.vertex!r}", file=sys.stderr)
            return 2
        table = gk.theta_modes(args.vertex, args.lo, args.hi, args.flavor)
        if args.format == "json":
            out.write(json.dumps(table.dump(), sort_keys=True) + "\n")
        else:
            for r in range(args.lo, args.hi + 1):
                out.write(f"mode {r}: {table.modes[r].render()}\n")
        return 0

    if args.command == "check":
        if args.relations == "all":
            rels = list(RELATIONS)
        else:
            rels = [r for r in args.relations.split(",") if r]
            bad = [r for r in rels if r not in RELATIONS]
            if bad:
                print(f"error: unknown relations {bad}", file=sys.stderr)
                return 2
        if args.window is not None and args.window < 1:
            print("error: window must be >= 1", file=sys.stderr)
            return 2
        reports = run_relations(engine, rels, window=args.window, jobs=args.jobs)
        return _emit_reports(reports, args.format, args.timing, out)

    if args.command == "lemmas":
        if args.which == "all":
            which = list(LEMMAS)
        else:
            which = [w for w in args.which.split(",") if w]
            bad = [w for w in which if w not in LEMMAS]
            if bad:
                print(f"error: unknown lemma ids {bad}", file=sys.stderr)
                return 2
        reports = run_lemmas(engine, which, window=args.window)
        return _emit_reports(reports, args.format, args.timing, out)

    return 2


if __name__ == "__main__":
    sys.exit(main())
