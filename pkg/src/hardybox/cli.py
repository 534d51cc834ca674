"""Command-line front end.

Exit codes: 0 success, 1 a check failed, 2 usage error, 3 unreadable or
malformed input file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import bell, behavior as bx, hardy, lp, quantum

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    if isinstance(v, list):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


def _entry_rows(box):
    return [
        {"index": i, "label": label, "value": v}
        for i, label, v in bx.describe_entries(box)
    ]


def _pattern(spec, n):
    if spec in hardy.PATTERNS:
        try:
            return hardy.named_pattern(spec, n)
        except bx.DimensionError as exc:
            raise UsageError(str(exc)) from exc
    try:
        pattern = hardy.load_pattern(spec)
    except bx.BoxFormatError as exc:
        raise InputError(str(exc)) from exc
    if pattern.scenario.n_parties != n:
        raise UsageError(f"pattern file is for {pattern.scenario.n_parties} parties, box has {n}")
    return pattern


def _check_n(n):
    if n not in (2, 3, 4):
        raise UsageError(f"-n must be 2, 3 or 4, got {n}")


# -- commands ---------------------------------------------------------------


def cmd_lp_max(args):
    _check_n(args.n)
    scenario = bx.Scenario(args.n)
    pattern = _pattern(args.pattern, args.n)
    problem = lp.build_hardy_lp(scenario, pattern)
    for z in args.extra_zero:
        if z == "target":
            index = pattern.target_index
        else:
            try:
                index = int(z)
            except ValueError:
                raise UsageError(f"--extra-zero takes 'target' or a flat index, got {z!r}") from None
            if not 0 <= index < scenario.size:
                raise UsageError(f"--extra-zero index {index} out of range")
        problem = problem.with_zero(index)
    sol = lp.lp_solve(problem, seed=args.seed)
    results = {
        "parties": args.n,
        "pattern": args.pattern,
        "status": sol.status,
        "variables": problem.n_vars,
        "constraints": {k: problem.count(k) for k in ("norm", "ns", "zero")},
    }
    lines = [f"status: {sol.status}"]
    if sol.optimal:
        box = bx.behavior_from_table(scenario, sol.x, "rational")
        results["optimum"] = sol.value
        results["box"] = bx.box_to_dict(box)
        results["support"] = _entry_rows(box)
        lines.append(f"optimum: {sol.value}")
        lines.append("optimal box (nonzero entries):")
        lines += [f"  x{r['index']:<4} {r['label']:>5}  {r['value']}" for r in results["support"]]
        if args.out:
            bx.save_box(args.out, box)
        if args.unique:
            ranges = lp.coordinate_ranges(problem, sol.value)
            results["unique"] = ranges.unique
            results["ranges"] = ranges.ranges
            lines.append(f"unique optimum: {'yes' if ranges.unique else 'no'}")
            if not ranges.unique:
                lines += [
                    f"  x{j:<4} {bx.p_label(scenario, j):>5}  [{lo}, {hi}]"
                    for j, (lo, hi) in enumerate(ranges.ranges)
                    if lo != hi
                ]
    csv_rows = [["index", "label", "value"]] + [[r["index"], r["label"], r["value"]] for r in results.get("support", [])]
    return EXIT_OK, results, lines, csv_rows


def cmd_quantum_max(args):
    _check_n(args.n)
    mode = "symmetric" if args.symmetric else args.mode
    grid = args.grid or {2: 17, 3: 9, 4: 6}[args.n]
    if grid < 2:
        raise UsageError("--grid must be at least 2")
    result = quantum.optimize_hardy(args.n, mode, grid=grid)
    report = quantum.result_to_dict(result)
    if args.out:
        Path(args.out).write_text(json.dumps(report["box"], indent=1) + "\n")
    lines = [
        f"mode: {mode}",
        "beta: " + ", ".join(bx.format_value(b) for b in result.betas),
        f"p*: {bx.format_value(result.p)}",
    ]
    csv_rows = [["party", "beta"]] + [[j + 1, b] for j, b in enumerate(result.betas)] + [["p", result.p]]
    return EXIT_OK, report, lines, csv_rows


def _load_for_verify(path, tol):
    """Returns (box or None, normalization problems). Malformed files raise InputError."""
    try:
        doc = bx.read_box_document(path)
        scenario, values, numeric = bx.parse_box_dict(doc)
    except bx.BoxFormatError as exc:
        raise InputError(str(exc)) from exc
    try:
        return bx.behavior_from_table(scenario, values, numeric, tol=tol), None
    except bx.BoxError as exc:
        return None, str(exc)


def cmd_verify(args):
    box, problem = _load_for_verify(args.path, args.tol)
    checks = {}
    lines = []
    if box is None:
        checks["normalization"] = {"passed": False, "detail": problem}
        lines.append(f"normalization: FAIL ({problem})")
        return EXIT_FAIL, {"checks": checks}, lines, [["check", "passed"], ["normalization", False]]
    checks["normalization"] = {"passed": True}
    lines.append("normalization: pass")

    ns = bx.no_signaling_check(box, args.tol)
    violated = ns.describe(box.scenario)
    checks["no_signaling"] = {"passed": ns.passed, "checked": ns.checked, "violations": violated}
    lines.append(f"no-signaling: {'pass' if ns.passed else 'FAIL'} ({ns.checked} equations)")
    lines += [f"  violated: {v}" for v in violated]

    if args.hardy:
        pattern = _pattern(args.hardy, box.n_parties)
        rep = hardy.hardy_check(box, pattern, args.tol)
        checks["hardy"] = {
            "passed": rep.passed,
            "zeros_satisfied": rep.zeros_satisfied,
            "q": rep.q,
            "residuals": {bx.p_label(box.scenario, i): v for i, v in rep.residuals.items()},
        }
        lines.append(f"hardy ({args.hardy}): {'pass' if rep.passed else 'FAIL'}, q={bx.format_value(rep.q)}")
    if args.chsh:
        if box.n_parties != 2:
            checks["chsh"] = {"passed": False, "detail": "CHSH needs a two-party box"}
            lines.append("chsh: FAIL (not a two-party box)")
        else:
            signs = tuple(int(c) for c in args.signs) if args.signs else (0, 0, 0)
            v = bell.chsh(box, signs)
            best = bell.chsh_max_over_signs(box)
            checks["chsh"] = {
                "passed": True,
                "signs": list(signs),
                "B": v.value,
                "correlators": {"".join(c): e for c, e in v.correlators.items()},
                "max_B": best.value,
                "max_signs": list(best.signs),
            }
            lines.append(f"chsh signs {''.join(map(str, signs))}: B={bx.format_value(v.value)}")
            lines.append(f"chsh max over signs: B={bx.format_value(best.value)} at {''.join(map(str, best.signs))}")
    ok = all(c["passed"] for c in checks.values())
    csv_rows = [["check", "passed"]] + [[k, c["passed"]] for k, c in checks.items()]
    return (EXIT_OK if ok else EXIT_FAIL), {"path": str(args.path), "passed": ok, "checks": checks}, lines, csv_rows


def cmd_export(args):
    try:
        box = bx.preset(args.name)
    except LookupError as exc:
        raise UsageError(str(exc)) from exc
    try:
        bx.save_box(args.path, box)
    except OSError as exc:
        raise InputError(f"cannot write {args.path}: {exc}") from exc
    results = {"preset": args.name, "path": str(args.path), "parties": box.n_parties, "entries": box.scenario.size}
    return EXIT_OK, results, [f"wrote {args.name} ({box.scenario.size} entries) to {args.path}"], [
        ["preset", "path"], [args.name, str(args.path)]]


def cmd_scan(args):
    if not 2 <= args.n <= bx.MAX_PARTIES:
        raise UsageError(f"-n must be between 2 and {bx.MAX_PARTIES}")
    pattern = _pattern(args.pattern, args.n)
    res = hardy.local_realism_scan(args.n, pattern)
    results = {
        "parties": args.n,
        "max_q": res.max_q,
        "deterministic_boxes": res.total,
        "consistent_with_zeros": res.consistent,
        "witness": res.witness,
    }
    lines = [
        f"deterministic boxes: {res.total}, respecting the zeros: {res.consistent}",
        f"max q: {res.max_q}",
    ]
    return EXIT_OK, results, lines, [["parties", "total", "consistent", "max_q"], [args.n, res.total, res.consistent, res.max_q]]


def cmd_chsh(args):
    if args.preset:
        try:
            box = bx.preset(args.path)
        except LookupError as exc:
            raise UsageError(str(exc)) from exc
    else:
        box, problem = _load_for_verify(args.path, args.tol)
        if box is None:
            raise InputError(problem)
    if box.n_parties != 2:
        raise UsageError("CHSH needs a two-party box")
    header = ["alpha", "beta", "gamma", "E(A',B)", "E(A,B')", "E(A',B')", "E(A,B)", "B"]
    rows = [bell.chsh(box, s).row() for s in bell.SIGN_TUPLES]
    best = bell.chsh_max_over_signs(box)
    fmt = bx.format_value
    lines = ["  ".join(f"{h:>8}" for h in header)]
    lines += ["  ".join(f"{fmt(v):>8}" for v in r) for r in rows]
    lines.append(f"max B = {fmt(best.value)} at signs {best.signs}")
    results = {"rows": [dict(zip(header, r)) for r in rows], "max_B": best.value, "max_signs": best.signs}
    return EXIT_OK, results, lines, [header] + rows


# -- parser -----------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    out = common.add_mutually_exclusive_group()
    out.add_argument("--json", dest="format", action="store_const", const="json", help="machine-readable JSON report")
    out.add_argument("--csv", dest="format", action="store_const", const="csv", help="CSV rows")
    common.add_argument("--tol", type=float, default=None, help="tolerance for floating boxes")
    common.add_argument("--seed", type=int, default=None, help="shuffle seed for the LP pivot order")

    parser = argparse.ArgumentParser(prog="hardybox", description="Hardy-paradox workbench for no-signaling and quantum boxes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lp-max", parents=[common], help="maximize the Hardy probability over no-signaling boxes")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--pattern", default="standard", help="standard, footnote-alt, or a pattern JSON file")
    p.add_argument("--extra-zero", action="append", default=[], metavar="IDX", help="'target' or a flat index")
    p.add_argument("--unique", action="store_true", help="compute coordinate ranges over the optimal face")
    p.add_argument("--out", help="write the optimal box file here")
    p.set_defaults(func=cmd_lp_max)

    p = sub.add_parser("quantum-max", parents=[common], help="maximize the quantum Hardy probability")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--mode", choices=("symmetric", "full"), default="full")
    p.add_argument("--symmetric", action="store_true", help="shorthand for --mode symmetric")
    p.add_argument("--grid", type=int, default=None, help="grid points per axis in full mode")
    p.add_argument("--out", help="write the optimal quantum box file here")
    p.set_defaults(func=cmd_quantum_max)

    p = sub.add_parser("verify", parents=[common], help="check a box file")
    p.add_argument("path")
    p.add_argument("--hardy", metavar="PATTERN", help="standard, footnote-alt, or a pattern JSON file")
    p.add_argument("--chsh", action="store_true")
    p.add_argument("--signs", help="CHSH sign bits, e.g. 010", type=_signs)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("export", parents=[common], help="write a preset box file")
    p.add_argument("name")
    p.add_argument("path")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("scan-deterministic", parents=[common], help="max Hardy probability over local deterministic boxes")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--pattern", default="standard")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("chsh", parents=[common], help="CHSH values of a two-party box for all sign choices")
    p.add_argument("path", help="box file, or a preset name with --preset")
    p.add_argument("--preset", action="store_true")
    p.set_defaults(func=cmd_chsh)
    return parser


def _signs(text):
    if len(text) != 3 or set(text) - {"0", "1"}:
        raise argparse.ArgumentTypeError("signs are three bits such as 010")
    return text


def _emit(fmt, report, lines, csv_rows, stream):
    if fmt == "json":
        stream.write(json.dumps(_jsonable(report), indent=1) + "\n")
    elif fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for row in csv_rows:
            writer.writerow([_jsonable(v) if isinstance(v, Fraction) else v for v in row])
        stream.write(buf.getvalue())
    else:
        stream.write("\n".join(lines) + "\n")


def main(argv=None, stream=None) -> int:
    stream = stream or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad flags
    start = time.perf_counter()
    try:
        code, results, lines, csv_rows = args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    report = {
        "command": argv,
        "results": results,
        "wall_time": time.perf_counter() - start,
        "exit_status": code,
    }
    _emit(args.format, report, lines, csv_rows, stream)
    return code


if __name__ == "__main__":
    sys.exit(main())
