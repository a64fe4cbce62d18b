"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 cache or report-manifest mismatch,
4 uncertified input or generator.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from fractions import Fraction
from pathlib import Path

from . import anytime, complexity, hopf, series
from .errors import (
    CacheMismatch,
    InconclusiveSeries,
    InvalidProgram,
    OutsideCertifiedPrefix,
    UncertifiedGenerator,
    UncertifiedInput,
)
from .machine import (
    BudgetPolicy,
    Halted,
    ProvenDivergent,
    alphabet_hash,
    decode_program,
    encode_program,
    enumerate_programs,
    format_program,
    parse_program,
    run,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CACHE = 3
EXIT_UNCERTIFIED = 4

REPORT_FORMAT = "haltren-cutoff-scan"
REPORT_VERSION = 1


class UsageError(Exception):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _range(text: str) -> range:
    m = re.fullmatch(r"\s*(\d+)\s*\.\.\s*(\d+)\s*", text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected A..B, got {text!r}")
    a, b = int(m.group(1)), int(m.group(2))
    if a < 1 or a > b:
        raise argparse.ArgumentTypeError(f"need 1 <= A <= B, got {text!r}")
    return range(a, b + 1)


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _natural(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a natural, got {text}")
    return v


def _fraction(text: str) -> Fraction:
    try:
        v = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError("c must be positive")
    return v


def _program(args):
    if getattr(args, "code", None) is not None:
        return decode_program(args.code).program
    if getattr(args, "program_file", None):
        return parse_program(Path(args.program_file).read_text())
    if getattr(args, "program", None) is not None:
        return parse_program(args.program)
    raise UsageError("give --program, --program-file or --code")


def _add_program_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--program", help="instructions, ';'-separated (e.g. 'INC 1; JZ 1 2')")
    g.add_argument("--program-file", help="file in the one-instruction-per-line format")
    g.add_argument("--code", type=_positive, help="numeric program code")


def _add_budget_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--step-budget", type=_positive, default=10_000)
    p.add_argument("--space-budget", type=_positive, default=4_096)


def _policy(args) -> BudgetPolicy:
    return BudgetPolicy(args.step_budget, args.space_budget)


def _outcome_dict(out) -> dict:
    if isinstance(out, Halted):
        return {"status": "halted", "value": out.value,
                "cost": {"t": out.cost.t, "m": out.cost.m, "s": out.cost.s}}
    if isinstance(out, ProvenDivergent):
        return {"status": "divergent", "cycle_start_step": out.cycle_start_step, "period": out.period}
    return {"status": "unknown", "budget": out.budget}


def _permutation(text: str) -> series.PermutationOracle:
    text = text.strip()
    named = {
        "identity": series.identity_permutation,
        "shift": series.shift_permutation,
        "zigzag-shift": series.zigzag_shift_permutation,
    }
    if text in named:
        return named[text]()
    cycles = re.findall(r"\(([^)]*)\)", text)
    if not cycles or re.sub(r"\([^)]*\)", "", text).strip():
        raise UsageError(f"unrecognised permutation {text!r}")
    try:
        parsed = [tuple(int(v) for v in re.split(r"[\s,]+", c.strip()) if v) for c in cycles]
    except ValueError:
        raise UsageError(f"cycle entries must be integers: {text!r}") from None
    if any(v < 1 for cyc in parsed for v in cyc):
        raise UsageError("cycle entries must be positive")
    try:
        return series.cycle_permutation(*parsed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- subcommands ---------------------------------------------------------------------------


def cmd_enumerate(args, out) -> int:
    programs = list(enumerate_programs(args.max_size, args.registers, args.max_offset))
    if args.format == "json":
        rows = [{"size": len(p), "code": str(encode_program(p)), "program": format_program(p, "; ")}
                for p in programs]
        out.write(_dump({"count": len(programs), "programs": rows}))
    else:
        for p in programs:
            out.write(f"{encode_program(p)}\t{format_program(p, '; ') or '(empty)'}\n")
        out.write(f"# count {len(programs)}\n")
    return EXIT_OK


def cmd_run(args, out) -> int:
    p = _program(args)
    result = run(p, args.x, args.step_budget, args.space_budget)
    out.write(_dump({"program": format_program(p, "; "), "x": args.x, **_outcome_dict(result)}))
    return EXIT_OK


def _check_report_manifest(directory: Path, manifest: dict, force: bool) -> None:
    path = directory / "manifest.json"
    if path.exists() and not force:
        try:
            old = json.loads(path.read_text())
        except json.JSONDecodeError:
            raise CacheMismatch(f"{path}: unreadable manifest") from None
        for key in ("format", "version", "alphabet"):
            if old.get(key) != manifest[key]:
                raise CacheMismatch(f"{path}: {key}={old.get(key)!r}, expected {manifest[key]!r}")


def cmd_cutoff_scan(args, out) -> int:
    programs = list(enumerate_programs(args.max_size, args.registers, args.max_offset))
    if args.skip_empty:
        programs = [p for p in programs if len(p)]
    policies = [anytime.CutoffPolicy(c, args.exponent, args.space_budget) for c in args.c]
    report = anytime.cutoff_scan(programs, args.inputs, policies, args.super_budget)
    if args.out:
        directory = Path(args.out)
        manifest = {
            "format": REPORT_FORMAT,
            "version": REPORT_VERSION,
            "alphabet": alphabet_hash(args.registers, args.max_offset),
        }
        _check_report_manifest(directory, manifest, args.force)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "manifest.json").write_text(_dump(manifest))
        (directory / "cutoff-scan.json").write_text(report.to_json())
        (directory / "cutoff-scan.csv").write_text(report.to_csv())
    elif args.format == "csv":
        out.write(report.to_csv())
    else:
        out.write(report.to_json())
    return EXIT_OK


def _table(args) -> complexity.ComplexityTable:
    R = complexity.R_REGISTRY[args.R]
    cache = None if args.no_cache else complexity.cache_dir(args.cache_dir)
    return complexity.complexity_table(args.T, args.k_max, space_budget=args.space_budget, R=R,
                                       cache=cache, workers=args.workers, rebuild=args.rebuild)


def _add_table_flags(p: argparse.ArgumentParser, k_max: int = 3000) -> None:
    p.add_argument("--T", type=_positive, default=256, help="step budget per index")
    p.add_argument("--k-max", type=_positive, default=k_max, help="index ceiling")
    p.add_argument("--space-budget", type=_positive, default=4_096)
    p.add_argument("--R", choices=sorted(complexity.R_REGISTRY), default="pow2")
    p.add_argument("--workers", type=_positive, default=1)
    p.add_argument("--cache-dir", help=f"cache directory (default ${complexity.CACHE_ENV})")
    p.add_argument("--no-cache", action="store_true")
    p.add_argument("--rebuild", action="store_true", help="discard a mismatching cache")


def cmd_complexity(args, out) -> int:
    table = _table(args)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("x", "upper_bound", "certified", "K"))
        korder = complexity.kolmogorov_order(table) if table.certified_values() else None
        for x, e in table.entries.items():
            w.writerow((x, e.upper, int(e.certified), korder.K(x) if korder and x in korder else ""))
        out.write(buf.getvalue())
        return EXIT_OK
    body = {
        "budget": table.budget,
        "k_max": table.k_max,
        "R": table.r_name,
        "resolved_prefix": table.resolved_prefix,
        "certified_prefix": table.certified_prefix(),
        "total_steps": table.total_steps,
        "entries": {str(x): {"upper_bound": e.upper, "certified": e.certified}
                    for x, e in table.entries.items()},
    }
    out.write(_dump(body))
    return EXIT_OK


def cmd_series(args, out) -> int:
    if args.kind == "psi":
        ef = series.ExtendedFn(_program(args), BudgetPolicy(args.step_budget, args.space_budget))
        s = series.psi_coeffs(ef, args.k, args.horizon)
    elif args.kind == "psi-perm":
        s = series.psi_perm(_permutation(args.perm), args.k, args.horizon)
    else:
        korder = complexity.kolmogorov_order(_table(args))
        s = series.phi_korder(_permutation(args.perm), args.k, korder, args.horizon)
    report = series.series_report(s)
    if args.classify:
        try:
            report = series.series_report(s, series.classify_series(s, args.tol))
        except InconclusiveSeries as exc:
            report = series.series_report(s, error=exc.reason)
            report["classification"]["diagnostics"] = exc.diagnostics
    out.write(_dump(report))
    return EXIT_OK


def _coproduct_closure(p):
    seen = set()
    stack = [p]
    while stack:
        q = stack.pop()
        if q in seen or not len(q):
            continue
        seen.add(q)
        for i in hopf.valid_cuts(q)[1:-1]:
            stack += [q[:i], q[i:]]
    return sorted(seen, key=lambda q: (len(q), q))


def cmd_hopf(args, out) -> int:
    p = _program(args)
    if not len(p):
        raise UsageError("the empty program is the unit, not a generator")
    x = hopf.HopfElement.gen(p)
    if args.op == "coproduct":
        t = hopf.coproduct(x)
        text = hopf.format_tensor(t)
        payload = {"coproduct": hopf.tensor_json(t), "text": text}
    elif args.op == "antipode":
        s = hopf.antipode(x)
        text = hopf.format_element(s)
        payload = {"antipode": hopf.element_json(s), "text": text}
    else:
        phi = hopf.char_from_halting(args.k, args.truncation, BudgetPolicy(args.step_budget,
                                                                          args.space_budget))
        gens = [q for q in _coproduct_closure(p) if len(q) <= args.grade_max]
        if len(p) > args.grade_max:
            raise UsageError(f"program size {len(p)} exceeds --grade-max {args.grade_max}")
        pair = hopf.birkhoff_decompose(phi, args.grade_max, gens)
        lines = []
        rows = []
        for q in gens:
            verdict = "PASS" if pair.identity_holds[q] else "FAIL"
            lines.append(f"[{hopf.format_program_inline(q)}]  phi- = {pair.phi_minus[q]}  "
                         f"phi+ = {pair.phi_plus[q]}  identity {verdict}")
            rows.append({
                "generator": hopf.format_program_inline(q),
                "phi": hopf.avalue_json(phi.on_generator(q)),
                "phi_minus": hopf.avalue_json(pair.phi_minus[q]),
                "phi_plus": hopf.avalue_json(pair.phi_plus[q]),
                "identity": verdict,
            })
        text = "\n".join(lines)
        payload = {"birkhoff": rows, "text": text}
    out.write(_dump(payload) if args.json else text + "\n")
    return EXIT_OK


def cmd_trichotomy(args, out) -> int:
    p = _program(args)
    table = _table(args)
    scales = anytime.default_scales()
    rep = anytime.trichotomy_classify(p, args.inputs, scales, table,
                                      BudgetPolicy(args.run_budget, args.space_budget))
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("x", "branch", "certainty", "value", "complexity_bound", "randomness_bound"))
        for r in rep.records:
            w.writerow((r.x, r.branch.value, r.certainty, "" if r.value is None else r.value,
                        "" if r.complexity_bound is None else r.complexity_bound,
                        "" if r.randomness_bound is None else repr(r.randomness_bound)))
        out.write(buf.getvalue())
    else:
        out.write(_dump({
            "x0": scales.x0,
            "records": [anytime.record_dict(r) for r in rep.records],
            "unresolved": [{"x": x, "reason": why} for x, why in rep.unresolved],
            "below_threshold": rep.below_threshold,
            "branch_counts": rep.branch_counts(),
        }))
    return EXIT_OK


# -- parser -----------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="haltren", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="list valid programs with their codes")
    p.add_argument("--max-size", type=_natural, required=True)
    p.add_argument("--registers", type=_positive, default=2)
    p.add_argument("--max-offset", type=_positive, default=2)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("run", help="run one program on one input")
    _add_program_flags(p)
    p.add_argument("--x", type=_positive, required=True)
    _add_budget_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("cutoff-scan", help="outcome counts under c*x^e step budgets")
    p.add_argument("--c", type=_fraction, action="append", required=True,
                   help="budget constant (repeatable)")
    p.add_argument("--exponent", type=_natural, default=2)
    p.add_argument("--inputs", type=_range, required=True, help="A..B")
    p.add_argument("--max-size", type=_natural, default=2)
    p.add_argument("--registers", type=_positive, default=2)
    p.add_argument("--max-offset", type=_positive, default=2)
    p.add_argument("--super-budget", type=_positive, default=100_000)
    p.add_argument("--space-budget", type=_positive, default=4_096)
    p.add_argument("--skip-empty", action="store_true", help="leave out the empty program")
    p.add_argument("--out", help="directory for manifest.json, cutoff-scan.json and .csv")
    p.add_argument("--force", action="store_true", help="overwrite a foreign report directory")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_cutoff_scan)

    p = sub.add_parser("complexity", help="budgeted complexity table (cached)")
    _add_table_flags(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_complexity)

    p = sub.add_parser("series", help="halting and permutation series")
    p.add_argument("kind", choices=("psi", "psi-perm", "phi-k"))
    _add_program_flags(p)
    p.add_argument("--perm", default="identity",
                   help="identity | shift | zigzag-shift | cycles such as '(1 2)(3 4 5)'")
    p.add_argument("--k", type=_positive, required=True)
    p.add_argument("--horizon", type=_natural, default=32)
    p.add_argument("--classify", action="store_true")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--step-budget", type=_positive, default=10_000)
    _add_table_flags(p)
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("hopf", help="coproduct, antipode and Birkhoff decomposition")
    p.add_argument("op", choices=("coproduct", "antipode", "birkhoff"))
    _add_program_flags(p)
    p.add_argument("--k", type=_positive, default=1)
    p.add_argument("--grade-max", type=_positive, default=6)
    p.add_argument("--truncation", type=_natural, default=8)
    p.add_argument("--json", action="store_true")
    _add_budget_flags(p)
    p.set_defaults(func=cmd_hopf)

    p = sub.add_parser("trichotomy", help="randomness/growth branch per input")
    _add_program_flags(p)
    p.add_argument("--inputs", type=_range, required=True, help="A..B")
    p.add_argument("--run-budget", type=_positive, default=10_000)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _add_table_flags(p)
    p.set_defaults(func=cmd_trichotomy)
    return parser


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except (UsageError, InvalidProgram) as exc:
        print(f"haltren: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CacheMismatch as exc:
        print(f"haltren: cache mismatch: {exc}", file=sys.stderr)
        return EXIT_CACHE
    except UncertifiedInput as exc:
        print(f"haltren: uncertified input {exc.index}: {exc}", file=sys.stderr)
        return EXIT_UNCERTIFIED
    except UncertifiedGenerator as exc:
        print(f"haltren: uncertified generator [{exc.program}] at k={exc.k}", file=sys.stderr)
        return EXIT_UNCERTIFIED
    except OutsideCertifiedPrefix as exc:
        print(f"haltren: outside certified prefix: {exc}", file=sys.stderr)
        return EXIT_UNCERTIFIED


if __name__ == "__main__":
    sys.exit(main())
