"""Command-line entry point: ``hilbert-forge <command> [options]``.

Exit status: 0 success or expected verdict, 1 negative verdict, 2 usage or
input error, 3 internal error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import List, Optional

from .algebra import AlgebraError, Matrix, leibniz, leibniz_sdm
from .calculi import (
    RuleSet, builtin, closure_upto, format_rules, ockham_calculus,
    parse_equations, parse_rules, preset, rules_from_equations, sdm_calculus,
)
from .engine import (
    ScriptError, SearchBudget, check_derivation, corpus_replay, format_script,
    load_corpus, parse_consecution, parse_script, prove, resolve_ruleset,
)
from .search import CACHE_ENV, EnumerationSpec, SearchError, algebras, export_algebras, find_countermodel
from .semantics import Mode, check_rules, verdict_record
from .syntax import ParseError

OK, NEGATIVE, USAGE, INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _dump(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


class Output:
    """Collects the primary output; written to ``--out`` or stdout at the end."""

    def __init__(self, args):
        self.args = args
        self.parts: List[str] = []

    def text(self, s: str):
        self.parts.append(s if s.endswith("\n") else s + "\n")

    def json(self, data):
        self.parts.append(_dump(data))

    @property
    def as_json(self) -> bool:
        return self.args.format == "json"

    def flush(self):
        out = "".join(self.parts)
        if self.args.out:
            Path(self.args.out).write_text(out)
        else:
            sys.stdout.write(out)


def _note(msg: str):
    print(msg, file=sys.stderr)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _load_ruleset(spec: str) -> RuleSet:
    """A rule file path or a rule-set spec such as ``sdm:SDM``."""
    if os.path.exists(spec):
        return parse_rules(_read(spec), name=Path(spec).stem)
    try:
        return resolve_ruleset(spec)
    except ScriptError as e:
        raise UsageError(str(e)) from None


def _load_rules_or_builtin(spec: str) -> RuleSet:
    if os.path.exists(spec):
        return parse_rules(_read(spec), name=Path(spec).stem)
    try:
        return builtin(spec)
    except ValueError:
        return _load_ruleset(spec)


# ---------------------------------------------------------------- compile

def compile_target(eqs, target: str) -> RuleSet:
    parts = target.split(":")
    kind = parts[0].lower()
    if kind == "omega":
        n = int(parts[1]) if len(parts) > 1 else 1
        rs = closure_upto(rules_from_equations(eqs), n)
        rs.extend(builtin("R_F"))
        rs.name = f"omega:{n}"
        return rs
    if kind in ("sdm", "sdm-reduced"):
        return sdm_calculus(eqs, reduced=kind == "sdm-reduced")
    if kind == "ockham":
        if len(parts) != 3:
            raise UsageError("ockham target needs the form ockham:m:n")
        return ockham_calculus(int(parts[1]), int(parts[2]))
    if kind == "assertional":
        rs = sdm_calculus(eqs)
        rs.extend(builtin("R_top"))
        rs.name = "assertional"
        return rs
    raise UsageError(f"unknown target {target!r}; expected omega:n, sdm, sdm-reduced, "
                     "ockham:m:n or assertional")


def cmd_compile(args, out: Output) -> int:
    if args.equations:
        eqs = parse_equations(_read(args.equations))
    else:
        eqs = preset(args.preset or "DN").equations
    rs = compile_target(eqs, args.target)
    counts = rs.counts()
    summary = f"{len(rs)} rules (" + ", ".join(f"{k}: {v}" for k, v in sorted(counts.items())) + ")"
    if out.as_json:
        out.json({"name": rs.name, "count": len(rs), "counts": counts,
                  "rules": [{"name": r.name, "rule": str(r).split(": ", 1)[1],
                             "provenance": r.provenance} for r in rs]})
    else:
        out.text(format_rules(rs))
    if args.out:
        print(summary)
    else:
        _note(summary)
    return OK


# ---------------------------------------------------------------- prove / check

def cmd_prove(args, out: Output) -> int:
    rs = _load_ruleset(args.ruleset)
    goal = parse_consecution(args.goal)
    budget = SearchBudget(args.size, args.steps, args.depth)
    result = prove(rs, goal, budget)
    if not result:
        if out.as_json:
            out.json({"goal": str(goal), "verdict": "exhausted", "reason": result.reason,
                      "derived": result.derived, "depth": result.depth})
        else:
            out.text(f"exhausted: {result.reason} after {result.derived} formulas, depth {result.depth}")
        return NEGATIVE
    result.ruleset = args.ruleset
    if out.as_json:
        out.json({"goal": str(goal), "verdict": "proved", "script": format_script(result)})
    else:
        out.text(format_script(result))
    return OK


def cmd_check(args, out: Output) -> int:
    status = OK
    records = []
    for path in args.scripts:
        d = parse_script(_read(path), Path(path).stem)
        rs = _load_ruleset(args.ruleset or d.ruleset)
        r = check_derivation(rs, d)
        records.append({"script": path, "ok": r.ok, "step": r.step, "reason": r.reason})
        if not out.as_json:
            out.text(f"{path}: {r}")
        if not r:
            status = NEGATIVE
    if out.as_json:
        out.json(records)
    return status


# ---------------------------------------------------------------- semantics

def _spec(args) -> EnumerationSpec:
    return EnumerationSpec(args.cls, args.max, getattr(args, "include_trivial", False))


def cmd_refute(args, out: Output) -> int:
    if args.rule:
        rs = _load_rules_or_builtin(args.rule)
        targets = list(rs)
    elif args.goal:
        targets = [parse_consecution(args.goal)]
    else:
        raise UsageError("refute needs --rule or --goal")
    mode = Mode.parse(args.mode)
    status = OK
    records = []
    for t in targets:
        w = find_countermodel(t, _spec(args), mode)
        name = getattr(t, "name", str(t))
        if w:
            records.append(verdict_record(name, args.mode, args.max, "refuted", w))
        else:
            records.append(verdict_record(name, args.mode, args.max, "no countermodel"))
            status = NEGATIVE
    if out.as_json:
        out.json(records if len(records) > 1 else records[0])
    else:
        for rec in records:
            out.text(f"{rec['id']}: {rec['verdict']} (mode {rec['mode']}, size <= {rec['bound']})")
            if "witness" in rec:
                out.text("  witness: " + json.dumps(rec["witness"], sort_keys=True))
    return status


def cmd_sound(args, out: Output) -> int:
    rs = _load_ruleset(args.ruleset)
    mode = Mode.parse(args.mode)
    algs = algebras(args.cls, args.max)
    results = check_rules(rs, algs, mode, args.jobs)
    records = []
    failed = 0
    for rule, ok, w in results:
        verdict = f"sound up to size {args.max}" if ok else "unsound"
        failed += not ok
        records.append(verdict_record(rule.name, args.mode, args.max, verdict, w))
        if not out.as_json:
            out.text(f"{'pass' if ok else 'FAIL'} {rule.name}")
    if out.as_json:
        out.json(records)
    else:
        out.text(f"{len(results) - failed}/{len(results)} rules pass over {len(algs)} "
                 f"{args.cls} algebras of size <= {args.max} ({args.mode})")
    return OK if not failed else NEGATIVE


def cmd_enum(args, out: Output) -> int:
    spec = _spec(args)
    algs = list(algebras(spec.cls, spec.max_size, spec.include_trivial))
    if args.seed_corpus:
        paths = export_algebras(spec, args.seed_corpus)
        _note(f"wrote {len(paths)} algebra files to {args.seed_corpus}")
    if out.as_json:
        out.json([dict(a.to_dict(), name=a.name) for a in algs])
    else:
        by_size = {}
        for a in algs:
            by_size[a.size] = by_size.get(a.size, 0) + 1
        for size in sorted(by_size):
            out.text(f"size {size}: {by_size[size]}")
        out.text(f"total: {len(algs)} {spec.cls} algebras")
    return OK


def cmd_leibniz(args, out: Output) -> int:
    data = json.loads(_read(args.matrix))
    m = Matrix.from_dict(data)
    theta = leibniz(m)
    rec = {"blocks": theta.blocks(), "reduced": theta.is_identity}
    status = OK
    if args.compare_sdm:
        other = leibniz_sdm(m)
        rec["sdm_blocks"] = other.blocks()
        rec["equal"] = other == theta
        if other != theta:
            pair = next(p for p in ((a, b) for a in range(m.algebra.size) for b in range(m.algebra.size))
                        if theta.related(*p) != other.related(*p))
            rec["first_difference"] = list(pair)
            status = NEGATIVE
    if out.as_json:
        out.json(rec)
    else:
        out.text(f"leibniz congruence: {rec['blocks']}{' (reduced)' if rec['reduced'] else ''}")
        if args.compare_sdm:
            out.text("equal" if rec["equal"] else f"differ at {rec['first_difference']}")
    return status


def cmd_corpus(args, out: Output) -> int:
    if args.export:
        target = Path(args.export)
        target.mkdir(parents=True, exist_ok=True)
        for name, d in load_corpus().items():
            (target / f"{name}.drv").write_text(format_script(d))
    report = corpus_replay(semantic_bound=args.semantic_bound)
    if out.as_json:
        out.json({"ok": report.ok,
                  "scripts": [{"name": e.name, "ok": e.ok, "check": str(e.check),
                               "semantic": e.semantic} for e in report.entries],
                  "aux": report.aux_sound})
    else:
        for line in report.lines():
            out.text(line)
        out.text(f"{sum(e.ok for e in report.entries)}/{len(report.entries)} scripts ok")
    return OK if report.ok else NEGATIVE


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("--max", type=int, default=4, help="algebra size bound")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--out", help="write the main output to this file")

    parser = argparse.ArgumentParser(
        prog="hilbert-forge",
        description="Hilbert calculi for distributive lattices with negation: "
                    "compile, check, prove, refute.",
        epilog=f"Enumerated algebras are cached in ${CACHE_ENV} when it is set.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", parents=[common], help="equations to a calculus")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", help="DN, SDM, DM, PL, O, B or Berman(m,n)")
    src.add_argument("--equations", help="equation file, one 'name: lhs = rhs' per line")
    p.add_argument("--target", default="sdm",
                   help="omega:n, sdm, sdm-reduced, ockham:m:n or assertional")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("prove", parents=[common], help="bounded proof search")
    p.add_argument("--ruleset", required=True, help="rule file or spec such as sdm:SDM")
    p.add_argument("--goal", required=True, help="'premises |- conclusion'")
    p.add_argument("--size", type=int, default=40, help="maximum formula size")
    p.add_argument("--steps", type=int, default=20000, help="maximum derived formulas")
    p.add_argument("--depth", type=int, default=12, help="maximum rounds")
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("check", parents=[common], help="check derivation scripts")
    p.add_argument("scripts", nargs="+")
    p.add_argument("--ruleset", help="override the script's rule set")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("refute", parents=[common], help="search for a countermodel")
    p.add_argument("--rule", help="rule file or builtin set name")
    p.add_argument("--goal", help="'premises |- conclusion'")
    p.add_argument("--class", dest="cls", default="DN")
    p.add_argument("--mode", default="filter", help="filter, assertional or fixed:a,b")
    p.set_defaults(func=cmd_refute)

    p = sub.add_parser("sound", parents=[common], help="check rule soundness")
    p.add_argument("--ruleset", required=True)
    p.add_argument("--class", dest="cls", default="SDM")
    p.add_argument("--mode", default="filter")
    p.set_defaults(func=cmd_sound)

    p = sub.add_parser("enum", parents=[common], help="enumerate algebras")
    p.add_argument("--class", dest="cls", default="DN")
    p.add_argument("--include-trivial", action="store_true")
    p.add_argument("--seed-corpus", metavar="DIR", help="also write one algebra file per algebra")
    p.set_defaults(func=cmd_enum)

    p = sub.add_parser("leibniz", parents=[common], help="Leibniz congruence of a matrix")
    p.add_argument("--matrix", required=True, help="matrix JSON file")
    p.add_argument("--compare-sdm", action="store_true",
                   help="compare with the explicit description for semi-De Morgan algebras")
    p.set_defaults(func=cmd_leibniz)

    p = sub.add_parser("corpus", parents=[common], help="replay the shipped derivations")
    p.add_argument("--export", metavar="DIR", help="also write the scripts to DIR")
    p.add_argument("--semantic-bound", type=int, default=4,
                   help="algebra size for the semantic cross-check (0 to skip)")
    p.set_defaults(func=cmd_corpus)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Output(args)
    try:
        status = args.func(args, out)
    except (UsageError, ScriptError, ParseError, SearchError, AlgebraError, ValueError,
            json.JSONDecodeError) as e:
        _note(f"error: {e}")
        return USAGE
    except Exception as e:  # pragma: no cover - reported, not hidden
        _note(f"internal error: {type(e).__name__}: {e}")
        return INTERNAL
    out.flush()
    return status


if __name__ == "__main__":
    sys.exit(main())
