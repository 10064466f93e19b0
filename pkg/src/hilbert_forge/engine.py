"""Hilbert derivations: a line-oriented script format, a checker that never
searches, and a bounded forward-chaining prover.

Script format::

    -- comment
    ruleset: sdm:SDM
    goal: ~q |- ~p
    1. ~q ; premise
    2. ~q | 0 ; by r_or_bot fwd {p:=~q} from 1
    ...

Substitutions list rule variable ``:=`` formula pairs; rule variables left
out stand for themselves.  Step numbers start at 1 and citations must point
backwards.
"""
from __future__ import annotations

import re
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from .calculi import (
    RuleSet, builtin, closure_upto, named_rule, ockham_calculus, preset,
    rules_from_equations, sdm_calculus,
)
from .semantics import Consecution
from .syntax import BOT, TOP, Formula, Var, match, parse, size, subformulas, substitute, to_text, variables

__all__ = [
    "Step", "Derivation", "CheckResult", "SearchBudget", "ProofExhausted",
    "ScriptError", "parse_script", "format_script", "parse_consecution",
    "resolve_ruleset", "check_derivation", "prove", "AUX_RULES", "load_corpus",
    "corpus_replay", "ReplayReport", "ruleset_class",
]


class ScriptError(ValueError):
    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


@dataclass(frozen=True)
class Step:
    formula: Formula
    rule: Optional[str] = None  # None marks a premise
    direction: str = "fwd"
    subst: Tuple[Tuple[str, Formula], ...] = ()
    cites: Tuple[int, ...] = ()
    note: str = ""

    @property
    def is_premise(self) -> bool:
        return self.rule is None

    def substitution(self) -> Dict[str, Formula]:
        return dict(self.subst)


@dataclass
class Derivation:
    ruleset: str
    goal: Consecution
    steps: List[Step] = field(default_factory=list)
    name: str = ""
    comments: List[str] = field(default_factory=list)

    def premise(self, f: Formula, note: str = "") -> int:
        self.steps.append(Step(f, note=note))
        return len(self.steps)

    def by(self, f: Formula, rule: str, subst: Optional[Dict[str, Formula]] = None,
           cites: Sequence[int] = (), direction: str = "fwd", note: str = "") -> int:
        items = tuple(sorted((subst or {}).items()))
        self.steps.append(Step(f, rule, direction, items, tuple(cites), note))
        return len(self.steps)

    def substituted(self, s: Dict[str, Formula]) -> "Derivation":
        """Apply ``s`` to every formula, composing it into each step's substitution."""
        def sub(f):
            return substitute(f, s)
        steps = []
        for st in self.steps:
            composed = tuple((k, sub(v)) for k, v in st.subst)
            steps.append(Step(sub(st.formula), st.rule, st.direction, composed, st.cites, st.note))
        goal = Consecution(tuple(sub(p) for p in self.goal.premises), sub(self.goal.conclusion))
        return Derivation(self.ruleset, goal, steps, self.name, list(self.comments))


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    step: int = 0
    reason: str = ""

    def __bool__(self):
        return self.ok

    def __str__(self):
        return "ok" if self.ok else f"error at step {self.step}: {self.reason}"


# ---------------------------------------------------------------- script I/O

_STEP = re.compile(r"^\s*(\d+)\.\s*(.*?)\s*;\s*(.*?)\s*$")
_BY = re.compile(r"^by\s+(\S+)(?:\s+(fwd|rev))?\s*(?:\{(.*)\})?\s*(?:from\s+([\d,\s]+))?$")


def parse_consecution(text: str) -> Consecution:
    if "|-" not in text:
        raise ScriptError(f"expected 'premises |- conclusion', got {text!r}")
    lhs, rhs = text.rsplit("|-", 1)
    prem = tuple(parse(p, True) for p in lhs.split(",")) if lhs.strip() else ()
    return Consecution(prem, parse(rhs, True))


def _parse_subst(text: str, line: int) -> Tuple[Tuple[str, Formula], ...]:
    out = {}
    for part in text.split(","):
        if not part.strip():
            continue
        if ":=" not in part:
            raise ScriptError(f"bad substitution entry {part.strip()!r}", line)
        key, val = part.split(":=", 1)
        out[key.strip()] = parse(val, True)
    return tuple(sorted(out.items()))


def _strip(line: str) -> str:
    i = line.find("--")
    return line if i < 0 else line[:i]


def parse_script(text: str, name: str = "") -> Derivation:
    ruleset, goal, steps, comments = None, None, [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        if raw.strip().startswith("--"):
            comments.append(raw.strip()[2:].strip())
        line = _strip(raw).strip()
        if not line:
            continue
        note = raw[raw.find("--") + 2:].strip() if "--" in raw and raw.strip()[:2] != "--" else ""
        if line.startswith("ruleset:"):
            ruleset = line[len("ruleset:"):].strip()
            continue
        if line.startswith("goal:"):
            goal = parse_consecution(line[len("goal:"):])
            continue
        m = _STEP.match(line)
        if not m:
            raise ScriptError(f"cannot parse {line!r}", lineno)
        number, ftext, just = int(m.group(1)), m.group(2), m.group(3)
        if number != len(steps) + 1:
            raise ScriptError(f"step numbered {number}, expected {len(steps) + 1}", lineno)
        formula = parse(ftext, True)
        if just == "premise":
            steps.append(Step(formula, note=note))
            continue
        b = _BY.match(just)
        if not b:
            raise ScriptError(f"cannot parse justification {just!r}", lineno)
        cites = tuple(int(x) for x in re.split(r"[,\s]+", b.group(4).strip())) if b.group(4) else ()
        steps.append(Step(formula, b.group(1), b.group(2) or "fwd",
                          _parse_subst(b.group(3) or "", lineno), cites, note))
    if ruleset is None or goal is None:
        raise ScriptError("script needs 'ruleset:' and 'goal:' headers")
    return Derivation(ruleset, goal, steps, name, comments)


def format_script(d: Derivation) -> str:
    lines = [f"-- {c}" if c else "--" for c in d.comments]
    lines.append(f"ruleset: {d.ruleset}")
    lines.append(f"goal: {d.goal}")
    for i, st in enumerate(d.steps, 1):
        if st.is_premise:
            just = "premise"
        else:
            just = f"by {st.rule}"
            if st.direction != "fwd":
                just += f" {st.direction}"
            if st.subst:
                just += " {" + ", ".join(f"{k}:={to_text(v)}" for k, v in st.subst) + "}"
            if st.cites:
                just += " from " + ",".join(map(str, st.cites))
        line = f"{i}. {to_text(st.formula)} ; {just}"
        if st.note:
            line += f"  -- {st.note}"
        lines.append(line)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- rule sets

def _aux(items: Sequence[Tuple[str, str]], label: str) -> RuleSet:
    return RuleSet((named_rule(n, t, f"aux({label})") for n, t in items), name=label)


_AUX_TEXT = {
    # contextual forms of the S_bullet rules: the same schemata applied
    # underneath "(. & t) | u"
    "ctx": [
        ("c_and", "(~(~(~p & q) & s) & t) | u |- (~(~~p & s) & t) | u"),
        ("c_neg", "(~(~~p & q) & t) | u -||- (~(p & q) & t) | u"),
        ("c_neg_and",
         "(~(~p1 & p2) & t) | u , (~(~(p3 & p4) & p2) & t) | u |- (~(~(p1 & p4) & p2) & t) | u"),
        ("c_ass", "(~(p & q & s) & t) | u -||- (~(p & (q & s)) & t) | u"),
    ],
    "lattice": [
        ("r_or_bot", "p -||- p | 0"),
        ("r_dist_or_and", "p & q | r -||- (p | r) & (q | r)"),
    ],
}

AUX_RULES = {k: _aux(v, k) for k, v in _AUX_TEXT.items()}


def _term(term: str) -> RuleSet:
    parts = term.strip().split(":")
    kind, args = parts[0].lower(), parts[1:]
    try:
        if kind == "sdm":
            g = int(args[1]) if len(args) > 1 else 2
            return sdm_calculus(preset(args[0]).equations, g)
        if kind == "sdm-reduced":
            return sdm_calculus(preset(args[0]).equations, reduced=True)
        if kind == "ockham":
            return ockham_calculus(int(args[0]), int(args[1]))
        if kind == "omega":
            base = rules_from_equations(preset(args[0]).equations)
            rs = closure_upto(base, int(args[1]))
            rs.extend(builtin("R_F"))
            rs.name = f"omega:{args[0]}:{args[1]}"
            return rs
        if kind == "assertional":
            rs = sdm_calculus(preset(args[0]).equations)
            rs.extend(builtin("R_top"))
            return rs
        if kind == "builtin":
            return builtin(args[0])
        if kind == "aux":
            return AUX_RULES[args[0]]
    except (IndexError, KeyError, ValueError) as e:
        raise ScriptError(f"bad ruleset term {term!r}: {e}") from None
    raise ScriptError(f"unknown ruleset term {term!r}")


_RULESET_CACHE: Dict[str, RuleSet] = {}


def resolve_ruleset(spec: str) -> RuleSet:
    """Build a rule set from terms joined by ``+``: ``sdm:SDM[:g]``,
    ``sdm-reduced:SDM``, ``ockham:m:n``, ``omega:DN:n``, ``assertional:SDM``,
    ``builtin:R_F``, ``aux:ctx``."""
    key = " + ".join(t.strip() for t in spec.split("+"))
    if key not in _RULESET_CACHE:
        terms = key.split(" + ")
        rs = RuleSet(name=key)
        for t in terms:
            part = _term(t)
            for r in part:
                rs.add(r)
            for name, r in getattr(part, "aliases", {}).items():
                if name not in rs:
                    rs.aliases[name] = r
        _RULESET_CACHE[key] = rs
    return _RULESET_CACHE[key]


# ---------------------------------------------------------------- checking

def _fail(step: int, reason: str) -> CheckResult:
    return CheckResult(False, step, reason)


def check_derivation(rs: RuleSet, d: Derivation, goal: Optional[Consecution] = None) -> CheckResult:
    """Validate every step; the first failing step is reported."""
    goal = goal or d.goal
    premises = set(goal.premises)
    if not d.steps:
        return _fail(0, "empty derivation")
    for i, st in enumerate(d.steps, 1):
        if st.is_premise:
            if st.formula not in premises:
                return _fail(i, "premise not among the goal's premises")
            continue
        rule = rs.get(st.rule)
        if rule is None:
            return _fail(i, f"unknown rule {st.rule!r}")
        try:
            prem, concl = rule.direction(st.direction)
        except ValueError as e:
            return _fail(i, str(e))
        if any(c < 1 or c >= i for c in st.cites):
            return _fail(i, "bad citation: cited steps must precede the step")
        if len(st.cites) != len(prem):
            return _fail(i, f"bad citation: rule has {len(prem)} premises, "
                            f"{len(st.cites)} cited")
        s = st.substitution()
        want = Counter(substitute(p, s) for p in prem)
        have = Counter(d.steps[c - 1].formula for c in st.cites)
        if want != have:
            return _fail(i, "substitution mismatch: instantiated premises differ from cited steps")
        if substitute(concl, s) != st.formula:
            return _fail(i, "substitution mismatch: instantiated conclusion differs from the step")
    if d.steps[-1].formula != goal.conclusion:
        return _fail(len(d.steps), "conclusion mismatch: last step is not the goal")
    return CheckResult(True)


# ---------------------------------------------------------------- proving

@dataclass(frozen=True)
class SearchBudget:
    max_formula_size: int = 40
    max_steps: int = 20000
    max_depth: int = 12
    max_seconds: Optional[float] = None

    def __post_init__(self):
        if min(self.max_formula_size, self.max_steps, self.max_depth) < 1:
            raise ValueError("budget limits must be positive")


@dataclass(frozen=True)
class ProofExhausted:
    budget: SearchBudget
    derived: int
    depth: int
    reason: str

    def __bool__(self):
        return False


def _head(f: Formula) -> str:
    return type(f).__name__


def _combos(prem: Sequence[Formula], pool: Dict[str, List[int]], facts: List[Formula],
            new_from: int, binding: Dict[str, Formula], chosen: List[int]
            ) -> Iterator[Tuple[Dict[str, Formula], List[int]]]:
    """Matches of all premises against facts, using at least one fact of
    index ``>= new_from``."""
    if not prem:
        if not chosen or max(chosen) >= new_from:
            yield binding, list(chosen)
        return
    p = prem[0]
    candidates = pool["*"] if isinstance(p, Var) else pool.get(_head(p), [])
    for idx in candidates:
        b = match(p, facts[idx], binding)
        if b is None:
            continue
        chosen.append(idx)
        yield from _combos(prem[1:], pool, facts, new_from, b, chosen)
        chosen.pop()


def prove(rs: RuleSet, goal: Consecution, budget: SearchBudget = SearchBudget()
          ) -> Union[Derivation, ProofExhausted]:
    """Breadth-first saturation by rounds; rule premises are matched at the
    root of derived formulas.  Rule variables that occur only in the
    conclusion range over subformulas of the goal plus 0 and 1."""
    start = time.monotonic()
    universe: List[Formula] = []
    for f in goal.premises + (goal.conclusion,):
        for g in subformulas(f):
            if g not in universe:
                universe.append(g)
    for c in (BOT, TOP):
        if c not in universe:
            universe.append(c)

    facts: List[Formula] = []
    origin: List[Step] = []
    index: Dict[Formula, int] = {}
    pool: Dict[str, List[int]] = {"*": []}

    def add(f: Formula, step: Step) -> bool:
        if f in index or size(f) > budget.max_formula_size:
            return False
        index[f] = len(facts)
        facts.append(f)
        origin.append(step)
        pool["*"].append(index[f])
        pool.setdefault(_head(f), []).append(index[f])
        return True

    for p in goal.premises:
        add(p, Step(p))
    directions = [(r.name, which, prem, concl) for r in rs for which, (prem, concl) in r.directions()]
    extra_vars = []
    for name, which, prem, concl in directions:
        bound = set()
        for p in prem:
            bound.update(variables(p))
        extra_vars.append([v for v in variables(concl) if v not in bound])

    new_from = 0
    depth = 0
    while goal.conclusion not in index:
        if depth >= budget.max_depth:
            return ProofExhausted(budget, len(facts), depth, "depth limit")
        depth += 1
        round_end = len(facts)
        frozen_pool = {k: [i for i in v if i < round_end] for k, v in pool.items()}
        for (name, which, prem, concl), free in zip(directions, extra_vars):
            if not prem and depth > 1:
                continue
            for binding, cited in _combos(prem, frozen_pool, facts, new_from, {}, []):
                choices = [binding]
                for v in free:
                    choices = [dict(b, **{v: u}) for b in choices for u in universe]
                for b in choices:
                    f = substitute(concl, b)
                    if f in index:
                        continue
                    subst = tuple(sorted((k, w) for k, w in b.items()))
                    cites = tuple(i + 1 for i in cited)
                    add(f, Step(f, name, which, subst, cites))
                    if f == goal.conclusion:
                        return _extract(rs, goal, facts, origin, index)
                    if len(facts) >= budget.max_steps:
                        return ProofExhausted(budget, len(facts), depth, "step limit")
                if budget.max_seconds is not None and time.monotonic() - start > budget.max_seconds:
                    return ProofExhausted(budget, len(facts), depth, "time limit")
        if len(facts) == round_end:
            return ProofExhausted(budget, len(facts), depth, "saturated")
        new_from = round_end
    return _extract(rs, goal, facts, origin, index)


def _extract(rs: RuleSet, goal: Consecution, facts, origin, index) -> Derivation:
    """Keep only the steps the goal depends on, renumbered in derivation order."""
    needed = set()
    stack = [index[goal.conclusion]]
    while stack:
        i = stack.pop()
        if i in needed:
            continue
        needed.add(i)
        stack.extend(c - 1 for c in origin[i].cites)
    order = sorted(needed)
    renum = {old: new for new, old in enumerate(order, 1)}
    d = Derivation(rs.name, goal)
    for old in order:
        st = origin[old]
        d.steps.append(Step(st.formula, st.rule, st.direction, st.subst,
                            tuple(renum[c - 1] for c in st.cites)))
    return d


# ---------------------------------------------------------------- corpus

CORPUS_PACKAGE = "hilbert_forge.corpus"
CORPUS_SUFFIX = ".drv"


def load_corpus() -> Dict[str, Derivation]:
    """The shipped scripts, by name, in name order."""
    from importlib import resources
    out = {}
    files = sorted(p for p in resources.files(CORPUS_PACKAGE).iterdir()
                   if p.name.endswith(CORPUS_SUFFIX))
    for p in files:
        name = p.name[:-len(CORPUS_SUFFIX)]
        out[name] = parse_script(p.read_text(), name)
    return out


def ruleset_class(spec: str) -> str:
    """The variety a corpus rule set is meant to be sound for."""
    head = spec.split("+")[0].strip().split(":")
    if head[0] == "ockham":
        return f"Berman({head[1]},{head[2]})"
    if head[0] in ("sdm", "sdm-reduced", "omega", "assertional"):
        return head[1]
    return "DN"


@dataclass
class ReplayEntry:
    name: str
    check: CheckResult
    semantic: Optional[bool]  # goal valid over the class's small algebras

    @property
    def ok(self) -> bool:
        return bool(self.check) and self.semantic is not False


@dataclass
class ReplayReport:
    entries: List[ReplayEntry]
    aux_sound: Dict[str, bool]

    @property
    def ok(self) -> bool:
        return bool(self.entries) and all(e.ok for e in self.entries) and all(self.aux_sound.values())

    def lines(self) -> List[str]:
        out = []
        for e in self.entries:
            sem = {True: "valid", False: "INVALID", None: "skipped"}[e.semantic]
            out.append(f"{'ok  ' if e.ok else 'FAIL'} {e.name}: {e.check}; semantics {sem}")
        for name, ok in self.aux_sound.items():
            out.append(f"{'ok  ' if ok else 'FAIL'} aux rule {name}: {'sound' if ok else 'UNSOUND'}")
        return out


# auxiliary rules and the class each must be sound for
_AUX_CLASS = {"ctx": "SDM", "lattice": "DN"}


def corpus_replay(semantic_bound: int = 4, aux_bound: int = 5) -> ReplayReport:
    """Check every shipped script, confirm each goal is valid over the small
    algebras of its class, and confirm the auxiliary rules are sound."""
    from .search import algebras
    from .semantics import order_entails, rule_sound
    entries = []
    for name, d in load_corpus().items():
        result = check_derivation(resolve_ruleset(d.ruleset), d)
        sem = None
        if semantic_bound:
            sem = order_entails(algebras(ruleset_class(d.ruleset), semantic_bound), d.goal)[0]
        entries.append(ReplayEntry(name, result, sem))
    aux = {}
    for label, cls in _AUX_CLASS.items():
        algs = algebras(cls, aux_bound)
        for r in AUX_RULES[label]:
            aux[r.name] = rule_sound(r, algs)[0]
    return ReplayReport(entries, aux)
