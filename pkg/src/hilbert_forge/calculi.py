"""Hilbert rule schemata and the generators that turn equational presentations
into calculi.

A :class:`Rule` with ``bidirectional=True`` stands for the pair of
formula-to-formula rules read in both directions and counts as one rule.
:class:`RuleSet` deduplicates up to renaming of schematic variables, so a
rule whose directions are all already present is dropped (and remembered as
an alias of the member that covers it).
"""
from __future__ import annotations

import itertools
import re
import warnings
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .syntax import (
    TOP, And, Equation, Formula, Neg, Or, Var, conj, fresh, g_n,
    is_balanced, neg_depth, negs, parse, strip_comment, substitute, to_text,
    variables,
)

__all__ = [
    "Rule", "RuleSet", "Presentation", "preset", "PRESET_NAMES",
    "rules_from_equations", "closure_layer", "closure_upto", "builtin",
    "g_rule", "g_layers", "sdm_calculus", "ockham_calculus",
    "relative_extension", "equations_from_rules", "parse_equations",
    "rule_is_balanced", "ruleset_depth", "ruleset_balanced", "named_rule",
    "format_rules", "parse_rules",
]

Direction = Tuple[Tuple[Formula, ...], Formula]


@dataclass(frozen=True)
class Rule:
    name: str
    premises: Tuple[Formula, ...]
    conclusion: Formula
    bidirectional: bool = False
    provenance: str = "user"

    def __post_init__(self):
        object.__setattr__(self, "premises", tuple(self.premises))
        if self.bidirectional and len(self.premises) != 1:
            raise ValueError(f"bidirectional rule {self.name!r} needs exactly one premise")

    @property
    def formula_to_formula(self) -> bool:
        return len(self.premises) == 1

    def formulas(self) -> Tuple[Formula, ...]:
        return self.premises + (self.conclusion,)

    def direction(self, which: str = "fwd") -> Direction:
        if which == "fwd":
            return self.premises, self.conclusion
        if which == "rev" and self.bidirectional:
            return (self.conclusion,), self.premises[0]
        raise ValueError(f"rule {self.name!r} has no direction {which!r}")

    def directions(self) -> List[Tuple[str, Direction]]:
        out = [("fwd", self.direction("fwd"))]
        if self.bidirectional:
            out.append(("rev", self.direction("rev")))
        return out

    def expand(self) -> List["Rule"]:
        """Split a bidirectional rule into its two formula-to-formula rules."""
        if not self.bidirectional:
            return [self]
        return [
            Rule(f"{self.name}.{tag}", prem, concl, False, self.provenance)
            for tag, (prem, concl) in self.directions()
        ]

    def __str__(self) -> str:
        if self.bidirectional:
            return f"{self.name}: {to_text(self.premises[0])} -||- {to_text(self.conclusion)}"
        prem = " , ".join(to_text(p) for p in self.premises)
        return f"{self.name}: {prem} |- {to_text(self.conclusion)}".replace(":  |-", ": |-")


def named_rule(name: str, text: str, provenance: str = "user") -> Rule:
    """Build a rule from ``"f1 , f2 |- g"`` or ``"f -||- g"`` (reserved names allowed)."""
    if "-||-" in text:
        lhs, rhs = text.split("-||-")
        return Rule(name, (parse(lhs, True),), parse(rhs, True), True, provenance)
    lhs, rhs = text.split("|-")
    prem = tuple(parse(p, True) for p in lhs.split(",")) if lhs.strip() else ()
    return Rule(name, prem, parse(rhs, True), False, provenance)


def _rename(formulas: Sequence[Formula]) -> Tuple[str, ...]:
    mapping: Dict[str, Formula] = {}
    for f in formulas:
        for v in variables(f):
            if v not in mapping:
                mapping[v] = Var(f"v{len(mapping)}")
    return tuple(to_text(substitute(f, mapping)) for f in formulas)


def direction_key(premises: Sequence[Formula], conclusion: Formula) -> Tuple[str, ...]:
    """Canonical form of a single rule direction up to variable renaming and
    premise order."""
    best = None
    for perm in itertools.permutations(premises):
        key = (str(len(perm)),) + _rename(tuple(perm) + (conclusion,))
        if best is None or key < best:
            best = key
    return best


class RuleSet:
    """Ordered, deduplicated collection of rules addressable by name."""

    def __init__(self, rules: Iterable[Rule] = (), name: str = ""):
        self.name = name
        self._rules: List[Rule] = []
        self._by_name: Dict[str, Rule] = {}
        self._covered: set = set()
        self.aliases: Dict[str, Rule] = {}
        for r in rules:
            self.add(r)

    def add(self, rule: Rule) -> bool:
        """Add ``rule`` unless it is a renamed copy; returns True if added."""
        if rule.name in self._by_name or rule.name in self.aliases:
            existing = self.get(rule.name)
            if self._keys(existing) == self._keys(rule):
                return False
            raise ValueError(f"duplicate rule name {rule.name!r}")
        keys = self._keys(rule)
        if keys <= self._covered:
            self.aliases[rule.name] = rule
            return False
        self._covered |= keys
        self._rules.append(rule)
        self._by_name[rule.name] = rule
        return True

    @staticmethod
    def _keys(rule: Rule) -> frozenset:
        return frozenset(direction_key(*d) for _, d in rule.directions())

    def extend(self, rules: Iterable[Rule]) -> "RuleSet":
        for r in rules:
            self.add(r)
        return self

    def get(self, name: str) -> Optional[Rule]:
        """Look a rule up by name; dropped duplicates resolve to themselves."""
        return self._by_name.get(name) or self.aliases.get(name)

    def __getitem__(self, name: str) -> Rule:
        r = self.get(name)
        if r is None:
            raise KeyError(name)
        return r

    def __contains__(self, name: str) -> bool:
        return self.get(name) is not None

    def __iter__(self) -> Iterator[Rule]:
        return iter(self._rules)

    def __len__(self) -> int:
        return len(self._rules)

    @property
    def rules(self) -> List[Rule]:
        return list(self._rules)

    def without(self, provenance: str) -> "RuleSet":
        return RuleSet((r for r in self._rules if r.provenance != provenance), self.name)

    def counts(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for r in self._rules:
            out[r.provenance] = out.get(r.provenance, 0) + 1
        return out

    def covers(self, rule: Rule) -> bool:
        return self._keys(rule) <= self._covered


def _union(*parts: Iterable[Rule], name: str = "") -> RuleSet:
    rs = RuleSet(name=name)
    for part in parts:
        rs.extend(part)
    return rs


def rule_is_balanced(rule: Rule) -> bool:
    return is_balanced(rule.formulas())


def ruleset_depth(rules: Iterable[Rule]) -> int:
    return max((neg_depth(f) for r in rules for f in r.formulas()), default=0)


def ruleset_balanced(rules: Iterable[Rule]) -> bool:
    return all(rule_is_balanced(r) for r in rules)


# ---------------------------------------------------------------- presentations

@dataclass
class Presentation:
    name: str
    equations: List[Equation] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.equations)


def parse_equations(text: str, allow_reserved: bool = False) -> List[Equation]:
    """Parse an equation file: one ``lhs = rhs`` per line, optionally prefixed
    by ``name:``."""
    eqs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = strip_comment(raw).strip()
        if not line:
            continue
        name = ""
        if ":" in line:
            name, line = (s.strip() for s in line.split(":", 1))
        if line.count("=") != 1:
            raise ValueError(f"line {lineno}: expected exactly one '='")
        lhs, rhs = line.split("=")
        eqs.append(Equation(parse(lhs, allow_reserved), parse(rhs, allow_reserved),
                            name or f"E{len(eqs) + 1}"))
    return eqs


_DN_TEXT = """
L1a: x | y = y | x
L1b: x & y = y & x
L2a: x | (y | z) = (x | y) | z
L2b: x & (y & z) = (x & y) & z
L3a: x | x = x
L3b: x & x = x
L4a: x | x & y = x
L4b: x & (x | y) = x
L5a: x & 0 = 0
L5b: x | 1 = 1
L6:  x & (y | z) = x & y | x & z
N1:  ~0 = 1
N2:  ~(x | y) = ~x & ~y
"""

_SDM_TEXT = """
SDM1: ~1 = 0
SDM2: ~~(x & y) = ~~x & ~~y
SDM3: ~x = ~~~x
"""

_DM_TEXT = "DM: ~~x = x"
_PL_TEXT = "PL: x & ~(x & y) = x & ~y"
_O_TEXT = "O: ~(x & y) = ~x | ~y"
# Boolean algebras: De Morgan and pseudo-complemented, plus the complement laws.
_B_TEXT = """
B1: x & ~x = 0
B2: x | ~x = 1
"""

PRESET_NAMES = ("DN", "SDM", "DM", "PL", "O", "B", "Berman(m,n)")


def _berman_equation(m: int, n: int) -> Equation:
    x = Var("x")
    return Equation(negs(2 * m + n, x), negs(n, x), "Berman")


def parse_berman(name: str) -> Optional[Tuple[int, int]]:
    m = re.fullmatch(r"\s*(?:berman|O)\s*[\(:]\s*(\d+)\s*[,:]\s*(\d+)\s*\)?\s*", name, re.I)
    return (int(m.group(1)), int(m.group(2))) if m else None


def preset(name: str) -> Presentation:
    """Equational presentation of a named variety."""
    dn = parse_equations(_DN_TEXT)
    sdm = dn + parse_equations(_SDM_TEXT)
    sdm1 = sdm[13:14]
    key = name.strip().upper()
    if key == "DN":
        return Presentation("DN", dn)
    if key == "SDM":
        return Presentation("SDM", sdm)
    if key == "DM":
        return Presentation("DM", sdm + parse_equations(_DM_TEXT))
    if key == "PL":
        return Presentation("PL", sdm + parse_equations(_PL_TEXT))
    if key == "O":
        return Presentation("O", dn + sdm1 + parse_equations(_O_TEXT))
    if key == "B":
        return Presentation("B", sdm + parse_equations(_DM_TEXT) + parse_equations(_PL_TEXT)
                            + parse_equations(_B_TEXT))
    mn = parse_berman(name)
    if mn is not None:
        m, n = mn
        if m < 1 or n < 0:
            raise ValueError(f"Berman variety needs m >= 1 and n >= 0, got ({m},{n})")
        return Presentation(f"Berman({m},{n})",
                            dn + sdm1 + parse_equations(_O_TEXT) + [_berman_equation(m, n)])
    raise ValueError(f"unknown preset {name!r}; expected one of {', '.join(PRESET_NAMES)}")


# ---------------------------------------------------------------- generators

_SCHEMATIC = ("p", "q", "r", "s")


def _schematic_name(i: int) -> str:
    return _SCHEMATIC[i] if i < len(_SCHEMATIC) else f"p{i}"


def rules_from_equations(eqs: Iterable[Equation], name: str = "R_Eq") -> RuleSet:
    """One bidirectional rule per equation, equation variables renamed to
    p, q, r, s, p4, ... in order of first occurrence."""
    rs = RuleSet(name=name)
    for i, eq in enumerate(eqs):
        mapping: Dict[str, Formula] = {}
        for v in variables(eq.lhs) + variables(eq.rhs):
            if v not in mapping:
                mapping[v] = Var(_schematic_name(len(mapping)))
        rs.add(Rule(eq.name or f"E{i + 1}", (substitute(eq.lhs, mapping),),
                    substitute(eq.rhs, mapping), True, "R_Eq"))
    return rs


def _single_premise(rules: Iterable[Rule]) -> List[Rule]:
    out = []
    for r in rules:
        if not r.formula_to_formula:
            raise ValueError(f"rule {r.name!r} is not formula-to-formula")
        out.extend(r.expand())
    return out


def closure_layer(rs: Iterable[Rule], n: int) -> RuleSet:
    """The n-th layer: layer 0 is the input; each next layer closes the
    previous one under disjunction and conjunction with a fresh variable and
    under contraposition."""
    layer = RuleSet(_single_premise(rs), name="layer0")
    for k in range(n):
        qk = fresh(f"q{k}")
        nxt = RuleSet(name=f"layer{k + 1}")
        for r in layer:
            (phi,), psi = r.premises, r.conclusion
            tag = f"layer({k + 1})"
            nxt.add(Rule(f"{r.name}/or{k}", (Or(phi, qk),), Or(psi, qk), False, tag))
            nxt.add(Rule(f"{r.name}/and{k}", (And(phi, qk),), And(psi, qk), False, tag))
            nxt.add(Rule(f"{r.name}/neg", (Neg(psi),), Neg(phi), False, tag))
        layer = nxt
    return layer


def closure_upto(rs: Iterable[Rule], n: int) -> RuleSet:
    rs = list(rs)
    return _union(*(closure_layer(rs, k) for k in range(n + 1)), name=f"R_<={n}")


_BUILTIN_TEXT = {
    "R_C": [
        ("r_comm_and", "p & q |- q & p"),
        ("r_comm_or", "p | q |- q | p"),
    ],
    "R_F": [
        ("r_top", "|- 1"),
        ("r_adj", "p , q |- p & q"),
        ("r_or_intro", "p |- p | q"),
    ],
    "R_bullet": [
        ("r_or_bot", "p -||- p | 0"),
        ("r_and_top", "p | r -||- p & 1 | r"),
        ("r_neg_top", "~(p & 1) | r -||- ~p | r"),
        ("r_dist", "(p | q) & r -||- p & r | q & r"),
        ("r_ass", "p1 & p2 & p3 | q -||- p1 & (p2 & p3) | q"),
        ("r_dm_neg_or", "~(p | q) -||- ~p & ~q"),
    ],
    "S_bullet": [
        ("r_and", "~~(p & q) | r |- ~~p | r"),
        ("r_neg", "~(~~p & q) -||- ~(p & q)"),
        ("r_neg_and", "~(~p1 & p2) , ~(~(p3 & p4) & p2) |- ~(~(p1 & p4) & p2)"),
    ],
    "R_top": [
        ("r_WP", "p & (~(p & q) | r) |- ~q | r"),
        ("r_Q", "p & (~(~q & r) | s) |- ~(~(p & q) & r) | s"),
    ],
    "R_and": [
        ("r_and1", "p & q |- p"),
        ("r_and2", "p & q |- q"),
    ],
    "R_in": [
        ("r_in_and", "p , q |- p & q"),
    ],
    "wxc": [
        ("r_wxc", "p & ~p |- ~q"),
    ],
    "r_P": [
        ("r_P", "p & ~(p & q) -||- p & ~q"),
    ],
}


def builtin(name: str) -> RuleSet:
    """Fixed rule sets: R_C, R_F, R_bullet, S_bullet, R_top (plus the helper
    sets R_and, R_in, wxc, r_P)."""
    aliases = {"R_•": "R_bullet", "S_•": "S_bullet", "R_⊤": "R_top", "R_•": "R_bullet"}
    key = aliases.get(name, name)
    if key not in _BUILTIN_TEXT:
        raise ValueError(f"unknown builtin rule set {name!r}")
    return RuleSet((named_rule(n, t, f"builtin({key})") for n, t in _BUILTIN_TEXT[key]),
                   name=key)


def g_rule(r: Rule, n: int) -> Rule:
    """Wrap a formula-to-formula rule in the n-th g-pattern inside ``| #q``;
    odd n swaps the direction."""
    if not r.formula_to_formula:
        raise ValueError(f"rule {r.name!r} is not formula-to-formula")
    q = fresh("q")
    up, dn = r.premises[0], r.conclusion
    if n % 2:
        up, dn = dn, up
    return Rule(f"{r.name}@g{n}", (Or(g_n(n, up), q),), Or(g_n(n, dn), q),
                r.bidirectional, f"g_layer({n})")


def g_layers(rs: Iterable[Rule], n: int) -> RuleSet:
    """The input rules followed by their g-layers 0..n."""
    rs = list(rs)
    out = RuleSet(rs, name=f"R^g_<={n}")
    for k in range(n + 1):
        out.extend(g_rule(r, k) for r in rs)
    return out


def _canonical_equation(eq: Equation) -> frozenset:
    return frozenset({direction_key((eq.lhs,), eq.rhs), direction_key((eq.rhs,), eq.lhs)})


def sdm_calculus(eqs: Iterable[Equation], g_max: int = 2, reduced: bool = False) -> RuleSet:
    """Finite calculus for the order-preserving logic of a variety containing
    the semi-De Morgan equations: g-layers 0..2 of the equation rules plus the
    fixed auxiliary sets S_bullet, R_bullet and R_F.

    ``reduced=True`` drops the plain equation rules, which remain derivable
    from their layer-0 versions with r_and_top and r_or_bot.
    """
    eqs = list(eqs)
    have = {_canonical_equation(e) for e in eqs}
    missing = [e.name for e in preset("SDM").equations if _canonical_equation(e) not in have]
    if missing:
        warnings.warn(f"presentation lacks semi-De Morgan equations {missing}; "
                      "the calculus may be incomplete", stacklevel=2)
    base = rules_from_equations(eqs)
    rs = _union(g_layers(base, g_max), builtin("S_bullet"), builtin("R_bullet"),
                builtin("R_F"), name="sdm" if not reduced else "sdm-reduced")
    if reduced:
        rs = rs.without("R_Eq")
        rs.name = "sdm-reduced"
    return rs


def relative_extension(extra: Iterable[Rule], g_max: int = 2) -> RuleSet:
    """Rules to add to an SDM-based calculus for extra equations: their g-layers."""
    extra = list(extra)
    out = RuleSet(name="relative")
    for k in range(g_max + 1):
        out.extend(g_rule(r, k) for r in extra)
    return out


def s_rule(r: Rule, k: int) -> Rule:
    """``~^k phi | #t / ~^k psi | #t`` for even k; direction swapped for odd k."""
    if r.bidirectional or not r.formula_to_formula:
        raise ValueError("s-layers take single-direction formula-to-formula rules")
    t = fresh("t")
    up, dn = r.premises[0], r.conclusion
    if k % 2:
        up, dn = dn, up
    return Rule(f"{r.name}@s{k}", (Or(negs(k, up), t),), Or(negs(k, dn), t), False,
                f"s_layer({k})")


def ockham_calculus(m: int, n: int) -> RuleSet:
    """Finite calculus for the Berman variety O^m_n, with the axiom ``|- 1``."""
    if m < 1 or n < 0:
        raise ValueError(f"Berman variety needs m >= 1 and n >= 0, got ({m},{n})")
    base = _union(rules_from_equations(preset(f"Berman({m},{n})").equations),
                  builtin("R_and"), name="R_and^mn")
    directions = [d for r in base for d in r.expand()]
    out = RuleSet(base, name=f"ockham({m},{n})")
    for k in range(2 * m + n + 1):
        out.extend(s_rule(r, k) for r in directions)
    out.extend(builtin("R_in"))
    out.add(builtin("R_F")["r_top"])
    return out


def equations_from_rules(rs: Iterable[Rule]) -> List[Equation]:
    """``conj(premises) & conclusion = conj(premises)`` per rule direction;
    axioms map to ``conclusion = 1``."""
    eqs = []
    for r in rs:
        for tag, (prem, concl) in r.directions():
            name = r.name if not r.bidirectional else f"{r.name}.{tag}"
            if prem:
                c = conj(prem)
                eqs.append(Equation(And(c, concl), c, name))
            else:
                eqs.append(Equation(concl, TOP, name))
    return eqs


# ---------------------------------------------------------------- rule files

def format_rules(rs: RuleSet) -> str:
    """One rule per line, ``name: premises |- conclusion  -- provenance``."""
    lines = [f"-- {rs.name}: {len(rs)} rules" if rs.name else f"-- {len(rs)} rules"]
    lines += [f"{r}  -- {r.provenance}" for r in rs]
    return "\n".join(lines) + "\n"


def parse_rules(text: str, name: str = "") -> RuleSet:
    """Inverse of ``format_rules``; a trailing comment is read as the provenance."""
    rs = RuleSet(name=name)
    for lineno, raw in enumerate(text.splitlines(), 1):
        body, _, comment = raw.partition("--")
        if not body.strip():
            continue
        if ":" not in body:
            raise ValueError(f"line {lineno}: expected 'name: rule'")
        rname, rtext = body.split(":", 1)
        try:
            rs.add(named_rule(rname.strip(), rtext, comment.strip() or "file"))
        except ValueError as e:
            raise ValueError(f"line {lineno}: {e}") from None
    return rs
