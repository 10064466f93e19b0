"""Builders for the shipped derivation scripts.

Three families:

* ``cong``: for a rule of a g-layered calculus, from ``phi`` to ``psi`` one
  can also go from ``phi | q`` to ``psi | q``, from ``phi & q`` to
  ``psi & q`` and from ``~psi`` to ``~phi``.  Shown for an equation rule and
  for its layers 0 and 1.
* ``lift``: layers ``2n+3`` and ``2n+4`` are derivable from the layers
  below with the S_bullet rules, at n = 0 and 1.
* ``ockham``: the same three closure properties for the Berman-variety
  calculi at (m, n) = (1, 0) and (1, 1).

Scripts are built by matching: each step names a rule and the cited steps,
the substitution is found by matching the rule premises against the cited
formulas, and the conclusion is computed from it.  The checker later
re-validates the stored substitutions without any search.
"""
from __future__ import annotations

from typing import Dict, List, Optional, Tuple

from .calculi import RuleSet
from .engine import Derivation, format_script, resolve_ruleset
from .semantics import Consecution
from .syntax import Formula, Neg, Or, And, BOT, Var, g_n, match, negs, parse, substitute

__all__ = ["Builder", "build_corpus", "corpus_texts"]


class Builder:
    """Incremental derivation writer over a resolved rule set."""

    def __init__(self, ruleset: str, goal_premises: Tuple[Formula, ...], name: str,
                 comments: List[str]):
        self.rs: RuleSet = resolve_ruleset(ruleset)
        self.d = Derivation(ruleset, Consecution(goal_premises, BOT), name=name,
                            comments=list(comments))

    def formula(self, i: int) -> Formula:
        return self.d.steps[i - 1].formula

    def premise(self, f: Formula) -> int:
        return self.d.premise(f)

    def by(self, rule: str, *cites: int, direction: str = "fwd",
           extra: Optional[Dict[str, Formula]] = None, note: str = "") -> int:
        r = self.rs[rule]
        prem, concl = r.direction(direction)
        binding: Optional[Dict[str, Formula]] = dict(extra or {})
        for p, c in zip(prem, cites):
            binding = match(p, self.formula(c), binding)
            if binding is None:
                raise ValueError(f"{self.d.name}: {rule} {direction} does not match step {c}")
        return self.d.by(substitute(concl, binding), rule, binding, cites, direction, note)

    def done(self) -> Derivation:
        self.d.goal = Consecution(self.d.goal.premises, self.d.steps[-1].formula)
        return self.d


# ---------------------------------------------------------------- helpers

P, Q, U = Var("p"), Var("q"), Var("u")


def _layer(n: int, f: Formula) -> Formula:
    """``g_n(f)`` with its generated variables renamed to a0..an."""
    return substitute(g_n(n, f), {f"#q{i}": Var(f"a{i}") for i in range(n + 1)})


# ---------------------------------------------------------------- cong

_SDM_RULESET = "sdm:SDM"
# the sample equation rule: ~p -||- ~~~p
_EQ = "SDM3"
_PHI, _PSI = parse("~p"), parse("~~~p")


def _cong_rule() -> List[Derivation]:
    out = []
    b = Builder(_SDM_RULESET, (Or(_PHI, Q),), "cong-eq-i",
                ["congruence, case (i): join with a fresh q, for an equation rule"])
    s = b.premise(Or(_PHI, Q))
    s = b.by("r_and_top", s)
    s = b.by(f"{_EQ}@g0", s, extra={"#q0": parse("1")})
    b.by("r_and_top", s, direction="rev")
    out.append(b.done())

    b = Builder(_SDM_RULESET, (And(_PHI, Q),), "cong-eq-ii",
                ["congruence, case (ii): meet with a fresh q, for an equation rule"])
    s = b.premise(And(_PHI, Q))
    s = b.by("r_or_bot", s)
    s = b.by(f"{_EQ}@g0", s)
    b.by("r_or_bot", s, direction="rev")
    out.append(b.done())

    b = Builder(_SDM_RULESET, (Neg(_PSI),), "cong-eq-iii",
                ["congruence, case (iii): negation reverses the rule, for an equation rule",
                 "the layer-1 rule needs the shape (~(x & a0) & a1) | q, so both",
                 "& 1 wrappers are introduced and removed explicitly"])
    s = b.premise(Neg(_PSI))
    s = b.by("r_or_bot", s)
    s = b.by("r_neg_top", s, direction="rev")
    s = b.by("r_and_top", s)
    s = b.by(f"{_EQ}@g1", s)
    s = b.by("r_and_top", s, direction="rev")
    s = b.by("r_neg_top", s)
    b.by("r_or_bot", s, direction="rev")
    out.append(b.done())
    return out


def _up_dn(j: int) -> Tuple[Formula, Formula]:
    return (_PSI, _PHI) if j % 2 else (_PHI, _PSI)


def _cong_layer(j: int) -> List[Derivation]:
    up, _ = _up_dn(j)
    c = Var("c")
    rule = f"{_EQ}@g{j}"
    top = Or(_layer(j, up), c)
    out = []

    b = Builder(_SDM_RULESET, (Or(top, Q),), f"cong-g{j}-i",
                [f"congruence, case (i), for the layer-{j} rule"])
    s = b.premise(Or(top, Q))
    s = b.by("L2a", s, direction="rev")
    s = b.by(rule, s)
    b.by("L2a", s)
    out.append(b.done())

    b = Builder(_SDM_RULESET, (And(top, Q),), f"cong-g{j}-ii",
                [f"congruence, case (ii), for the layer-{j} rule"])
    s = b.premise(And(top, Q))
    s = b.by("r_dist", s)
    s = b.by("r_ass", s)
    s = b.by(rule, s)
    s = b.by("r_ass", s, direction="rev")
    b.by("r_dist", s, direction="rev")
    out.append(b.done())

    dn_top = Or(_layer(j, _up_dn(j)[1]), c)
    b = Builder(_SDM_RULESET, (Neg(dn_top),), f"cong-g{j}-iii",
                [f"congruence, case (iii), for the layer-{j} rule, via layer {j + 1}",
                 "a single closing application of r_dm_neg_or suffices"])
    s = b.premise(Neg(dn_top))
    s = b.by("r_dm_neg_or", s)
    s = b.by("r_or_bot", s)
    s = b.by(f"{_EQ}@g{j + 1}", s)
    s = b.by("r_or_bot", s, direction="rev")
    b.by("r_dm_neg_or", s, direction="rev")
    out.append(b.done())
    return out


# ---------------------------------------------------------------- lift

def _lift(n: int, second: bool) -> Derivation:
    """Layer N = 2n+3 (or 2n+4 when ``second``) from layers up to 2n+2."""
    big = 2 * n + 4 if second else 2 * n + 3
    rule = f"{_EQ}@g{big - 2}"
    up = _PHI if big % 2 == 0 else _PSI
    r = Var("r")
    ruleset = f"sdm:SDM:{2 * n + 2} + aux:ctx"
    start = Or(_layer(big, up), r)
    label = "second" if second else "first"
    b = Builder(ruleset, (start,), f"lift-n{n}-{'ii' if second else 'i'}",
                [f"layer {big} from layers up to {2 * n + 2} ({label} case, n = {n})",
                 "the S_bullet rules act under the context (. & t) | u; the aux:ctx",
                 "rules are those contextual forms and are checked for soundness",
                 "every line follows from earlier lines by one rule application"])
    g0 = b.premise(start)
    s = b.by("c_and", g0)
    s = b.by("c_neg", s)
    s = b.by("c_ass", s)
    s = b.by(rule, s)
    s = b.by("c_ass", s, direction="rev")
    g1 = b.by("c_neg", s, direction="rev")
    b.by("c_neg_and", g1, g0)
    return b.done()


# ---------------------------------------------------------------- ockham

def _ockham(m: int, n: int) -> List[Derivation]:
    ruleset = f"ockham:{m}:{n} + aux:lattice"
    tag = f"ockham-{m}-{n}"
    top_k = 2 * m + n
    out = []
    pu, qu = Or(P, U), Or(Q, U)

    # the meet-introduction rule
    b = Builder(ruleset, (pu, qu), f"{tag}-in-i",
                [f"Berman ({m},{n}): meet introduction, case (i), joined with u"])
    s1, s2 = b.premise(pu), b.premise(qu)
    s = b.by("r_in_and", s1, s2)
    b.by("r_dist_or_and", s, direction="rev")
    out.append(b.done())

    pa, qa = And(P, U), And(Q, U)
    b = Builder(ruleset, (pa, qa), f"{tag}-in-ii",
                [f"Berman ({m},{n}): meet introduction, case (ii), met with u",
                 "projections and re-introduction replace one associativity step"])
    s1, s2 = b.premise(pa), b.premise(qa)
    x = b.by("r_and1", s1)
    y = b.by("r_and1", s2)
    z = b.by("r_and2", s1)
    s = b.by("r_in_and", x, y)
    b.by("r_in_and", s, z)
    out.append(b.done())

    b = Builder(ruleset, (Neg(And(P, Q)),), f"{tag}-in-iii",
                [f"Berman ({m},{n}): meet introduction, case (iii)"])
    s = b.premise(Neg(And(P, Q)))
    b.by("O", s)
    out.append(b.done())

    # an equation rule: ~(p & q) |- ~p | ~q
    phi, psi = parse("~(p & q)"), parse("~p | ~q")
    b = Builder(ruleset, (Or(phi, U),), f"{tag}-eq-i",
                [f"Berman ({m},{n}): equation rule, case (i)"])
    s = b.premise(Or(phi, U))
    b.by("O.fwd@s0", s)
    out.append(b.done())

    b = Builder(ruleset, (And(phi, U),), f"{tag}-eq-ii",
                [f"Berman ({m},{n}): equation rule, case (ii)"])
    s = b.premise(And(phi, U))
    x = b.by("r_and1", s)
    y = b.by("r_and2", s)
    x = b.by("O", x)
    b.by("r_in_and", x, y)
    out.append(b.done())

    b = Builder(ruleset, (Neg(psi),), f"{tag}-eq-iii",
                [f"Berman ({m},{n}): equation rule, case (iii)"])
    s = b.premise(Neg(psi))
    s = b.by("r_or_bot", s)
    s = b.by("O.fwd@s1", s)
    b.by("r_or_bot", s, direction="rev")
    out.append(b.done())

    # s-layer rules of O.fwd, whose up/dn formulas swap with parity
    def ud(k: int) -> Tuple[Formula, Formula]:
        return (psi, phi) if k % 2 else (phi, psi)

    k = 1
    up, dn = ud(k)
    q, r = Var("u"), Var("w")
    b = Builder(ruleset, (Or(Or(negs(k, up), q), r),), f"{tag}-s{k}-i",
                [f"Berman ({m},{n}): layer-{k} rule, case (i)"])
    s = b.premise(Or(Or(negs(k, up), q), r))
    s = b.by("L2a", s, direction="rev")
    s = b.by(f"O.fwd@s{k}", s)
    b.by("L2a", s)
    out.append(b.done())

    b = Builder(ruleset, (And(Or(negs(k, up), q), r),), f"{tag}-s{k}-ii",
                [f"Berman ({m},{n}): layer-{k} rule, case (ii)"])
    s = b.premise(And(Or(negs(k, up), q), r))
    x = b.by("r_and1", s)
    y = b.by("r_and2", s)
    x = b.by(f"O.fwd@s{k}", x)
    b.by("r_in_and", x, y)
    out.append(b.done())

    for k, sub in ((1, "low"), (top_k, "wrap")):
        up, dn = ud(k)
        start = Neg(Or(negs(k, dn), q))
        notes = [f"Berman ({m},{n}): layer-{k} rule, case (iii)"]
        if sub == "low":
            notes.append(f"k + 1 = {k + 1} <= {top_k}: the next layer applies directly;")
        else:
            notes.append(f"k + 1 = {k + 1} > {top_k}: rewrite with the Berman rule first;")
        notes.append("the meet with ~u is split and rebuilt around the layer rule")
        b = Builder(ruleset, (start,), f"{tag}-s{k}-iii-{sub}", notes)
        s = b.premise(start)
        s = b.by("N2", s)
        x = b.by("r_and1", s)
        y = b.by("r_and2", s)
        if sub == "wrap":
            x = b.by("Berman", x)
            layer = n + 1
        else:
            layer = k + 1
        x = b.by("r_or_bot", x)
        x = b.by(f"O.fwd@s{layer}", x)
        x = b.by("r_or_bot", x, direction="rev")
        if sub == "wrap":
            x = b.by("Berman", x, direction="rev")
        s = b.by("r_in_and", x, y)
        b.by("N2", s, direction="rev")
        out.append(b.done())
    return out


# ---------------------------------------------------------------- corpus

def build_corpus() -> List[Derivation]:
    out = _cong_rule() + _cong_layer(0) + _cong_layer(1)
    for n in (0, 1):
        out += [_lift(n, False), _lift(n, True)]
    for m, n in ((1, 0), (1, 1)):
        out += _ockham(m, n)
    return out


def corpus_texts() -> Dict[str, str]:
    """Script name -> script text, as shipped in the package."""
    return {d.name: format_script(d) for d in build_corpus()}
