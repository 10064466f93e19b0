"""Consequence over finite algebras: single matrices, the order-preserving
(all lattice filters) logic and the top-assertional logic; rule soundness.

Every check is exhaustive over valuations.  Witnesses are the first failure
in canonical order (direction, algebra, designated set, valuation).
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .algebra import (
    AlgebraError, FiniteAlgebra, Matrix, evaluate, filters, satisfies, valuation_grid,
)
from .calculi import Rule
from .syntax import BOT, TOP, And, Formula, Neg, Var, conj, to_text, variables

__all__ = [
    "Consecution", "Mode", "FILTER", "ASSERTIONAL", "Witness", "matrix_entails",
    "order_entails", "filter_entails", "assertional_entails", "rule_sound",
    "check_rules", "verdict_record",
]


@dataclass(frozen=True)
class Consecution:
    premises: Tuple[Formula, ...]
    conclusion: Formula

    def __post_init__(self):
        object.__setattr__(self, "premises", tuple(self.premises))

    def __str__(self) -> str:
        return f"{' , '.join(to_text(p) for p in self.premises)} |- {to_text(self.conclusion)}".lstrip()

    @classmethod
    def of_rule(cls, rule: Rule, which: str = "fwd") -> "Consecution":
        prem, concl = rule.direction(which)
        return cls(prem, concl)


@dataclass(frozen=True)
class Mode:
    """How designated sets are chosen: every lattice filter, just ``{top}``,
    or one fixed set."""
    kind: str
    designated: Optional[FrozenSet[int]] = None

    def designated_sets(self, alg: FiniteAlgebra) -> List[FrozenSet[int]]:
        if self.kind == "filter":
            return _filters(alg)
        if self.kind == "assertional":
            return [frozenset({alg.top})]
        return [self.designated]

    @classmethod
    def parse(cls, text: str) -> "Mode":
        key = text.strip().lower()
        if key in ("filter", "order"):
            return FILTER
        if key in ("assertional", "top"):
            return ASSERTIONAL
        if key.startswith("fixed:"):
            return cls("fixed", frozenset(int(x) for x in key[6:].split(",") if x))
        raise ValueError(f"unknown semantics mode {text!r}")


FILTER = Mode("filter")
ASSERTIONAL = Mode("assertional")


@lru_cache(maxsize=4096)
def _filters(alg: FiniteAlgebra) -> List[FrozenSet[int]]:
    return filters(alg)


@lru_cache(maxsize=4096)
def _is_dn(alg: FiniteAlgebra) -> bool:
    return satisfies(alg, "DN")


@dataclass
class Witness:
    """A countermodel: replaying ``matrix_entails`` on it yields False."""
    algebra: FiniteAlgebra
    designated: FrozenSet[int]
    valuation: Dict[str, int]
    target: str = ""
    algebra_index: Optional[int] = None
    direction: str = "fwd"

    def matrix(self) -> Matrix:
        return Matrix(self.algebra, self.designated)

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "direction": self.direction,
            "algebra": self.algebra.to_dict(),
            "designated": sorted(self.designated),
            "valuation": dict(self.valuation),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Witness":
        return cls(FiniteAlgebra.from_dict(d["algebra"]), frozenset(d["designated"]),
                   {k: int(v) for k, v in d["valuation"].items()}, d.get("target", ""),
                   direction=d.get("direction", "fwd"))


def _names(c: Consecution) -> List[str]:
    names: Dict[str, None] = {}
    for f in c.premises + (c.conclusion,):
        for v in variables(f):
            names.setdefault(v)
    return list(names)


def _grid(alg: FiniteAlgebra, c: Consecution):
    names = _names(c)
    env = valuation_grid(alg.size, names)
    shape = (alg.size ** len(names),)
    prem = [evaluate(alg, p, env, shape) for p in c.premises]
    concl = evaluate(alg, c.conclusion, env, shape)
    return names, env, prem, concl


def _first_failure(prem, concl, designated: FrozenSet[int], size: int) -> Optional[int]:
    mask = np.zeros(size, dtype=bool)
    mask[list(designated)] = True
    bad = ~mask[concl]
    for p in prem:
        bad &= mask[p]
    if bad.any():
        return int(np.argmax(bad))
    return None


def _valuation(names, env, i) -> Dict[str, int]:
    return {v: int(env[v][i]) for v in names}


def matrix_entails(m: Matrix, c: Consecution, target: str = "") -> Tuple[bool, Optional[Witness]]:
    names, env, prem, concl = _grid(m.algebra, c)
    i = _first_failure(prem, concl, m.designated, m.algebra.size)
    if i is None:
        return True, None
    return False, Witness(m.algebra, m.designated, _valuation(names, env, i), target or str(c))


class _Stack:
    """Same-size algebras evaluated together: values are (algebra, valuation)
    arrays and the operation tables are flattened side by side."""

    def __init__(self, algebras: Sequence[FiniteAlgebra], mode: Mode):
        self.algebras = list(algebras)
        a, n = len(self.algebras), self.algebras[0].size
        self.n = n
        i32 = np.int32
        self.meet = np.concatenate([x.meet.ravel() for x in self.algebras]).astype(i32)
        self.join = np.concatenate([x.join.ravel() for x in self.algebras]).astype(i32)
        self.neg = np.concatenate([x.neg for x in self.algebras]).astype(i32)
        self.base2 = (np.arange(a, dtype=i32) * (n * n))[:, None]
        self.base1 = (np.arange(a, dtype=i32) * n)[:, None]
        self.bot = np.array([x.bot for x in self.algebras], dtype=i32)[:, None]
        self.top = np.array([x.top for x in self.algebras], dtype=i32)[:, None]
        self.sets = [mode.designated_sets(x) for x in self.algebras]
        width = max(len(d) for d in self.sets)
        # designated masks, padded rows designate everything so they never fail
        self.masks = np.ones((a, width, n), dtype=bool)
        for i, sets in enumerate(self.sets):
            for j, d in enumerate(sets):
                self.masks[i, j] = False
                self.masks[i, j, list(d)] = True

    def evaluate(self, f: Formula, env: Dict[str, np.ndarray], shape) -> np.ndarray:
        cache: Dict[Formula, np.ndarray] = {}
        n = self.n

        def ev(g: Formula) -> np.ndarray:
            hit = cache.get(g)
            if hit is not None:
                return hit
            if isinstance(g, Var):
                val = np.broadcast_to(env[g.name].astype(np.int32), shape)
            elif g == BOT:
                val = np.broadcast_to(self.bot, shape)
            elif g == TOP:
                val = np.broadcast_to(self.top, shape)
            elif isinstance(g, Neg):
                val = self.neg.take(self.base1 + ev(g.arg))
            elif isinstance(g, And):
                val = self.meet.take(self.base2 + ev(g.left) * np.int32(n) + ev(g.right))
            else:
                val = self.join.take(self.base2 + ev(g.left) * np.int32(n) + ev(g.right))
            cache[g] = val
            return val

        return ev(f)

    def first_failure(self, c: Consecution, names: List[str], mode: Mode):
        """(algebra position, designated-set position, valuation index, env) or None."""
        a = len(self.algebras)
        env = valuation_grid(self.n, names)
        shape = (a, self.n ** len(names))
        concl = self.evaluate(c.conclusion, env, shape)
        prem = [self.evaluate(p, env, shape) for p in c.premises]
        if mode.kind == "filter":
            # some filter fails iff the premises' meet is not below the
            # conclusion (its principal filter is the witness of that);
            # screen with this and resolve the exact witness on one algebra
            if prem:
                lower = prem[0]
                for p in prem[1:]:
                    lower = self.meet.take(self.base2 + lower * np.int32(self.n) + p)
                bad = self.meet.take(self.base2 + lower * np.int32(self.n) + concl) != lower
            else:
                bad = concl != self.top
            failing = bad.any(axis=1)
            if not failing.any():
                return None
            i = int(np.argmax(failing))
            for j in range(len(self.sets[i])):
                mask = self.masks[i, j]
                row = ~mask[concl[i]]
                for p in prem:
                    row &= mask[p[i]]
                if row.any():
                    return i, j, int(np.argmax(row)), env
            raise AssertionError("inequality failure without a failing filter")
        rows = np.arange(a)[:, None, None]
        cols = np.arange(self.masks.shape[1])[None, :, None]
        bad = ~self.masks[rows, cols, concl[:, None, :]]
        for p in prem:
            bad &= self.masks[rows, cols, p[:, None, :]]
        if not bad.any():
            return None
        flat = int(np.argmax(bad.reshape(-1)))
        i, rest = divmod(flat, bad.shape[1] * bad.shape[2])
        j, v = divmod(rest, bad.shape[2])
        return i, j, v, env


_CHUNK = 1 << 21


@lru_cache(maxsize=64)
def _stacks(algebras: Tuple[FiniteAlgebra, ...], mode: Mode, nvars: int) -> List[Tuple[int, _Stack]]:
    """Runs of consecutive same-size algebras, chunked to bound memory; each
    with the index of its first algebra."""
    out = []
    start = 0
    while start < len(algebras):
        n = algebras[start].size
        per = max(1, _CHUNK // (n ** nvars * 4))
        end = start
        while end < len(algebras) and algebras[end].size == n and end - start < per:
            end += 1
        out.append((start, _Stack(algebras[start:end], mode)))
        start = end
    return out


def _entails_over(algebras: Sequence[FiniteAlgebra], c: Consecution, mode: Mode,
                  target: str = "", direction: str = "fwd") -> Tuple[bool, Optional[Witness]]:
    names = _names(c)
    for offset, stack in _stacks(tuple(algebras), mode, len(names)):
        hit = stack.first_failure(c, names, mode)
        if hit is not None:
            i, j, v, env = hit
            return False, Witness(stack.algebras[i], stack.sets[i][j], _valuation(names, env, v),
                                  target or str(c), offset + i, direction)
    return True, None


def filter_entails(algebras: Sequence[FiniteAlgebra], c: Consecution) -> Tuple[bool, Optional[Witness]]:
    """Conjunction of ``matrix_entails`` over every algebra and lattice filter."""
    return _entails_over(algebras, c, FILTER)


def assertional_entails(algebras: Sequence[FiniteAlgebra], c: Consecution) -> Tuple[bool, Optional[Witness]]:
    return _entails_over(algebras, c, ASSERTIONAL)


def order_entails(algebras: Sequence[FiniteAlgebra], c: Consecution) -> Tuple[bool, Optional[Witness]]:
    """Order-preserving consequence via the lattice inequality: premises
    entail the conclusion iff their meet is below it in every algebra; with
    no premises the conclusion must be top.  The witness designates the
    principal filter of the premises' meet."""
    for idx, alg in enumerate(algebras):
        if not _is_dn(alg):
            raise AlgebraError(f"algebra #{idx} is not a distributive lattice with negation")
        names = _names(c)
        env = valuation_grid(alg.size, names)
        shape = (alg.size ** len(names),)
        concl = evaluate(alg, c.conclusion, env, shape)
        if c.premises:
            lower = evaluate(alg, conj(c.premises), env, shape)
            bad = alg.meet[lower, concl] != lower
        else:
            lower = np.full(shape, alg.top, dtype=np.int64)
            bad = concl != alg.top
        if bad.any():
            i = int(np.argmax(bad))
            a = int(lower[i])
            up = frozenset(b for b in range(alg.size) if alg.leq(a, b))
            return False, Witness(alg, up, _valuation(names, env, i), str(c), idx)
    return True, None


def rule_sound(rule: Rule, algebras: Sequence[FiniteAlgebra], mode: Mode = FILTER
               ) -> Tuple[bool, Optional[Witness]]:
    """Soundness of every direction of ``rule`` over the given algebras."""
    for which, (prem, concl) in rule.directions():
        ok, w = _entails_over(algebras, Consecution(prem, concl), mode, rule.name, which)
        if not ok:
            return ok, w
    return True, None


def _sound_job(args):
    rule, algebras, mode = args
    return rule_sound(rule, algebras, mode)


def check_rules(rules: Iterable[Rule], algebras: Sequence[FiniteAlgebra], mode: Mode = FILTER,
                jobs: int = 1) -> List[Tuple[Rule, bool, Optional[Witness]]]:
    """``rule_sound`` for many rules; results keep the input order for any ``jobs``."""
    rules = list(rules)
    algebras = list(algebras)
    if jobs <= 1 or len(rules) < 2:
        results = [rule_sound(r, algebras, mode) for r in rules]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sound_job, [(r, algebras, mode) for r in rules],
                                    chunksize=max(1, len(rules) // (4 * jobs))))
    return [(r, ok, w) for r, (ok, w) in zip(rules, results)]


def verdict_record(target: str, mode: str, bound: Optional[int], verdict: str,
                   witness: Optional[Witness] = None) -> dict:
    rec = {"id": target, "mode": mode, "bound": bound, "verdict": verdict}
    if witness is not None:
        rec["witness"] = witness.to_dict()
    return rec
