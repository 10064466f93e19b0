"""Enumeration of small algebras up to isomorphism and countermodel search.

Lattices come first: every finite distributive lattice is the lattice of
down-sets of its poset of join-irreducibles, so posets are generated and
turned into lattices, which are then put in canonical form.  A negation
satisfying ``~0 = 1`` and ``~(x | y) = ~x & ~y`` on a distributive lattice is
fixed by its values on the join-irreducibles (join-irreducibles are
join-prime), and any choice of those values extends.  Negations are kept up
to lattice automorphism and filtered by the class equations.
"""
from __future__ import annotations

import itertools
import json
import os
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .algebra import FiniteAlgebra, class_equations, evaluate, valuation_grid
from .calculi import Rule, parse_berman, PRESET_NAMES
from .semantics import FILTER, Consecution, Mode, Witness, _entails_over
from .syntax import variables

__all__ = [
    "HARD_CAP", "SearchError", "EnumerationSpec", "Exhausted", "distributive_lattices",
    "enumerate_algebras", "find_countermodel", "export_algebras", "canonical_class",
    "CACHE_ENV", "algebras",
]

HARD_CAP = 7
CACHE_ENV = "HILBERT_FORGE_CACHE"

Lattice = Tuple[Tuple[int, ...], ...]  # canonical meet table, bot = 0, top = n - 1


class SearchError(ValueError):
    pass


def canonical_class(cls: str) -> str:
    """Normalise a class name: ``sdm`` -> ``SDM``, ``berman:1:0`` -> ``Berman(1,0)``."""
    berman = parse_berman(cls)
    if berman is not None:
        return f"Berman({berman[0]},{berman[1]})"
    up = cls.strip().upper()
    if up in PRESET_NAMES:
        return up
    raise SearchError(f"unknown class {cls!r}")


@dataclass(frozen=True)
class EnumerationSpec:
    cls: str = "DN"
    max_size: int = 4
    include_trivial: bool = False
    cap: int = HARD_CAP

    def __post_init__(self):
        object.__setattr__(self, "cls", canonical_class(self.cls))
        if self.max_size < 1:
            raise SearchError("max_size must be positive")
        if self.max_size > self.cap:
            raise SearchError(f"max_size {self.max_size} exceeds the cap of {self.cap}")


@dataclass(frozen=True)
class Exhausted:
    """No countermodel among the algebras of size at most ``bound``."""
    bound: int
    checked: int

    def __bool__(self):
        return False


# ---------------------------------------------------------------- lattices

def _posets(k: int) -> Iterator[Tuple[int, ...]]:
    """Naturally labelled posets on ``k`` points, as strict down-set bitmasks:
    ``below[j]`` holds the points strictly below ``j``, all smaller than ``j``."""
    def rec(below: List[int]):
        j = len(below)
        if j == k:
            yield tuple(below)
            return
        for mask in range(1 << j):
            if all(below[i] & ~mask == 0 for i in range(j) if mask >> i & 1):
                below.append(mask)
                yield from rec(below)
                below.pop()
    yield from rec([])


def _down_sets(below: Sequence[int]) -> List[int]:
    k = len(below)
    return [s for s in range(1 << k)
            if all(below[i] & ~s == 0 for i in range(k) if s >> i & 1)]


def _canonical_meet(meet: np.ndarray, bot: int, top: int) -> Lattice:
    n = meet.shape[0]
    inner = [x for x in range(n) if x not in (bot, top)]
    best = None
    for perm in itertools.permutations(range(1, n - 1)):
        label = np.empty(n, dtype=np.int64)
        label[bot], label[top] = 0, n - 1
        label[inner] = perm
        table = np.empty_like(meet)
        table[np.ix_(label, label)] = label[meet]
        key = tuple(map(tuple, table.tolist()))
        if best is None or key < best:
            best = key
    return best


@lru_cache(maxsize=None)
def distributive_lattices(size: int) -> Tuple[Lattice, ...]:
    """Canonical meet tables of the distributive lattices with ``size`` elements."""
    if size == 1:
        return (((0,),),)
    found = set()
    for k in range(1, size):
        for below in _posets(k):
            downs = _down_sets(below)
            if len(downs) != size:
                continue
            index = {s: i for i, s in enumerate(downs)}
            meet = np.array([[index[a & b] for b in downs] for a in downs], dtype=np.int64)
            found.add(_canonical_meet(meet, index[0], index[(1 << k) - 1]))
    return tuple(sorted(found))


def _join_table(meet: np.ndarray) -> np.ndarray:
    n = meet.shape[0]
    le = meet == np.arange(n)[:, None]
    join = np.empty_like(meet)
    for a in range(n):
        for b in range(n):
            upper = [x for x in range(n) if le[a, x] and le[b, x]]
            join[a, b] = next(x for x in upper if all(le[x, y] for y in upper))
    return join


def _automorphisms(meet: np.ndarray) -> List[np.ndarray]:
    n = meet.shape[0]
    autos = []
    for perm in itertools.permutations(range(1, n - 1)):
        s = np.array((0,) + perm + (n - 1,) if n > 1 else (0,), dtype=np.int64)
        if np.array_equal(s[meet], meet[np.ix_(s, s)]):
            autos.append(s)
    return autos


def _join_irreducibles(meet: np.ndarray, join: np.ndarray) -> List[int]:
    n = meet.shape[0]
    le = meet == np.arange(n)[:, None]
    out = []
    for x in range(1, n):
        lower = 0
        for y in range(n):
            if le[y, x] and y != x:
                lower = join[lower, y]
        if lower != x:
            out.append(x)
    return out


def _negations(meet: np.ndarray, join: np.ndarray) -> Iterator[Tuple[int, ...]]:
    """Every negation with ``~0 = 1`` and ``~(x | y) = ~x & ~y``, each once.

    Distinct choices on the join-irreducibles can extend to the same map
    (only the meets over down-sets matter), hence the ``seen`` set."""
    n = meet.shape[0]
    le = meet == np.arange(n)[:, None]
    irr = _join_irreducibles(meet, join)
    below = [[i for i, j in enumerate(irr) if le[j, x]] for x in range(n)]
    seen = set()
    for values in itertools.product(range(n), repeat=len(irr)):
        neg = []
        for x in range(n):
            v = n - 1
            for i in below[x]:
                v = meet[v, values[i]]
            neg.append(int(v))
        neg = tuple(neg)
        if neg not in seen:
            seen.add(neg)
            yield neg


def _orbit_min(neg: Tuple[int, ...], autos: Sequence[np.ndarray]) -> bool:
    arr = np.array(neg, dtype=np.int64)
    for s in autos:
        conj = np.empty_like(arr)
        conj[s] = s[arr]
        if tuple(conj.tolist()) < neg:
            return False
    return True


# ---------------------------------------------------------------- algebras

def _extra_equations(cls: str):
    return class_equations(cls)[13:]


def _passes(alg: FiniteAlgebra, equations) -> bool:
    for eq in equations:
        names = list(dict.fromkeys(variables(eq.lhs) + variables(eq.rhs)))
        env = valuation_grid(alg.size, names)
        shape = (alg.size ** len(names),)
        if not np.array_equal(evaluate(alg, eq.lhs, env, shape), evaluate(alg, eq.rhs, env, shape)):
            return False
    return True


def _cache_file(cls: str, size: int) -> Optional[Path]:
    root = os.environ.get(CACHE_ENV)
    if not root:
        return None
    slug = re.sub(r"[^A-Za-z0-9]+", "_", cls).strip("_")
    return Path(root) / f"{slug}-{size}.json"


def _generate(cls: str, size: int) -> List[FiniteAlgebra]:
    extra = _extra_equations(cls)
    needs_top = any(str(eq) == "~1 = 0" for eq in extra)
    out = []
    for meet_t in distributive_lattices(size):
        meet = np.array(meet_t, dtype=np.int64)
        join = _join_table(meet)
        autos = _automorphisms(meet)
        for neg in _negations(meet, join):
            if needs_top and size > 1 and neg[size - 1] != 0:
                continue
            if not _orbit_min(neg, autos):
                continue
            alg = FiniteAlgebra(meet, join, neg, 0, size - 1)
            if _passes(alg, extra):
                out.append(((meet_t, neg), alg))
    out.sort(key=lambda item: item[0])
    return [alg for _, alg in out]


@lru_cache(maxsize=None)
def _algebras_of_size(cls: str, size: int) -> Tuple[FiniteAlgebra, ...]:
    path = _cache_file(cls, size)
    if path is not None and path.exists():
        data = json.loads(path.read_text())
        algs = [FiniteAlgebra.from_dict(d) for d in data]
    else:
        algs = _generate(cls, size)
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps([a.to_dict() for a in algs]))
    return tuple(FiniteAlgebra(a.meet, a.join, a.neg, a.bot, a.top, f"{cls}/{size}.{i}")
                 for i, a in enumerate(algs))


def enumerate_algebras(spec: EnumerationSpec) -> Iterator[FiniteAlgebra]:
    """One representative per isomorphism class, by size and then table order."""
    for size in range(1 if spec.include_trivial else 2, spec.max_size + 1):
        yield from _algebras_of_size(spec.cls, size)


def algebras(cls: str, max_size: int, include_trivial: bool = False) -> List[FiniteAlgebra]:
    return list(enumerate_algebras(EnumerationSpec(cls, max_size, include_trivial)))


# ---------------------------------------------------------------- countermodels

Target = Union[Rule, Consecution]


def _directions(target: Target):
    if isinstance(target, Rule):
        return [(which, Consecution(p, c)) for which, (p, c) in target.directions()]
    return [("fwd", target)]


def find_countermodel(target: Target, spec: EnumerationSpec, mode: Mode = FILTER
                      ) -> Union[Witness, Exhausted]:
    """The first failure in enumeration order (algebra, direction, designated
    set, valuation), or ``Exhausted`` when there is none up to the bound."""
    name = target.name if isinstance(target, Rule) else str(target)
    dirs = _directions(target)
    checked = 0
    for idx, alg in enumerate(enumerate_algebras(spec)):
        checked += 1
        for which, c in dirs:
            ok, w = _entails_over([alg], c, mode, name, which)
            if not ok:
                w.algebra_index = idx
                return w
    return Exhausted(spec.max_size, checked)


def export_algebras(spec: EnumerationSpec, directory: Union[str, Path]) -> List[Path]:
    """Write every enumerated algebra to its own JSON file."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for alg in enumerate_algebras(spec):
        slug = re.sub(r"[^A-Za-z0-9.]+", "_", alg.name).strip("_")
        path = directory / f"{slug}.json"
        data = dict(alg.to_dict(), name=alg.name)
        path.write_text(json.dumps(data, sort_keys=True, indent=1) + "\n")
        paths.append(path)
    return paths
