"""Finite bounded distributive lattices with negation.

Elements are ``0..size-1``; operations are integer tables.  Formula
evaluation is vectorised over all valuations at once with numpy fancy
indexing, which keeps exhaustive checks over 5-7 variables cheap.
"""
from __future__ import annotations

import itertools
from functools import lru_cache
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .calculi import preset
from .syntax import And, Equation, Formula, Neg, Var, BOT, TOP, variables

__all__ = [
    "FiniteAlgebra", "Matrix", "Congruence", "MalformedAlgebra", "AlgebraError",
    "Diagnostic", "validate", "satisfies", "class_equations", "evaluate", "eval_formula",
    "valuation_grid", "holds", "filters", "is_filter", "congruences", "leibniz",
    "leibniz_sdm", "quotient", "star_algebra", "from_order", "boolean2",
    "chain3_pl", "belnap", "CONGRUENCE_BOUND",
]

CONGRUENCE_BOUND = 7


class MalformedAlgebra(ValueError):
    pass


class AlgebraError(ValueError):
    """An operation's precondition on its algebra or matrix does not hold."""


def _table(data, shape, name) -> np.ndarray:
    arr = np.array(data, dtype=np.int64)
    if arr.shape != shape:
        raise MalformedAlgebra(f"{name} table has shape {arr.shape}, expected {shape}")
    arr.setflags(write=False)
    return arr


class FiniteAlgebra:
    """Operation tables on ``{0..size-1}``.  Immutable."""

    __slots__ = ("size", "meet", "join", "neg", "bot", "top", "name", "_key")

    def __init__(self, meet, join, neg, bot: int, top: int, name: str = ""):
        neg_arr = np.array(neg, dtype=np.int64)
        n = neg_arr.shape[0] if neg_arr.ndim == 1 else -1
        if n < 1:
            raise MalformedAlgebra("negation table must be a non-empty list")
        self.size = n
        self.meet = _table(meet, (n, n), "meet")
        self.join = _table(join, (n, n), "join")
        self.neg = _table(neg, (n,), "neg")
        for t, label in ((self.meet, "meet"), (self.join, "join"), (self.neg, "neg")):
            if t.min() < 0 or t.max() >= n:
                raise MalformedAlgebra(f"{label} table has entries outside 0..{n - 1}")
        if not (0 <= bot < n and 0 <= top < n):
            raise MalformedAlgebra("bounds outside the carrier")
        self.bot, self.top = int(bot), int(top)
        self.name = name
        self._key = (n, self.bot, self.top, self.meet.tobytes(), self.join.tobytes(),
                     self.neg.tobytes())

    def __eq__(self, other):
        return isinstance(other, FiniteAlgebra) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"<FiniteAlgebra{label} size={self.size} neg={self.neg.tolist()}>"

    def leq(self, a: int, b: int) -> bool:
        return int(self.meet[a, b]) == a

    def order_matrix(self) -> np.ndarray:
        return self.meet == np.arange(self.size)[:, None]

    def to_dict(self) -> dict:
        return {"size": self.size, "meet": self.meet.tolist(), "join": self.join.tolist(),
                "neg": self.neg.tolist(), "bot": self.bot, "top": self.top}

    @classmethod
    def from_dict(cls, d: Mapping, name: str = "") -> "FiniteAlgebra":
        try:
            alg = cls(d["meet"], d["join"], d["neg"], d["bot"], d["top"], name or d.get("name", ""))
        except KeyError as e:
            raise MalformedAlgebra(f"missing field {e}") from None
        if "size" in d and int(d["size"]) != alg.size:
            raise MalformedAlgebra("size field disagrees with table sizes")
        return alg


@dataclass(frozen=True)
class Matrix:
    algebra: FiniteAlgebra
    designated: FrozenSet[int]

    def __post_init__(self):
        object.__setattr__(self, "designated", frozenset(int(x) for x in self.designated))

    def mask(self) -> np.ndarray:
        m = np.zeros(self.algebra.size, dtype=bool)
        m[list(self.designated)] = True
        return m

    def to_dict(self) -> dict:
        d = self.algebra.to_dict()
        d["designated"] = sorted(self.designated)
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "Matrix":
        return cls(FiniteAlgebra.from_dict(d), frozenset(d.get("designated", [])))


# ---------------------------------------------------------------- evaluation

def valuation_grid(size: int, names: Sequence[str]) -> Dict[str, np.ndarray]:
    """All valuations of ``names`` as parallel arrays, in lexicographic order
    with the first name most significant."""
    k = len(names)
    if k == 0:
        return {}
    grids = _grids(size, k)
    return {v: grids[i] for i, v in enumerate(names)}


@lru_cache(maxsize=256)
def _grids(size: int, k: int) -> np.ndarray:
    grids = np.indices((size,) * k).reshape(k, -1)
    grids.setflags(write=False)
    return grids


def evaluate(alg: FiniteAlgebra, f: Formula, env: Mapping[str, np.ndarray],
             shape: Tuple[int, ...] = ()) -> np.ndarray:
    """Vectorised evaluation; every array in ``env`` must share one shape."""
    cache: Dict[Formula, np.ndarray] = {}
    if not shape:
        shape = next((a.shape for a in env.values()), (1,))

    def ev(g: Formula) -> np.ndarray:
        hit = cache.get(g)
        if hit is not None:
            return hit
        if isinstance(g, Var):
            try:
                val = env[g.name]
            except KeyError:
                raise AlgebraError(f"no value for variable {g.name!r}") from None
        elif g is BOT or g == BOT:
            val = np.full(shape, alg.bot, dtype=np.int64)
        elif g is TOP or g == TOP:
            val = np.full(shape, alg.top, dtype=np.int64)
        elif isinstance(g, Neg):
            val = alg.neg[ev(g.arg)]
        elif isinstance(g, And):
            val = alg.meet[ev(g.left), ev(g.right)]
        else:
            val = alg.join[ev(g.left), ev(g.right)]
        cache[g] = val
        return val

    return ev(f)


def eval_formula(alg: FiniteAlgebra, valuation: Mapping[str, int], f: Formula) -> int:
    env = {k: np.array([v], dtype=np.int64) for k, v in valuation.items()}
    return int(evaluate(alg, f, env, (1,))[0])


def holds(alg: FiniteAlgebra, eq: Equation) -> Tuple[bool, Optional[Dict[str, int]]]:
    """Exhaustive validity check; on failure also returns the first
    falsifying valuation in lexicographic order."""
    names = list(dict.fromkeys(variables(eq.lhs) + variables(eq.rhs)))
    env = valuation_grid(alg.size, names)
    shape = (alg.size ** len(names),)
    bad = evaluate(alg, eq.lhs, env, shape) != evaluate(alg, eq.rhs, env, shape)
    if not bad.any():
        return True, None
    i = int(np.argmax(bad))
    return False, {v: int(env[v][i]) for v in names}


# ---------------------------------------------------------------- validation

@dataclass(frozen=True)
class Diagnostic:
    axiom: str
    equation: str
    passed: bool
    witness: Optional[Dict[str, int]] = None


_CLASS_CACHE: Dict[str, List[Equation]] = {}


def class_equations(cls: str) -> List[Equation]:
    key = cls.strip()
    if key not in _CLASS_CACHE:
        _CLASS_CACHE[key] = preset(key).equations
    return _CLASS_CACHE[key]


def validate(alg: FiniteAlgebra, cls: str = "DN") -> List[Diagnostic]:
    """Check every axiom of ``cls``; tables are checked for shape and range at
    construction time."""
    out = []
    for eq in class_equations(cls):
        ok, w = holds(alg, eq)
        out.append(Diagnostic(eq.name, str(eq), ok, w))
    return out


def satisfies(alg: FiniteAlgebra, cls: str) -> bool:
    return all(holds(alg, eq)[0] for eq in class_equations(cls))


# ---------------------------------------------------------------- filters

def is_filter(alg: FiniteAlgebra, subset: Iterable[int]) -> bool:
    s = set(subset)
    if not s:
        return False
    for a in s:
        for b in range(alg.size):
            if alg.leq(a, b) and b not in s:
                return False
        for b in s:
            if int(alg.meet[a, b]) not in s:
                return False
    return True


def filters(alg: FiniteAlgebra) -> List[FrozenSet[int]]:
    """All non-empty lattice filters, by brute force over subsets."""
    out = []
    for mask in range(1, 2 ** alg.size):
        s = [i for i in range(alg.size) if mask >> i & 1]
        if is_filter(alg, s):
            out.append(frozenset(s))
    out.sort(key=lambda f: (len(f), sorted(f)))
    return out


# ---------------------------------------------------------------- congruences

class Congruence:
    """A partition stored as least-representative labels."""

    __slots__ = ("labels",)

    def __init__(self, labels: Sequence[int]):
        rep: Dict[int, int] = {}
        out = []
        for i, lab in enumerate(labels):
            out.append(rep.setdefault(lab, i))
        self.labels = tuple(out)

    @classmethod
    def from_blocks(cls, size: int, blocks: Iterable[Iterable[int]]) -> "Congruence":
        labels = list(range(size))
        for block in blocks:
            block = sorted(block)
            for x in block:
                labels[x] = block[0]
        return cls(labels)

    def __eq__(self, other):
        return isinstance(other, Congruence) and self.labels == other.labels

    def __hash__(self):
        return hash(self.labels)

    def __repr__(self):
        return f"Congruence({self.blocks()})"

    def related(self, a: int, b: int) -> bool:
        return self.labels[a] == self.labels[b]

    def blocks(self) -> List[List[int]]:
        groups: Dict[int, List[int]] = {}
        for i, lab in enumerate(self.labels):
            groups.setdefault(lab, []).append(i)
        return list(groups.values())

    def pairs(self) -> Iterator[Tuple[int, int]]:
        for a, la in enumerate(self.labels):
            for b, lb in enumerate(self.labels):
                if la == lb:
                    yield a, b

    @property
    def is_identity(self) -> bool:
        return self.labels == tuple(range(len(self.labels)))

    @property
    def is_total(self) -> bool:
        return all(x == 0 for x in self.labels)

    def refines(self, other: "Congruence") -> bool:
        return all(other.related(a, b) for a, b in self.pairs())

    def compatible_with(self, designated: Iterable[int]) -> bool:
        d = set(designated)
        return all((a in d) == (b in d) for a, b in self.pairs())


def _set_partitions(n: int) -> Iterator[Tuple[int, ...]]:
    """Restricted growth strings of length n."""
    labels = [0] * n

    def rec(i: int, top: int):
        if i == n:
            yield tuple(labels)
            return
        for lab in range(top + 2):
            labels[i] = lab
            yield from rec(i + 1, max(top, lab))

    if n == 0:
        yield ()
        return
    yield from rec(1, 0)


def is_congruence(alg: FiniteAlgebra, theta: Congruence) -> bool:
    lab = np.array(theta.labels)
    for a, b in theta.pairs():
        if a >= b:
            continue
        if lab[alg.neg[a]] != lab[alg.neg[b]]:
            return False
        if (lab[alg.meet[a]] != lab[alg.meet[b]]).any():
            return False
        if (lab[alg.join[a]] != lab[alg.join[b]]).any():
            return False
    return True


def _check_bound(alg: FiniteAlgebra, bound: int) -> None:
    if alg.size > bound:
        raise AlgebraError(f"algebra of size {alg.size} exceeds congruence bound {bound}")


def congruences(alg: FiniteAlgebra, bound: int = CONGRUENCE_BOUND) -> List[Congruence]:
    """All congruences, by scanning every partition of the carrier."""
    _check_bound(alg, bound)
    out = []
    for rgs in _set_partitions(alg.size):
        theta = Congruence(rgs)
        if is_congruence(alg, theta):
            out.append(theta)
    return out


def _join(size: int, thetas: Iterable[Congruence]) -> Congruence:
    parent = list(range(size))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for th in thetas:
        for a, b in th.pairs():
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    return Congruence([find(i) for i in range(size)])


def leibniz(m: Matrix, bound: int = CONGRUENCE_BOUND) -> Congruence:
    """Largest congruence compatible with the designated set, as the join of
    all compatible congruences."""
    alg = m.algebra
    compatible = [th for th in congruences(alg, bound) if th.compatible_with(m.designated)]
    omega = _join(alg.size, compatible)
    if omega not in compatible:
        raise AlgebraError("compatible congruences have no largest element")
    return omega


def leibniz_sdm(m: Matrix) -> Congruence:
    """Leibniz congruence of a semi-De Morgan matrix with a filter, from the
    three separating conditions over parameters c1, c2, c3."""
    alg = m.algebra
    if not satisfies(alg, "SDM"):
        raise AlgebraError("leibniz_sdm needs a semi-De Morgan algebra")
    if not is_filter(alg, m.designated):
        raise AlgebraError("leibniz_sdm needs a lattice filter as designated set")
    D = m.mask()
    J, M, N = alg.join, alg.meet, alg.neg
    c = np.arange(alg.size)
    sigs = []
    for a in range(alg.size):
        s1 = D[J[a, c]]                                   # a | c1
        s2 = D[J[N[M[a, c]][:, None], c[None, :]]]         # ~(a & c2) | c1
        inner = N[M[a, c]]                                  # ~(a & c3)
        t = N[M[inner[:, None], c[None, :]]]                # ~(~(a & c3) & c2)
        s3 = D[J[t[:, :, None], c[None, None, :]]]          # ... | c1
        sigs.append((s1.tobytes(), s2.tobytes(), s3.tobytes()))
    return Congruence([sigs.index(sg) for sg in sigs])


def quotient(alg: FiniteAlgebra, theta: Congruence) -> FiniteAlgebra:
    if not is_congruence(alg, theta):
        raise AlgebraError("partition is not compatible with the operations")
    reps = sorted(set(theta.labels))
    index = {r: i for i, r in enumerate(reps)}
    cls = [index[theta.labels[x]] for x in range(alg.size)]
    meet = [[cls[alg.meet[a, b]] for b in reps] for a in reps]
    join = [[cls[alg.join[a, b]] for b in reps] for a in reps]
    neg = [cls[alg.neg[a]] for a in reps]
    return FiniteAlgebra(meet, join, neg, cls[alg.bot], cls[alg.top],
                         f"{alg.name}/theta" if alg.name else "")


def star_algebra(alg: FiniteAlgebra) -> FiniteAlgebra:
    """The image of negation with meet, ``a |* b = ~~(a | b)`` and negation
    restricted; a De Morgan algebra whenever ``alg`` is semi-De Morgan."""
    if not satisfies(alg, "SDM"):
        raise AlgebraError("star_algebra needs a semi-De Morgan algebra")
    image = sorted(set(int(x) for x in alg.neg))
    index = {e: i for i, e in enumerate(image)}
    nn = alg.neg[alg.neg]
    meet = [[index[int(alg.meet[a, b])] for b in image] for a in image]
    join = [[index[int(nn[alg.join[a, b]])] for b in image] for a in image]
    neg = [index[int(alg.neg[a])] for a in image]
    return FiniteAlgebra(meet, join, neg, index[alg.bot], index[alg.top],
                         f"{alg.name}*" if alg.name else "")


# ---------------------------------------------------------------- constructors

def from_order(size: int, less: Iterable[Tuple[int, int]], neg: Sequence[int],
               name: str = "") -> FiniteAlgebra:
    """Build an algebra from covering/ordering pairs ``(a, b)`` meaning a <= b;
    the reflexive-transitive closure must be a bounded lattice."""
    le = np.eye(size, dtype=bool)
    for a, b in less:
        le[a, b] = True
    for k in range(size):
        le |= le[:, [k]] & le[[k], :]
    meet = np.zeros((size, size), dtype=np.int64)
    join = np.zeros((size, size), dtype=np.int64)
    for a, b in itertools.product(range(size), repeat=2):
        lower = [x for x in range(size) if le[x, a] and le[x, b]]
        upper = [x for x in range(size) if le[a, x] and le[b, x]]
        glb = [x for x in lower if all(le[y, x] for y in lower)]
        lub = [x for x in upper if all(le[x, y] for y in upper)]
        if len(glb) != 1 or len(lub) != 1:
            raise MalformedAlgebra("order is not a lattice")
        meet[a, b], join[a, b] = glb[0], lub[0]
    bot = [x for x in range(size) if le[x].all()]
    top = [x for x in range(size) if le[:, x].all()]
    if not bot or not top:
        raise MalformedAlgebra("order is not bounded")
    return FiniteAlgebra(meet, join, neg, bot[0], top[0], name)


def boolean2() -> FiniteAlgebra:
    return from_order(2, [(0, 1)], [1, 0], "B2")


def chain3_pl() -> FiniteAlgebra:
    """The 3-chain 0 < a < 1 with pseudo-complement ~0 = 1, ~a = ~1 = 0."""
    return from_order(3, [(0, 1), (1, 2)], [2, 0, 0], "C3")


def belnap() -> FiniteAlgebra:
    """The four-element De Morgan lattice: 0 < a, b < 1 with ~a = a, ~b = b."""
    return from_order(4, [(0, 1), (0, 2), (1, 3), (2, 3)], [3, 1, 2, 0], "M4")
