"""Formulas over the signature {~, &, |, 0, 1}: parsing, printing, substitution
and the structural transformations used to build calculi.

Text syntax::

    formula := disj
    disj    := conj ('|' conj)*
    conj    := neg ('&' neg)*
    neg     := '~' neg | atom
    atom    := '0' | '1' | var | '(' formula ')'
    var     := [a-z][a-zA-Z0-9_]*

``0`` is bottom and ``1`` is top.  ``--`` starts a comment running to the end
of the line.  Variable names starting with ``#`` are reserved for generated
formulas and are rejected unless ``allow_reserved=True``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Set, Tuple

__all__ = [
    "Formula", "Var", "Neg", "And", "Or", "BOT", "TOP", "Equation",
    "ParseError", "parse", "to_text", "substitute", "variables", "size",
    "subformulas", "neg_depth", "var_depths", "is_balanced", "f_k", "g_n",
    "star", "fresh", "is_reserved", "match", "negs", "conj", "RESERVED_PREFIX",
]

RESERVED_PREFIX = "#"


class Formula:
    """Immutable term tree.  Equality is structural; hashes are cached."""

    __slots__ = ("_hash",)

    def __str__(self) -> str:
        return to_text(self)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({to_text(self)!r})"

    def __hash__(self) -> int:
        return self._hash

    # operator sugar, handy in tests and corpus builders
    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __invert__(self) -> "Formula":
        return Neg(self)


class Var(Formula):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        self._hash = hash(("v", name))

    def __eq__(self, other):
        return self is other or (type(other) is Var and other.name == self.name)

    __hash__ = Formula.__hash__

    def __reduce__(self):
        return (Var, (self.name,))


class _Const(Formula):
    __slots__ = ("symbol",)

    def __init__(self, symbol: str):
        self.symbol = symbol
        self._hash = hash(("c", symbol))

    def __eq__(self, other):
        return self is other or (type(other) is _Const and other.symbol == self.symbol)

    __hash__ = Formula.__hash__

    def __reduce__(self):
        return (_const, (self.symbol,))


BOT = _Const("0")
TOP = _Const("1")


def _const(symbol: str) -> _Const:
    return BOT if symbol == "0" else TOP


class Neg(Formula):
    __slots__ = ("arg",)

    def __init__(self, arg: Formula):
        self.arg = arg
        self._hash = hash(("n", arg._hash))

    def __eq__(self, other):
        return self is other or (
            type(other) is Neg and other._hash == self._hash and other.arg == self.arg
        )

    __hash__ = Formula.__hash__

    def __reduce__(self):
        return (Neg, (self.arg,))


class _Binary(Formula):
    __slots__ = ("left", "right")

    def __init__(self, left: Formula, right: Formula):
        self.left = left
        self.right = right
        self._hash = hash((type(self).__name__, left._hash, right._hash))

    def __eq__(self, other):
        return self is other or (
            type(other) is type(self)
            and other._hash == self._hash
            and other.left == self.left
            and other.right == self.right
        )

    __hash__ = Formula.__hash__

    def __reduce__(self):
        return (type(self), (self.left, self.right))


class And(_Binary):
    __slots__ = ()


class Or(_Binary):
    __slots__ = ()


@dataclass(frozen=True)
class Equation:
    lhs: Formula
    rhs: Formula
    name: str = ""

    def __str__(self) -> str:
        return f"{to_text(self.lhs)} = {to_text(self.rhs)}"


def fresh(name: str) -> Var:
    """A generated variable in the reserved namespace."""
    return Var(RESERVED_PREFIX + name)


def is_reserved(name: str) -> bool:
    return name.startswith(RESERVED_PREFIX)


def negs(k: int, f: Formula) -> Formula:
    for _ in range(k):
        f = Neg(f)
    return f


def conj(formulas: Iterable[Formula]) -> Formula:
    """Left-folded conjunction; the empty conjunction is top."""
    result: Optional[Formula] = None
    for f in formulas:
        result = f if result is None else And(result, f)
    return TOP if result is None else result


# ---------------------------------------------------------------- parsing

class ParseError(ValueError):
    def __init__(self, message: str, pos: int, text: str = ""):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos
        self.text = text


_VAR = re.compile(r"[a-z][a-zA-Z0-9_]*")
_RESERVED_SIMPLE = re.compile(r"#[A-Za-z0-9_]+")


def strip_comment(line: str) -> str:
    i = line.find("--")
    return line if i < 0 else line[:i]


def _tokenize(text: str, allow_reserved: bool) -> List[Tuple[str, str, int]]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif text.startswith("--", i):
            j = text.find("\n", i)
            i = n if j < 0 else j
        elif c in "~&|()":
            tokens.append((c, c, i))
            i += 1
        elif c in "01":
            tokens.append(("const", c, i))
            i += 1
        elif c == "#":
            if not allow_reserved:
                raise ParseError("reserved variable name in user input", i, text)
            if text.startswith("#n[", i):
                depth, j = 0, i + 2
                while j < n:
                    if text[j] == "[":
                        depth += 1
                    elif text[j] == "]":
                        depth -= 1
                        if depth == 0:
                            break
                    j += 1
                if j >= n:
                    raise ParseError("unterminated indexed variable", i, text)
                tokens.append(("var", text[i:j + 1], i))
                i = j + 1
            else:
                m = _RESERVED_SIMPLE.match(text, i)
                if not m:
                    raise ParseError("malformed reserved variable", i, text)
                tokens.append(("var", m.group(), i))
                i = m.end()
        else:
            m = _VAR.match(text, i)
            if not m:
                raise ParseError(f"unexpected character {c!r}", i, text)
            tokens.append(("var", m.group(), i))
            i = m.end()
    tokens.append(("eof", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, allow_reserved: bool):
        self.text = text
        self.tokens = _tokenize(text, allow_reserved)
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, message: str):
        raise ParseError(message, self.tokens[self.i][2], self.text)

    def formula(self) -> Formula:
        f = self.conj()
        while self.peek() == "|":
            self.take()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.neg()
        while self.peek() == "&":
            self.take()
            f = And(f, self.neg())
        return f

    def neg(self) -> Formula:
        if self.peek() == "~":
            self.take()
            return Neg(self.neg())
        return self.atom()

    def atom(self) -> Formula:
        kind, value, _ = self.tokens[self.i]
        if kind == "const":
            self.take()
            return _const(value)
        if kind == "var":
            self.take()
            return Var(value)
        if kind == "(":
            self.take()
            f = self.formula()
            if self.peek() != ")":
                self.fail("expected ')'")
            self.take()
            return f
        self.fail("expected a formula" if kind == "eof" else f"unexpected {value!r}")


def parse(text: str, allow_reserved: bool = False) -> Formula:
    """Parse one formula; raises ParseError with the offending position."""
    p = _Parser(text, allow_reserved)
    f = p.formula()
    if p.peek() != "eof":
        p.fail("trailing input")
    return f


# ---------------------------------------------------------------- printing

def _prec(f: Formula) -> int:
    if isinstance(f, Or):
        return 1
    if isinstance(f, And):
        return 2
    if isinstance(f, Neg):
        return 3
    return 4


def _text(f: Formula, need: int, out: List[str]) -> None:
    wrap = _prec(f) < need
    if wrap:
        out.append("(")
    if isinstance(f, Var):
        out.append(f.name)
    elif isinstance(f, _Const):
        out.append(f.symbol)
    elif isinstance(f, Neg):
        out.append("~")
        _text(f.arg, 3, out)
    elif isinstance(f, Or):
        _text(f.left, 1, out)
        out.append(" | ")
        _text(f.right, 2, out)
    else:
        _text(f.left, 2, out)
        out.append(" & ")
        _text(f.right, 3, out)
    if wrap:
        out.append(")")


def to_text(f: Formula) -> str:
    """Canonical text with minimal parentheses; ``parse(to_text(f)) == f``."""
    out: List[str] = []
    _text(f, 0, out)
    return "".join(out)


# ---------------------------------------------------------------- structure

def substitute(f: Formula, s: Mapping[str, Formula]) -> Formula:
    if not s:
        return f
    if isinstance(f, Var):
        return s.get(f.name, f)
    if isinstance(f, _Const):
        return f
    if isinstance(f, Neg):
        a = substitute(f.arg, s)
        return f if a is f.arg else Neg(a)
    left, right = substitute(f.left, s), substitute(f.right, s)
    if left is f.left and right is f.right:
        return f
    return type(f)(left, right)


def compose(s1: Mapping[str, Formula], s2: Mapping[str, Formula]) -> Dict[str, Formula]:
    """The substitution ``f -> substitute(substitute(f, s1), s2)``."""
    out = {k: substitute(v, s2) for k, v in s1.items()}
    for k, v in s2.items():
        out.setdefault(k, v)
    return out


def iter_nodes(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        if isinstance(g, Neg):
            stack.append(g.arg)
        elif isinstance(g, _Binary):
            stack.append(g.right)
            stack.append(g.left)


def variables(f: Formula) -> List[str]:
    """Variable names in order of first (left-to-right) occurrence."""
    seen: Dict[str, None] = {}
    for g in iter_nodes(f):
        if isinstance(g, Var):
            seen.setdefault(g.name)
    return list(seen)


def size(f: Formula) -> int:
    return sum(1 for _ in iter_nodes(f))


def subformulas(f: Formula) -> Set[Formula]:
    return set(iter_nodes(f))


def _leaf_depths(f: Formula, depth: int, out: List[Tuple[Formula, int]]) -> None:
    if isinstance(f, Neg):
        _leaf_depths(f.arg, depth + 1, out)
    elif isinstance(f, _Binary):
        _leaf_depths(f.left, depth, out)
        _leaf_depths(f.right, depth, out)
    else:
        out.append((f, depth))


def neg_depth(f: Formula) -> int:
    """Largest number of negations above any atomic occurrence."""
    out: List[Tuple[Formula, int]] = []
    _leaf_depths(f, 0, out)
    return max(d for _, d in out)


def var_depths(formulas: Iterable[Formula]) -> Dict[str, Set[int]]:
    depths: Dict[str, Set[int]] = {}
    for f in formulas:
        out: List[Tuple[Formula, int]] = []
        _leaf_depths(f, 0, out)
        for leaf, d in out:
            if isinstance(leaf, Var):
                depths.setdefault(leaf.name, set()).add(d)
    return depths


def is_balanced(formulas: Iterable[Formula]) -> bool:
    """True when every variable occurs at a single negation depth."""
    return all(len(ds) == 1 for ds in var_depths(formulas).values())


def f_k(k: int, f: Formula) -> Formula:
    """Replace each negated subformula sitting under exactly ``k`` negations by
    a fresh variable indexed by that subformula."""
    if isinstance(f, Neg):
        if k == 0:
            return fresh("n[" + to_text(f) + "]")
        return Neg(f_k(k - 1, f.arg))
    if isinstance(f, _Binary):
        return type(f)(f_k(k, f.left), f_k(k, f.right))
    return f


def g_n(n: int, f: Formula) -> Formula:
    """``g_0(f) = f & #q0`` and ``g_{i+1}(f) = ~g_i(f) & #q{i+1}``."""
    g = And(f, fresh("q0"))
    for i in range(1, n + 1):
        g = And(Neg(g), fresh(f"q{i}"))
    return g


def star(f: Formula) -> Formula:
    """Translation into the image of double negation (no simplification)."""
    if isinstance(f, (Var, _Const)):
        return Neg(Neg(f))
    if isinstance(f, Neg):
        return Neg(star(f.arg))
    if isinstance(f, And):
        return And(star(f.left), star(f.right))
    return Neg(Neg(Or(star(f.left), star(f.right))))


def match(pattern: Formula, target: Formula,
          binding: Optional[Dict[str, Formula]] = None) -> Optional[Dict[str, Formula]]:
    """One-way matching: extend ``binding`` so that pattern instantiates to
    target, or return None.  The input binding is not mutated."""
    b = dict(binding) if binding else {}
    stack = [(pattern, target)]
    while stack:
        p, t = stack.pop()
        if isinstance(p, Var):
            bound = b.get(p.name)
            if bound is None:
                b[p.name] = t
            elif bound != t:
                return None
        elif isinstance(p, _Const):
            if p is not t and p != t:
                return None
        elif type(p) is not type(t):
            return None
        elif isinstance(p, Neg):
            stack.append((p.arg, t.arg))
        else:
            stack.append((p.right, t.right))
            stack.append((p.left, t.left))
    return b
