import itertools
import json

import pytest

from hilbert_forge.algebra import FiniteAlgebra, holds, satisfies
from hilbert_forge.calculi import Rule, builtin, preset
from hilbert_forge.search import (
    CACHE_ENV, EnumerationSpec, Exhausted, SearchError, algebras, canonical_class,
    distributive_lattices, export_algebras, find_countermodel,
)
from hilbert_forge.semantics import ASSERTIONAL, FILTER, Consecution, matrix_entails
from hilbert_forge.syntax import And, Var, f_k, fresh, negs, parse

CLASSES = ["DN", "SDM", "DM", "PL", "O", "B", "Berman(1,0)", "Berman(1,1)"]


# ---------------------------------------------------------------- raw-table oracle

def _orders(n):
    """Every partial order on {0..n-1} as a frozenset of pairs (a, b) with a <= b."""
    pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
    for bits in itertools.product((0, 1), repeat=len(pairs)):
        le = {(a, a) for a in range(n)} | {p for p, bit in zip(pairs, bits) if bit}
        if any((b, a) in le for a, b in le if a != b):
            continue
        if any((a, c) not in le for a, b in le for b2, c in le if b == b2):
            continue
        yield frozenset(le)


def _lattice_ops(n, le):
    meet, join = {}, {}
    for a, b in itertools.product(range(n), repeat=2):
        lower = [x for x in range(n) if (x, a) in le and (x, b) in le]
        upper = [x for x in range(n) if (a, x) in le and (b, x) in le]
        glb = [x for x in lower if all((y, x) in le for y in lower)]
        lub = [x for x in upper if all((x, y) in le for y in upper)]
        if len(glb) != 1 or len(lub) != 1:
            return None
        meet[a, b], join[a, b] = glb[0], lub[0]
    if any(meet[a, join[b, c]] != join[meet[a, b], meet[a, c]]
           for a, b, c in itertools.product(range(n), repeat=3)):
        return None
    return meet, join


def _canon(n, le, neg=None):
    best = None
    for perm in itertools.permutations(range(n)):
        key = (tuple(sorted((perm[a], perm[b]) for a, b in le)),
               None if neg is None else tuple(perm[neg[perm.index(i)]] for i in range(n)))
        best = key if best is None or key < best else best
    return best


def oracle_lattices(n):
    return {_canon(n, le) for le in _orders(n) if _lattice_ops(n, le)}


def oracle_algebras(n, cls):
    eqs = preset(cls).equations
    seen = set()
    for le in _orders(n):
        ops = _lattice_ops(n, le)
        if not ops:
            continue
        meet, join = ops
        bot = next(x for x in range(n) if all((x, y) in le for y in range(n)))
        top = next(x for x in range(n) if all((y, x) in le for y in range(n)))
        mt = [[meet[a, b] for b in range(n)] for a in range(n)]
        jt = [[join[a, b] for b in range(n)] for a in range(n)]
        for neg in itertools.product(range(n), repeat=n):
            key = _canon(n, le, neg)
            if key in seen:
                continue
            alg = FiniteAlgebra(mt, jt, list(neg), bot, top)
            if all(holds(alg, e)[0] for e in eqs):
                seen.add(key)
    return seen


def test_oracle_lattice_counts():
    assert [len(oracle_lattices(n)) for n in (1, 2, 3, 4)] == [1, 1, 1, 2]
    assert [len(distributive_lattices(n)) for n in range(1, 8)] == [1, 1, 1, 2, 3, 5, 8]


@pytest.mark.parametrize("cls", CLASSES)
def test_enumeration_matches_raw_table_oracle(cls):
    for n in (2, 3, 4):
        mine = len(algebras(cls, n)) - (len(algebras(cls, n - 1)) if n > 2 else 0)
        assert mine == len(oracle_algebras(n, cls)), (cls, n)


def test_two_element_chain_carries_two_dn_structures():
    # ~0 = 1 is forced; ~1 may be 0 (Boolean) or 1 (constant top)
    two = algebras("DN", 2)
    assert sorted(a.neg.tolist() for a in two) == [[1, 0], [1, 1]]
    assert len(oracle_algebras(2, "DN")) == 2


@pytest.mark.parametrize("cls, counts", [
    ("DN", [2, 8, 38, 164]), ("SDM", [1, 4, 15, 46]), ("DM", [1, 2, 5, 6]),
    ("PL", [1, 2, 4, 7]), ("O", [1, 4, 17, 62]), ("B", [1, 1, 2, 2]),
    ("Berman(1,0)", [1, 2, 5, 6]), ("Berman(1,1)", [1, 4, 15, 44]),
])
def test_cumulative_counts_regression(cls, counts):
    assert [len(algebras(cls, n)) for n in (2, 3, 4, 5)] == counts


def test_p_lattices_match_distributive_lattices():
    # a finite distributive lattice has exactly one pseudo-complement
    for n in range(2, 7):
        assert len(algebras("PL", n)) - len(algebras("PL", n - 1) if n > 2 else []) == \
            len(distributive_lattices(n))


def test_enumeration_is_prefix_monotone_and_valid():
    for cls in CLASSES:
        small, large = algebras(cls, 4), algebras(cls, 5)
        assert large[:len(small)] == small
        assert all(satisfies(a, cls) for a in large)
        assert [a.size for a in large] == sorted(a.size for a in large)


def test_include_trivial_and_cap():
    assert algebras("SDM", 2, include_trivial=True)[0].size == 1
    with pytest.raises(SearchError):
        EnumerationSpec("DN", 8)
    with pytest.raises(SearchError):
        EnumerationSpec("nope", 3)
    assert canonical_class("berman:1:0") == "Berman(1,0)" and canonical_class("sdm") == "SDM"


def _fn(n):
    prem, concl = negs(n + 1, And(Var("p"), Var("p"))), negs(n + 1, Var("p"))
    return Rule(f"f{n}(r)", (f_k(n, prem),), f_k(n, concl))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_fn_countermodel_on_two_elements(n):
    w = find_countermodel(_fn(n), EnumerationSpec("DN", 4))
    assert w and w.algebra.size == 2 and w.algebra.neg.tolist() == [1, 0]
    assert w.designated == frozenset({1})
    big, small = fresh("n[~(p & p)]").name, fresh("n[~p]").name
    want = {big: 1, small: 0} if n % 2 == 0 else {big: 0, small: 1}
    assert w.valuation == want
    assert not matrix_entails(w.matrix(), Consecution(*_fn(n).direction(w.direction)))[0]


def test_wxc_countermodel_and_assertional_soundness():
    wxc = builtin("wxc")["r_wxc"]
    w = find_countermodel(wxc, EnumerationSpec("DM", 4))
    assert w.algebra.size == 3 and w.algebra.neg.tolist() == [2, 1, 0]
    assert w.designated == frozenset({1, 2}) and w.algebra_index == 1
    assert not matrix_entails(w.matrix(), Consecution(*wxc.direction()))[0]
    assert isinstance(find_countermodel(wxc, EnumerationSpec("DN", 5), ASSERTIONAL), Exhausted)


def test_negation_meet_rule_has_no_small_countermodel():
    rule = builtin("S_bullet")["r_neg_and"]
    found = find_countermodel(rule, EnumerationSpec("SDM", 5), FILTER)
    assert isinstance(found, Exhausted) and not found and found.bound == 5
    assert found.checked == len(algebras("SDM", 5))


def test_consecution_targets():
    c = Consecution((parse("p"),), parse("~p"))
    w = find_countermodel(c, EnumerationSpec("SDM", 3))
    assert w and not matrix_entails(w.matrix(), c)[0]


def test_export_and_disk_cache(tmp_path, monkeypatch):
    paths = export_algebras(EnumerationSpec("DM", 4), tmp_path / "out")
    assert [p.name for p in paths] == ["DM_2.0.json", "DM_3.0.json", "DM_4.0.json",
                                       "DM_4.1.json", "DM_4.2.json"]
    data = json.loads(paths[-1].read_text())
    assert FiniteAlgebra.from_dict(data) == algebras("DM", 4)[-1]

    from hilbert_forge import search
    monkeypatch.setenv(CACHE_ENV, str(tmp_path / "cache"))
    search._algebras_of_size.cache_clear()
    try:
        first = algebras("PL", 4)
        assert (tmp_path / "cache" / "PL-4.json").exists()
        search._algebras_of_size.cache_clear()
        assert algebras("PL", 4) == first
    finally:
        monkeypatch.delenv(CACHE_ENV)
        search._algebras_of_size.cache_clear()
