import itertools

import pytest

from hilbert_forge.algebra import (
    AlgebraError, Congruence, FiniteAlgebra, MalformedAlgebra, Matrix, belnap, boolean2,
    chain3_pl, congruences, eval_formula, filters, from_order, holds, leibniz,
    leibniz_sdm, quotient, satisfies, star_algebra, validate,
)
from hilbert_forge.calculi import preset
from hilbert_forge.search import algebras
from hilbert_forge.syntax import parse

CLASSES = ["DN", "SDM", "DM", "PL", "O", "B", "Berman(1,0)", "Berman(1,1)"]
A, B = 1, 2  # the two incomparable elements of the Belnap algebra


def chain4_pl():
    return from_order(4, [(0, 1), (1, 2), (2, 3)], [3, 0, 0, 0], "C4")


# ---------------------------------------------------------------- oracles

def partitions(n):
    """Restricted-growth labelings of {0..n-1}."""
    def rec(prefix, top):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for lab in range(top + 2):
            yield from rec(prefix + [lab], max(top, lab))
    yield from rec([0], 0) if n else iter([()])


def oracle_congruences(alg):
    out = []
    for labs in partitions(alg.size):
        ok = all(labs[alg.neg[a]] == labs[alg.neg[b]]
                 for a in range(alg.size) for b in range(alg.size) if labs[a] == labs[b])
        ok = ok and all(
            labs[op[a, c]] == labs[op[b, d]]
            for op in (alg.meet, alg.join)
            for a, b, c, d in itertools.product(range(alg.size), repeat=4)
            if labs[a] == labs[b] and labs[c] == labs[d])
        if ok:
            out.append(Congruence(labs))
    return out


def oracle_leibniz(alg, designated):
    best = None
    for labs in oracle_congruences(alg):
        if all((a in designated) == (b in designated) for a, b in labs.pairs()):
            if best is None or best.refines(labs):
                best = labs
    return best


# ---------------------------------------------------------------- validation

@pytest.mark.parametrize("cls", CLASSES)
def test_boolean_algebra_is_in_every_class(cls):
    assert satisfies(boolean2(), cls)
    assert all(d.passed for d in validate(boolean2(), cls))


def test_belnap_and_chain_classes():
    assert satisfies(belnap(), "DM") and not satisfies(belnap(), "PL")
    assert satisfies(chain3_pl(), "PL") and not satisfies(chain3_pl(), "DM")


def test_validate_reports_violations():
    diags = {d.axiom: d for d in validate(chain3_pl(), "DM")}
    assert not diags["DM"].passed and diags["DM"].witness == {"x": 1}
    assert all(d.passed for name, d in diags.items() if name != "DM")


def test_malformed_tables_rejected():
    with pytest.raises(MalformedAlgebra):
        FiniteAlgebra([[0, 0], [0, 1]], [[0, 1], [1, 1]], [1, 0, 0], 0, 1)
    with pytest.raises(MalformedAlgebra):
        FiniteAlgebra([[0, 5], [0, 1]], [[0, 1], [1, 1]], [1, 0], 0, 1)
    with pytest.raises(MalformedAlgebra):
        from_order(4, [(0, 1), (0, 2), (0, 3)], [0, 0, 0, 0])


def test_serialization_round_trip():
    alg = belnap()
    assert FiniteAlgebra.from_dict(alg.to_dict()) == alg
    m = Matrix(alg, frozenset({A, 3}))
    assert Matrix.from_dict(m.to_dict()) == m


# ---------------------------------------------------------------- evaluation

def test_eval_examples():
    assert eval_formula(boolean2(), {"p": 1}, parse("~p")) == 0
    for alg in (boolean2(), chain3_pl(), belnap()):
        assert eval_formula(alg, {}, parse("~0")) == alg.top
    assert eval_formula(belnap(), {"p": A}, parse("p & ~p")) == A
    with pytest.raises(AlgebraError):
        eval_formula(boolean2(), {}, parse("p"))


def test_holds_examples():
    assert holds(boolean2(), preset("DM").equations[-1])[0]
    ok, w = holds(chain3_pl(), preset("DM").equations[-1])
    assert not ok and w == {"x": 1}
    n2 = preset("DN").equations[12]
    assert all(holds(alg, n2)[0] for alg in algebras("DN", 4))


def test_negation_is_order_reversing():
    for alg in algebras("DN", 5):
        le = alg.order_matrix()
        assert all(le[alg.neg[b], alg.neg[a]] for a in range(alg.size) for b in range(alg.size) if le[a, b])


# ---------------------------------------------------------------- filters

def test_filter_examples():
    assert filters(boolean2()) == [frozenset({1}), frozenset({0, 1})]
    assert filters(chain3_pl()) == [frozenset({2}), frozenset({1, 2}), frozenset({0, 1, 2})]
    assert filters(belnap()) == [frozenset({3}), frozenset({A, 3}), frozenset({B, 3}), frozenset(range(4))]


def test_filters_are_principal_in_finite_lattices():
    for alg in algebras("DN", 5):
        up = {frozenset(b for b in range(alg.size) if alg.leq(a, b)) for a in range(alg.size)}
        assert set(filters(alg)) == up


# ---------------------------------------------------------------- congruences

def test_congruence_examples():
    thetas = congruences(boolean2())
    assert len(thetas) == 2 and any(t.is_identity for t in thetas) and any(t.is_total for t in thetas)
    # bottom must stay alone, the rest splits into intervals, plus the total relation
    assert len(congruences(chain4_pl())) == len(oracle_congruences(chain4_pl())) == 5
    assert len(congruences(belnap())) == 2


def test_congruences_match_partition_scan():
    for alg in algebras("DN", 4) + [belnap(), chain4_pl()]:
        assert set(congruences(alg)) == set(oracle_congruences(alg)), alg.name


def test_leibniz_examples():
    assert leibniz(Matrix(boolean2(), frozenset({1}))).is_identity
    for alg in (boolean2(), chain3_pl(), belnap()):
        assert leibniz(Matrix(alg, frozenset(range(alg.size)))).is_total
    m = Matrix(belnap(), frozenset({A, 3}))
    assert leibniz(m) == oracle_leibniz(belnap(), {A, 3})
    assert leibniz(m) == leibniz_sdm(m)
    assert leibniz_sdm(Matrix(boolean2(), frozenset({1}))).is_identity
    assert leibniz_sdm(Matrix(chain3_pl(), frozenset({2}))).is_identity


def test_leibniz_matches_oracle_on_small_algebras():
    for alg in algebras("SDM", 4):
        for f in filters(alg):
            m = Matrix(alg, f)
            assert leibniz(m) == oracle_leibniz(alg, f)


def test_leibniz_sdm_preconditions():
    with pytest.raises(AlgebraError):
        leibniz_sdm(Matrix(boolean2(), frozenset({0})))
    not_sdm = next(a for a in algebras("DN", 3) if not satisfies(a, "SDM"))
    with pytest.raises(AlgebraError):
        leibniz_sdm(Matrix(not_sdm, frozenset({not_sdm.top})))


# ---------------------------------------------------------------- quotients and A*

def test_quotient_examples():
    alg = belnap()
    assert quotient(alg, Congruence(range(4))) == alg
    assert quotient(alg, Congruence([0, 0, 0, 0])).size == 1
    # collapsing a with bottom forces a = ~a ~ ~0 = top, hence everything
    with pytest.raises(AlgebraError):
        quotient(alg, Congruence([0, 0, 2, 3]))
    # the 4-chain with the middle pair collapsed is the 3-chain p-lattice
    q = quotient(chain4_pl(), Congruence([0, 1, 1, 3]))
    assert q.meet.tolist() == [[0, 0, 0], [0, 1, 1], [0, 1, 2]]
    assert q.join.tolist() == [[0, 1, 2], [1, 1, 2], [2, 2, 2]]
    assert q.neg.tolist() == [2, 0, 0]
    assert q == chain3_pl()


def test_quotients_preserve_equations():
    eqs = preset("PL").equations + preset("O").equations
    for alg in algebras("DN", 4):
        good = [e for e in eqs if holds(alg, e)[0]]
        for theta in congruences(alg):
            q = quotient(alg, theta)
            assert all(holds(q, e)[0] for e in good)


def test_star_algebra_examples():
    assert star_algebra(boolean2()) == boolean2()
    s = star_algebra(chain3_pl())
    assert s.size == 2 and satisfies(s, "B")
    assert star_algebra(belnap()) == belnap()
    with pytest.raises(AlgebraError):
        star_algebra(next(a for a in algebras("DN", 3) if not satisfies(a, "SDM")))
