from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from cdwb.arith import value_closed
from cdwb.syntax import (ZERO, And, AssignmentError, DetPred, Eq, Exists, Forall, Not,
                         Numeral, Or, Plus, SentenceTable, Succ, SyntaxErr, Times,
                         TranslationError, TrPred, Var, apply_assignment,
                         direct_subformulas, free_vars, is_sentence, numeral,
                         parse_formula, parse_source, show, subformulas,
                         substitute_numeral, translate_circ, translate_star)


def test_single_equation_program(program):
    p = program("Z := 0=0")
    assert p.formula("Z") == Eq(ZERO, ZERO)
    assert len(p.table) == 1


def test_liar_contains_its_own_code(program):
    p = program("L := ~T(quote(L))")
    L = p["L"]
    assert p.table.decode(L) == Not(TrPred(Numeral(L)))


def test_unbound_quote_is_reported_with_position(program):
    with pytest.raises(SyntaxErr) as err:
        program("X := T(quote(Y))")
    assert "unbound" in str(err.value)
    assert (err.value.line, err.value.col) == (1, 14)


def test_forward_reference_and_mutual_quotation(program):
    p = program("A := T(quote(B))\nB := D(quote(A))\n")
    assert p.formula("A") == TrPred(Numeral(p["B"]))
    assert p.formula("B") == DetPred(Numeral(p["A"]))


def test_duplicate_name(program):
    with pytest.raises(SyntaxErr, match="duplicate"):
        program("A := 0=0\nA := 0=S(0)\n")


def test_free_variable_rejected_unless_allowed(program):
    with pytest.raises(SyntaxErr, match="free variables"):
        program("A := v=0")
    assert program("A := v=0", allow_open=True).formula("A") == Eq(Var("v"), ZERO)


def test_comments_and_blank_lines(program):
    p = program("# header\n\nZ := 0=#0   # trailing\n")
    assert p.formula("Z") == Eq(ZERO, Numeral(0))


def test_bare_numeral_needs_hash():
    with pytest.raises(SyntaxErr, match="#"):
        parse_formula("3=3")


def test_parse_error_points_at_offender():
    with pytest.raises(SyntaxErr) as err:
        parse_formula("(0=0 ^ 0=0)")
    assert err.value.col == 6


def test_repeated_declarations_share_a_code(program):
    p = program("A := 0=0\nB := 0=0\n")
    assert p["A"] == p["B"]


def test_table_is_injective():
    t = SentenceTable()
    a = t.intern(Eq(ZERO, ZERO))
    assert t.intern(Eq(ZERO, ZERO)) == a
    assert t.intern(Eq(ZERO, Succ(ZERO))) == a + 1
    assert t.code(Eq(ZERO, Succ(ZERO))) == a + 1
    assert t.decode(99) is None
    with pytest.raises(ValueError):
        t.bind(a, Eq(Succ(ZERO), ZERO))


def test_table_sentence_filters_open_formulas():
    t = SentenceTable()
    c = t.intern(Eq(Var("v"), ZERO))
    assert t.decode(c) is not None
    assert t.sentence(c) is None


def test_numeral_printing():
    assert show(numeral(0)) == "#0"
    assert show(numeral(2), expand=True) == "S(S(0))"
    assert value_closed(numeral(7)) == 7
    with pytest.raises(ValueError):
        numeral(-1)


def test_substitute_numeral_examples():
    v, w = Var("v"), Var("w")
    assert substitute_numeral(Eq(v, v), "v", 3) == Eq(Numeral(3), Numeral(3))
    assert substitute_numeral(Forall("v", Eq(v, w)), "w", 2) == Forall("v", Eq(v, Numeral(2)))
    assert substitute_numeral(Eq(v, ZERO), "u", 5) == Eq(v, ZERO)


def test_substitution_respects_binders():
    f = Exists("v", Eq(Var("v"), Var("w")))
    assert substitute_numeral(f, "v", 4) == f


def test_apply_assignment(program):
    assert apply_assignment(Eq(Var("v"), Succ(ZERO)), {"v": 1}) == Eq(Numeral(1), Succ(ZERO))
    s = Eq(ZERO, ZERO)
    assert apply_assignment(s, {}) == s
    p = program("Z := 0=0")
    got = apply_assignment(TrPred(Var("v")), {"v": p["Z"]})
    assert p.table.intern(got) == p.table.intern(TrPred(Numeral(p["Z"])))
    with pytest.raises(AssignmentError):
        apply_assignment(Eq(Var("v"), ZERO), {})
    with pytest.raises(AssignmentError):
        apply_assignment(Eq(Var("v"), ZERO), {"v": 1, "u": 2})


def test_direct_subformulas():
    z = Eq(ZERO, ZERO)
    assert direct_subformulas(Not(z)) == [z]
    assert direct_subformulas(Or(z, TrPred(Numeral(5)))) == [z, TrPred(Numeral(5))]
    assert direct_subformulas(z) == []


def test_translate_examples():
    z = Eq(ZERO, ZERO)
    assert translate_star(And(z, z)) == Not(Or(Not(z), Not(z)))
    f = Forall("v", Eq(Var("v"), Var("v")))
    assert translate_circ(translate_star(f)) == f
    assert translate_star(z) == z


def test_translate_circ_rejects_unmatched_shapes():
    with pytest.raises(TranslationError):
        translate_circ(Or(Eq(ZERO, ZERO), Eq(ZERO, ZERO)))


# ------------------------------------------------------------ properties

_var = st.sampled_from(["v", "u"])
_terms = st.recursive(
    st.one_of(st.just(ZERO), st.integers(0, 5).map(Numeral), _var.map(Var)),
    lambda t: st.one_of(t.map(Succ), st.tuples(t, t).map(lambda p: Plus(*p)),
                        st.tuples(t, t).map(lambda p: Times(*p))),
    max_leaves=4)
_formulas = st.recursive(
    st.one_of(st.tuples(_terms, _terms).map(lambda p: Eq(*p)), _terms.map(TrPred),
              _terms.map(DetPred)),
    lambda f: st.one_of(
        f.map(Not),
        st.tuples(f, f).map(lambda p: And(*p)),
        st.tuples(f, f).map(lambda p: Or(*p)),
        st.tuples(_var, f).map(lambda p: Forall(*p)),
        st.tuples(_var, f).map(lambda p: Exists(*p))),
    max_leaves=6)


@given(_formulas)
def test_show_parse_round_trip(f):
    assert parse_formula(show(f)) == f


_conj_formulas = st.recursive(
    st.one_of(st.tuples(_terms, _terms).map(lambda p: Eq(*p)), _terms.map(TrPred)),
    lambda f: st.one_of(
        f.map(Not),
        st.tuples(f, f).map(lambda p: And(*p)),
        st.tuples(_var, f).map(lambda p: Forall(*p))),
    max_leaves=6)


@given(_conj_formulas)
def test_star_then_circ_is_identity_without_disjunctions(f):
    assert translate_circ(translate_star(f)) == f


def test_star_is_not_injective_once_disjunctions_appear():
    # so no inverse can recover both sources
    a, b = Eq(ZERO, ZERO), TrPred(ZERO)
    assert translate_star(And(a, b)) == translate_star(Not(Or(Not(a), Not(b))))


@given(_formulas)
def test_star_is_idempotent_and_leaves_no_conjunctions(f):
    g = translate_star(f)
    assert translate_star(g) == g
    assert not any(isinstance(h, (And, Forall)) for h in subformulas(g))
    assert free_vars(g) == free_vars(f)


@given(_formulas, st.integers(0, 9), st.integers(0, 9))
def test_full_assignment_closes_formula(f, a, b):
    env = {v: n for v, n in (("v", a), ("u", b)) if v in free_vars(f)}
    assert is_sentence(apply_assignment(f, env))


@given(_formulas)
def test_subformulas_of_subformulas_are_subformulas(f):
    subs = set(subformulas(f))
    for g in subs:
        assert set(direct_subformulas(g)) <= subs
