from __future__ import annotations

import pytest

from cdwb.engine import run_pipeline
from cdwb.generate import random_entry_pair, random_gamma, random_run
from cdwb.similarity import (OracleBoundExceeded, PreconditionError, SatEntry, canon,
                             canonical_pair, check_det_comp, check_gamma, close_gamma, entry,
                             entries_of, ev_chain, ev_extend, pipeline_pair, rank_order,
                             similar, similar_oracle, sub_entries)
from cdwb.syntax import (Eq, Exists, Numeral, Or, SentenceTable, Var, parse_formula,
                         parse_source, translate_star)
from cdwb.universe import build_universe

from conftest import PARADOX, TOWER

E0 = frozenset()


def P(text):
    return parse_formula(text)


def test_canonical_pair_examples():
    assert canonical_pair(P("v=S(0)"), {"v": 1}) == Eq(Numeral(1), Numeral(1))
    assert canonical_pair(P("0=0")) == Eq(Numeral(0), Numeral(0))
    assert canonical_pair(P("exists v.v=(S(0)+S(0))")) == Exists("v", Eq(Var("v"), Numeral(2)))


@pytest.mark.parametrize("a, b, want", [
    (("v=S(0)", {"v": 1}), ("#1=w", {"w": 1}), True),
    (("0=0", {}), ("0=S(0)", {}), False),
    (("T((v+S(0)))", {"v": 2}), ("T(#3)", {}), True),
    (("exists x.x=(v*#2)", {"v": 2}), ("exists x.x=#4", {}), True),
    (("exists x.x=(v*#2)", {"v": 2}), ("exists y.y=#4", {}), False),
    (("exists x.(x+S(0))=#1", {}), ("exists x.S(x)=#1", {}), False),
])
def test_similarity_cases(a, b, want):
    ea, eb = entry(P(a[0]), a[1]), entry(P(b[0]), b[1])
    assert similar(ea, eb) is want
    assert similar_oracle(ea, eb) is want
    assert similar(ea, ea) and similar_oracle(ea, ea)


def test_oracle_bound():
    big = entry(P("((S(0)+S(0))*(S(0)+S(0)))=((S(0)+S(0))*(S(0)+S(0)))"))
    with pytest.raises(OracleBoundExceeded):
        similar_oracle(big, big, size_bound=10)


def test_entry_rejects_bad_domain():
    with pytest.raises(ValueError):
        entry(P("v=0"), {})
    with pytest.raises(ValueError):
        entry(P("0=0"), {"v": 1})


def test_oracle_agreement_and_equivalence(rng):
    seen = []
    for _ in range(300):
        a, b = random_entry_pair(rng)
        try:
            assert similar(a, b) == similar_oracle(a, b)
        except OracleBoundExceeded:
            continue
        seen += [a, b]
    sample = seen[:60]
    for x in sample:
        for y in sample:
            if similar(x, y):
                assert similar(y, x)
                for z in sample:
                    if similar(y, z):
                        assert similar(x, z)


def test_rank_examples():
    z = entry(P("0=0"))
    assert rank_order([z], [0]).rank == {canon(z): 0}
    nz = entry(P("~0=0"))
    r = rank_order([nz, z], [0])
    assert (r.of(nz), r.of(z)) == (1, 0)
    W = (0, 1, 2)
    q = entry(P("exists v.v=0"))
    insts = [entry(P("v=0"), {"v": w}) for w in W]
    r = rank_order([q] + insts, W)
    assert r.of(q) == 1 and all(r.of(i) == 0 for i in insts)
    assert sub_entries(q, W) == insts


def test_rank_respects_subformula_descent(rng):
    run = random_run(rng, star=True)
    frag, _, _ = pipeline_pair(run.pipeline)
    W = run.universe.witnesses
    r = rank_order(frag, W)
    for e in frag:
        for k in sub_entries(e, W):
            assert r.of(k) < r.of(e)


# --------------------------------------------------- determinate compositionality


def _star_pipeline(text, n=2):
    t = SentenceTable()
    p = parse_source(text, t, transform=translate_star)
    pl = run_pipeline(build_universe(t, p.codes, n=n))
    return p, pl


def test_pipeline_pair_is_determinately_compositional():
    p, pl = _star_pipeline(TOWER + PARADOX + "Q := forall v.(T(v)|D(v))\nA := (0=0&~T(quote(L)))\n")
    frag, D0, S0 = pipeline_pair(pl)
    rep = check_det_comp(frag, D0, S0, pl.U.witnesses, p.table)
    assert rep.passed, rep.summary()
    for a in ("D'1", "D'2", "D'4", "D'5", "D'6", "S1", "S3", "S4", "S5", "S6"):
        assert rep.status(a) == "pass", a


def test_empty_d_breaks_d1():
    t = SentenceTable()
    frag = [entry(P("0=0"))]
    rep = check_det_comp(frag, E0, E0, (0,), t)
    assert rep.status("D'1") == "fail"


def test_s4_violation_found():
    p, pl = _star_pipeline(TOWER + "N := ~0=S(0)\n")
    frag, D0, S0 = pipeline_pair(pl)
    n = SatEntry(p.formula("N"))
    bad = S0 - {n}
    rep = check_det_comp(frag, D0, bad, pl.U.witnesses, p.table)
    assert rep.status("S4") == "fail"
    assert "~0=S(0)" in rep["S4"].witness["detail"]


# ---------------------------------------------------------------- extension


def test_gamma_equation():
    res = ev_extend(None, E0, E0, E0, [P("0=0")], (0,), SentenceTable())
    assert entry(P("0=0")) in res.S


def test_gamma_liar():
    t = SentenceTable()
    p = parse_source(PARADOX, t, transform=translate_star)
    L = p.formula("L")
    res = ev_extend(None, E0, E0, E0, [L], (0, 1), t)
    assert SatEntry(L) in res.S
    assert SatEntry(L.body) not in res.S
    rep = check_gamma(res.S, res.gamma, E0, E0, E0, (0, 1), t)
    assert rep.passed and rep.status("Comp") == "pass"


def test_gamma_existential():
    W = (0, 1, 2)
    f = P("exists v.v=S(0)")
    res = ev_extend(None, E0, E0, E0, [f], W, SentenceTable())
    assert entry(f) in res.S
    assert entry(P("v=S(0)"), {"v": 1}) in res.S
    assert entry(P("v=S(0)"), {"v": 2}) not in res.S


def test_gamma_closure_adds_missing_disjunct():
    a, b = P("0=0"), P("T(#0)")
    assert close_gamma([Or(a, b), a]) == (Or(a, b), a, b)
    assert close_gamma([Or(a, b)]) == (Or(a, b),)


def test_check_gamma_detects_regularity_breach():
    W = (0, 1)
    g = [P("v=S(0)"), P("#1=S(0)")]
    res = ev_extend(None, E0, E0, E0, g, W, SentenceTable())
    bad = res.S - {entry(P("#1=S(0)"))}
    rep = check_gamma(bad, g, E0, E0, E0, W, SentenceTable())
    assert "Regularity" in rep.failed


def test_check_gamma_empty_is_vacuous():
    rep = check_gamma(E0, [], E0, E0, E0, (0,), SentenceTable())
    assert rep.passed
    assert all(o.status == "vacuous" for o in rep.results.values())


def test_precondition_violation():
    t = SentenceTable()
    S0 = frozenset({entry(P("0=0"))})
    with pytest.raises(PreconditionError) as err:
        ev_extend(S0, E0, S0, E0, [P("0=0")], (0,), t)
    assert "D'1" in err.value.report.failed


def test_translation_coherence():
    p, pl = _star_pipeline(TOWER + PARADOX + "Q := forall v.(T(v)|~D(v))\nA := (0=0&~T(quote(L)))\n")
    frag, D0, S0 = pipeline_pair(pl)
    U = pl.U
    gamma = [U.formula(c) for c in U.sentences]
    res = ev_extend(frag, D0, S0, E0, gamma, U.witnesses, p.table)
    for c in U.sentences:
        f = U.formula(c)
        assert (SatEntry(f) in res.S) == pl.truth(f)


def test_random_chains_pass(rng):
    for _ in range(8):
        run = random_run(rng, star=True)
        frag, D0, S0 = pipeline_pair(run.pipeline)
        gammas = [random_gamma(rng, run.universe) for _ in range(3)]
        for res, rep in ev_chain(frag, D0, S0, gammas, run.universe.witnesses, run.table):
            assert rep.passed, (run.source, rep.failed)


def test_designated_formulas_are_fully_evaluated():
    W = (0, 1)
    res = ev_extend(None, E0, E0, E0, [P("exists u.(v=u|T(v))")], W, SentenceTable())
    for f in res.designated:
        assert all(e in res.entries for e in entries_of(f, W))
