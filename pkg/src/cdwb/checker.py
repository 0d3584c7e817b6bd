"""Axiom checkers for finite models, plus checks on the stage construction.

Every check instantiates its axiom over the members of a Universe (and over
the witness set W where the axiom quantifies over elements) and records the
first failing instance as a reproducible witness.
"""

from __future__ import annotations

from typing import AbstractSet, Callable, Collection, Iterator, Optional

from .arith import EvalError, collapse, term_variants, value_closed
from .engine import StageTrace, d_operator
from .report import AxiomReport
from .syntax import (And, DetPred, Eq, Exists, Forall, Formula, Not, Numeral,
                     Or, Term, TrPred, is_closed_term, map_atoms, show)
from .universe import Universe, instances

Predicate = Callable[[Formula], bool]

CD_AXIOMS = ("T1", "T2", "T3", "T4", "T5", "T5-or", "T6", "T6-exists",
             "D1", "D2", "D3", "D4", "D5", "D5-bridge", "D5-or", "D6", "D6-exists",
             "R1", "R2")
CT_CLAUSES = ("CT-eq", "CT-D", "CT-T", "CT-neg", "CT-and", "CT-or", "CT-forall",
              "CT-exists", "CT-reg")
PC_CLAUSES = ("PC-eq", "PC-D", "PC-T", "PC-neg", "PC-and", "PC-or", "PC-forall",
              "PC-exists", "PC-reg", "PC-subset")

D6_NOTE = ("D6 read as (forall x D phi(x)) | (exists y (D ~phi(y) & T ~phi(y))); "
           "D4 read as D(~phi) <-> D(phi)")

# R1/R2 are exercised on at most this many term slots per sentence
MAX_SLOTS = 4
VARIANT_BUDGET = 16


# --------------------------------------------------------- term variants


def closed_slots(f: Formula) -> list[Term]:
    """Maximal closed subterm occurrences of ``f``, left to right."""
    found: list[Term] = []

    def walk(t: Term, bound) -> Term:
        if is_closed_term(t):
            found.append(t)
        else:
            for sub in getattr(t, "__dict__", {}).values():
                if not isinstance(sub, str):
                    walk(sub, bound)
        return t

    map_atoms(f, walk)
    return found


def replace_slot(f: Formula, k: int, new: Term) -> Formula:
    counter = [0]

    def swap(t: Term) -> Term:
        if is_closed_term(t):
            i = counter[0]
            counter[0] += 1
            return new if i == k else t
        fields = {name: (v if isinstance(v, str) else swap(v)) for name, v in t.__dict__.items()}
        return type(t)(**fields)

    return map_atoms(f, lambda t, bound: swap(t))


def regular_variants(f: Formula, cap: int, budget: int = VARIANT_BUDGET,
                     max_slots: int = MAX_SLOTS) -> Iterator[Formula]:
    """Sentences obtained from ``f`` by swapping one closed term for an equal-valued one."""
    for k, t in enumerate(closed_slots(f)[:max_slots]):
        for alt in term_variants(value_closed(t, cap), budget):
            if alt != t:
                yield replace_slot(f, k, alt)


# ---------------------------------------------------------------- model


class Model:
    """A determinateness set over U with a total truth predicate.

    Determinateness of sentences outside U is answered by the derived
    negation rule, then by any similar member of U.
    """

    def __init__(self, U: Universe, D: AbstractSet[int], T: Predicate):
        self.U = U
        self.D = D
        self.T = T
        self.cap = U.caps.value
        self._canon_D = {collapse(U.formula(c), self.cap) for c in D if c in U}

    def det(self, f: Formula) -> bool:
        c = self.U.code(f)
        if c is not None:
            return c in self.D
        if isinstance(f, Not):
            return self.det(f.body)
        return collapse(f, self.cap) in self._canon_D

    def det_code(self, x: int) -> bool:
        s = self.U.table.sentence(x)
        return s is not None and self.det(s)


def _num(x: int) -> Numeral:
    return Numeral(x)


def _members(U: Universe, only: Optional[Collection[int]]):
    for c in U.sentences:
        if only is None or c in only:
            yield c, U.formula(c)


def _wanted(axioms: Optional[Collection[str]], name: str) -> bool:
    return axioms is None or name in axioms


def check_cd_axioms(D: AbstractSet[int], T: Predicate, U: Universe,
                    axioms: Optional[Collection[str]] = None,
                    only: Optional[Collection[int]] = None) -> AxiomReport:
    """Instantiate T1-T6, D1-D6, R1-R2 (plus dual and bridge checks) over U.

    ``axioms`` restricts which axioms run and ``only`` restricts the
    instance codes (sentence codes, or witness values for T2/T3), so a
    reported witness can be re-checked in isolation.
    """
    M = Model(U, D, T)
    rep = AxiomReport(notes=[D6_NOTE])
    rep.declare(*(a for a in CD_AXIOMS if _wanted(axioms, a)))
    W = U.witnesses

    def run(name, phi, thunk, detail=""):
        if not _wanted(axioms, name):
            return
        try:
            ok = bool(thunk())
        except EvalError as e:
            ok, detail = False, f"evaluation error: {e}"
        rep.record(name, ok, phi, detail)

    for x in W:
        s = U.table.sentence(x)
        # D(x) is false for non-sentences, so those instances hold trivially
        if s is None or (only is not None and x not in only):
            continue
        run("T2", x, lambda: not M.det(s) or T(DetPred(_num(x))),
            f"D({x}) holds but T(D(#{x})) fails")
        run("T3", x, lambda: not M.det(s) or T(s) == T(TrPred(_num(x))),
            f"D({x}) holds but T({x}) differs from T(T(#{x}))")

    for c, f in _members(U, only):
        run("T4", c, lambda: T(Not(f)) == (not T(f)), f"T(~{show(f)}) != ~T({show(f)})")
        if isinstance(f, Eq):
            run("T1", c, lambda: T(f) == (value_closed(f.left, M.cap) == value_closed(f.right, M.cap)),
                f"terms ({show(f.left)}, {show(f.right)})")
            run("D1", c, lambda: M.det(f), f"{show(f)} not determinate")
        elif isinstance(f, TrPred):
            run("D2", c, lambda: M.det(f) == M.det_code(value_closed(f.arg, M.cap)),
                f"D({show(f)}) disagrees with D of its argument")
        elif isinstance(f, DetPred):
            run("D3", c, lambda: M.det(f) == M.det_code(value_closed(f.arg, M.cap)),
                f"D({show(f)}) disagrees with D of its argument")
        elif isinstance(f, Not):
            run("D4", c, lambda: M.det(f) == M.det(f.body), f"D({show(f)}) != D of its body")
        elif isinstance(f, And):
            l, r = f.left, f.right
            run("T5", c, lambda: T(f) == (T(l) and T(r)), show(f))
            run("D5", c, lambda: M.det(f) == ((M.det(l) and M.det(r))
                                               or (M.det(l) and T(Not(l)))
                                               or (M.det(r) and T(Not(r)))), show(f))
            run("D5-bridge", c, lambda: all(
                (M.det(Not(x)) and T(Not(x))) == (M.det(x) and T(Not(x))) for x in (l, r)), show(f))
        elif isinstance(f, Or):
            l, r = f.left, f.right
            run("T5-or", c, lambda: T(f) == (T(l) or T(r)), show(f))
            run("D5-or", c, lambda: M.det(f) == ((M.det(l) and M.det(r))
                                                  or (M.det(l) and T(l))
                                                  or (M.det(r) and T(r))), show(f))
        elif isinstance(f, Forall):
            inst = instances(f, W)
            run("T6", c, lambda: T(f) == all(T(i) for i in inst), show(f))
            run("D6", c, lambda: M.det(f) == (all(M.det(i) for i in inst)
                                               or any(M.det(Not(i)) and T(Not(i)) for i in inst)),
                show(f))
        elif isinstance(f, Exists):
            inst = instances(f, W)
            run("T6-exists", c, lambda: T(f) == any(T(i) for i in inst), show(f))
            run("D6-exists", c, lambda: M.det(f) == (all(M.det(i) for i in inst)
                                                      or any(M.det(i) and T(i) for i in inst)),
                show(f))
        if _wanted(axioms, "R1") or _wanted(axioms, "R2"):
            try:
                variants = list(regular_variants(f, M.cap))
            except EvalError as e:
                run("R1", c, lambda: False, f"evaluation error: {e}")
                continue
            for v in variants:
                run("R1", c, lambda: T(v) == T(f), f"T differs on variant {show(v)}")
                run("R2", c, lambda: M.det(v) == M.det(f), f"D differs on variant {show(v)}")
    return rep


def check_ct_minus(D: AbstractSet[int], T: AbstractSet[int], Tprime: Predicate, U: Universe,
                   clauses: Optional[Collection[str]] = None,
                   only: Optional[Collection[int]] = None) -> AxiomReport:
    """Does ``Tprime`` satisfy the compositional clauses over the structure (U, D, T)?"""
    rep = AxiomReport()
    rep.declare(*(a for a in CT_CLAUSES if _wanted(clauses, a)))
    W = U.witnesses
    cap = U.caps.value

    def run(name, phi, thunk, detail=""):
        if not _wanted(clauses, name):
            return
        try:
            ok = bool(thunk())
        except EvalError as e:
            ok, detail = False, f"evaluation error: {e}"
        rep.record(name, ok, phi, detail)

    values = set(W)
    for c in U.sentences:
        sh = U.shape[c]
        if sh[0] in ("T", "D"):
            values.add(sh[1])
    for x in sorted(values):
        if only is not None and x not in only:
            continue
        run("CT-D", x, lambda: Tprime(DetPred(_num(x))) == (x in D), f"T'(D(#{x})) vs D({x})")
        run("CT-T", x, lambda: Tprime(TrPred(_num(x))) == (x in T), f"T'(T(#{x})) vs T({x})")

    for c, f in _members(U, only):
        run("CT-neg", c, lambda: Tprime(Not(f)) == (not Tprime(f)), show(f))
        if isinstance(f, Eq):
            run("CT-eq", c, lambda: Tprime(f) == (value_closed(f.left, cap) == value_closed(f.right, cap)),
                show(f))
        elif isinstance(f, (TrPred, DetPred)):
            target = T if isinstance(f, TrPred) else D
            run("CT-T" if isinstance(f, TrPred) else "CT-D", c,
                lambda: Tprime(f) == (value_closed(f.arg, cap) in target), show(f))
        elif isinstance(f, And):
            run("CT-and", c, lambda: Tprime(f) == (Tprime(f.left) and Tprime(f.right)), show(f))
        elif isinstance(f, Or):
            run("CT-or", c, lambda: Tprime(f) == (Tprime(f.left) or Tprime(f.right)), show(f))
        elif isinstance(f, Forall):
            run("CT-forall", c, lambda: Tprime(f) == all(Tprime(i) for i in instances(f, W)), show(f))
        elif isinstance(f, Exists):
            run("CT-exists", c, lambda: Tprime(f) == any(Tprime(i) for i in instances(f, W)), show(f))
        if _wanted(clauses, "CT-reg"):
            for v in regular_variants(f, cap):
                run("CT-reg", c, lambda: Tprime(v) == Tprime(f), f"variant {show(v)}")
    return rep


def check_monotonicity(trace: StageTrace) -> AxiomReport:
    """D_k <= D_n and D_k & T_k == D_k & T_n for all computed k <= n."""
    rep = AxiomReport()
    rep.declare("Mono-D", "Mono-T")
    st = trace.stages
    if len(st) <= 1:
        return rep
    for n in range(len(st)):
        for k in range(n + 1):
            Dk, Dn = st[k].D, st[n].D
            lost = sorted(Dk - Dn)
            rep.record("Mono-D", not lost, lost[0] if lost else None,
                       f"D_{st[k].i} not contained in D_{st[n].i}", k=st[k].i, n=st[n].i)
            diff = sorted((Dk & st[k].T) ^ (Dk & st[n].T))
            rep.record("Mono-T", not diff, diff[0] if diff else None,
                       f"D_{st[k].i} & T_{st[k].i} != D_{st[k].i} & T_{st[n].i}",
                       k=st[k].i, n=st[n].i)
    return rep


def least_fixpoint(T: AbstractSet[int], U: Universe) -> frozenset[int]:
    """Least fixpoint of d_operator(., T), iterated from the empty set."""
    D: frozenset[int] = frozenset()
    while True:
        nxt = d_operator(D, T, U)
        if nxt == D:
            return D
        D = nxt


def check_fixpoint(D: AbstractSet[int], T: AbstractSet[int], U: Universe) -> AxiomReport:
    """D is a fixpoint of d_operator(., T), and it is the least one."""
    rep = AxiomReport()
    nxt = d_operator(D, T, U)
    diff = sorted(set(nxt) ^ set(D))
    rep.record("Fixpoint", not diff, diff[0] if diff else None,
               "" if not diff else ("enters" if diff[0] in nxt else "leaves") + " under the operator")
    least = least_fixpoint(T, U)
    diff = sorted(set(least) ^ set(D))
    rep.record("Fixpoint-least", not diff, diff[0] if diff else None,
               "" if not diff else "differs from the least fixpoint")
    return rep


def check_partial_comp(D: AbstractSet[int], T: AbstractSet[int], U: Universe) -> AxiomReport:
    """Compositional clauses for T restricted to the sentences in D."""
    rep = AxiomReport()
    rep.declare(*PC_CLAUSES)
    W = U.witnesses
    cap = U.caps.value
    for c in sorted(T):
        rep.record("PC-subset", c in D, c, "true but not determinate")
    for c in sorted(D):
        if c not in U:
            rep.record("PC-subset", False, c, "determinate code outside the universe")
            continue
        sh = U.shape[c]
        kind = sh[0]
        if kind == "eq":
            rep.record("PC-eq", (c in T) == sh[1], c)
        elif kind == "D":
            rep.record("PC-D", (c in T) == (sh[1] in D), c)
        elif kind == "T":
            rep.record("PC-T", (c in T) == (sh[1] in T), c)
        elif kind == "not":
            rep.record("PC-neg", (c in T) == (sh[1] not in T), c)
        elif kind == "and":
            rep.record("PC-and", (c in T) == (sh[1] in T and sh[2] in T), c)
        elif kind == "or":
            rep.record("PC-or", (c in T) == (sh[1] in T or sh[2] in T), c)
        elif kind == "forall":
            rep.record("PC-forall", (c in T) == all(x in T for x in sh[1]), c)
        else:
            rep.record("PC-exists", (c in T) == any(x in T for x in sh[1]), c)
    classes: dict[Formula, list[int]] = {}
    for c in U.sentences:
        classes.setdefault(collapse(U.formula(c), cap), []).append(c)
    for members in classes.values():
        if len(members) < 2:
            continue
        vals = {m in T for m in members}
        rep.record("PC-reg", len(vals) == 1, members[0],
                   f"similar sentences {members} disagree on T")
    return rep


def check_compat(truth: Predicate, T_omega: AbstractSet[int], D_omega: AbstractSet[int],
                 U: Universe) -> AxiomReport:
    """For determinate sentences the final predicate agrees with T_omega."""
    rep = AxiomReport()
    rep.declare("Compat")
    for c in sorted(D_omega):
        f = U.table.sentence(c)
        if f is None:
            rep.record("Compat", False, c, "not a sentence code")
            continue
        try:
            ok = truth(f) == (c in T_omega)
            detail = "final truth differs from T_omega"
        except EvalError as e:
            ok, detail = False, str(e)
        rep.record("Compat", ok, c, detail)
    return rep


def check_all(U: Universe, trace: Optional[StageTrace], D: AbstractSet[int],
              T: AbstractSet[int], truth: Predicate) -> AxiomReport:
    """Every checker on (U, D, T, truth); monotonicity too when a trace is given."""
    rep = AxiomReport()
    if trace is not None:
        rep.merge(check_monotonicity(trace))
    rep.merge(check_fixpoint(D, T, U))
    rep.merge(check_partial_comp(D, T, U))
    rep.merge(check_compat(truth, T, D, U))
    rep.merge(check_cd_axioms(D, truth, U))
    return rep
