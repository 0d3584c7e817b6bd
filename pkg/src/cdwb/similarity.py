"""Satisfaction classes over formula/assignment pairs.

Similarity of pairs is decided by canonical forms. The extension step
builds S for a finite formula set by induction on the rank of similarity
classes, starting from a determinately compositional pair (D0, S0*).
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import AbstractSet, Iterable, Iterator, Mapping, Optional

from .arith import DEFAULT_CAP, EvalError, collapse, value_assign, value_closed
from .engine import Pipeline
from .report import AxiomReport
from .syntax import (And, DetPred, Eq, Exists, Forall, Formula, Not, Numeral,
                     Or, Plus, SentenceTable, Succ, Term, Times, TrPred, Var,
                     Zero, apply_assignment, free_vars, is_closed_term, show,
                     substitute_numeral)

DEFAULT_MAX_ENTRIES = 200_000


class PreconditionError(ValueError):
    """(D0, S0*) is not determinately compositional on its fragment."""

    def __init__(self, report: AxiomReport):
        self.report = report
        super().__init__(f"input pair is not determinately compositional: {report.failed}")


class OracleBoundExceeded(ValueError):
    pass


@dataclass(frozen=True, order=False)
class SatEntry:
    formula: Formula
    assignment: tuple[tuple[str, int], ...] = ()

    @property
    def alpha(self) -> dict[str, int]:
        return dict(self.assignment)

    def __str__(self) -> str:
        a = ", ".join(f"{v}:{n}" for v, n in self.assignment)
        return f"({show(self.formula)}, {{{a}}})"


def entry(f: Formula, alpha: Mapping[str, int] | None = None) -> SatEntry:
    alpha = dict(alpha or {})
    fv = free_vars(f)
    if set(alpha) != fv:
        raise ValueError(f"assignment {alpha} does not match free variables {sorted(fv)}")
    return SatEntry(f, tuple(sorted(alpha.items())))


def assignments(f: Formula, witnesses: Iterable[int]) -> Iterator[dict[str, int]]:
    fv = sorted(free_vars(f))
    W = sorted(witnesses)
    for vals in itertools.product(W, repeat=len(fv)):
        yield dict(zip(fv, vals))


def entries_of(f: Formula, witnesses: Iterable[int]) -> list[SatEntry]:
    return [entry(f, a) for a in assignments(f, witnesses)]


def sub_entries(e: SatEntry, witnesses: Iterable[int]) -> list[SatEntry]:
    """Direct sub-entries; quantifier bodies get every W-variant of the bound variable."""
    f, a = e.formula, e.alpha

    def restrict(g: Formula, env: dict) -> SatEntry:
        fv = free_vars(g)
        return SatEntry(g, tuple(sorted((v, n) for v, n in env.items() if v in fv)))

    if isinstance(f, Not):
        return [restrict(f.body, a)]
    if isinstance(f, (And, Or)):
        return [restrict(f.left, a), restrict(f.right, a)]
    if isinstance(f, (Exists, Forall)):
        return [restrict(f.body, {**a, f.var: w}) for w in sorted(witnesses)]
    return []


def entry_closure(seed: Iterable[SatEntry], witnesses: Iterable[int],
                  max_entries: int = DEFAULT_MAX_ENTRIES) -> frozenset[SatEntry]:
    W = tuple(sorted(witnesses))
    out: set[SatEntry] = set()
    stack = list(seed)
    while stack:
        e = stack.pop()
        if e in out:
            continue
        out.add(e)
        if len(out) > max_entries:
            raise OverflowError(f"entry closure exceeds {max_entries} entries")
        stack.extend(sub_entries(e, W))
    return frozenset(out)


# ----------------------------------------------------------- similarity


def canonical_pair(f: Formula, alpha: Mapping[str, int] | None = None,
                   cap: int = DEFAULT_CAP) -> Formula:
    """Representative of the similarity class of (f, alpha)."""
    return collapse(apply_assignment(f, dict(alpha or {})), cap)


@functools.lru_cache(maxsize=1 << 18)
def canon(e: SatEntry, cap: int = DEFAULT_CAP) -> Formula:
    return canonical_pair(e.formula, e.alpha, cap)


def similar(a: SatEntry, b: SatEntry, cap: int = DEFAULT_CAP) -> bool:
    return canon(a, cap) == canon(b, cap)


@dataclass(frozen=True)
class _Hole:
    value: int


def _term_templates(t: Term, cap: int) -> list:
    if isinstance(t, (Zero, Numeral, Var)):
        out = [t]
    elif isinstance(t, Succ):
        out = [Succ(x) for x in _term_templates(t.arg, cap)]
    else:
        op = type(t)
        out = [op(x, y) for x in _term_templates(t.left, cap)
               for y in _term_templates(t.right, cap)]
    if is_closed_term(t):
        out.append(_Hole(value_closed(t, cap)))
    return out


def _count_templates(t: Term) -> int:
    if isinstance(t, (Zero, Numeral, Var)):
        n = 1
    elif isinstance(t, Succ):
        n = _count_templates(t.arg)
    else:
        n = _count_templates(t.left) * _count_templates(t.right)
    return n + (1 if is_closed_term(t) else 0)


def _atom_terms(f: Formula) -> list[Term]:
    if isinstance(f, Eq):
        return [f.left, f.right]
    if isinstance(f, (TrPred, DetPred)):
        return [f.arg]
    if isinstance(f, Not):
        return _atom_terms(f.body)
    if isinstance(f, (And, Or)):
        return _atom_terms(f.left) + _atom_terms(f.right)
    return _atom_terms(f.body)


def _rebuild(f: Formula, terms: Iterator) -> Formula:
    if isinstance(f, Eq):
        return Eq(next(terms), next(terms))
    if isinstance(f, (TrPred, DetPred)):
        return type(f)(next(terms))
    if isinstance(f, Not):
        return Not(_rebuild(f.body, terms))
    if isinstance(f, (And, Or)):
        left = _rebuild(f.left, terms)
        return type(f)(left, _rebuild(f.right, terms))
    return type(f)(f.var, _rebuild(f.body, terms))


def _match(tmpl, x, cap: int) -> bool:
    if isinstance(tmpl, _Hole):
        return is_closed_term(x) and value_closed(x, cap) == tmpl.value
    if type(tmpl) is not type(x):
        return False
    if isinstance(tmpl, (Zero, Numeral, Var)):
        return tmpl == x
    if isinstance(tmpl, Succ):
        return _match(tmpl.arg, x.arg, cap)
    if isinstance(tmpl, (Plus, Times, Eq, And, Or)):
        return _match(tmpl.left, x.left, cap) and _match(tmpl.right, x.right, cap)
    if isinstance(tmpl, (TrPred, DetPred)):
        return _match(tmpl.arg, x.arg, cap)
    if isinstance(tmpl, Not):
        return _match(tmpl.body, x.body, cap)
    return tmpl.var == x.var and _match(tmpl.body, x.body, cap)


def similar_oracle(a: SatEntry, b: SatEntry, size_bound: int = 4096,
                   cap: int = DEFAULT_CAP) -> bool:
    """Brute-force similarity: search every template over a's sentence.

    A template abstracts any antichain of closed subterm occurrences of
    a[alpha] into holes; the pairs are similar iff b[beta] instantiates
    some template with closed terms of the same values.
    """
    A = apply_assignment(a.formula, a.alpha)
    B = apply_assignment(b.formula, b.alpha)
    terms = _atom_terms(A)
    total = 1
    for t in terms:
        total *= _count_templates(t)
        if total > size_bound:
            raise OracleBoundExceeded(f"{total}+ templates for {show(A)}")
    options = [_term_templates(t, cap) for t in terms]
    for combo in itertools.product(*options):
        if _match(_rebuild(A, iter(combo)), B, cap):
            return True
    return False


# ------------------------------------------------------------ rank order


def class_children(c: Formula, witnesses: Iterable[int], cap: int = DEFAULT_CAP) -> list[Formula]:
    """Canonical sentences of the direct sub-entries of a canonical sentence."""
    if isinstance(c, Not):
        return [c.body]
    if isinstance(c, (And, Or)):
        return [c.left, c.right]
    if isinstance(c, (Exists, Forall)):
        return [collapse(substitute_numeral(c.body, c.var, w), cap) for w in sorted(witnesses)]
    return []


@dataclass
class RankOrder:
    classes: dict[Formula, list[SatEntry]]
    rank: dict[Formula, int]

    def of(self, e: SatEntry, cap: int = DEFAULT_CAP) -> int:
        return self.rank[canon(e, cap)]


def rank_order(entries: Iterable[SatEntry], witnesses: Iterable[int],
               cap: int = DEFAULT_CAP) -> RankOrder:
    """Partition by similarity; rank = length of the longest chain of classes below."""
    W = tuple(sorted(witnesses))
    classes: dict[Formula, list[SatEntry]] = {}
    for e in entries:
        classes.setdefault(canon(e, cap), []).append(e)
    for members in classes.values():
        members.sort(key=str)
    rank: dict[Formula, int] = {}
    visiting: set[Formula] = set()

    def visit(c: Formula) -> int:
        if c in rank:
            return rank[c]
        if c in visiting:
            raise AssertionError(f"cycle in subformula order at {show(c)}")
        visiting.add(c)
        below = [visit(k) for k in class_children(c, W, cap) if k in classes]
        visiting.discard(c)
        rank[c] = 1 + max(below) if below else 0
        return rank[c]

    for c in classes:
        visit(c)
    return RankOrder(classes, rank)


# --------------------------------------------- determinate compositionality


class _Lookup:
    """Exact membership on a fragment, similarity-class membership elsewhere."""

    def __init__(self, members: AbstractSet[SatEntry], fragment: AbstractSet[SatEntry], cap: int):
        self.members = members
        self.fragment = fragment
        self.cap = cap
        self.classes = {canon(e, cap) for e in members}

    def __call__(self, e: SatEntry) -> bool:
        if e in self.fragment:
            return e in self.members
        return canon(e, self.cap) in self.classes


DET_COMP_CLAUSES = ("D'1", "D'2", "D'3", "D'4", "D'5", "D'6", "R'1", "R'2",
                    "S1", "S2", "S3", "S4", "S5", "S6")


def check_det_comp(fragment: Iterable[SatEntry], D: AbstractSet[SatEntry],
                   S: AbstractSet[SatEntry], witnesses: Iterable[int], table: SentenceTable,
                   cap: int = DEFAULT_CAP) -> AxiomReport:
    """Is (D, S) determinately compositional on ``fragment``?

    Disjunction and the existential are the primitive connectives here.
    Atomic T/D clauses compare with the empty-assignment entry of the coded
    sentence.
    """
    W = tuple(sorted(witnesses))
    frag = frozenset(fragment)
    inD = _Lookup(frozenset(D), frag, cap)
    inS = _Lookup(frozenset(S), frag, cap)
    rep = AxiomReport(notes=["D'5 read with disjunction; D'2/D'3 over empty assignments"])
    rep.declare(*DET_COMP_CLAUSES)

    def coded(t: Term, a) -> Optional[SatEntry]:
        s = table.sentence(value_assign(t, a, cap))
        return None if s is None else SatEntry(s, ())

    for e in sorted(frag, key=str):
        f, a = e.formula, e.alpha
        label = str(e)
        try:
            if isinstance(f, Eq):
                rep.record("D'1", inD(e), None, label)
                rep.record("S1", inS(e) == (value_assign(f.left, a, cap) == value_assign(f.right, a, cap)),
                           None, label)
            elif isinstance(f, (TrPred, DetPred)):
                target = coded(f.arg, a)
                if target is None:
                    continue
                if isinstance(f, TrPred):
                    rep.record("D'2", inD(e) == inD(target), None, label)
                    rep.record("S3", not (inD(target) and inS(e)) or inS(target), None, label)
                else:
                    rep.record("D'3", inD(e) == inD(target), None, label)
                    rep.record("S2", not inD(target) or inS(e), None, label)
            elif isinstance(f, Not):
                (k,) = sub_entries(e, W)
                rep.record("D'4", inD(e) == inD(k), None, label)
                rep.record("S4", not inD(e) or inS(e) == (not inS(k)), None, label)
            elif isinstance(f, Or):
                l, r = sub_entries(e, W)
                rep.record("D'5", inD(e) == ((inD(l) and inD(r)) or (inD(l) and inS(l))
                                             or (inD(r) and inS(r))), None, label)
                rep.record("S5", not inD(e) or inS(e) == (inS(l) or inS(r)), None, label)
            elif isinstance(f, Exists):
                ks = sub_entries(e, W)
                rep.record("D'6", inD(e) == (all(inD(k) for k in ks)
                                             or any(inD(k) and inS(k) for k in ks)), None, label)
                rep.record("S6", not inD(e) or inS(e) == any(inS(k) for k in ks), None, label)
        except EvalError as err:
            rep.record("S1", False, None, f"{label}: {err}")

    by_class: dict[Formula, list[SatEntry]] = {}
    for e in frag:
        by_class.setdefault(canon(e, cap), []).append(e)
    for c in sorted(by_class, key=show):
        members = by_class[c]
        if len(members) < 2:
            continue
        rep.record("R'1", len({m in S for m in members}) == 1, None, f"class {show(c)}")
        rep.record("R'2", len({m in D for m in members}) == 1, None, f"class {show(c)}")
    return rep


def pipeline_pair(p: Pipeline, max_entries: int = DEFAULT_MAX_ENTRIES
                  ) -> tuple[frozenset[SatEntry], frozenset[SatEntry], frozenset[SatEntry]]:
    """(fragment, D0, S0*) with D0(f, a) := f[a] in D_omega and S0*(f, a) := f[a] in T_omega."""
    U = p.U
    cap = U.caps.value
    fragment = entry_closure((SatEntry(U.formula(c)) for c in U.sentences), U.witnesses,
                             max_entries)
    dcls = {collapse(U.formula(c), cap) for c in p.D}
    tcls = {collapse(U.formula(c), cap) for c in p.T}
    D0 = frozenset(e for e in fragment if canon(e, cap) in dcls)
    S0 = frozenset(e for e in fragment if canon(e, cap) in tcls)
    return fragment, D0, S0


# ---------------------------------------------------------- extension step


@dataclass
class EVResult:
    S: frozenset[SatEntry]
    entries: frozenset[SatEntry]
    gamma: tuple[Formula, ...]
    designated: frozenset[Formula]
    values: dict[Formula, bool] = field(repr=False)
    rank: dict[Formula, int] = field(repr=False)

    def holds(self, e: SatEntry) -> bool:
        return e in self.S


def close_gamma(gamma: Iterable[Formula]) -> tuple[Formula, ...]:
    """Add the missing disjunct of any disjunction with exactly one disjunct present."""
    out = list(dict.fromkeys(gamma))
    present = set(out)
    changed = True
    while changed:
        changed = False
        for f in list(out):
            if isinstance(f, (Or, And)) and ((f.left in present) != (f.right in present)):
                for g in (f.left, f.right):
                    if g not in present:
                        present.add(g)
                        out.append(g)
                        changed = True
    return tuple(out)


def ev_extend(fragment: Optional[Iterable[SatEntry]], D0: AbstractSet[SatEntry],
              S0_star: AbstractSet[SatEntry], S_prev: AbstractSet[SatEntry],
              gamma: Iterable[Formula], witnesses: Iterable[int], table: SentenceTable,
              prev_formulas: Iterable[Formula] = (), cap: int = DEFAULT_CAP,
              max_entries: int = DEFAULT_MAX_ENTRIES) -> EVResult:
    """Build S over the W-instances of ``gamma`` (and of ``prev_formulas``).

    S is compositional on ``gamma``, invariant under similarity, agrees
    with S0* on D0-entries and keeps the ``S_prev`` verdicts on
    ``prev_formulas``.

    Classes of minimal rank get their value from the base conditions (in
    order: previous generation, D0 & S0*, true equations, D/T atoms whose
    argument codes a sentence in D0 / S0*); a non-atomic minimal class
    that meets none of them is false everywhere. Higher classes follow the
    compositional clauses.
    """
    W = tuple(sorted(witnesses))
    if fragment is not None:
        pre = check_det_comp(fragment, D0, S0_star, W, table, cap)
        if not pre.passed:
            raise PreconditionError(pre)
    gamma = close_gamma(gamma)
    prev_formulas = tuple(prev_formulas)

    E: set[SatEntry] = set()
    for f in gamma + prev_formulas:
        for e in entries_of(f, W):
            E.add(e)
            E.update(sub_entries(e, W))
            if len(E) > max_entries:
                raise OverflowError(f"more than {max_entries} entries")
    cls: dict[SatEntry, Formula] = {e: canon(e, cap) for e in E}
    classes = set(cls.values())

    # sibling closure: a class has either all of its child classes or none
    changed = True
    while changed:
        changed = False
        for e in list(E):
            kids = sub_entries(e, W)
            if not kids:
                continue
            present = [canon(k, cap) in classes for k in kids]
            if any(present) and not all(present):
                for k in kids:
                    if k not in E:
                        E.add(k)
                        cls[k] = canon(k, cap)
                        classes.add(cls[k])
                changed = True
        if len(E) > max_entries:
            raise OverflowError(f"more than {max_entries} entries")

    order = rank_order(E, W, cap)
    d0 = {canon(e, cap) for e in D0}
    s0 = {canon(e, cap) for e in S0_star}
    prev_cls = {canon(e, cap) for f in prev_formulas for e in entries_of(f, W)}
    sprev = {canon(e, cap) for e in S_prev}

    def coded_class(x: int) -> Optional[Formula]:
        s = table.sentence(x)
        return None if s is None else collapse(s, cap)

    def base(c: Formula) -> bool:
        if c in prev_cls and c in sprev:
            return True
        if c in d0 and c in s0:
            return True
        if isinstance(c, Eq):
            return c.left == c.right
        if isinstance(c, DetPred):
            return coded_class(c.arg.n) in d0
        if isinstance(c, TrPred):
            return coded_class(c.arg.n) in s0
        return False

    values: dict[Formula, bool] = {}
    grounded: dict[Formula, bool] = {}
    for c in sorted(order.rank, key=lambda k: (order.rank[k], show(k))):
        kids = [k for k in class_children(c, W, cap) if k in order.rank]
        if not kids:
            values[c] = base(c)
            grounded[c] = isinstance(c, (Eq, TrPred, DetPred))
            continue
        vs = [values[k] for k in kids]
        if isinstance(c, Not):
            values[c] = not vs[0]
        elif isinstance(c, (Or, Exists)):
            values[c] = any(vs)
        else:
            values[c] = all(vs)
        grounded[c] = all(grounded[k] for k in kids)

    formulas = {e.formula for e in E}
    designated = frozenset(f for f in formulas
                           if all(e in E and grounded[cls[e]] for e in entries_of(f, W)))
    S = frozenset(e for e in E if values[cls[e]])
    return EVResult(S, frozenset(E), gamma, designated, values, order.rank)


def check_gamma(S: AbstractSet[SatEntry], gamma: Iterable[Formula], D0: AbstractSet[SatEntry],
                S0_star: AbstractSet[SatEntry], S_prev: AbstractSet[SatEntry],
                witnesses: Iterable[int], table: SentenceTable,
                prev_formulas: Iterable[Formula] = (), cap: int = DEFAULT_CAP) -> AxiomReport:
    """Independent verification of an extension result; usable on any candidate S."""
    W = tuple(sorted(witnesses))
    gamma = tuple(gamma)
    prev_formulas = tuple(prev_formulas)
    rep = AxiomReport()
    rep.declare("Regularity", "Comp", "Compat", "Preservation")
    d0 = {canon(e, cap) for e in D0}
    s0 = {canon(e, cap) for e in S0_star}

    domain: set[SatEntry] = set()
    for f in gamma + prev_formulas:
        for e in entries_of(f, W):
            domain.add(e)
            domain.update(sub_entries(e, W))

    for f in gamma:
        for e in entries_of(f, W):
            a = e.alpha
            kids = sub_entries(e, W)
            try:
                if isinstance(f, Eq):
                    want = value_assign(f.left, a, cap) == value_assign(f.right, a, cap)
                elif isinstance(f, (TrPred, DetPred)):
                    s = table.sentence(value_assign(f.arg, a, cap))
                    pool = s0 if isinstance(f, TrPred) else d0
                    want = s is not None and collapse(s, cap) in pool
                elif isinstance(f, Not):
                    want = kids[0] not in S
                elif isinstance(f, (Or, Exists)):
                    want = any(k in S for k in kids)
                else:
                    want = all(k in S for k in kids)
                rep.record("Comp", (e in S) == want, None, str(e))
            except EvalError as err:
                rep.record("Comp", False, None, f"{e}: {err}")

    by_class: dict[Formula, list[SatEntry]] = {}
    for e in domain:
        by_class.setdefault(canon(e, cap), []).append(e)
    for c in sorted(by_class, key=show):
        members = by_class[c]
        if len(members) > 1:
            rep.record("Regularity", len({m in S for m in members}) == 1, None,
                       f"class {show(c)}: " + ", ".join(sorted(str(m) for m in members)))
        if c in d0:
            for m in members:
                rep.record("Compat", (m in S) == (c in s0), None, str(m))

    for f in prev_formulas:
        for e in entries_of(f, W):
            rep.record("Preservation", (e in S) == (e in S_prev), None, str(e))
    return rep


def ev_chain(fragment, D0, S0_star, gammas: Iterable[Iterable[Formula]],
             witnesses: Iterable[int], table: SentenceTable,
             cap: int = DEFAULT_CAP) -> list[tuple[EVResult, AxiomReport]]:
    """Run successive extension steps, each preserving the previous designated formulas."""
    W = tuple(sorted(witnesses))
    out = []
    S_prev: frozenset[SatEntry] = frozenset()
    prev: frozenset[Formula] = frozenset()
    for i, g in enumerate(gammas):
        prev_sorted = tuple(sorted(prev, key=show))
        res = ev_extend(fragment if i == 0 else None, D0, S0_star, S_prev, g, W, table,
                        prev_sorted, cap)
        rep = check_gamma(res.S, res.gamma, D0, S0_star, S_prev, W, table, prev_sorted, cap)
        out.append((res, rep))
        S_prev, prev = res.S, res.designated
    return out

