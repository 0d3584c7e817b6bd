"""Random inputs for the property tests.

All generators take an explicit ``random.Random``; ``rng_from_env`` builds
one from the CDWB_SEED environment variable so failures can be replayed.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass
from typing import Callable, Optional

from .arith import term_variants, value_assign
from .engine import Pipeline, run_pipeline
from .similarity import SatEntry, entry
from .syntax import (ZERO, DetPred, Eq, Exists, Formula, Not, Numeral, Or, Plus,
                     SentenceTable, Succ, SyntaxErr, Term, Times, TrPred, Var, free_vars,
                     is_closed_term, parse_source, show, subformulas, translate_star)
from .universe import CapExceeded, Caps, Universe, build_universe

ENV_SEED = "CDWB_SEED"


def rng_from_env(default: int = 0) -> random.Random:
    return random.Random(int(os.environ.get(ENV_SEED, default)))


def small_term(rng: random.Random, value: int) -> Term:
    return rng.choice(term_variants(value, budget=10))


# ------------------------------------------------------------ programs


def _formula_src(rng: random.Random, names: list[str], depth: int, bound: list[str]) -> str:
    if depth <= 0 or rng.random() < 0.3:
        k = rng.randrange(6)
        if k == 0 and names:
            return f"T(quote({rng.choice(names)}))"
        if k == 1 and names:
            return f"D(quote({rng.choice(names)}))"
        if k == 2 and bound:
            return f"{rng.choice('TD')}({rng.choice(bound)})"
        if k == 3 and bound:
            v = rng.choice(bound)
            return f"{v}={show(small_term(rng, rng.randrange(4)))}"
        a = rng.randrange(4)
        b = a if rng.random() < 0.6 else rng.randrange(4)
        return f"{show(small_term(rng, a))}={show(small_term(rng, b))}"
    k = rng.randrange(5)
    if k == 0:
        return "~" + _formula_src(rng, names, depth - 1, bound)
    if k in (1, 2):
        op = "&" if k == 1 else "|"
        return (f"({_formula_src(rng, names, depth - 1, bound)}{op}"
                f"{_formula_src(rng, names, depth - 1, bound)})")
    if len(bound) >= 2 or (bound and rng.random() < 0.7):
        return "~" + _formula_src(rng, names, depth - 1, bound)
    v = "u" if bound else "v"
    q = rng.choice(["forall", "exists"])
    return f"{q} {v}.{_formula_src(rng, names, depth - 1, bound + [v])}"


def random_source(rng: random.Random, n_decls: Optional[int] = None, depth: int = 4) -> str:
    """A seed file; declarations may quote any declaration, including themselves."""
    n = n_decls if n_decls is not None else rng.randint(2, 7)
    names = [f"P{i}" for i in range(n)]
    lines = [f"{nm} := {_formula_src(rng, names, rng.randint(0, depth), [])}" for nm in names]
    # the classic paradoxes keep the suite honest
    if rng.random() < 0.3:
        lines.append("L := ~T(quote(L))")
    if rng.random() < 0.2:
        lines.append("K := T(quote(K))")
    return "\n".join(lines) + "\n"


@dataclass
class RandomRun:
    source: str
    n: int
    table: SentenceTable
    universe: Universe
    pipeline: Pipeline


def random_run(rng: random.Random, max_universe: int = 500, max_witnesses: int = 12,
               star: bool = False, tries: int = 100,
               accept: Optional[Callable[[RandomRun], bool]] = None) -> RandomRun:
    """Generate programs until one fits the universe and witness bounds."""
    for _ in range(tries):
        src = random_source(rng)
        n = rng.randint(1, 3)
        table = SentenceTable()
        try:
            prog = parse_source(src, table, transform=translate_star if star else None)
            U = build_universe(table, prog.codes, n, Caps(sentences=max_universe))
        except (CapExceeded, SyntaxErr):
            # SyntaxErr: a quoted declaration repeats an earlier formula
            continue
        if len(U.witnesses) > max_witnesses:
            continue
        run = RandomRun(src, n, table, U, run_pipeline(U, max_stages=len(U) + 2))
        if accept is None or accept(run):
            return run
    raise RuntimeError("no program within bounds; loosen the limits")


# -------------------------------------------------------------- gamma


def _open_formula(rng: random.Random, depth: int, vars_: list[str], codes: list[int]) -> Formula:
    if depth <= 0 or rng.random() < 0.35:
        v = Var(rng.choice(vars_))
        k = rng.randrange(4)
        if k == 0:
            return Eq(v, small_term(rng, rng.randrange(4)))
        if k == 1:
            return TrPred(v)
        if k == 2:
            return DetPred(v)
        return TrPred(Numeral(rng.choice(codes))) if codes else Eq(v, ZERO)
    k = rng.randrange(3)
    if k == 0:
        return Not(_open_formula(rng, depth - 1, vars_, codes))
    if k == 1:
        return Or(_open_formula(rng, depth - 1, vars_, codes),
                  _open_formula(rng, depth - 1, vars_, codes))
    v = rng.choice(vars_)
    return Exists(v, _open_formula(rng, depth - 1, vars_, codes))


def random_gamma(rng: random.Random, U: Universe, max_size: int = 100) -> list[Formula]:
    """At most ``max_size`` formulas drawn from U plus fresh open ones over v and u."""
    pool: list[Formula] = []
    for c in rng.sample(list(U.sentences), min(len(U), rng.randint(1, 30))):
        pool.append(U.formula(c))
        for g in subformulas(U.formula(c)):
            if free_vars(g) and len(free_vars(g)) <= 2:
                pool.append(g)
    codes = list(U.sentences)
    for _ in range(rng.randint(0, 15)):
        pool.append(_open_formula(rng, 3, ["v", "u"], codes))
    pool = [f for f in dict.fromkeys(pool) if len(free_vars(f)) <= 2]
    rng.shuffle(pool)
    return pool[:max_size]


# --------------------------------------------------------- entry pairs


def _template_term(rng: random.Random, vars_: list[str], depth: int) -> Term:
    k = rng.randrange(5)
    if depth <= 0 or k == 0:
        return Var(rng.choice(vars_)) if rng.random() < 0.4 else small_term(rng, rng.randrange(4))
    if k == 1:
        return Succ(_template_term(rng, vars_, depth - 1))
    op = Plus if k < 4 else Times
    return op(_template_term(rng, vars_, depth - 1), _template_term(rng, vars_, depth - 1))


def _template(rng: random.Random, vars_: list[str], depth: int) -> Formula:
    if depth <= 0 or rng.random() < 0.4:
        k = rng.randrange(3)
        if k == 0:
            return Eq(_template_term(rng, vars_, 1), _template_term(rng, vars_, 1))
        return (TrPred if k == 1 else DetPred)(_template_term(rng, vars_, 1))
    k = rng.randrange(3)
    if k == 0:
        return Not(_template(rng, vars_, depth - 1))
    if k == 1:
        return Or(_template(rng, vars_, depth - 1), _template(rng, vars_, depth - 1))
    return Exists("x", _template(rng, vars_ + ["x"], depth - 1))


def _perturb_term(rng: random.Random, t: Term, alpha: dict[str, int]) -> tuple[Term, dict]:
    """Rewrite ``t`` keeping its value: swap closed pieces or hide them behind fresh variables."""
    if is_closed_term(t):
        v = value_assign(t, {})
        r = rng.random()
        if r < 0.3:
            name = f"w{len(alpha)}"
            return Var(name), {**alpha, name: v}
        if r < 0.6:
            return small_term(rng, v), alpha
        return t, alpha
    if isinstance(t, Succ):
        a, alpha = _perturb_term(rng, t.arg, alpha)
        return Succ(a), alpha
    if isinstance(t, (Plus, Times)):
        a, alpha = _perturb_term(rng, t.left, alpha)
        b, alpha = _perturb_term(rng, t.right, alpha)
        return type(t)(a, b), alpha
    return t, alpha


def _perturb(rng: random.Random, f: Formula, alpha: dict[str, int]) -> tuple[Formula, dict]:
    if isinstance(f, Eq):
        a, alpha = _perturb_term(rng, f.left, alpha)
        b, alpha = _perturb_term(rng, f.right, alpha)
        return Eq(a, b), alpha
    if isinstance(f, (TrPred, DetPred)):
        a, alpha = _perturb_term(rng, f.arg, alpha)
        return type(f)(a), alpha
    if isinstance(f, Not):
        b, alpha = _perturb(rng, f.body, alpha)
        return Not(b), alpha
    if isinstance(f, Or):
        a, alpha = _perturb(rng, f.left, alpha)
        b, alpha = _perturb(rng, f.right, alpha)
        return Or(a, b), alpha
    b, alpha = _perturb(rng, f.body, alpha)
    return Exists(f.var, b), alpha


def _instantiate(rng: random.Random, f: Formula) -> tuple[Formula, dict[str, int]]:
    alpha = {v: rng.randrange(4) for v in sorted(free_vars(f))}
    return f, alpha


def random_entry_pair(rng: random.Random) -> tuple[SatEntry, SatEntry]:
    """A pair that is similar by construction about half of the time."""
    base, alpha = _instantiate(rng, _template(rng, ["v", "u"], 2))
    a_f, a_alpha = _perturb(rng, base, dict(alpha))
    r = rng.random()
    if r < 0.5:
        b_f, b_alpha = _perturb(rng, base, dict(alpha))
    elif r < 0.8:
        b_f, b_alpha = _perturb(rng, base, {k: (v + rng.randrange(2)) for k, v in alpha.items()})
    else:
        b_f, b_alpha = _instantiate(rng, _template(rng, ["v", "u"], 2))
    return (entry(a_f, {k: a_alpha[k] for k in free_vars(a_f)}),
            entry(b_f, {k: b_alpha[k] for k in free_vars(b_f)}))
