"""Formal computation of term values."""

from __future__ import annotations

from typing import Mapping, Optional

from .syntax import (ZERO, Formula, Numeral, Plus, Quote, Succ, Term, Times, Var,
                     Zero, is_closed_term, map_atoms, show, size, succ_chain)

DEFAULT_CAP = 10**9


class EvalError(ValueError):
    pass


class OpenTermError(EvalError):
    pass


class ValueOverflow(EvalError):
    pass


def _value(t: Term, env: Mapping[str, int], cap: int) -> int:
    if isinstance(t, Zero):
        v = 0
    elif isinstance(t, Numeral):
        v = t.n
    elif isinstance(t, Succ):
        v = _value(t.arg, env, cap) + 1
    elif isinstance(t, Plus):
        v = _value(t.left, env, cap) + _value(t.right, env, cap)
    elif isinstance(t, Times):
        v = _value(t.left, env, cap) * _value(t.right, env, cap)
    elif isinstance(t, Var):
        if t.name not in env:
            raise OpenTermError(f"variable {t.name!r} has no value")
        v = env[t.name]
    elif isinstance(t, Quote):
        raise OpenTermError(f"unresolved quote({t.name})")
    else:
        raise TypeError(f"not a term: {t!r}")
    if v > cap:
        raise ValueOverflow(f"value of {show(t)} exceeds cap {cap}")
    return v


def value_closed(t: Term, cap: int = DEFAULT_CAP) -> int:
    return _value(t, {}, cap)


def value_assign(t: Term, alpha: Mapping[str, int], cap: int = DEFAULT_CAP) -> int:
    return _value(t, alpha, cap)


def _short(k: int) -> Term:
    # S-chains only while they stay readable
    return succ_chain(k) if k <= 3 else Numeral(k)


def term_variants(n: int, budget: Optional[int] = 16) -> list[Term]:
    """Syntactically distinct closed terms of value ``n``, each of size <= budget.

    The first element is always the shortest available term.
    """
    a = n // 2
    cands: list[Term] = [Numeral(n) if n else ZERO]
    cands.append(Plus(_short(a), _short(n - a)))
    cands.append(_short(n) if n <= 3 else Succ(Numeral(n - 1)))
    cands.append(Times(_short(n), Succ(ZERO)))
    cands.append(Numeral(n))
    if n > 0:
        cands.append(Succ(Numeral(n - 1)))
        cands.append(Plus(Numeral(n), ZERO))
    out: list[Term] = []
    for t in cands:
        if t in out:
            continue
        if budget is not None and size(t) > budget:
            continue
        out.append(t)
    return out


def collapse_term(t: Term, cap: int = DEFAULT_CAP) -> Term:
    """Replace every maximal closed subterm by the numeral of its value."""
    if is_closed_term(t):
        return Numeral(value_closed(t, cap))
    if isinstance(t, Succ):
        return Succ(collapse_term(t.arg, cap))
    if isinstance(t, Plus):
        return Plus(collapse_term(t.left, cap), collapse_term(t.right, cap))
    if isinstance(t, Times):
        return Times(collapse_term(t.left, cap), collapse_term(t.right, cap))
    return t


def collapse(f: Formula, cap: int = DEFAULT_CAP) -> Formula:
    """Formula with all maximal closed subterms collapsed to value numerals."""
    return map_atoms(f, lambda t, bound: collapse_term(t, cap))
