"""Finite sentence universes and witness sets."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .arith import DEFAULT_CAP, value_closed
from .syntax import (And, DetPred, Eq, Exists, Forall, Formula, Not, Or,
                     SentenceTable, TrPred, direct_subformulas, is_sentence,
                     show, size, substitute_numeral)

DEFAULT_CAP_SENTENCES = 5000


class CapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Caps:
    sentences: int = DEFAULT_CAP_SENTENCES
    value: int = DEFAULT_CAP


def instances(phi: Formula, witnesses: Iterable[int]) -> list[Formula]:
    """One instance of a quantified sentence per witness, in witness order."""
    if not isinstance(phi, (Forall, Exists)):
        raise TypeError(f"not a quantified formula: {show(phi)}")
    return [substitute_numeral(phi.body, phi.var, w) for w in sorted(witnesses)]


@dataclass(eq=False)
class Universe:
    """A finite sentence set closed under direct subformulas and W-instances.

    ``shape`` maps each code to a compact description used by the stage
    operators: ("eq", truth), ("T", value), ("D", value), ("not", c),
    ("and"|"or", c1, c2), ("forall"|"exists", (c_w for w in W)).
    """

    table: SentenceTable
    sentences: tuple[int, ...]
    witnesses: tuple[int, ...]
    caps: Caps
    shape: dict[int, tuple] = field(repr=False)
    order: tuple[int, ...] = field(repr=False)   # children before parents

    def __len__(self) -> int:
        return len(self.sentences)

    def __contains__(self, code: int) -> bool:
        return code in self.shape

    def __eq__(self, other) -> bool:
        if not isinstance(other, Universe):
            return NotImplemented
        return (self.sentences == other.sentences and self.witnesses == other.witnesses
                and self.table is other.table)

    def formula(self, code: int) -> Formula:
        return self.table.decode(code)

    def code(self, f: Formula) -> Optional[int]:
        c = self.table.code(f)
        return c if c is not None and c in self.shape else None

    def to_json(self) -> dict:
        return {
            "sentences": [{"code": c, "text": show(self.formula(c))} for c in self.sentences],
            "witnesses": list(self.witnesses),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _core(seeds: Iterable[Formula]) -> list[Formula]:
    out: list[Formula] = []
    seen: set[Formula] = set()
    stack = list(seeds)[::-1]
    while stack:
        f = stack.pop()
        if f in seen:
            continue
        seen.add(f)
        out.append(f)
        stack.extend(g for g in reversed(direct_subformulas(f)) if is_sentence(g))
    return out


def build_universe(table: SentenceTable, seeds: Iterable[int | Formula], n: int = 0,
                   caps: Caps = Caps(), witnesses: Optional[Iterable[int]] = None) -> Universe:
    """Least closure of ``seeds`` under direct subformulas and W-instances.

    W is 0..n together with the codes of the seeds and their sentence
    subformulas, unless ``witnesses`` fixes it explicitly. Codes of
    quantifier instances do not enlarge W.
    """
    if n < 0:
        raise ValueError("witness bound must be >= 0")
    seed_fs: list[Formula] = []
    for s in seeds:
        f = table.decode(s) if isinstance(s, int) else s
        if f is None or not is_sentence(f):
            raise ValueError(f"seed {s!r} is not a sentence")
        seed_fs.append(f)
    core = _core(seed_fs)
    if witnesses is None:
        w = set(range(n + 1)) | {table.intern(f) for f in core}
    else:
        w = set(witnesses)
    W = tuple(sorted(w))

    shape: dict[int, tuple] = {}
    stack = [table.intern(f) for f in reversed(core)]
    while stack:
        c = stack.pop()
        if c in shape:
            continue
        f = table.decode(c)
        if len(shape) >= caps.sentences:
            raise CapExceeded(f"universe exceeds {caps.sentences} sentences at {show(f)}")
        kids: list[Formula] = []
        if isinstance(f, Eq):
            sh = ("eq", value_closed(f.left, caps.value) == value_closed(f.right, caps.value))
        elif isinstance(f, TrPred):
            sh = ("T", value_closed(f.arg, caps.value))
        elif isinstance(f, DetPred):
            sh = ("D", value_closed(f.arg, caps.value))
        elif isinstance(f, Not):
            kids = [f.body]
            sh = ("not", table.intern(f.body))
        elif isinstance(f, (And, Or)):
            kids = [f.left, f.right]
            sh = ("and" if isinstance(f, And) else "or",
                  table.intern(f.left), table.intern(f.right))
        else:
            kids = instances(f, W)
            sh = ("forall" if isinstance(f, Forall) else "exists",
                  tuple(table.intern(k) for k in kids))
        shape[c] = sh
        stack.extend(table.intern(k) for k in reversed(kids))

    order = tuple(sorted(shape, key=lambda c: (size(table.decode(c)), c)))
    return Universe(table, tuple(sorted(shape)), W, caps, shape, order)
