"""Stage construction: the determinateness operator over Tarskian evaluation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import AbstractSet, Iterable, Mapping, Optional

from .arith import DEFAULT_CAP, value_assign
from .syntax import (And, DetPred, Eq, Exists, Forall, Formula, Not, Or,
                     TrPred)
from .universe import Universe

CodeSet = AbstractSet[int]


def d_operator(D: CodeSet, T: CodeSet, U: Universe) -> frozenset[int]:
    """Sentences of U that are determinate one step after (D, T).

    Negations outside U are answered by the derived rules
    D(~p) <=> p in D and T(~p) <=> p not in T, so "the negation of a
    conjunct is determinate and true" reads as "the conjunct is in D but
    not in T". Disjunction and the existential are the duals.
    """
    out = set()
    for c, sh in U.shape.items():
        kind = sh[0]
        if kind == "eq":
            ok = True
        elif kind in ("T", "D"):
            ok = sh[1] in D
        elif kind == "not":
            ok = sh[1] in D
        elif kind == "and":
            a, b = sh[1], sh[2]
            ok = (a in D and b in D) or (a in D and a not in T) or (b in D and b not in T)
        elif kind == "or":
            a, b = sh[1], sh[2]
            ok = (a in D and b in D) or (a in D and a in T) or (b in D and b in T)
        elif kind == "forall":
            inst = sh[1]
            ok = all(x in D for x in inst) or any(x in D and x not in T for x in inst)
        else:
            inst = sh[1]
            ok = all(x in D for x in inst) or any(x in D and x in T for x in inst)
        if ok:
            out.add(c)
    return frozenset(out)


def tarski_eval(D: CodeSet, T: CodeSet, phi: Formula, witnesses: Iterable[int],
                cap: int = DEFAULT_CAP, env: Optional[Mapping[str, int]] = None) -> bool:
    """Classical truth of ``phi`` in the structure (N restricted to W, D, T)."""
    W = tuple(witnesses)
    return _ev(D, T, phi, W, cap, dict(env or {}))


def _ev(D, T, f, W, cap, env) -> bool:
    if isinstance(f, Eq):
        return value_assign(f.left, env, cap) == value_assign(f.right, env, cap)
    if isinstance(f, TrPred):
        return value_assign(f.arg, env, cap) in T
    if isinstance(f, DetPred):
        return value_assign(f.arg, env, cap) in D
    if isinstance(f, Not):
        return not _ev(D, T, f.body, W, cap, env)
    if isinstance(f, And):
        return _ev(D, T, f.left, W, cap, env) and _ev(D, T, f.right, W, cap, env)
    if isinstance(f, Or):
        return _ev(D, T, f.left, W, cap, env) or _ev(D, T, f.right, W, cap, env)
    if isinstance(f, (Forall, Exists)):
        want = isinstance(f, Exists)
        saved = env.get(f.var)
        try:
            for w in W:
                env[f.var] = w
                if _ev(D, T, f.body, W, cap, env) == want:
                    return want
            return not want
        finally:
            if saved is None:
                env.pop(f.var, None)
            else:
                env[f.var] = saved
    raise TypeError(f)


def stage_truth(D: CodeSet, T: CodeSet, U: Universe) -> frozenset[int]:
    """{phi in U : tarski_eval(D, T, phi, W)} computed bottom-up over U."""
    val: dict[int, bool] = {}
    for c in U.order:
        sh = U.shape[c]
        kind = sh[0]
        if kind == "eq":
            v = sh[1]
        elif kind == "T":
            v = sh[1] in T
        elif kind == "D":
            v = sh[1] in D
        elif kind == "not":
            v = not val[sh[1]]
        elif kind == "and":
            v = val[sh[1]] and val[sh[2]]
        elif kind == "or":
            v = val[sh[1]] or val[sh[2]]
        elif kind == "forall":
            v = all(val[x] for x in sh[1])
        else:
            v = any(val[x] for x in sh[1])
        val[c] = v
    return frozenset(c for c, v in val.items() if v)


@dataclass(frozen=True)
class Stage:
    i: int
    D: frozenset[int]
    T: frozenset[int]


@dataclass
class StageTrace:
    stages: list[Stage]
    fixpoint: Optional[int] = None
    D_omega: frozenset[int] = field(default_factory=frozenset)
    T_omega: frozenset[int] = field(default_factory=frozenset)

    def first_entry(self, code: int, truth: bool = False) -> Optional[int]:
        """Least stage index i with code in D_i (and in T_i when ``truth``)."""
        for s in self.stages:
            if code in s.D and (not truth or code in s.T):
                return s.i
        return None

    def to_json(self) -> dict:
        return {
            "stages": [{"i": s.i, "D": sorted(s.D), "T": sorted(s.T)} for s in self.stages],
            "fixpoint": self.fixpoint,
            "D_omega": sorted(self.D_omega),
            "T_omega": sorted(self.T_omega),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data: dict) -> "StageTrace":
        try:
            stages = [Stage(int(s["i"]), frozenset(map(int, s["D"])), frozenset(map(int, s["T"])))
                      for s in data["stages"]]
            fp = data.get("fixpoint")
            return cls(stages, None if fp is None else int(fp),
                       frozenset(map(int, data["D_omega"])), frozenset(map(int, data["T_omega"])))
        except (KeyError, TypeError, ValueError) as e:
            raise ValueError(f"malformed stage trace: {e}") from None


def limit_sets(trace: StageTrace) -> tuple[frozenset[int], frozenset[int]]:
    if not trace.stages:
        raise ValueError("empty trace")
    D: set[int] = set()
    T: set[int] = set()
    for s in trace.stages:
        D |= s.D
        T |= s.D & s.T
    return frozenset(D), frozenset(T)


def run_stages(U: Universe, max_stages: int = 1000) -> StageTrace:
    """Iterate D_{i+1} = d_operator(D_i, T_i), T_{i+1} = truth in (U, D_i, T_i).

    Stops at the first i where stage i+1 agrees with stage i on D and T & D
    (the fixpoint index is i), or after ``max_stages`` new stages.
    """
    if max_stages < 1:
        raise ValueError("max_stages must be >= 1")
    stages = [Stage(0, frozenset(), frozenset())]
    fixpoint = None
    while len(stages) - 1 < max_stages:
        prev = stages[-1]
        D = d_operator(prev.D, prev.T, U)
        T = stage_truth(prev.D, prev.T, U)
        stages.append(Stage(prev.i + 1, D, T))
        if D == prev.D and (T & prev.D) == (prev.T & prev.D):
            fixpoint = prev.i
            break
    trace = StageTrace(stages, fixpoint)
    trace.D_omega, trace.T_omega = limit_sets(trace)
    return trace


def t_final(D_omega: CodeSet, T_omega: CodeSet, phi: Formula, witnesses: Iterable[int],
            cap: int = DEFAULT_CAP) -> bool:
    return tarski_eval(D_omega, T_omega, phi, witnesses, cap)


@dataclass
class Pipeline:
    """Universe plus trace, with the final truth predicate attached."""

    U: Universe
    trace: StageTrace

    @property
    def D(self) -> frozenset[int]:
        return self.trace.D_omega

    @property
    def T(self) -> frozenset[int]:
        return self.trace.T_omega

    def truth(self, phi: Formula) -> bool:
        return t_final(self.D, self.T, phi, self.U.witnesses, self.U.caps.value)

    def truth_table(self) -> dict[int, bool]:
        true = stage_truth(self.D, self.T, self.U)
        return {c: c in true for c in self.U.sentences}


def run_pipeline(U: Universe, max_stages: int = 1000) -> Pipeline:
    return Pipeline(U, run_stages(U, max_stages))
