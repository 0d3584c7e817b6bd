"""Per-axiom pass/fail/vacuous reports."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

PASS, FAIL, VACUOUS = "pass", "fail", "vacuous"


@dataclass
class Outcome:
    instances: int = 0
    failures: int = 0
    witness: Optional[dict] = None

    @property
    def status(self) -> str:
        if self.failures:
            return FAIL
        return PASS if self.instances else VACUOUS


@dataclass
class AxiomReport:
    results: dict[str, Outcome] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def declare(self, *axioms: str) -> None:
        for a in axioms:
            self.results.setdefault(a, Outcome())

    def record(self, axiom: str, ok: bool, phi: Optional[int] = None, detail: str = "",
               **extra) -> None:
        o = self.results.setdefault(axiom, Outcome())
        o.instances += 1
        if not ok:
            o.failures += 1
            if o.witness is None:
                o.witness = {"phi": phi, "detail": detail, **extra}

    def status(self, axiom: str) -> str:
        return self.results[axiom].status

    def __getitem__(self, axiom: str) -> Outcome:
        return self.results[axiom]

    def __contains__(self, axiom: str) -> bool:
        return axiom in self.results

    @property
    def failed(self) -> list[str]:
        return sorted(a for a, o in self.results.items() if o.status == FAIL)

    @property
    def passed(self) -> bool:
        return not self.failed

    def merge(self, other: "AxiomReport") -> "AxiomReport":
        for a, o in other.results.items():
            mine = self.results.setdefault(a, Outcome())
            mine.instances += o.instances
            mine.failures += o.failures
            if mine.witness is None:
                mine.witness = o.witness
        for n in other.notes:
            if n not in self.notes:
                self.notes.append(n)
        return self

    def to_json(self) -> dict:
        rows = []
        for a in sorted(self.results):
            o = self.results[a]
            row = {"axiom": a, "status": o.status, "instances": o.instances}
            if o.witness is not None:
                row["witness"] = o.witness
            rows.append(row)
        return {"notes": list(self.notes), "results": rows}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def summary(self) -> str:
        return "\n".join(f"{a:14s} {self.results[a].status}" for a in sorted(self.results))
