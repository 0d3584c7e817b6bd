"""Command-line front end: build, check, ev, sim.

Exit codes:
  0  success (fixpoint found / all checks pass)
  1  input error (parse, evaluation, malformed file, cap exceeded)
  2  stage cap hit before a fixpoint (build)
  3  some check failed (check, ev)
  4  precondition failure: (D0, S0*) not determinately compositional (ev)
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .arith import DEFAULT_CAP, EvalError
from .checker import check_all
from .engine import Pipeline, StageTrace, limit_sets, run_pipeline, t_final
from .report import AxiomReport
from .similarity import (OracleBoundExceeded, PreconditionError, SatEntry, canon,
                         check_det_comp, check_gamma, entry, entry_closure,
                         ev_extend, pipeline_pair, similar, similar_oracle)
from .syntax import (SentenceTable, SyntaxErr, parse_formula, parse_source, show,
                     translate_star)
from .universe import CapExceeded, Caps, build_universe

EXIT_OK, EXIT_INPUT, EXIT_STAGE_CAP, EXIT_CHECK, EXIT_PRECONDITION = 0, 1, 2, 3, 4


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    seeds: Optional[Path]
    witness_max: int
    max_stages: int
    caps: Caps
    out: Optional[Path]


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def _natural(text: str) -> int:
    n = int(text)
    if n < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return n


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None


def _emit(data: dict, out: Optional[Path]) -> None:
    text = json.dumps(data, sort_keys=True, indent=1) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _config(args) -> RunConfig:
    return RunConfig(args.seeds, args.witness_max, args.max_stages,
                     Caps(args.cap_sentences, args.cap_value), args.out)


# -------------------------------------------------------------- build


def _pipeline(cfg: RunConfig, n: int, star: bool = False):
    table = SentenceTable()
    text = _read(cfg.seeds) if cfg.seeds is not None else ""
    prog = parse_source(text, table, transform=translate_star if star else None)
    U = build_universe(table, prog.codes, n, cfg.caps)
    return prog, run_pipeline(U, cfg.max_stages)


def _memberships(prog, p: Pipeline) -> dict:
    out = {}
    for name, code in sorted(prog.names.items()):
        out[name] = {"code": code, "D": code in p.D, "T": code in p.T,
                     "first_D": p.trace.first_entry(code),
                     "first_T": p.trace.first_entry(code, truth=True)}
    return out


def build_report(cfg: RunConfig, diff_witness: bool = False) -> tuple[dict, int]:
    prog, p = _pipeline(cfg, cfg.witness_max)
    report = {
        "config": {"witness_max": cfg.witness_max, "max_stages": cfg.max_stages,
                   "cap_sentences": cfg.caps.sentences, "cap_value": cfg.caps.value},
        "universe": p.U.to_json(),
        "trace": p.trace.to_json(),
        "names": _memberships(prog, p),
    }
    if diff_witness:
        n2 = 2 * cfg.witness_max
        prog2, p2 = _pipeline(cfg, n2)
        wide = _memberships(prog2, p2)
        changed = []
        for name, row in report["names"].items():
            other = wide[name]
            if (row["D"], row["T"]) != (other["D"], other["T"]):
                changed.append({"name": name, "D": [row["D"], other["D"]],
                                "T": [row["T"], other["T"]]})
        report["witness_diff"] = {"n": cfg.witness_max, "n2": n2, "changed": changed}
    code = EXIT_OK if p.trace.fixpoint is not None else EXIT_STAGE_CAP
    return report, code


def cmd_build(args) -> int:
    cfg = _config(args)
    report, code = build_report(cfg, args.diff_witness)
    _emit(report, cfg.out)
    if code == EXIT_STAGE_CAP:
        print(f"stage cap {cfg.max_stages} reached before a fixpoint", file=sys.stderr)
    return code


# -------------------------------------------------------------- check


def load_build(data: dict):
    """Rebuild (universe, trace) from a build report."""
    try:
        table = SentenceTable()
        rows = sorted(data["universe"]["sentences"], key=lambda r: int(r["code"]))
        top = max((int(r["code"]) for r in rows), default=-1)
        for _ in range(top + 1):
            table.reserve()
        for r in rows:
            table.bind(int(r["code"]), parse_formula(r["text"]))
        cfg = data.get("config", {})
        caps = Caps(int(cfg.get("cap_sentences", len(rows) + 1)),
                    int(cfg.get("cap_value", DEFAULT_CAP)))
        W = [int(w) for w in data["universe"]["witnesses"]]
        U = build_universe(table, [int(r["code"]) for r in rows], witnesses=W, caps=caps)
        if sorted(U.sentences) != [int(r["code"]) for r in rows]:
            raise ValueError("sentence list is not closed")
        trace = StageTrace.from_json(data["trace"])
    except (KeyError, TypeError, ValueError, SyntaxErr, EvalError) as e:
        raise InputError(f"malformed trace: {e}") from None
    return U, trace


def check_report(data: dict) -> tuple[AxiomReport, int]:
    U, trace = load_build(data)
    D, T = trace.D_omega, trace.T_omega
    rep = AxiomReport()
    rep.declare("Trace-limit")
    if trace.stages:
        lD, lT = limit_sets(trace)
        rep.record("Trace-limit", (lD, lT) == (D, T), None,
                   "D_omega/T_omega differ from the union of the stages")
    rep.merge(check_all(U, trace, D, T, lambda f: t_final(D, T, f, U.witnesses, U.caps.value)))
    return rep, (EXIT_OK if rep.passed else EXIT_CHECK)


def cmd_check(args) -> int:
    try:
        data = json.loads(_read(args.trace))
    except json.JSONDecodeError as e:
        raise InputError(f"malformed trace: {e}") from None
    rep, code = check_report(data)
    _emit(rep.to_json(), args.out)
    if code:
        print("failed: " + ", ".join(rep.failed), file=sys.stderr)
    return code


# ----------------------------------------------------------------- ev


def _load_entries(rows, table: SentenceTable) -> list[SatEntry]:
    out = []
    for r in rows:
        f = parse_formula(r["formula"]) if isinstance(r["formula"], str) else table.decode(int(r["formula"]))
        if f is None:
            raise InputError(f"unknown formula code {r['formula']}")
        out.append(entry(translate_star(f), {k: int(v) for k, v in r.get("assignment", {}).items()}))
    return out


def _dump(entries, table: SentenceTable) -> list[dict]:
    # intern in a fixed order so fresh codes do not depend on set iteration
    ordered = sorted(entries, key=lambda e: (show(e.formula), e.assignment))
    rows = [{"formula": table.intern(e.formula), "text": show(e.formula),
             "assignment": dict(e.assignment)} for e in ordered]
    rows.sort(key=lambda r: (r["formula"], sorted(r["assignment"].items())))
    return rows


def ev_report(cfg: RunConfig, gamma_path: Optional[Path], pair_path: Optional[Path]) -> tuple[dict, int]:
    if cfg.seeds is not None:
        prog, p = _pipeline(cfg, cfg.witness_max, star=True)
        table, W = prog.table, p.U.witnesses
        fragment, D0, S0 = pipeline_pair(p)
    else:
        table = SentenceTable()
        W = tuple(range(cfg.witness_max + 1))
        fragment, D0, S0 = frozenset(), frozenset(), frozenset()
    if pair_path is not None:
        try:
            pair = json.loads(_read(pair_path))
            D0 = frozenset(_load_entries(pair.get("D0", []), table))
            S0 = frozenset(_load_entries(pair.get("S0", []), table))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise InputError(f"malformed pair file: {e}") from None
        fragment = entry_closure(D0 | S0, W)
    gamma = []
    if gamma_path is not None:
        gprog = parse_source(_read(gamma_path), table, transform=translate_star, allow_open=True)
        gamma = [gprog.formula(n) for n in gprog.names]
    report: dict = {"witnesses": list(W)}
    if cfg.seeds is not None:
        report["names"] = dict(sorted(prog.names.items()))
    try:
        res = ev_extend(fragment, D0, S0, frozenset(), gamma, W, table, cap=cfg.caps.value)
    except PreconditionError as e:
        report["precondition"] = e.report.to_json()
        return report, EXIT_PRECONDITION
    except OverflowError as e:
        raise InputError(str(e)) from None
    rep = check_gamma(res.S, res.gamma, D0, S0, frozenset(), W, table, cap=cfg.caps.value)
    report["precondition"] = check_det_comp(fragment, D0, S0, W, table, cfg.caps.value).to_json()
    report["gamma"] = [show(f) for f in res.gamma]
    report["S"] = _dump(res.S, table)
    report["designated"] = sorted(show(f) for f in res.designated)
    report["check"] = rep.to_json()
    return report, (EXIT_OK if rep.passed else EXIT_CHECK)


def cmd_ev(args) -> int:
    cfg = _config(args)
    report, code = ev_report(cfg, args.gamma, args.pair)
    _emit(report, cfg.out)
    if code == EXIT_PRECONDITION:
        print("(D0, S0*) is not determinately compositional", file=sys.stderr)
    return code


# ---------------------------------------------------------------- sim


def sim_report(pairs: list, cap: int = DEFAULT_CAP) -> list[dict]:
    rows = []
    for i, p in enumerate(pairs):
        try:
            a = entry(parse_formula(p["a"]), {k: int(v) for k, v in p.get("alpha", {}).items()})
            b = entry(parse_formula(p["b"]), {k: int(v) for k, v in p.get("beta", {}).items()})
        except (KeyError, TypeError, ValueError, SyntaxErr) as e:
            raise InputError(f"pair {i}: {e}") from None
        try:
            oracle: Optional[bool] = similar_oracle(a, b, cap=cap)
        except OracleBoundExceeded:
            oracle = None
        rows.append({"index": i, "similar": similar(a, b, cap), "oracle": oracle,
                     "canonical_a": show(canon(a, cap)), "canonical_b": show(canon(b, cap))})
    return rows


def cmd_sim(args) -> int:
    try:
        pairs = json.loads(_read(args.pairs))
    except json.JSONDecodeError as e:
        raise InputError(f"malformed pairs file: {e}") from None
    if not isinstance(pairs, list):
        raise InputError("pairs file must hold a JSON list")
    _emit({"pairs": sim_report(pairs, args.cap_value)}, args.out)
    return EXIT_OK


# --------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cdwb", description=__doc__.split("\n")[0],
                                 epilog=__doc__.split("\n", 1)[1],
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, seeds_required=False):
        p.add_argument("--seeds", type=Path, required=seeds_required, help="seed file")
        p.add_argument("--witness-max", type=_natural, default=3, metavar="N",
                       help="witness set is 0..N plus seed codes (default 3)")
        p.add_argument("--max-stages", type=_positive, default=1000, metavar="K")
        p.add_argument("--cap-sentences", type=_positive, default=5000, metavar="M")
        p.add_argument("--cap-value", type=_positive, default=DEFAULT_CAP, metavar="V")
        p.add_argument("--out", type=Path, help="write JSON here instead of stdout")

    b = sub.add_parser("build", help="build a universe and run the stage iteration")
    common(b, seeds_required=True)
    b.add_argument("--diff-witness", action="store_true",
                   help="re-run with 2N witnesses and report membership changes")
    b.set_defaults(func=cmd_build)

    c = sub.add_parser("check", help="run every checker on a build report")
    c.add_argument("--trace", type=Path, required=True, help="JSON written by build")
    c.add_argument("--out", type=Path)
    c.set_defaults(func=cmd_check)

    e = sub.add_parser("ev", help="extend a satisfaction class to a formula set")
    common(e)
    e.add_argument("--gamma", type=Path, help="formula file in seed syntax (free variables allowed)")
    e.add_argument("--pair", type=Path,
                   help='JSON {"D0": [...], "S0": [...]} of entries; replaces the seeds pair')
    e.set_defaults(func=cmd_ev)

    s = sub.add_parser("sim", help="decide similarity of entry pairs")
    s.add_argument("--pairs", type=Path, required=True,
                   help='JSON list of {"a", "alpha", "b", "beta"}')
    s.add_argument("--cap-value", type=_positive, default=DEFAULT_CAP, metavar="V")
    s.add_argument("--out", type=Path)
    s.set_defaults(func=cmd_sim)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
    except SyntaxErr as e:
        print(f"syntax error: {e}", file=sys.stderr)
    except (CapExceeded, EvalError) as e:
        print(f"error: {e}", file=sys.stderr)
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
