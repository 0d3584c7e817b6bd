"""Abstract syntax for arithmetic with T and D, plus the seed-file parser and sentence table."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Optional, Union


class SyntaxErr(Exception):
    """Raised on malformed seed text or unresolvable names."""

    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        where = f"line {line}, col {col}: " if line else ""
        super().__init__(where + msg)


class AssignmentError(ValueError):
    pass


class TranslationError(ValueError):
    """translate_circ met a node outside the image of translate_star."""

    def __init__(self, node: "Formula"):
        self.node = node
        super().__init__(f"cannot invert translation at node {show(node)}")


# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class Succ:
    arg: "Term"


@dataclass(frozen=True)
class Plus:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Times:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Numeral:
    n: int


@dataclass(frozen=True)
class Quote:
    name: str


Term = Union[Zero, Succ, Plus, Times, Var, Numeral, Quote]

ZERO = Zero()


# ------------------------------------------------------------- formulas


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class TrPred:
    arg: Term


@dataclass(frozen=True)
class DetPred:
    arg: Term


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


Formula = Union[Eq, TrPred, DetPred, Not, And, Or, Forall, Exists]
ATOMS = (Eq, TrPred, DetPred)
BINARY = (And, Or)
QUANTIFIERS = (Forall, Exists)


def numeral(n: int) -> Numeral:
    if n < 0:
        raise ValueError("numerals denote naturals")
    return Numeral(n)


def succ_chain(n: int) -> Term:
    t: Term = ZERO
    for _ in range(n):
        t = Succ(t)
    return t


# ------------------------------------------------------------- printing


def show(x: Union[Term, Formula], expand: bool = False) -> str:
    """Render in seed-file syntax. With ``expand`` numerals print as S-chains."""
    if isinstance(x, Zero):
        return "0"
    if isinstance(x, Numeral):
        if expand:
            return "S(" * x.n + "0" + ")" * x.n
        return f"#{x.n}"
    if isinstance(x, Succ):
        return f"S({show(x.arg, expand)})"
    if isinstance(x, Plus):
        return f"({show(x.left, expand)}+{show(x.right, expand)})"
    if isinstance(x, Times):
        return f"({show(x.left, expand)}*{show(x.right, expand)})"
    if isinstance(x, Var):
        return x.name
    if isinstance(x, Quote):
        return f"quote({x.name})"
    if isinstance(x, Eq):
        return f"{show(x.left, expand)}={show(x.right, expand)}"
    if isinstance(x, TrPred):
        return f"T({show(x.arg, expand)})"
    if isinstance(x, DetPred):
        return f"D({show(x.arg, expand)})"
    if isinstance(x, Not):
        return f"~{show(x.body, expand)}"
    if isinstance(x, And):
        return f"({show(x.left, expand)}&{show(x.right, expand)})"
    if isinstance(x, Or):
        return f"({show(x.left, expand)}|{show(x.right, expand)})"
    if isinstance(x, Forall):
        return f"forall {x.var}.{show(x.body, expand)}"
    if isinstance(x, Exists):
        return f"exists {x.var}.{show(x.body, expand)}"
    raise TypeError(f"not a term or formula: {x!r}")


# ------------------------------------------------------ structural ops


def term_vars(t: Term) -> frozenset[str]:
    if isinstance(t, Var):
        return frozenset([t.name])
    if isinstance(t, Succ):
        return term_vars(t.arg)
    if isinstance(t, (Plus, Times)):
        return term_vars(t.left) | term_vars(t.right)
    return frozenset()


def is_closed_term(t: Term) -> bool:
    return not term_vars(t) and not has_quote(t)


def has_quote(t: Term) -> bool:
    if isinstance(t, Quote):
        return True
    if isinstance(t, Succ):
        return has_quote(t.arg)
    if isinstance(t, (Plus, Times)):
        return has_quote(t.left) or has_quote(t.right)
    return False


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Eq):
        return term_vars(f.left) | term_vars(f.right)
    if isinstance(f, (TrPred, DetPred)):
        return term_vars(f.arg)
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, BINARY):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, QUANTIFIERS):
        return free_vars(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def is_sentence(f: Formula) -> bool:
    return not free_vars(f)


def size(x: Union[Term, Formula]) -> int:
    """Number of AST nodes."""
    if isinstance(x, (Zero, Numeral, Var, Quote)):
        return 1
    if isinstance(x, Succ):
        return 1 + size(x.arg)
    if isinstance(x, (Plus, Times, Eq, And, Or)):
        return 1 + size(x.left) + size(x.right)
    if isinstance(x, (TrPred, DetPred)):
        return 1 + size(x.arg)
    if isinstance(x, Not):
        return 1 + size(x.body)
    if isinstance(x, QUANTIFIERS):
        return 1 + size(x.body)
    raise TypeError(x)


def map_term(t: Term, fn: Callable[[Term], Optional[Term]]) -> Term:
    """Top-down rewrite: ``fn`` returns a replacement or None to recurse."""
    r = fn(t)
    if r is not None:
        return r
    if isinstance(t, Succ):
        return Succ(map_term(t.arg, fn))
    if isinstance(t, Plus):
        return Plus(map_term(t.left, fn), map_term(t.right, fn))
    if isinstance(t, Times):
        return Times(map_term(t.left, fn), map_term(t.right, fn))
    return t


def map_atoms(f: Formula, fn: Callable[[Term, frozenset[str]], Term],
              bound: frozenset[str] = frozenset()) -> Formula:
    """Apply ``fn(term, bound_vars)`` to every top-level term of every atom."""
    if isinstance(f, Eq):
        return Eq(fn(f.left, bound), fn(f.right, bound))
    if isinstance(f, TrPred):
        return TrPred(fn(f.arg, bound))
    if isinstance(f, DetPred):
        return DetPred(fn(f.arg, bound))
    if isinstance(f, Not):
        return Not(map_atoms(f.body, fn, bound))
    if isinstance(f, And):
        return And(map_atoms(f.left, fn, bound), map_atoms(f.right, fn, bound))
    if isinstance(f, Or):
        return Or(map_atoms(f.left, fn, bound), map_atoms(f.right, fn, bound))
    if isinstance(f, Forall):
        return Forall(f.var, map_atoms(f.body, fn, bound | {f.var}))
    if isinstance(f, Exists):
        return Exists(f.var, map_atoms(f.body, fn, bound | {f.var}))
    raise TypeError(f)


def _subst_term(t: Term, env: Mapping[str, Term], bound: frozenset[str]) -> Term:
    def swap(u: Term) -> Optional[Term]:
        if isinstance(u, Var) and u.name in env and u.name not in bound:
            return env[u.name]
        return None

    return map_term(t, swap)


def substitute(f: Formula, env: Mapping[str, Term]) -> Formula:
    """Replace free variables by closed terms (no capture is possible)."""
    if not env:
        return f
    return map_atoms(f, lambda t, bound: _subst_term(t, env, bound))


def substitute_numeral(f: Formula, v: str, n: int) -> Formula:
    return substitute(f, {v: Numeral(n)})


def apply_assignment(f: Formula, alpha: Mapping[str, int]) -> Formula:
    """The sentence f[alpha]; the assignment domain must equal free_vars(f)."""
    fv = free_vars(f)
    if set(alpha) != fv:
        raise AssignmentError(
            f"assignment domain {sorted(alpha)} != free variables {sorted(fv)} of {show(f)}")
    return substitute(f, {v: Numeral(n) for v, n in alpha.items()})


def direct_subformulas(f: Formula) -> list[Formula]:
    if isinstance(f, Not) or isinstance(f, QUANTIFIERS):
        return [f.body]
    if isinstance(f, BINARY):
        return [f.left, f.right]
    return []


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    for g in direct_subformulas(f):
        yield from subformulas(g)


def translate_star(f: Formula) -> Formula:
    """Rewrite & and forall into |, exists and ~ by de Morgan."""
    if isinstance(f, ATOMS):
        return f
    if isinstance(f, Not):
        return Not(translate_star(f.body))
    if isinstance(f, And):
        return Not(Or(Not(translate_star(f.left)), Not(translate_star(f.right))))
    if isinstance(f, Or):
        return Or(translate_star(f.left), translate_star(f.right))
    if isinstance(f, Forall):
        return Not(Exists(f.var, Not(translate_star(f.body))))
    if isinstance(f, Exists):
        return Exists(f.var, translate_star(f.body))
    raise TypeError(f)


def translate_circ(f: Formula) -> Formula:
    """Inverse of translate_star on its image over the &/forall/~ language.

    ``~(~a|~b)`` becomes ``(a&b)`` and ``~exists v.~a`` becomes ``forall v.a``;
    any other disjunction, existential, conjunction or universal blocks inversion.
    """
    if isinstance(f, ATOMS):
        return f
    if isinstance(f, Not):
        b = f.body
        if isinstance(b, Or):
            if isinstance(b.left, Not) and isinstance(b.right, Not):
                return And(translate_circ(b.left.body), translate_circ(b.right.body))
            raise TranslationError(b)
        if isinstance(b, Exists):
            if isinstance(b.body, Not):
                return Forall(b.var, translate_circ(b.body.body))
            raise TranslationError(b)
        return Not(translate_circ(b))
    raise TranslationError(f)


def resolve_quotes(f: Formula, names: Mapping[str, int]) -> Formula:
    def fix(t: Term, bound) -> Term:
        def swap(u: Term) -> Optional[Term]:
            if isinstance(u, Quote):
                if u.name not in names:
                    raise SyntaxErr(f"unbound name {u.name!r}")
                return Numeral(names[u.name])
            return None
        return map_term(t, swap)

    return map_atoms(f, fix)


def quoted_names(f: Formula) -> set[str]:
    found: set[str] = set()

    def grab(t: Term, bound) -> Term:
        def visit(u: Term):
            if isinstance(u, Quote):
                found.add(u.name)
            return None
        map_term(t, visit)
        return t

    map_atoms(f, grab)
    return found


# ------------------------------------------------------- sentence table


class SentenceTable:
    """Injective coding of formulas by consecutive naturals.

    Codes are never reassigned. ``reserve`` hands out a code before its
    formula is known so that a declaration can mention its own code.
    """

    def __init__(self) -> None:
        self._formulas: list[Optional[Formula]] = []
        self._codes: dict[Formula, int] = {}
        self.names: dict[str, int] = {}

    def __len__(self) -> int:
        return len(self._formulas)

    def __contains__(self, f: Formula) -> bool:
        return f in self._codes

    def reserve(self) -> int:
        self._formulas.append(None)
        return len(self._formulas) - 1

    def bind(self, code: int, f: Formula) -> None:
        if self._formulas[code] is not None:
            raise ValueError(f"code {code} already bound")
        if f in self._codes:
            raise ValueError(f"{show(f)} already has code {self._codes[f]}")
        self._formulas[code] = f
        self._codes[f] = code

    def intern(self, f: Formula) -> int:
        c = self._codes.get(f)
        if c is None:
            c = self.reserve()
            self.bind(c, f)
        return c

    def code(self, f: Formula) -> Optional[int]:
        return self._codes.get(f)

    def decode(self, code: int) -> Optional[Formula]:
        if 0 <= code < len(self._formulas):
            return self._formulas[code]
        return None

    def sentence(self, code: int) -> Optional[Formula]:
        """The sentence coded by ``code``, or None for non-sentence values."""
        f = self.decode(code)
        if f is None or not is_sentence(f):
            return None
        return f

    def items(self) -> Iterator[tuple[int, Formula]]:
        for c, f in enumerate(self._formulas):
            if f is not None:
                yield c, f


# --------------------------------------------------------------- parser

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#(?!\d)[^\n]*)
  | (?P<nl>\n)
  | (?P<assign>:=)
  | (?P<num>\#?\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<punct>[()=+*&|~.])
""", re.VERBOSE)

KEYWORDS = {"forall", "exists", "quote", "S", "T", "D"}


@dataclass
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Tok]:
    toks: list[Tok] = []
    pos, line, start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise SyntaxErr(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            toks.append(Tok("nl", "\n", line, pos - start + 1))
            line += 1
            start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(Tok(kind, m.group(), line, pos - start + 1))
        pos = m.end()
    toks.append(Tok("eof", "", line, pos - start + 1))
    return toks


class _Parser:
    def __init__(self, toks: list[Tok]):
        self.toks = toks
        self.i = 0

    @property
    def cur(self) -> Tok:
        return self.toks[self.i]

    def fail(self, msg: str) -> SyntaxErr:
        t = self.cur
        return SyntaxErr(f"{msg} (found {t.text!r})" if t.text.strip() else msg, t.line, t.col)

    def accept(self, text: str) -> bool:
        if self.cur.text == text and self.cur.kind in ("punct", "ident", "assign"):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            raise self.fail(f"expected {text!r}")

    def variable(self) -> str:
        t = self.cur
        if t.kind != "ident" or t.text in KEYWORDS:
            raise self.fail("expected a variable")
        self.i += 1
        return t.text

    def term(self) -> Term:
        t = self.cur
        if t.kind == "num":
            self.i += 1
            if t.text.startswith("#"):
                return Numeral(int(t.text[1:]))
            if t.text != "0":
                raise SyntaxErr("bare numerals other than 0 need a '#' prefix", t.line, t.col)
            return ZERO
        if self.accept("S"):
            self.expect("(")
            a = self.term()
            self.expect(")")
            return Succ(a)
        if self.accept("quote"):
            self.expect("(")
            n = self.cur
            if n.kind != "ident":
                raise self.fail("expected a declaration name")
            self.i += 1
            self.expect(")")
            q = Quote(n.text)
            self._quote_pos[q.name] = self._quote_pos.get(q.name, (n.line, n.col))
            return q
        if self.accept("("):
            a = self.term()
            if self.accept("+"):
                op = Plus
            elif self.accept("*"):
                op = Times
            else:
                raise self.fail("expected '+' or '*'")
            b = self.term()
            self.expect(")")
            return op(a, b)
        return Var(self.variable())

    _quote_pos: dict

    def formula(self) -> Formula:
        t = self.cur
        if self.accept("~"):
            return Not(self.formula())
        if t.text in ("forall", "exists") and t.kind == "ident":
            self.i += 1
            v = self.variable()
            self.expect(".")
            body = self.formula()
            return (Forall if t.text == "forall" else Exists)(v, body)
        if t.text in ("T", "D") and t.kind == "ident" and self.toks[self.i + 1].text == "(":
            self.i += 1
            self.expect("(")
            a = self.term()
            self.expect(")")
            return TrPred(a) if t.text == "T" else DetPred(a)
        if t.text == "(":
            save = self.i
            try:
                self.i += 1
                a = self.formula()
                if self.accept("&"):
                    op = And
                elif self.accept("|"):
                    op = Or
                else:
                    raise self.fail("expected '&' or '|'")
                b = self.formula()
                self.expect(")")
                return op(a, b)
            except SyntaxErr as first:
                far = (self.cur.line, self.cur.col)
                self.i = save
                try:
                    return self.equation()
                except SyntaxErr as second:
                    raise first if far > (second.line, second.col) else second
        return self.equation()

    def equation(self) -> Formula:
        a = self.term()
        self.expect("=")
        return Eq(a, self.term())


def _parser(text: str) -> _Parser:
    p = _Parser(tokenize(text))
    p._quote_pos = {}
    return p


@dataclass
class Program:
    """Named declarations (in source order) over a shared table."""

    names: dict[str, int]
    table: SentenceTable

    def __getitem__(self, name: str) -> int:
        return self.names[name]

    def formula(self, name: str) -> Formula:
        return self.table.decode(self.names[name])

    @property
    def codes(self) -> list[int]:
        return list(self.names.values())


def parse_formula(text: str, names: Mapping[str, int] | None = None) -> Formula:
    """Parse one formula; quote(...) resolves against ``names``."""
    p = _parser(text)
    while p.cur.kind == "nl":
        p.i += 1
    f = p.formula()
    while p.cur.kind == "nl":
        p.i += 1
    if p.cur.kind != "eof":
        raise p.fail("trailing input")
    try:
        return resolve_quotes(f, names or {})
    except SyntaxErr as e:
        raise SyntaxErr(str(e), *_first_pos(p, f, names or {})) from None


def _first_pos(p: _Parser, f: Formula, names) -> tuple[int, int]:
    for n in sorted(quoted_names(f)):
        if n not in names:
            return p._quote_pos[n]
    return (0, 0)


def parse_source(text: str, table: SentenceTable | None = None,
                 transform: Callable[[Formula], Formula] | None = None,
                 allow_open: bool = False) -> Program:
    """Parse a seed file and intern every declaration.

    Names may be used before they are declared. Declarations whose name is
    quoted somewhere receive a code before any formula is resolved, which
    is what lets ``L := ~T(quote(L))`` contain its own code. ``transform``
    is applied to each parsed formula before binding.
    """
    table = table if table is not None else SentenceTable()
    p = _parser(text)
    decls: list[tuple[str, Formula, Tok]] = []
    seen: dict[str, Tok] = {}
    while p.cur.kind != "eof":
        if p.cur.kind == "nl":
            p.i += 1
            continue
        nt = p.cur
        if nt.kind != "ident" or nt.text in KEYWORDS:
            raise p.fail("expected a declaration name")
        p.i += 1
        p.expect(":=")
        f = p.formula()
        if p.cur.kind not in ("nl", "eof"):
            raise p.fail("expected end of line")
        if nt.text in seen or nt.text in table.names:
            raise SyntaxErr(f"duplicate name {nt.text!r}", nt.line, nt.col)
        seen[nt.text] = nt
        if transform is not None:
            f = transform(f)
        decls.append((nt.text, f, nt))

    declared = {name for name, _, _ in decls}
    quoted: set[str] = set()
    for name, f, _ in decls:
        for q in quoted_names(f):
            if q not in declared and q not in table.names:
                line, col = p._quote_pos[q]
                raise SyntaxErr(f"unbound name {q!r}", line, col)
            quoted.add(q)

    names = dict(table.names)
    for name, _, _ in decls:
        if name in quoted:
            names[name] = table.reserve()

    result: dict[str, int] = {}
    for name, f, tok in decls:
        g = resolve_quotes(f, names)
        if not allow_open and free_vars(g):
            raise SyntaxErr(f"declaration {name!r} has free variables "
                            f"{sorted(free_vars(g))}", tok.line, tok.col)
        if name in quoted:
            try:
                table.bind(names[name], g)
            except ValueError as e:
                raise SyntaxErr(f"cannot bind {name!r}: {e}", tok.line, tok.col) from None
        else:
            names[name] = table.intern(g)
        result[name] = names[name]
    table.names.update(result)
    return Program(result, table)


def iter_atoms(f: Formula) -> Iterable[Formula]:
    return (g for g in subformulas(f) if isinstance(g, ATOMS))
