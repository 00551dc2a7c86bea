"""Reader and printer for the extended SMT-LIB input language.

Three commands extend SMT-LIB 2.0::

    (define-catamorphism Name ((t Tree)) Result body)
    (declare-range Name ((c Result)) bool-body)
    (set-cata-class Name (monotonic h) | associative | unclassified)

``body`` is an ``ite`` cascade over testers of ``t`` with one branch per
constructor; a branch may apply ``Name`` only to a selector of ``t`` that
names a recursive field of that branch's constructor.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from . import theory
from .script import (
    Assert,
    CataCase,
    CataClass,
    CataDef,
    CheckSat,
    Constructor,
    DatatypeDecl,
    DeclareDatatypes,
    DeclareFun,
    DeclareRange,
    DeclareSort,
    DefineCata,
    DefineFun,
    Passthrough,
    RangePred,
    Script,
    SetCataClass,
    Signature,
    find_assoc_decomposition,
    well_sorted,
)
from .terms import (
    BOOL,
    INT,
    REAL,
    STRING,
    CataApp,
    Ctor,
    FunApp,
    Lit,
    Sel,
    Sort,
    SortError,
    Term,
    Test,
    TheoryApp,
    Var,
    datatype_sort,
    free_vars,
    iter_subterms,
    substitute,
)

CAT_SUFFIX = "_GeneratedCatDefineFun"
UNROLL_SUFFIX = "_GeneratedUnrollDefineFun"


# --- errors and spans ---------------------------------------------------------

@dataclass(frozen=True)
class SourceSpan:
    offset: int  # UTF-8 byte offset
    line: int
    column: int
    length: int = 1

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class FrontendError(Exception):
    def __init__(self, message: str, span: SourceSpan | None = None, expected: Sequence[str] = ()):
        self.message = message
        self.span = span
        self.expected = tuple(expected)
        where = f"{span}: " if span else ""
        exp = f" (expected {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{where}{message}{exp}")


class ParseError(FrontendError):
    """Lexical or syntactic error."""


class ValidationError(FrontendError):
    """Well-formed s-expressions that do not make a valid script."""


# --- s-expressions --------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    text: str
    kind: str  # symbol | numeral | decimal | string | keyword
    span: SourceSpan


@dataclass(frozen=True)
class SList:
    items: tuple
    span: SourceSpan


_DELIMS = set("()\";| \t\r\n")


def _tokens(text: str) -> Iterator[tuple[str, str, SourceSpan]]:
    i, n = 0, len(text)
    line, col, byte = 1, 1, 0

    def advance(k: int):
        nonlocal i, line, col, byte
        for ch in text[i:i + k]:
            byte += len(ch.encode("utf-8"))
            if ch == "\n":
                line, col = line + 1, 1
            else:
                col += 1
        i += k

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        if ch == ";":
            j = text.find("\n", i)
            advance((n if j < 0 else j) - i)
            continue
        start = SourceSpan(byte, line, col)
        if ch in "()":
            advance(1)
            yield ch, ch, start
            continue
        if ch == '"':
            j = i + 1
            buf = []
            while True:
                if j >= n:
                    raise ParseError("unterminated string literal", start, ['"'])
                if text[j] == '"':
                    if j + 1 < n and text[j + 1] == '"':
                        buf.append('"')
                        j += 2
                        continue
                    break
                buf.append(text[j])
                j += 1
            raw = text[i:j + 1]
            advance(j + 1 - i)
            yield "string", "".join(buf), SourceSpan(start.offset, start.line, start.column, len(raw))
            continue
        if ch == "|":
            j = text.find("|", i + 1)
            if j < 0:
                raise ParseError("unterminated quoted symbol", start, ["|"])
            body = text[i + 1:j]
            advance(j + 1 - i)
            yield "symbol", body, SourceSpan(start.offset, start.line, start.column, j + 1 - i + 0)
            continue
        j = i
        while j < n and text[j] not in _DELIMS:
            j += 1
        word = text[i:j]
        advance(j - i)
        span = SourceSpan(start.offset, start.line, start.column, len(word))
        if re.fullmatch(r"0|[1-9][0-9]*", word):
            yield "numeral", word, span
        elif re.fullmatch(r"(0|[1-9][0-9]*)\.[0-9]+", word):
            yield "decimal", word, span
        elif word.startswith(":"):
            yield "keyword", word, span
        else:
            yield "symbol", word, span


def read_sexprs(text: str) -> list:
    stack: list[tuple[SourceSpan, list]] = []
    out: list = []
    for kind, value, span in _tokens(text):
        if kind == "(":
            stack.append((span, []))
        elif kind == ")":
            if not stack:
                raise ParseError("unbalanced ')'", span, ["command"])
            open_span, items = stack.pop()
            node = SList(tuple(items), SourceSpan(open_span.offset, open_span.line,
                                                   open_span.column, span.offset - open_span.offset + 1))
            (stack[-1][1] if stack else out).append(node)
        else:
            atom = Atom(value, kind, span)
            (stack[-1][1] if stack else out).append(atom)
    if stack:
        raise ParseError("unbalanced '(': missing ')'", stack[-1][0], [")"])
    return out


def _span(sx) -> SourceSpan:
    return sx.span


def _sym(sx, what: str = "symbol") -> str:
    if not isinstance(sx, Atom) or sx.kind != "symbol":
        raise ParseError(f"expected {what}", _span(sx), [what])
    return sx.text


def _list(sx, what: str = "list") -> tuple:
    if not isinstance(sx, SList):
        raise ParseError(f"expected {what}", _span(sx), ["("])
    return sx.items


# --- terms --------------------------------------------------------------------------

def parse_sort(sx, sig: Signature, pending: Mapping[str, Sort] | None = None) -> Sort:
    try:
        if isinstance(sx, Atom):
            name = _sym(sx, "sort")
            if pending and name in pending:
                return pending[name]
            return sig.resolve_sort(name)
        items = _list(sx, "sort")
        if not items:
            raise ParseError("empty sort", sx.span, ["sort"])
        name = _sym(items[0], "sort constructor")
        return sig.resolve_sort(name, [parse_sort(p, sig, pending) for p in items[1:]])
    except SortError as err:
        raise ValidationError(err.message, _span(sx)) from None


class _TermReader:
    def __init__(self, sig: Signature, env: Mapping[str, Term] | None = None,
                 self_cata: tuple[str, Sort, Sort] | None = None):
        self.sig = sig
        self.env = dict(env or {})
        self.self_cata = self_cata

    def read(self, sx) -> Term:
        try:
            return self._read(sx)
        except SortError as err:
            raise ValidationError(err.message, _span(sx)) from None

    def _read(self, sx) -> Term:
        sig = self.sig
        if isinstance(sx, Atom):
            if sx.kind == "numeral":
                return Lit(int(sx.text), INT)
            if sx.kind == "decimal":
                return Lit(Fraction(sx.text), REAL)
            if sx.kind == "string":
                return Lit(sx.text, STRING)
            if sx.kind == "keyword":
                raise ParseError("unexpected keyword", sx.span, ["term"])
            name = sx.text
            if name in self.env:
                return self.env[name]
            if name == "true":
                return Lit(True, BOOL)
            if name == "false":
                return Lit(False, BOOL)
            if name in sig.constants:
                return sig.constants[name]
            if name in sig.ctors:
                return sig.ctor(name)
            if name in sig.functions:
                raise ValidationError(f"function {name} used without arguments", sx.span)
            raise ValidationError(f"unknown symbol {name}", sx.span)
        items = _list(sx, "term")
        if not items:
            raise ParseError("empty application", sx.span, ["term"])
        head = items[0]
        if isinstance(head, SList):
            hi = head.items
            if len(hi) == 3 and isinstance(hi[0], Atom) and hi[0].text == "_" and hi[1].text == "is":
                ctor = _sym(hi[2], "constructor")
                self._arity(sx, 1)
                return sig.test(ctor, self.read(items[1]))
            raise ParseError("unsupported application head", head.span, ["symbol", "(_ is C)"])
        op = _sym(head, "function symbol")
        args = items[1:]
        if op == "as":
            self._arity(sx, 2)
            name = _sym(args[0])
            sort = parse_sort(args[1], sig)
            if name in theory.NULLARY:
                return sig.op(name, declared=sort)
            if name in sig.ctors:
                t = sig.ctor(name)
                if t.sort != sort:
                    raise ValidationError(f"{name} is not of sort {sort}", sx.span)
                return t
            raise ValidationError(f"cannot qualify {name}", args[0].span)
        if op == "let":
            self._arity(sx, 2)
            bound = {}
            for b in _list(args[0], "let bindings"):
                pair = _list(b, "binding")
                if len(pair) != 2:
                    raise ParseError("malformed let binding", b.span, ["(name term)"])
                bound[_sym(pair[0])] = self.read(pair[1])
            inner = _TermReader(sig, {**self.env, **bound}, self.self_cata)
            return inner.read(args[1])
        if op in ("forall", "exists", "!"):
            raise ValidationError(f"{op} is not supported in this logic", head.span)
        if op == "-" and len(args) == 1 and isinstance(args[0], Atom) and args[0].kind in ("numeral", "decimal"):
            lit = self._read(args[0])
            return Lit(-lit.value, lit.sort)
        if op.startswith("is-") and op[3:] in sig.ctors and op not in sig.functions:
            self._arity(sx, 1)
            return sig.test(op[3:], self.read(args[0]))
        if self.self_cata and op == self.self_cata[0]:
            self._arity(sx, 1)
            arg = self.read(args[0])
            if arg.sort != self.self_cata[1]:
                raise ValidationError(f"{op}: argument of sort {arg.sort}, expected {self.self_cata[1]}", sx.span)
            return CataApp(op, arg, self.self_cata[2])
        kids = [self.read(a) for a in args]
        if op in sig.ctors:
            decl, c = sig.ctors[op]
            return sig.ctor(op, *_coerce(kids, [s for _, s in c.fields]))
        if op in sig.selectors:
            self._arity(sx, 1)
            return sig.sel(op, kids[0])
        if op in sig.catas:
            self._arity(sx, 1)
            return sig.cata(op, kids[0])
        if op in sig.functions:
            return sig.fun(op, *_coerce(kids, sig.functions[op].arg_sorts))
        if op in theory.OPERATORS:
            return sig.op(op, *kids)
        raise ValidationError(f"unknown function symbol {op}", head.span)

    @staticmethod
    def _arity(sx: SList, n: int):
        if len(sx.items) - 1 != n:
            raise ValidationError(f"{_sym(sx.items[0]) if isinstance(sx.items[0], Atom) else 'application'} "
                                  f"expects {n} argument(s)", sx.span)


def _coerce(kids: list[Term], sorts: Sequence[Sort]) -> list[Term]:
    # integer numerals are accepted where a Real is expected
    out = []
    for k, s in zip(kids, sorts):
        if s == REAL and isinstance(k, Lit) and k.sort == INT:
            k = Lit(Fraction(k.value), REAL)
        out.append(k)
    out.extend(kids[len(sorts):])
    return out


def parse_term(text: str, sig: Signature, env: Mapping[str, Term] | None = None) -> Term:
    sxs = read_sexprs(text)
    if len(sxs) != 1:
        raise ParseError("expected exactly one term", sxs[1].span if len(sxs) > 1 else None, ["term"])
    return _TermReader(sig, env).read(sxs[0])


# --- commands -------------------------------------------------------------------------

_PASSTHROUGH = {"set-logic", "set-option", "set-info", "get-model", "exit", "get-info"}
_COMMANDS = sorted(_PASSTHROUGH | {
    "declare-sort", "declare-datatypes", "declare-datatype", "declare-fun", "declare-const",
    "define-fun", "define-catamorphism", "declare-range", "set-cata-class", "assert", "check-sat",
})


def parse_script(text: str, require_check_sat: bool = True, signature: Signature | None = None) -> Script:
    """Parse and validate a script.  ``signature`` (copied, not mutated)
    pre-populates declarations, e.g. catalog entries."""
    sig = signature.copy() if signature is not None else Signature()
    sxs = read_sexprs(text)
    if not sxs:
        end = text.encode("utf-8")
        lines = text.split("\n")
        span = SourceSpan(max(len(end) - 1, 0), len(lines), max(len(lines[-1]), 1))
        raise ParseError("expected command", span, ["("])
    commands = []
    checks = 0
    for sx in sxs:
        cmd = _command(sx, sig, text)
        if isinstance(cmd, CheckSat):
            checks += 1
            if checks > 1:
                raise ValidationError("more than one check-sat", sx.span)
        commands.append(cmd)
    if require_check_sat and checks != 1:
        raise ValidationError("script has no check-sat", sxs[-1].span, ["(check-sat)"])
    return Script(tuple(commands), sig)


def _command(sx, sig: Signature, text: str):
    items = _list(sx, "command")
    if not items:
        raise ParseError("expected command", sx.span, _COMMANDS)
    name = items[0].text if isinstance(items[0], Atom) and items[0].kind == "symbol" else None
    if name is None or name not in _COMMANDS:
        raise ParseError(f"unknown command {name or ''}".strip(), items[0].span, _COMMANDS)
    args = items[1:]
    try:
        if name in _PASSTHROUGH:
            raw = text.encode("utf-8")[sx.span.offset:sx.span.offset + sx.span.length].decode("utf-8")
            return Passthrough(raw)
        if name == "check-sat":
            _nargs(sx, 0)
            return CheckSat()
        if name == "declare-sort":
            if len(args) not in (1, 2) or (len(args) == 2 and (getattr(args[1], "text", None) != "0")):
                raise ParseError("declare-sort takes a name and arity 0", sx.span, ["(declare-sort S 0)"])
            n = _sym(args[0])
            sig.declare_sort(n)
            return DeclareSort(n)
        if name in ("declare-datatypes", "declare-datatype"):
            decls = _datatypes(name, sx, args, sig)
            for d in decls:
                sig.declare_datatype(d)
            return DeclareDatatypes(tuple(decls))
        if name in ("declare-fun", "declare-const"):
            if name == "declare-const":
                _nargs(sx, 2)
                n, arg_sorts, res = _sym(args[0]), (), parse_sort(args[1], sig)
            else:
                _nargs(sx, 3)
                n = _sym(args[0])
                arg_sorts = tuple(parse_sort(s, sig) for s in _list(args[1], "sort list"))
                res = parse_sort(args[2], sig)
            sig.declare_fun(n, arg_sorts, res)
            return DeclareFun(n, arg_sorts, res)
        if name == "define-fun":
            _nargs(sx, 4)
            n = _sym(args[0])
            params = _params(args[1], sig)
            res = parse_sort(args[2], sig)
            body = _TermReader(sig, {p.name: p for p in params}).read(args[3])
            body = _coerce([body], [res])[0]
            sig.define_fun(n, params, res, body)
            return DefineFun(n, tuple(params), res, body)
        if name == "define-catamorphism":
            _nargs(sx, 4)
            cata = _catamorphism(sx, args, sig)
            sig.add_cata(cata)
            return DefineCata(cata)
        if name == "declare-range":
            _nargs(sx, 3)
            cname = _sym(args[0], "catamorphism name")
            cata = _known_cata(sig, args[0])
            params = _params(args[1], sig)
            if len(params) != 1 or params[0].sort != cata.result:
                raise ValidationError(f"declare-range {cname} takes one parameter of sort {cata.result}", args[1].span)
            body = _TermReader(sig, {params[0].name: params[0]}).read(args[2])
            if body.sort != BOOL:
                raise ValidationError("range predicate must be Bool", args[2].span)
            pred = RangePred(params[0], body)
            sig.catas[cname] = cata.with_range(pred)
            return DeclareRange(cname, pred)
        if name == "set-cata-class":
            _nargs(sx, 2)
            cname = _sym(args[0], "catamorphism name")
            cata = _known_cata(sig, args[0])
            cls = _cata_class(args[1])
            sig.catas[cname] = cata.with_class(cls)
            return SetCataClass(cname, cls)
        if name == "assert":
            _nargs(sx, 1)
            t = _TermReader(sig).read(args[0])
            if t.sort != BOOL:
                raise ValidationError(f"assertion of sort {t.sort}", args[0].span)
            return Assert(t)
    except SortError as err:
        raise ValidationError(err.message, sx.span) from None
    raise AssertionError(name)  # pragma: no cover


def _nargs(sx: SList, n: int):
    if len(sx.items) - 1 != n:
        raise ParseError(f"{sx.items[0].text} takes {n} argument(s)", sx.span)


def _params(sx, sig: Signature) -> list[Var]:
    out = []
    for p in _list(sx, "parameter list"):
        pair = _list(p, "(name sort)")
        if len(pair) != 2:
            raise ParseError("malformed parameter", p.span, ["(name sort)"])
        out.append(Var(_sym(pair[0]), parse_sort(pair[1], sig)))
    return out


def _known_cata(sig: Signature, sx) -> CataDef:
    name = _sym(sx, "catamorphism name")
    if name not in sig.catas:
        raise ValidationError(f"unknown catamorphism {name}", sx.span)
    return sig.catas[name]


def _cata_class(sx) -> CataClass:
    if isinstance(sx, Atom):
        if sx.text in ("associative", "unclassified"):
            return CataClass(sx.text)
        raise ParseError(f"unknown class {sx.text}", sx.span, ["associative", "unclassified", "(monotonic h)"])
    items = _list(sx)
    if len(items) == 2 and getattr(items[0], "text", None) == "monotonic" and getattr(items[1], "kind", None) == "numeral":
        return CataClass("monotonic", int(items[1].text))
    raise ParseError("malformed class", sx.span, ["(monotonic h)"])


def _datatypes(cmd: str, sx, args, sig: Signature) -> list[DatatypeDecl]:
    if cmd == "declare-datatype":
        if len(args) != 2:
            raise ParseError("declare-datatype takes a name and constructors", sx.span)
        names = [_sym(args[0])]
        bodies = [args[1]]
        style = "2.6"
    elif len(args) == 2 and isinstance(args[0], SList) and not args[0].items:
        # SMT-LIB 2.0 / legacy z3 form: () ((T C1 (C2 (s S)) ...))
        style = "2.0"
        names, bodies = [], []
        for d in _list(args[1], "datatype list"):
            di = _list(d, "datatype")
            if not di:
                raise ParseError("empty datatype", d.span)
            names.append(_sym(di[0]))
            bodies.append(SList(di[1:], d.span))
    elif len(args) == 2:
        style = "2.6"
        names, bodies = [], []
        for nd in _list(args[0], "sort declarations"):
            pair = _list(nd, "(name arity)")
            if len(pair) != 2 or getattr(pair[1], "text", None) != "0":
                raise ValidationError("only arity-0 datatypes are supported", nd.span)
            names.append(_sym(pair[0]))
        bodies = list(_list(args[1], "constructor lists"))
        if len(bodies) != len(names):
            raise ParseError("datatype count mismatch", args[1].span)
    else:
        raise ParseError("malformed declare-datatypes", sx.span)
    pending = {n: datatype_sort(n) for n in names}
    decls = []
    for n, body in zip(names, bodies):
        ctors = []
        for c in _list(body, "constructor list"):
            if isinstance(c, Atom):
                if style != "2.0":
                    raise ParseError("constructor must be parenthesized", c.span, ["(C ...)"])
                ctors.append(Constructor(_sym(c)))
                continue
            ci = _list(c, "constructor")
            fields = []
            for f in ci[1:]:
                fi = _list(f, "(selector sort)")
                if len(fi) != 2:
                    raise ParseError("malformed field", f.span, ["(selector sort)"])
                fields.append((_sym(fi[0]), parse_sort(fi[1], sig, pending)))
            ctors.append(Constructor(_sym(ci[0]), tuple(fields)))
        try:
            decls.append(DatatypeDecl(n, tuple(ctors)))
        except SortError as err:
            raise ValidationError(err.message, body.span) from None
    return decls


def _catamorphism(sx, args, sig: Signature) -> CataDef:
    name = _sym(args[0], "catamorphism name")
    params = _list(args[1], "parameter list")
    if len(params) != 1:
        raise ValidationError("a catamorphism takes exactly one tree parameter", args[1].span)
    pair = _list(params[0], "(name sort)")
    if len(pair) != 2:
        raise ParseError("malformed parameter", params[0].span, ["(name sort)"])
    pname = _sym(pair[0])
    dt_name = _sym(pair[1], "datatype")
    if dt_name not in sig.datatypes or not sig.datatypes[dt_name].is_recursive:
        raise ValidationError(f"{dt_name} is not a recursive datatype", pair[1].span)
    decl = sig.datatypes[dt_name]
    result = parse_sort(args[2], sig)
    v = Var(pname, decl.sort)
    body = _TermReader(sig, {pname: v}, (name, decl.sort, result)).read(args[3])
    cases = _split_cases(name, v, decl, result, body, args[3].span)
    cata = CataDef(name, decl, result, tuple(cases), param_name=pname)
    try:
        from dataclasses import replace

        return replace(cata, assoc=find_assoc_decomposition(cata))
    except SortError as err:  # pragma: no cover
        raise ValidationError(err.message, sx.span) from None


def _split_cases(name: str, v: Var, decl: DatatypeDecl, result: Sort, body: Term, span: SourceSpan):
    branches: dict[str, Term] = {}
    t = body
    while (isinstance(t, TheoryApp) and t.op == "ite" and isinstance(t.args[0], Test)
           and t.args[0].arg == v):
        ctor = t.args[0].ctor
        if ctor in branches:
            raise ValidationError(f"duplicate branch for constructor {ctor}", span)
        branches[ctor] = t.args[1]
        t = t.args[2]
    rest = [c.name for c in decl.constructors if c.name not in branches]
    if len(rest) != 1:
        raise ValidationError(
            f"catamorphism body must be an ite cascade over testers of {v.name} "
            f"with one branch per constructor of {decl.name}", span)
    branches[rest[0]] = t
    cases = []
    for ctor in decl.constructors:
        branch = _coerce([branches[ctor.name]], [result])[0]
        if branch.sort != result:
            raise ValidationError(f"{ctor.name} branch has sort {branch.sort}, expected {result}", span)
        rec = decl.recursive_positions(ctor.name)
        mapping: dict[Term, Term] = {}
        params = []
        for i, (sel, fsort) in enumerate(ctor.fields):
            if i in rec:
                p = Var(f"@{sel}", result)
                mapping[CataApp(name, Sel(sel, v, fsort), result)] = p
            else:
                p = Var(f"@{sel}", fsort)
                mapping[Sel(sel, v, fsort)] = p
            params.append(p)
        abstracted = substitute(branch, mapping)
        for sub in iter_subterms(abstracted):
            if isinstance(sub, CataApp):
                raise ValidationError(f"non-structural recursion in {name}: {sub}", span)
        if v in free_vars(abstracted):
            raise ValidationError(
                f"non-structural use of {v.name} in the {ctor.name} branch of {name}", span)
        cases.append(CataCase(ctor.name, tuple(params), abstracted))
    return cases


# --- printing -------------------------------------------------------------------------

_SIMPLE = re.compile(r"[A-Za-z~!@$%^&*_\-+=<>.?/][A-Za-z0-9~!@$%^&*_\-+=<>.?/]*")


def print_symbol(name: str) -> str:
    return name if _SIMPLE.fullmatch(name) else f"|{name}|"


def _decimal(x: Fraction) -> str | None:
    d = x.denominator
    k = 0
    while d % 2 == 0 or d % 5 == 0:
        d //= 2 if d % 2 == 0 else 5
        k += 1
    if d != 1:
        return None
    digits = max(k, 1)
    scaled = x.numerator * 10 ** digits // x.denominator
    s = str(scaled).rjust(digits + 1, "0")
    out = f"{s[:-digits]}.{s[-digits:]}"
    if "." in out:
        head, tail = out.split(".")
        tail = tail.rstrip("0") or "0"
        out = f"{head}.{tail}"
    return out


def print_literal(lit: Lit) -> str:
    v = lit.value
    if lit.sort == BOOL:
        return "true" if v else "false"
    if lit.sort == STRING:
        return '"' + v.replace('"', '""') + '"'
    if lit.sort == REAL:
        mag = _decimal(abs(v))
        if mag is None:
            body = f"(/ {abs(v.numerator)}.0 {v.denominator}.0)"
        else:
            body = mag
        return f"(- {body})" if v < 0 else body
    return f"(- {-v})" if v < 0 else str(v)


def print_sort(s: Sort, dialect: str = "smtlib") -> str:
    if dialect == "z3" and s.name == "Bag" and len(s.params) == 1:
        return f"(Array {print_sort(s.params[0], dialect)} Int)"
    if not s.params:
        return print_symbol(s.name)
    return "(" + " ".join([s.name] + [print_sort(p, dialect) for p in s.params]) + ")"


def print_term(t: Term, dialect: str = "smtlib") -> str:
    """Single-line SMT-LIB rendering.  ``dialect="z3"`` rewrites the
    finite-set and bag operators into z3's array encoding."""
    parts: list[str] = []
    _emit(t, dialect, parts)
    return "".join(parts)


def _app(parts: list[str], head: str, args, dialect: str):
    parts.append("(")
    parts.append(head)
    for a in args:
        parts.append(" ")
        _emit(a, dialect, parts)
    parts.append(")")


def _emit(t: Term, dialect: str, parts: list[str]):
    if isinstance(t, Var):
        parts.append(print_symbol(t.name))
    elif isinstance(t, Lit):
        parts.append(print_literal(t))
    elif isinstance(t, Ctor):
        if t.args:
            _app(parts, print_symbol(t.name), t.args, dialect)
        else:
            parts.append(print_symbol(t.name))
    elif isinstance(t, Sel):
        _app(parts, print_symbol(t.name), (t.arg,), dialect)
    elif isinstance(t, Test):
        _app(parts, "is-" + t.ctor if _SIMPLE.fullmatch(t.ctor) else f"(_ is {print_symbol(t.ctor)})",
             (t.arg,), dialect)
    elif isinstance(t, CataApp):
        _app(parts, print_symbol(t.cata), (t.arg,), dialect)
    elif isinstance(t, FunApp):
        _app(parts, print_symbol(t.name), t.args, dialect)
    elif isinstance(t, TheoryApp):
        if dialect == "z3" and _z3_op(t, parts):
            return
        if not t.args:
            parts.append(f"(as {t.op} {print_sort(t.sort, dialect)})")
        else:
            _app(parts, t.op, t.args, dialect)
    else:
        raise TypeError(f"cannot print {t!r}")


def _fold(op: str, args, sort: Sort) -> Term:
    out = args[0]
    for a in args[1:]:
        out = TheoryApp(op, (out, a), sort)
    return out


def _z3_op(t: TheoryApp, parts: list[str]) -> bool:
    op, args = t.op, t.args
    z3 = "z3"
    if op == "set.empty":
        parts.append(f"((as const {print_sort(t.sort, z3)}) false)")
    elif op == "set.singleton":
        parts.append(f"(store ((as const {print_sort(t.sort, z3)}) false) ")
        _emit(args[0], z3, parts)
        parts.append(" true)")
    elif op == "set.insert":
        acc = args[-1]
        for e in args[:-1]:
            acc = TheoryApp("set.union", (TheoryApp("set.singleton", (e,), t.sort), acc), t.sort)
        _emit(acc, z3, parts)
    elif op in ("set.union", "set.inter", "set.minus"):
        name = {"set.union": "union", "set.inter": "intersection", "set.minus": "setminus"}[op]
        if len(args) > 2:
            _emit(_fold(op, args, t.sort), z3, parts)
        else:
            _app(parts, name, args, z3)
    elif op == "set.subset":
        _app(parts, "subset", args, z3)
    elif op in ("set.member", "bag.count"):
        _app(parts, "select", (args[1], args[0]), z3)
    elif op == "bag.empty":
        parts.append(f"((as const {print_sort(t.sort, z3)}) 0)")
    elif op == "bag":
        parts.append(f"(store ((as const {print_sort(t.sort, z3)}) 0) ")
        _emit(args[0], z3, parts)
        parts.append(" ")
        _emit(args[1], z3, parts)
        parts.append(")")
    elif op == "bag.union_disjoint":
        if len(args) > 2:
            _emit(_fold(op, args, t.sort), z3, parts)
        else:
            _app(parts, "(_ map (+ (Int Int) Int))", args, z3)
    else:
        return False
    return True


def print_datatypes(decls: Sequence[DatatypeDecl], dialect: str = "smtlib") -> str:
    heads = " ".join(f"({print_symbol(d.name)} 0)" for d in decls)
    bodies = []
    for d in decls:
        ctors = []
        for c in d.constructors:
            fields = "".join(f" ({print_symbol(s)} {print_sort(fs, dialect)})" for s, fs in c.fields)
            ctors.append(f"({print_symbol(c.name)}{fields})")
        bodies.append("(" + " ".join(ctors) + ")")
    return f"(declare-datatypes ({heads}) ({' '.join(bodies)}))"


def _params_text(params: Sequence[Var], dialect: str) -> str:
    return "(" + " ".join(f"({print_symbol(p.name)} {print_sort(p.sort, dialect)})" for p in params) + ")"


def cata_body(cata: CataDef, arg: Term) -> Term:
    """The catamorphism's definition as an ite cascade over ``arg``, with
    recursive calls written as applications of the catamorphism itself."""
    return cata.unfold(arg, lambda sub: CataApp(cata.name, sub, cata.result))


def print_command(cmd, dialect: str = "smtlib") -> str:
    if isinstance(cmd, Passthrough):
        return cmd.text
    if isinstance(cmd, CheckSat):
        return "(check-sat)"
    if isinstance(cmd, DeclareSort):
        return f"(declare-sort {print_symbol(cmd.name)} 0)"
    if isinstance(cmd, DeclareDatatypes):
        return print_datatypes(cmd.decls, dialect)
    if isinstance(cmd, DeclareFun):
        sorts = " ".join(print_sort(s, dialect) for s in cmd.arg_sorts)
        return f"(declare-fun {print_symbol(cmd.name)} ({sorts}) {print_sort(cmd.result, dialect)})"
    if isinstance(cmd, DefineFun):
        return (f"(define-fun {print_symbol(cmd.name)} {_params_text(cmd.params, dialect)} "
                f"{print_sort(cmd.result, dialect)} {print_term(cmd.body, dialect)})")
    if isinstance(cmd, DefineCata):
        c = cmd.cata
        v = Var(c.param_name, c.input.sort)
        return (f"(define-catamorphism {print_symbol(c.name)} (({print_symbol(v.name)} "
                f"{print_symbol(c.input.name)})) {print_sort(c.result, dialect)} "
                f"{print_term(cata_body(c, v), dialect)})")
    if isinstance(cmd, DeclareRange):
        p = cmd.pred.param
        return (f"(declare-range {print_symbol(cmd.cata)} {_params_text([p], dialect)} "
                f"{print_term(cmd.pred.body, dialect)})")
    if isinstance(cmd, SetCataClass):
        return f"(set-cata-class {print_symbol(cmd.cata)} {cmd.cls})"
    if isinstance(cmd, Assert):
        return f"(assert {print_term(cmd.term, dialect)})"
    raise TypeError(f"unknown command {cmd!r}")


def print_script(script: Script, dialect: str = "smtlib") -> str:
    return "".join(print_command(c, dialect) + "\n" for c in script.commands)


# --- lowering to plain SMT-LIB ----------------------------------------------------------

def cata_declaration(cata: CataDef, dialect: str = "smtlib") -> str:
    """``declare-fun`` for the uninterpreted stand-in, which reuses the
    catamorphism's name."""
    return (f"(declare-fun {print_symbol(cata.name)} ({print_symbol(cata.input.name)}) "
            f"{print_sort(cata.result, dialect)})")


def cata_define_funs(cata: CataDef, dialect: str = "smtlib") -> list[str]:
    t = Var("t", cata.input.sort)
    cat_fn = print_symbol(cata.name + CAT_SUFFIX)
    unroll_fn = print_symbol(cata.name + UNROLL_SUFFIX)
    tree = print_symbol(cata.input.name)
    return [
        f"(define-fun {cat_fn} ((t {tree})) {print_sort(cata.result, dialect)} "
        f"{print_term(cata_body(cata, t), dialect)})",
        f"(define-fun {unroll_fn} ((t {tree})) Bool (= ({print_symbol(cata.name)} t) ({cat_fn} t)))",
    ]


def unroll_assertion(cata: CataDef, node: Term, dialect: str = "smtlib") -> str:
    return f"(assert ({print_symbol(cata.name + UNROLL_SUFFIX)} {print_term(node, dialect)}))"


def lower_script(script: Script, dialect: str = "smtlib") -> str:
    """Plain SMT-LIB: each catamorphism becomes a ``declare-fun`` plus the
    two generated ``define-fun``s; range and class annotations are
    dropped."""
    lines = []
    for cmd in script.commands:
        if isinstance(cmd, DefineCata):
            cata = script.catas[cmd.cata.name]
            lines.append(cata_declaration(cata, dialect))
            lines.extend(cata_define_funs(cata, dialect))
        elif isinstance(cmd, (DeclareRange, SetCataClass)):
            continue
        else:
            lines.append(print_command(cmd, dialect))
    return "".join(line + "\n" for line in lines)


def check_well_sorted(script: Script):
    """Re-check every assertion from scratch (debug aid)."""
    for a in script.assertions:
        well_sorted(a, script.signature)
