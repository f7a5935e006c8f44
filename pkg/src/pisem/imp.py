"""IMP surface language: lexer, recursive-descent parser and compiler to terms."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from . import core as pi
from .core import Boo, PiError, Rat
from .statespace import AtomicProp

KEYWORDS = frozenset(
    "module end var const proc init nop if then else fi while do od print exit call tt ff or"
    .split())
_CATEGORIES = frozenset({"identifier", "number", "end of input"})
SYMBOLS = (":=", ";", "|", "+", "-", "*", "/", "=", "~", "(", ")", "{", "}", ",")


class FrontendError(PiError):
    """An error tied to a source position (1-based line and column)."""

    kind = "error"

    def __init__(self, message: str, line: int, col: int):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.kind}: {self.message}"


class LexError(FrontendError):
    kind = "lex error"


class ParseError(FrontendError):
    kind = "parse error"

    def __init__(self, expected, found: Token):
        self.expected = frozenset(expected)
        shown = f"'{found.text}'" if found.kind != "eof" else "end of input"
        alts = ", ".join(e if e in _CATEGORIES else f"'{e}'" for e in sorted(self.expected))
        super().__init__(f"expected {alts}; found {shown}", found.line, found.col)


class CompileError(FrontendError):
    kind = "compile error"


class DuplicateName(CompileError):
    pass


class UnboundName(CompileError):
    pass


# ---------------------------------------------------------------- lexer


@dataclass(frozen=True)
class Token:
    kind: str  # keyword | ident | number | symbol | eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    """Longest-match lexer. ``--`` starts a comment running to end of line.

    A number is ``digits`` or ``digits/digits`` written without spaces.
    The token list ends with a single ``eof`` token.
    """
    toks = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch in " \t\r\f\v":
            i, col = i + 1, col + 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        start = i
        if ch.isascii() and ch.isalpha():
            while i < n and text[i].isascii() and (text[i].isalnum() or text[i] == "_"):
                i += 1
            word = text[start:i]
            toks.append(Token("keyword" if word in KEYWORDS else "ident", word, line, col))
        elif ch.isascii() and ch.isdigit():
            while i < n and text[i].isascii() and text[i].isdigit():
                i += 1
            if i + 1 < n and text[i] == "/" and text[i + 1].isascii() and text[i + 1].isdigit():
                i += 1
                while i < n and text[i].isascii() and text[i].isdigit():
                    i += 1
                if int(text[text.index("/", start) + 1:i]) == 0:
                    raise LexError("zero denominator in number", line, col)
            toks.append(Token("number", text[start:i], line, col))
        else:
            for sym in SYMBOLS:
                if text.startswith(sym, i):
                    i += len(sym)
                    toks.append(Token("symbol", sym, line, col))
                    break
            else:
                raise LexError(f"unexpected character {ch!r}", line, col)
        col += i - start
    toks.append(Token("eof", "", line, col))
    return toks


def render_tokens(toks: list[Token]) -> str:
    """Space-separated source text that tokenizes back to ``toks``."""
    return " ".join(t.text for t in toks if t.kind != "eof")


# ---------------------------------------------------------------- syntax tree


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class BoolE:
    value: bool


@dataclass(frozen=True)
class Name:
    name: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class UnOp:
    op: str
    operand: Expr


Expr = Union[Num, BoolE, Name, BinOp, UnOp]
Literal = Union[Num, BoolE]


@dataclass(frozen=True)
class NopC:
    pass


@dataclass(frozen=True)
class AssignC:
    target: Name
    exp: Expr


@dataclass(frozen=True)
class IfC:
    test: Expr
    then: ComSeq
    orelse: ComSeq


@dataclass(frozen=True)
class WhileC:
    test: Expr
    body: ComSeq


@dataclass(frozen=True)
class PrintC:
    exp: Expr


@dataclass(frozen=True)
class ExitC:
    pass


@dataclass(frozen=True)
class CallC:
    target: Name
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class SeqC:
    first: ComSeq
    second: ComSeq


@dataclass(frozen=True)
class ChoiceC:
    left: ComSeq
    right: ComSeq


ComSeq = Union[NopC, AssignC, IfC, WhileC, PrintC, ExitC, CallC, SeqC, ChoiceC]


@dataclass(frozen=True)
class Vars:
    decls: tuple[tuple[Name, Expr], ...]


@dataclass(frozen=True)
class Consts:
    decls: tuple[tuple[Name, Literal], ...]


@dataclass(frozen=True)
class Proc:
    name: Name
    formals: tuple[Name, ...]
    body: ComSeq


Clause = Union[Vars, Consts, Proc]


@dataclass(frozen=True)
class ModuleDecl:
    name: str
    clauses: tuple[Clause, ...]
    init: ComSeq


# ---------------------------------------------------------------- parser


class _Parser:
    def __init__(self, toks: list[Token]):
        if not toks or toks[-1].kind != "eof":
            last = toks[-1] if toks else None
            toks = list(toks) + [Token("eof", "", last.line if last else 1,
                                       (last.col + len(last.text)) if last else 1)]
        self.toks = toks
        self.i = 0
        # everything tried at token index _tried_at, for error messages
        self._tried_at = 0
        self._tried: set[str] = set()

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def _try(self, what: str) -> None:
        if self._tried_at != self.i:
            self._tried_at, self._tried = self.i, set()
        self._tried.add(what)

    def fail(self, *what: str):
        for w in what:
            self._try(w)
        raise ParseError(self._tried, self.tok)

    def at(self, text: str) -> bool:
        self._try(text)
        t = self.tok
        return t.kind in ("keyword", "symbol") and t.text == text

    def is_kind(self, kind: str) -> bool:
        self._try({"ident": "identifier", "eof": "end of input"}.get(kind, kind))
        return self.tok.kind == kind

    def eat(self, text: str) -> Token:
        if not self.at(text):
            self.fail(text)
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> Name:
        t = self.tok
        if not self.is_kind("ident"):
            self.fail("identifier")
        self.i += 1
        return Name(t.text, t.line, t.col)

    def module(self) -> ModuleDecl:
        self.eat("module")
        name = self.ident().name
        clauses = []
        while not self.at("init"):
            if self.at("var"):
                self.i += 1
                x = self.ident()
                self.eat(":=")
                e = self.expr()
                self.eat(";")
                clauses.append(Vars(((x, e),)))
            elif self.at("const"):
                self.i += 1
                x = self.ident()
                self.eat(":=")
                lit = self.literal(allow_split=True)
                self.eat(";")
                clauses.append(Consts(((x, lit),)))
            elif self.at("proc"):
                self.i += 1
                f = self.ident()
                self.eat("(")
                formals = []
                if not self.at(")"):
                    formals.append(self.ident())
                    while self.at(","):
                        self.i += 1
                        formals.append(self.ident())
                self.eat(")")
                self.eat("{")
                body = self.comseq()
                self.eat("}")
                clauses.append(Proc(f, tuple(formals), body))
            else:
                self.fail("var", "const", "proc", "init")
        self.eat("init")
        init = self.comseq()
        self.eat("end")
        if not self.is_kind("eof"):
            self.fail("end of input")
        return ModuleDecl(name, tuple(clauses), init)

    # `|` is looser than `;`; both nest to the right
    def comseq(self) -> ComSeq:
        left = self.seq()
        if self.at("|"):
            self.i += 1
            return ChoiceC(left, self.comseq())
        return left

    def seq(self) -> ComSeq:
        left = self.command()
        if self.at(";"):
            self.i += 1
            return SeqC(left, self.seq())
        return left

    def command(self) -> ComSeq:
        if self.at("nop"):
            self.i += 1
            return NopC()
        if self.at("exit"):
            self.i += 1
            return ExitC()
        if self.at("if"):
            self.i += 1
            test = self.expr()
            self.eat("then")
            then = self.comseq()
            self.eat("else")
            orelse = self.comseq()
            self.eat("fi")
            return IfC(test, then, orelse)
        if self.at("while"):
            self.i += 1
            test = self.expr()
            self.eat("do")
            body = self.comseq()
            self.eat("od")
            return WhileC(test, body)
        if self.at("print"):
            self.i += 1
            self.eat("(")
            e = self.expr()
            self.eat(")")
            return PrintC(e)
        if self.at("call"):
            self.i += 1
            f = self.ident()
            self.eat("(")
            args = []
            if not self.at(")"):
                args.append(self.expr())
                while self.at(","):
                    self.i += 1
                    args.append(self.expr())
            self.eat(")")
            return CallC(f, tuple(args))
        if self.at("{"):
            self.i += 1
            body = self.comseq()
            self.eat("}")
            return body
        if self.is_kind("ident"):
            x = self.ident()
            self.eat(":=")
            return AssignC(x, self.expr())
        self.fail("identifier")

    def expr(self) -> Expr:
        left = self.eqexp()
        if self.at("or"):
            self.i += 1
            return BinOp("or", left, self.expr())
        return left

    def eqexp(self) -> Expr:
        left = self.addexp()
        if self.at("="):
            self.i += 1
            return BinOp("=", left, self.addexp())
        return left

    def addexp(self) -> Expr:
        e = self.mulexp()
        while self.at("+") or self.at("-"):
            op = self.tok.text
            self.i += 1
            e = BinOp(op, e, self.mulexp())
        return e

    def mulexp(self) -> Expr:
        e = self.unexp()
        while self.at("*") or self.at("/"):
            op = self.tok.text
            self.i += 1
            e = BinOp(op, e, self.unexp())
        return e

    def unexp(self) -> Expr:
        if self.at("~"):
            self.i += 1
            return UnOp("~", self.unexp())
        if self.at("("):
            self.i += 1
            e = self.expr()
            self.eat(")")
            return e
        if self.is_kind("ident"):
            return self.ident()
        if self.is_kind("number") or self.at("tt") or self.at("ff"):
            return self.literal(allow_split=False)
        self.fail("number")

    def literal(self, allow_split: bool) -> Literal:
        t = self.tok
        if self.at("tt") or self.at("ff"):
            self.i += 1
            return BoolE(t.text == "tt")
        if not self.is_kind("number"):
            self.fail("number")
        self.i += 1
        value = Fraction(t.text)
        # `n / m` with spaces is a literal only where no expression may appear
        if allow_split and self.at("/") and self.toks[self.i + 1].kind == "number":
            self.i += 1
            d = self.tok
            self.i += 1
            if Fraction(d.text) == 0:
                raise CompileError("zero denominator in literal", d.line, d.col)
            value = value / Fraction(d.text)
        return Num(value)


def parse_module(tokens: list[Token]) -> ModuleDecl:
    return _Parser(tokens).module()


def parse_source(text: str) -> ModuleDecl:
    return parse_module(tokenize(text))


# ---------------------------------------------------------------- compiler

_BINOPS = {"+": pi.Add, "-": pi.Sub, "*": pi.Mul, "/": pi.Div, "=": pi.Eq, "or": pi.Or}


def compile_token(t: Token) -> pi.Exp:
    """Number tokens become rationals, ``tt``/``ff`` booleans, the rest identifiers."""
    if t.kind == "number":
        return pi.NumLit(Fraction(t.text))
    if t.text in ("tt", "ff"):
        return pi.BoolLit(t.text == "tt")
    return pi.Id(t.text)


def compile_exp(e: Expr) -> pi.Exp:
    match e:
        case Num(v):
            return pi.NumLit(v)
        case BoolE(b):
            return pi.BoolLit(b)
        case Name(n):
            return pi.Id(n)
        case BinOp(op, a, b):
            return _BINOPS[op](compile_exp(a), compile_exp(b))
        case UnOp("~", a):
            return pi.Not(compile_exp(a))
    raise TypeError(f"not an expression: {e!r}")


def compile_cmd(c: ComSeq) -> pi.Cmd:
    match c:
        case NopC():
            return pi.Nop()
        case ExitC():
            return pi.Exit()
        case AssignC(x, e):
            return pi.Assign(x.name, compile_exp(e))
        case IfC(t, a, b):
            return pi.Cond(compile_exp(t), compile_cmd(a), compile_cmd(b))
        case WhileC(t, b):
            return pi.Loop(compile_exp(t), compile_cmd(b))
        case PrintC(e):
            return pi.Print(compile_exp(e))
        case CallC(f, args):
            return pi.Call(f.name, tuple(compile_exp(a) for a in args))
        case SeqC(a, b):
            return pi.Seq(compile_cmd(a), compile_cmd(b))
        case ChoiceC(a, b):
            return pi.Choice(compile_cmd(a), compile_cmd(b))
    raise TypeError(f"not a command: {c!r}")


def _literal_value(lit: Literal):
    return Boo(lit.value) if isinstance(lit, BoolE) else Rat(lit.value)


def _literals(node, out: list) -> None:
    """Collect literal values in source order."""
    if isinstance(node, (Num, BoolE)):
        v = _literal_value(node)
        if v not in out:
            out.append(v)
        return
    if isinstance(node, tuple):
        for x in node:
            _literals(x, out)
        return
    if hasattr(node, "__dataclass_fields__"):
        for name in node.__dataclass_fields__:
            _literals(getattr(node, name), out)


@dataclass
class CompiledModule:
    name: str
    dec: pi.Dec
    cmd: pi.Cmd
    props: frozenset[AtomicProp]
    variables: list[str]
    consts: dict[str, object]

    def __iter__(self):
        return iter((self.dec, self.cmd, self.props))


class _Scope:
    """Compile-time scope check: declared names, kinds and arities."""

    def __init__(self):
        self.kinds: dict[str, tuple[str, int]] = {}

    def declare(self, x: Name, kind: str, arity: int = 0):
        if x.name in self.kinds:
            raise DuplicateName(f"{x.name!r} declared twice", x.line, x.col)
        self.kinds[x.name] = (kind, arity)

    def check_exp(self, e: Expr, local=frozenset()):
        match e:
            case Name(n):
                if n not in local and self.kinds.get(n, ("proc",))[0] == "proc":
                    raise UnboundName(f"undeclared name {n!r}", e.line, e.col)
            case BinOp(_, a, b):
                self.check_exp(a, local)
                self.check_exp(b, local)
            case UnOp(_, a):
                self.check_exp(a, local)

    def check_cmd(self, c: ComSeq, local=frozenset()):
        match c:
            case AssignC(x, e):
                if x.name not in local:
                    kind = self.kinds.get(x.name, (None,))[0]
                    if kind is None:
                        raise UnboundName(f"undeclared name {x.name!r}", x.line, x.col)
                    if kind != "var":
                        raise CompileError(f"cannot assign to {kind} {x.name!r}",
                                           x.line, x.col)
                self.check_exp(e, local)
            case IfC(t, a, b):
                self.check_exp(t, local)
                self.check_cmd(a, local)
                self.check_cmd(b, local)
            case WhileC(t, b):
                self.check_exp(t, local)
                self.check_cmd(b, local)
            case PrintC(e):
                self.check_exp(e, local)
            case CallC(f, args):
                kind, arity = self.kinds.get(f.name, (None, 0))
                if kind != "proc" or f.name in local:
                    raise UnboundName(f"undeclared procedure {f.name!r}", f.line, f.col)
                if arity != len(args):
                    raise CompileError(
                        f"{f.name!r} expects {arity} argument(s), got {len(args)}",
                        f.line, f.col)
                for a in args:
                    self.check_exp(a, local)
            case SeqC(a, b) | ChoiceC(a, b):
                self.check_cmd(a, local)
                self.check_cmd(b, local)


def compile_module(ast: ModuleDecl) -> CompiledModule:
    """Translate a module to a declaration, a command and its proposition universe.

    Clauses fold into right-nested ``DSeq`` in source order. The universe
    pairs every declared var and const with every literal in the module.
    """
    scope = _Scope()
    decs: list[pi.Dec] = []
    variables: list[str] = []
    consts: dict[str, object] = {}
    for clause in ast.clauses:
        match clause:
            case Vars(pairs):
                for x, e in pairs:
                    scope.check_exp(e)
                    scope.declare(x, "var")
                    variables.append(x.name)
                    decs.append(pi.Ref(x.name, compile_exp(e)))
            case Consts(pairs):
                for x, lit in pairs:
                    scope.declare(x, "const")
                    consts[x.name] = _literal_value(lit)
                    decs.append(pi.Bind(x.name, compile_exp(lit)))
            case Proc(f, formals, body):
                scope.declare(f, "proc", len(formals))
                seen = set()
                for p in formals:
                    if p.name in seen:
                        raise DuplicateName(f"formal {p.name!r} repeated", p.line, p.col)
                    seen.add(p.name)
                scope.check_cmd(body, frozenset(seen))
                decs.append(pi.Prc(f.name, tuple(p.name for p in formals), compile_cmd(body)))
    scope.check_cmd(ast.init)

    dec: pi.Dec = pi.NoDec()
    for d in reversed(decs):
        dec = d if isinstance(dec, pi.NoDec) else pi.DSeq(d, dec)

    values: list = []
    _literals(ast, values)
    names = variables + list(consts)
    props = frozenset(AtomicProp(v, r) for v in names for r in values)
    return CompiledModule(ast.name, dec, compile_cmd(ast.init), props, variables, consts)


def compile_source(text: str) -> CompiledModule:
    return compile_module(parse_source(text))
