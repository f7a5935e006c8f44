"""Prefix rendering of terms, a reader for it, and configuration display."""

from __future__ import annotations

import re
from fractions import Fraction

from . import core as pi
from .core import (
    BLoc, BPrc, BVal, Code, Configuration, EnvSnapshot, KEYWORD_NAMES, Keyword,
    PiError, Val,
)


class KeywordInTerm(PiError):
    pass


class TermSyntaxError(PiError):
    pass


_BIN = {pi.Add: "add", pi.Sub: "sub", pi.Mul: "mul", pi.Div: "div", pi.Eq: "eq",
        pi.Or: "or", pi.Seq: "seq", pi.Choice: "choice", pi.DSeq: "dseq"}
_BIN_BY_NAME = {v: k for k, v in _BIN.items()}


def _rat(v: Fraction) -> str:
    return f"rat({v})"


def pretty_print(t: pi.Term) -> str:
    """``add(idn(a), rat(3))`` style prefix notation for construct terms."""
    if isinstance(t, Keyword):
        raise KeywordInTerm(f"keyword {KEYWORD_NAMES[type(t)]} inside a term")
    match t:
        case pi.NumLit(v):
            return _rat(v)
        case pi.BoolLit(b):
            return f"boo({'true' if b else 'false'})"
        case pi.Id(n):
            return f"idn({n})"
        case pi.Not(e):
            return f"not({pretty_print(e)})"
        case pi.Nop():
            return "nop"
        case pi.Exit():
            return "exit"
        case pi.NoDec():
            return "nodec"
        case pi.Assign(n, e):
            return f"assign({n}, {pretty_print(e)})"
        case pi.Bind(n, e):
            return f"bind({n}, {pretty_print(e)})"
        case pi.Ref(n, e):
            return f"ref({n}, {pretty_print(e)})"
        case pi.Cond(a, b, c):
            return f"cond({pretty_print(a)}, {pretty_print(b)}, {pretty_print(c)})"
        case pi.Loop(a, b):
            return f"loop({pretty_print(a)}, {pretty_print(b)})"
        case pi.Print(e):
            return f"print({pretty_print(e)})"
        case pi.Blk(d, c):
            return f"blk({pretty_print(d)}, {pretty_print(c)})"
        case pi.Call(n, args):
            return f"call({n}, [{', '.join(map(pretty_print, args))}])"
        case pi.Prc(n, formals, body):
            return f"prc({n}, [{', '.join(formals)}], {pretty_print(body)})"
    if type(t) in _BIN:
        a, b = (getattr(t, f) for f in t.__dataclass_fields__)
        return f"{_BIN[type(t)]}({pretty_print(a)}, {pretty_print(b)})"
    raise TypeError(f"not a term: {t!r}")


_TERM_TOKEN = re.compile(r"\s*(?:(-?\d+(?:/\d+)?)|([A-Za-z][A-Za-z0-9_]*)|([(),\[\]]))")


class _Reader:
    def __init__(self, text: str):
        self.toks = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _TERM_TOKEN.match(text, pos)
            if not m:
                raise TermSyntaxError(f"unexpected text at offset {pos}: {text[pos:pos + 10]!r}")
            self.toks.append(m.group(m.lastindex))
            pos = m.end()
        self.i = 0

    def next(self) -> str:
        if self.i >= len(self.toks):
            raise TermSyntaxError("unexpected end of term")
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def eat(self, tok: str) -> None:
        got = self.next()
        if got != tok:
            raise TermSyntaxError(f"expected {tok!r}, found {got!r}")

    def name(self) -> str:
        tok = self.next()
        if not pi.NAME_RE.match(tok):
            raise TermSyntaxError(f"expected a name, found {tok!r}")
        return tok

    def items(self, item):
        self.eat("[")
        out = []
        if self.toks[self.i:self.i + 1] != ["]"]:
            out.append(item())
            while self.toks[self.i:self.i + 1] == [","]:
                self.i += 1
                out.append(item())
        self.eat("]")
        return tuple(out)

    def term(self) -> pi.Term:
        head = self.next()
        if head in ("nop", "exit", "nodec"):
            return {"nop": pi.Nop, "exit": pi.Exit, "nodec": pi.NoDec}[head]()
        self.eat("(")
        if head == "rat":
            t = pi.NumLit(Fraction(self.next()))
        elif head == "boo":
            b = self.next()
            if b not in ("true", "false"):
                raise TermSyntaxError(f"bad boolean {b!r}")
            t = pi.BoolLit(b == "true")
        elif head == "idn":
            t = pi.Id(self.name())
        elif head in ("not", "print"):
            t = (pi.Not if head == "not" else pi.Print)(self.term())
        elif head in ("assign", "bind", "ref"):
            n = self.name()
            self.eat(",")
            t = {"assign": pi.Assign, "bind": pi.Bind, "ref": pi.Ref}[head](n, self.term())
        elif head == "call":
            n = self.name()
            self.eat(",")
            t = pi.Call(n, self.items(self.term))
        elif head == "prc":
            n = self.name()
            self.eat(",")
            formals = self.items(self.name)
            self.eat(",")
            t = pi.Prc(n, formals, self.term())
        elif head == "cond":
            a = self.term()
            self.eat(",")
            b = self.term()
            self.eat(",")
            t = pi.Cond(a, b, self.term())
        elif head in ("loop", "blk") or head in _BIN_BY_NAME:
            a = self.term()
            self.eat(",")
            b = self.term()
            cls = {"loop": pi.Loop, "blk": pi.Blk}.get(head) or _BIN_BY_NAME[head]
            t = cls(a, b)
        else:
            raise TermSyntaxError(f"unknown constructor {head!r}")
        self.eat(")")
        return t


def read_term(text: str) -> pi.Term:
    """Inverse of ``pretty_print``."""
    r = _Reader(text)
    t = r.term()
    if r.i != len(r.toks):
        raise TermSyntaxError(f"trailing input after term: {r.toks[r.i]!r}")
    return t


# ---------------------------------------------------------------- configurations


def format_value(v) -> str:
    return str(v)


def format_control(t) -> str:
    if not isinstance(t, Keyword):
        return pretty_print(t)
    name = KEYWORD_NAMES[type(t)]
    match t:
        case pi.KAssign(n) | pi.KBind(n) | pi.KRef(n):
            return f"{name}({n})"
        case pi.KCond(a, b):
            return f"{name}({pretty_print(a)}, {pretty_print(b)})"
        case pi.KCall(n, k):
            return f"{name}({n}, {k})"
    return name


def format_env(env) -> str:
    parts = []
    for name in sorted(env):
        match env[name]:
            case BVal(v):
                parts.append(f"{name}: {v}")
            case BLoc(loc):
                parts.append(f"{name}: loc{loc}")
            case BPrc(_, formals, _, _):
                parts.append(f"{name}: prc({', '.join(formals)})")
    return "{" + ", ".join(parts) + "}"


def _format_item(item) -> str:
    match item:
        case Val(v):
            return str(v)
        case Code(t):
            return f"code({pretty_print(t)})"
        case EnvSnapshot(env):
            return f"env{format_env(env)}"
    return repr(item)


def format_configuration(c: Configuration) -> str:
    """One line per component, standard components first."""
    lines = [
        f"  cnt: [{', '.join(format_control(t) for t in c.cnt)}]",
        f"  val: [{', '.join(_format_item(x) for x in c.val)}]",
        f"  env: {format_env(c.env)}",
        "  sto: {" + ", ".join(f"loc{k}: {c.sto.cells[k]}" for k in sorted(c.sto.cells))
        + "}",
        f"  out: [{', '.join(map(str, c.out))}]",
        f"  exc: {'true' if c.exc else 'false'}",
    ]
    for tag, comp in sorted(c.items()):
        if tag not in pi.STANDARD_TAGS:
            lines.append(f"  {tag}: {comp!r}")
    return "\n".join(lines)
