"""Terms, values and configurations of the stack machine.

Everything here is immutable and hashable so configurations can be
interned directly as states of a transition graph.
"""

from __future__ import annotations

import re
from collections.abc import Iterator, Mapping
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Union

NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


class PiError(Exception):
    """Base class of every error raised by the package."""


class IllFormedTerm(PiError):
    pass


class MissingComponent(PiError, KeyError):
    pass


# ---------------------------------------------------------------- values


@dataclass(frozen=True)
class Rat:
    value: Fraction

    def __init__(self, value):
        object.__setattr__(self, "value", Fraction(value))

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Boo:
    value: bool

    def __str__(self) -> str:
        return "tt" if self.value else "ff"


@dataclass(frozen=True)
class Loc:
    id: int

    def __str__(self) -> str:
        return f"loc{self.id}"


Value = Union[Rat, Boo, Loc]


class FrozenMap(Mapping):
    """Hashable, immutable mapping. ``set``/``remove`` return new maps."""

    __slots__ = ("_d", "_h")

    def __init__(self, items=()):
        self._d = dict(items)
        self._h = None

    def __getitem__(self, key):
        return self._d[key]

    def __iter__(self) -> Iterator:
        return iter(self._d)

    def __len__(self) -> int:
        return len(self._d)

    def __hash__(self) -> int:
        if self._h is None:
            self._h = hash(frozenset(self._d.items()))
        return self._h

    def __eq__(self, other) -> bool:
        if isinstance(other, FrozenMap):
            return self._d == other._d
        return NotImplemented

    def __repr__(self) -> str:
        return f"FrozenMap({self._d!r})"

    def set(self, key, value) -> FrozenMap:
        d = dict(self._d)
        d[key] = value
        return FrozenMap(d)

    def update(self, pairs) -> FrozenMap:
        d = dict(self._d)
        d.update(pairs)
        return FrozenMap(d)


# ---------------------------------------------------------------- terms
#
# Expressions, commands and declarations are constructs; the ``K*``
# classes are control keywords that only ever live on the control stack.


class Term:
    __slots__ = ()


class Exp(Term):
    __slots__ = ()


class Cmd(Term):
    __slots__ = ()


class Dec(Term):
    __slots__ = ()


class Keyword(Term):
    __slots__ = ()


@dataclass(frozen=True)
class NumLit(Exp):
    value: Fraction

    def __init__(self, value):
        object.__setattr__(self, "value", Fraction(value))


@dataclass(frozen=True)
class BoolLit(Exp):
    value: bool


@dataclass(frozen=True)
class Id(Exp):
    name: str


@dataclass(frozen=True)
class Add(Exp):
    left: Exp
    right: Exp


@dataclass(frozen=True)
class Sub(Exp):
    left: Exp
    right: Exp


@dataclass(frozen=True)
class Mul(Exp):
    left: Exp
    right: Exp


@dataclass(frozen=True)
class Div(Exp):
    left: Exp
    right: Exp


@dataclass(frozen=True)
class Eq(Exp):
    left: Exp
    right: Exp


@dataclass(frozen=True)
class Or(Exp):
    left: Exp
    right: Exp


@dataclass(frozen=True)
class Not(Exp):
    operand: Exp


@dataclass(frozen=True)
class Nop(Cmd):
    pass


@dataclass(frozen=True)
class Assign(Cmd):
    name: str
    exp: Exp


@dataclass(frozen=True)
class Seq(Cmd):
    first: Cmd
    second: Cmd


@dataclass(frozen=True)
class Cond(Cmd):
    test: Exp
    then: Cmd
    orelse: Cmd


@dataclass(frozen=True)
class Loop(Cmd):
    test: Exp
    body: Cmd


@dataclass(frozen=True)
class Choice(Cmd):
    left: Cmd
    right: Cmd


@dataclass(frozen=True)
class Print(Cmd):
    exp: Exp


@dataclass(frozen=True)
class Exit(Cmd):
    pass


@dataclass(frozen=True)
class Call(Cmd):
    name: str
    actuals: tuple[Exp, ...] = ()

    def __init__(self, name, actuals=()):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "actuals", tuple(actuals))


@dataclass(frozen=True)
class Blk(Cmd):
    dec: Dec
    cmd: Cmd


@dataclass(frozen=True)
class Bind(Dec):
    name: str
    exp: Exp


@dataclass(frozen=True)
class Ref(Dec):
    name: str
    exp: Exp


@dataclass(frozen=True)
class Prc(Dec):
    name: str
    formals: tuple[str, ...]
    body: Cmd

    def __init__(self, name, formals, body):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "formals", tuple(formals))
        object.__setattr__(self, "body", body)


@dataclass(frozen=True)
class DSeq(Dec):
    first: Dec
    second: Dec


@dataclass(frozen=True)
class NoDec(Dec):
    pass


@dataclass(frozen=True)
class KAdd(Keyword):
    pass


@dataclass(frozen=True)
class KSub(Keyword):
    pass


@dataclass(frozen=True)
class KMul(Keyword):
    pass


@dataclass(frozen=True)
class KDiv(Keyword):
    pass


@dataclass(frozen=True)
class KEq(Keyword):
    pass


@dataclass(frozen=True)
class KOr(Keyword):
    pass


@dataclass(frozen=True)
class KNot(Keyword):
    pass


@dataclass(frozen=True)
class KAssign(Keyword):
    name: str


@dataclass(frozen=True)
class KCond(Keyword):
    then: Cmd
    orelse: Cmd


@dataclass(frozen=True)
class KLoop(Keyword):
    pass


@dataclass(frozen=True)
class KPrint(Keyword):
    pass


@dataclass(frozen=True)
class KBind(Keyword):
    name: str


@dataclass(frozen=True)
class KRef(Keyword):
    name: str


@dataclass(frozen=True)
class KBlkCmd(Keyword):
    pass


@dataclass(frozen=True)
class KCall(Keyword):
    name: str
    arity: int


@dataclass(frozen=True)
class KRestoreEnv(Keyword):
    pass


BINARY_EXPS = (Add, Sub, Mul, Div, Eq, Or)

KEYWORD_NAMES = {
    KAdd: "#ADD", KSub: "#SUB", KMul: "#MUL", KDiv: "#DIV", KEq: "#EQ",
    KOr: "#OR", KNot: "#NOT", KAssign: "#ASSIGN", KCond: "#COND",
    KLoop: "#LOOP", KPrint: "#PRINT", KBind: "#BIND", KRef: "#REF",
    KBlkCmd: "#BLKCMD", KCall: "#CALL", KRestoreEnv: "#RESTORE-ENV",
}


def check_name(name) -> None:
    if not isinstance(name, str) or not NAME_RE.match(name):
        raise IllFormedTerm(f"bad identifier {name!r}")


def check_wellformed(term, category: type = Term) -> None:
    """Raise IllFormedTerm unless ``term`` is a construct of ``category``.

    Keywords are rejected at every position, including the root.
    """
    if isinstance(term, Keyword) or not isinstance(term, category):
        raise IllFormedTerm(f"expected {category.__name__}, got {term!r}")
    match term:
        case NumLit() | BoolLit() | Nop() | Exit() | NoDec():
            pass
        case Id(name):
            check_name(name)
        case Not(e) | Print(e):
            check_wellformed(e, Exp)
        case Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) | Eq(a, b) | Or(a, b):
            check_wellformed(a, Exp)
            check_wellformed(b, Exp)
        case Assign(name, e) | Bind(name, e) | Ref(name, e):
            check_name(name)
            check_wellformed(e, Exp)
        case Seq(a, b) | Choice(a, b):
            check_wellformed(a, Cmd)
            check_wellformed(b, Cmd)
        case Cond(t, a, b):
            check_wellformed(t, Exp)
            check_wellformed(a, Cmd)
            check_wellformed(b, Cmd)
        case Loop(t, b):
            check_wellformed(t, Exp)
            check_wellformed(b, Cmd)
        case Call(name, actuals):
            check_name(name)
            for a in actuals:
                check_wellformed(a, Exp)
        case Blk(d, c):
            check_wellformed(d, Dec)
            check_wellformed(c, Cmd)
        case Prc(name, formals, body):
            check_name(name)
            for f in formals:
                check_name(f)
            if len(set(formals)) != len(formals):
                raise IllFormedTerm(f"duplicate formal in {name}")
            check_wellformed(body, Cmd)
        case DSeq(a, b):
            check_wellformed(a, Dec)
            check_wellformed(b, Dec)
        case _:
            raise IllFormedTerm(f"unknown term {term!r}")


# ---------------------------------------------------------------- components


@dataclass(frozen=True)
class BVal:
    value: Value


@dataclass(frozen=True)
class BLoc:
    loc: int


@dataclass(frozen=True)
class BPrc:
    """Procedure closure. ``env`` excludes the procedure itself; the
    binding is re-added on every call so recursion works without a
    cyclic value."""

    name: str
    formals: tuple[str, ...]
    body: Cmd
    env: FrozenMap


Bindable = Union[BVal, BLoc, BPrc]
Env = FrozenMap  # str -> Bindable


@dataclass(frozen=True)
class Val:
    value: Value


@dataclass(frozen=True)
class Code:
    term: Term


@dataclass(frozen=True)
class EnvSnapshot:
    env: FrozenMap


StackItem = Union[Val, Code, EnvSnapshot]


@dataclass(frozen=True)
class Store:
    cells: FrozenMap = FrozenMap()
    next: int = 0

    def __getitem__(self, loc: int) -> Value:
        return self.cells[loc]

    def write(self, loc: int, value: Value) -> Store:
        return Store(self.cells.set(loc, value), self.next)

    def alloc(self, value: Value) -> tuple[int, Store]:
        loc = self.next
        return loc, Store(self.cells.set(loc, value), loc + 1)


@dataclass(frozen=True)
class Opaque:
    """Uninterpreted component; carried through every transition untouched."""

    tag: str
    payload: Any


VAL, CNT, ENV, STO, OUT, EXC = "val", "cnt", "env", "sto", "out", "exc"
STANDARD_TAGS = (VAL, CNT, ENV, STO, OUT, EXC)


class Configuration:
    """Finite map from component tags to components.

    Components used by the standard rules: ``val`` and ``cnt`` are tuples
    (top of stack first), ``env`` a FrozenMap, ``sto`` a Store, ``out`` a
    tuple of values and ``exc`` a bool.
    """

    __slots__ = ("_comps", "_h")

    def __init__(self, components: Mapping[str, Any]):
        self._comps = dict(components)
        self._h = None

    def get(self, tag: str):
        try:
            return self._comps[tag]
        except KeyError:
            raise MissingComponent(tag) from None

    def set(self, tag: str, comp) -> Configuration:
        d = dict(self._comps)
        d[tag] = comp
        return Configuration(d)

    def replace(self, **comps) -> Configuration:
        d = dict(self._comps)
        d.update(comps)
        return Configuration(d)

    @property
    def tags(self) -> frozenset[str]:
        return frozenset(self._comps)

    def items(self):
        return self._comps.items()

    # shorthands for the standard components
    val = property(lambda self: self._comps[VAL])
    cnt = property(lambda self: self._comps[CNT])
    env = property(lambda self: self._comps[ENV])
    sto = property(lambda self: self._comps[STO])
    out = property(lambda self: self._comps[OUT])
    exc = property(lambda self: self._comps[EXC])

    def __eq__(self, other) -> bool:
        if isinstance(other, Configuration):
            return self._comps == other._comps
        return NotImplemented

    def __hash__(self) -> int:
        if self._h is None:
            self._h = hash(frozenset(self._comps.items()))
        return self._h

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}: {v!r}" for k, v in sorted(self._comps.items()))
        return f"<{inner}>"


def get_component(c: Configuration, tag: str):
    return c.get(tag)


def set_component(c: Configuration, tag: str, comp) -> Configuration:
    return c.set(tag, comp)


def initial_configuration(dec: Dec, cmd: Cmd) -> Configuration:
    check_wellformed(dec, Dec)
    check_wellformed(cmd, Cmd)
    return Configuration({
        VAL: (),
        CNT: (dec, cmd),
        ENV: FrozenMap(),
        STO: Store(),
        OUT: (),
        EXC: False,
    })
