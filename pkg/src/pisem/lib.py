"""Small-step transition relation over configurations.

Each ``step`` looks only at the head of the control stack and rewrites the
components its rule mentions; all other components, known or not, are
carried over unchanged. Two rules are relational (loop unfolding on a
true test, and nondeterministic choice); every other rule is functional
and gets collapsed by ``normalize``.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .core import (
    Add, Assign, BLoc, Blk, BoolLit, Boo, BPrc, BVal, Bind, Call, Choice, Cmd,
    Code, Cond, Configuration, DSeq, Dec, Div, EnvSnapshot, Eq, Exit, Id,
    KAdd, KAssign, KBind, KCall, KCond, KDiv, KEq, KLoop, KMul, KNot, KOr,
    KPrint, KRef, KRestoreEnv, KSub, Loop, Mul, NoDec, Nop, Not, NumLit, Or,
    PiError, Prc, Print, Rat, Ref, Seq, Sub, Val, initial_configuration,
)


class PiRuntimeError(PiError):
    """A rule could not fire. ``head`` is the offending control-stack item."""

    def __init__(self, message: str, head=None):
        super().__init__(message)
        self.head = head


class UnboundName(PiRuntimeError):
    pass


class PiTypeError(PiRuntimeError):
    pass


class DivisionByZero(PiRuntimeError):
    pass


class ArityMismatch(PiRuntimeError):
    pass


class StepLimitExceeded(PiError):
    def __init__(self, steps: int, outcome: ExecOutcome | None = None):
        super().__init__(f"step limit exceeded after {steps} steps")
        self.steps = steps
        self.outcome = outcome


class StepKind(enum.Enum):
    FUNCTIONAL = "functional"
    RELATIONAL = "relational"


@dataclass(frozen=True)
class StepResult:
    successors: tuple[Configuration, ...] = ()
    kind: StepKind | None = None

    @property
    def final(self) -> bool:
        return not self.successors


FINAL = StepResult()


def is_final(c: Configuration) -> bool:
    return c.exc or not c.cnt


def _functional(c: Configuration) -> StepResult:
    return StepResult((c,), StepKind.FUNCTIONAL)


def _lookup(env, name, head):
    try:
        return env[name]
    except KeyError:
        raise UnboundName(f"unbound name {name!r}", head) from None


def _pop_vals(val, n, head):
    if len(val) < n or not all(isinstance(v, Val) for v in val[:n]):
        raise PiTypeError(f"expected {n} value(s) on the value stack", head)
    return [v.value for v in val[:n]], val[n:]


def _rats(head, *vs):
    if not all(isinstance(v, Rat) for v in vs):
        raise PiTypeError("arithmetic on a non-rational value", head)
    return [v.value for v in vs]


def _boos(head, *vs):
    if not all(isinstance(v, Boo) for v in vs):
        raise PiTypeError("boolean operation on a non-boolean value", head)
    return [v.value for v in vs]


_UNFOLD = {Add: KAdd(), Sub: KSub(), Mul: KMul(), Div: KDiv(), Eq: KEq(), Or: KOr()}


def _arith(head, a: Fraction, b: Fraction):
    # a is the left operand (deeper on the value stack)
    match head:
        case KAdd():
            return Rat(a + b)
        case KSub():
            return Rat(a - b)
        case KMul():
            return Rat(a * b)
        case KDiv():
            if b == 0:
                raise DivisionByZero("division by zero", head)
            return Rat(a / b)


def step(c: Configuration) -> StepResult:
    """One transition from ``c``, dispatched on the head of the control stack."""
    if is_final(c):
        return FINAL
    head, rest = c.cnt[0], c.cnt[1:]
    val = c.val

    match head:
        case NumLit(n):
            return _functional(c.replace(cnt=rest, val=(Val(Rat(n)),) + val))
        case BoolLit(b):
            return _functional(c.replace(cnt=rest, val=(Val(Boo(b)),) + val))
        case Id(name):
            b = _lookup(c.env, name, head)
            match b:
                case BVal(v):
                    pass
                case BLoc(loc):
                    v = c.sto[loc]
                case _:
                    raise PiTypeError(f"{name!r} is a procedure, not a value", head)
            return _functional(c.replace(cnt=rest, val=(Val(v),) + val))
        case Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) | Eq(a, b) | Or(a, b):
            return _functional(c.replace(cnt=(a, b, _UNFOLD[type(head)]) + rest))
        case Not(e):
            return _functional(c.replace(cnt=(e, KNot()) + rest))

        case KAdd() | KSub() | KMul() | KDiv():
            (right, left), val = _pop_vals(val, 2, head)
            a, b = _rats(head, left, right)
            return _functional(c.replace(cnt=rest, val=(Val(_arith(head, a, b)),) + val))
        case KEq():
            (right, left), val = _pop_vals(val, 2, head)
            return _functional(c.replace(cnt=rest, val=(Val(Boo(left == right)),) + val))
        case KOr():
            (right, left), val = _pop_vals(val, 2, head)
            a, b = _boos(head, left, right)
            return _functional(c.replace(cnt=rest, val=(Val(Boo(a or b)),) + val))
        case KNot():
            (v,), val = _pop_vals(val, 1, head)
            (a,) = _boos(head, v)
            return _functional(c.replace(cnt=rest, val=(Val(Boo(not a)),) + val))

        case Nop() | NoDec():
            return _functional(c.replace(cnt=rest))
        case Assign(name, e):
            return _functional(c.replace(cnt=(e, KAssign(name)) + rest))
        case KAssign(name):
            (v,), val = _pop_vals(val, 1, head)
            b = _lookup(c.env, name, head)
            if not isinstance(b, BLoc):
                raise PiTypeError(f"cannot assign to {name!r}: not a variable", head)
            return _functional(c.replace(cnt=rest, val=val, sto=c.sto.write(b.loc, v)))
        case Seq(c1, c2):
            return _functional(c.replace(cnt=(c1, c2) + rest))
        case Cond(t, c1, c2):
            return _functional(c.replace(cnt=(t, KCond(c1, c2)) + rest))
        case KCond(c1, c2):
            (v,), val = _pop_vals(val, 1, head)
            (b,) = _boos(head, v)
            return _functional(c.replace(cnt=((c1 if b else c2),) + rest, val=val))
        case Loop(t, _):
            return _functional(c.replace(cnt=(t, KLoop()) + rest, val=(Code(head),) + val))
        case KLoop():
            if len(val) < 2 or not isinstance(val[0], Val) \
                    or not isinstance(val[1], Code) or not isinstance(val[1].term, Loop):
                raise PiTypeError("loop keyword without test value and loop code", head)
            (b,) = _boos(head, val[0].value)
            loop = val[1].term
            if b:
                return StepResult(
                    (c.replace(cnt=(loop.body, loop) + rest, val=val[2:]),),
                    StepKind.RELATIONAL,
                )
            return _functional(c.replace(cnt=rest, val=val[2:]))
        case Choice(c1, c2):
            return StepResult(
                (c.replace(cnt=(c1,) + rest), c.replace(cnt=(c2,) + rest)),
                StepKind.RELATIONAL,
            )
        case Print(e):
            return _functional(c.replace(cnt=(e, KPrint()) + rest))
        case KPrint():
            (v,), val = _pop_vals(val, 1, head)
            return _functional(c.replace(cnt=rest, val=val, out=c.out + (v,)))
        case Exit():
            return _functional(c.replace(cnt=(), exc=True))

        case Bind(name, e):
            return _functional(c.replace(cnt=(e, KBind(name)) + rest))
        case KBind(name):
            (v,), val = _pop_vals(val, 1, head)
            return _functional(c.replace(cnt=rest, val=val, env=c.env.set(name, BVal(v))))
        case Ref(name, e):
            return _functional(c.replace(cnt=(e, KRef(name)) + rest))
        case KRef(name):
            (v,), val = _pop_vals(val, 1, head)
            loc, sto = c.sto.alloc(v)
            return _functional(
                c.replace(cnt=rest, val=val, sto=sto, env=c.env.set(name, BLoc(loc))))
        case Prc(name, formals, body):
            closure = BPrc(name, formals, body, c.env)
            return _functional(c.replace(cnt=rest, env=c.env.set(name, closure)))
        case DSeq(d1, d2):
            return _functional(c.replace(cnt=(d1, d2) + rest))

        case Blk(d, k):
            return _functional(c.replace(
                cnt=(d, k, KRestoreEnv()) + rest, val=(EnvSnapshot(c.env),) + val))
        case KRestoreEnv():
            if not val or not isinstance(val[0], EnvSnapshot):
                raise PiTypeError("no environment snapshot to restore", head)
            return _functional(c.replace(cnt=rest, val=val[1:], env=val[0].env))
        case Call(name, actuals):
            return _functional(c.replace(cnt=actuals + (KCall(name, len(actuals)),) + rest))
        case KCall(name, n):
            prc = _lookup(c.env, name, head)
            if not isinstance(prc, BPrc):
                raise PiTypeError(f"{name!r} is not a procedure", head)
            if len(prc.formals) != n:
                raise ArityMismatch(
                    f"{name!r} expects {len(prc.formals)} argument(s), got {n}", head)
            args, val = _pop_vals(val, n, head)
            args.reverse()  # first actual was pushed first, so it sits deepest
            sto = c.sto
            env = prc.env.set(name, prc)
            for formal, v in zip(prc.formals, args):
                loc, sto = sto.alloc(v)
                env = env.set(formal, BLoc(loc))
            return _functional(c.replace(
                cnt=(prc.body, KRestoreEnv()) + rest,
                val=(EnvSnapshot(c.env),) + val,
                env=env, sto=sto))

    raise PiTypeError(f"no rule for {head!r}", head)


def normalize(c: Configuration) -> Configuration:
    """Apply functional steps until a final or relational point is reached."""
    while True:
        r = step(c)
        if r.final or r.kind is StepKind.RELATIONAL:
            return c
        c = r.successors[0]


def abort(c: Configuration) -> Configuration:
    """The final state an erroring computation turns into."""
    return c.replace(cnt=(), exc=True)


def safe_normalize(c: Configuration) -> tuple[Configuration, PiRuntimeError | None]:
    """Like ``normalize``, but an error aborts at the configuration that raised it."""
    while True:
        try:
            r = step(c)
        except PiRuntimeError as e:
            return abort(c), e
        if r.final or r.kind is StepKind.RELATIONAL:
            return c, None
        c = r.successors[0]


def _normalize_or_abort(c: Configuration) -> Configuration:
    return safe_normalize(c)[0]


def successors(c: Configuration, granularity: str = "collapsed") -> list[Configuration]:
    """Observable successors of ``c``.

    ``collapsed`` expects a normalized ``c`` and returns normalized
    successors; ``full`` treats every micro-step as observable. Final
    configurations stutter. A step that errors yields an aborted final.
    """
    if is_final(c):
        return [c]
    try:
        r = step(c)
    except PiRuntimeError:
        return [abort(c)]
    if granularity == "full":
        return list(r.successors)
    if r.kind is StepKind.FUNCTIONAL:
        # not normalized yet; the functional chain is one observable move
        return [_normalize_or_abort(c)]
    return [_normalize_or_abort(s) for s in r.successors]


@dataclass
class ExecOutcome:
    final: Configuration
    trace: list[Configuration] = field(default_factory=list)
    aborted: bool = False
    error: PiRuntimeError | None = None
    steps: int = 0


def _advance(c: Configuration, choose, granularity: str):
    """One observable move, keeping the error that caused an abort."""
    if granularity == "full":
        try:
            r = step(c)
        except PiRuntimeError as e:
            return abort(c), e
        return choose(list(r.successors)), None
    r = step(c)  # c is normalized, so this is relational and cannot error
    return safe_normalize(choose(list(r.successors)))


def _chooser(strategy: str, seed):
    if strategy == "leftmost":
        return lambda xs: xs[0]
    if strategy == "random":
        return random.Random(seed).choice
    raise ValueError(f"unknown strategy {strategy!r}")


def run_from(c: Configuration, strategy: str = "leftmost", seed: int | None = None,
             max_steps: int = 10_000, granularity: str = "collapsed") -> ExecOutcome:
    """Follow one branch from ``c`` to a final configuration.

    ``strategy`` is ``leftmost`` or ``random`` (seeded by ``seed``).
    ``steps`` counts observable moves; exceeding ``max_steps`` raises
    StepLimitExceeded carrying the partial outcome.
    """
    choose = _chooser(strategy, seed)
    if max_steps <= 0:
        raise ValueError("max_steps must be positive")
    error = None
    if granularity != "full":
        c, error = safe_normalize(c)
    trace = [c]
    steps = 0
    while not is_final(c):
        if steps >= max_steps:
            raise StepLimitExceeded(steps, ExecOutcome(c, trace, False, None, steps))
        c, error = _advance(c, choose, granularity)
        steps += 1
        trace.append(c)
    return ExecOutcome(c, trace, bool(c.exc), error, steps)


def exec_program(dec: Dec, cmd: Cmd, strategy: str = "leftmost", seed: int | None = None,
                 max_steps: int = 10_000, granularity: str = "collapsed") -> ExecOutcome:
    return run_from(initial_configuration(dec, cmd), strategy, seed, max_steps, granularity)
