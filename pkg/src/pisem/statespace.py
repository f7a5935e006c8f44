"""Reachable transition graphs over canonical configurations."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .core import (
    BLoc, BPrc, BVal, Boo, Configuration, EnvSnapshot, FrozenMap, Loc, PiError,
    Rat, Store, Val, Value,
)
from .lib import PiRuntimeError, StepKind, safe_normalize, step, successors

DEFAULT_MAX_STATES = 100_000


class StateSpaceExceeded(PiError):
    def __init__(self, count: int):
        super().__init__(f"state space exceeded: {count} states reached")
        self.count = count


@dataclass(frozen=True)
class AtomicProp:
    """``var`` currently holds ``value``."""

    var: str
    value: Value

    def __post_init__(self):
        if not isinstance(self.value, (Rat, Boo)):
            raise TypeError("propositions range over rationals and booleans only")

    def sort_key(self):
        return (self.var, isinstance(self.value, Boo), self.value.value)

    def __str__(self) -> str:
        return f"{self.var} == {self.value}"


def format_props(props) -> str:
    return "{" + ", ".join(str(p) for p in sorted(props, key=AtomicProp.sort_key)) + "}"


# ---------------------------------------------------------------- canonical form


def _visit_value(v, see):
    if isinstance(v, Loc):
        see(v.id)


def _visit_env(env: FrozenMap, see):
    for name in sorted(env):
        b = env[name]
        match b:
            case BLoc(loc):
                see(loc)
            case BVal(v):
                _visit_value(v, see)
            case BPrc(_, _, _, closure):
                _visit_env(closure, see)


def _rename_value(v, m):
    return Loc(m[v.id]) if isinstance(v, Loc) else v


def _rename_env(env: FrozenMap, m) -> FrozenMap:
    out = {}
    for name, b in env.items():
        match b:
            case BLoc(loc):
                b = BLoc(m[loc])
            case BVal(v):
                b = BVal(_rename_value(v, m))
            case BPrc(n, formals, body, closure):
                b = BPrc(n, formals, body, _rename_env(closure, m))
        out[name] = b
    return FrozenMap(out)


def canonicalize_locations(c: Configuration) -> Configuration:
    """Rename live locations to 0, 1, ... in order of first occurrence.

    Traversal: env in name order, then the value stack top-down (the control
    stack holds no locations), then locations reachable from stored values.
    Unreachable cells are dropped and the counter reset to the live count.
    """
    order: dict[int, int] = {}

    def see(loc):
        if loc not in order:
            order[loc] = len(order)

    _visit_env(c.env, see)
    for item in c.val:
        match item:
            case Val(v):
                _visit_value(v, see)
            case EnvSnapshot(env):
                _visit_env(env, see)
    sto = c.sto
    queue = list(order)
    while queue:
        loc = queue.pop(0)
        v = sto.cells.get(loc)
        if isinstance(v, Loc) and v.id not in order:
            see(v.id)
            queue.append(v.id)

    val = []
    for item in c.val:
        match item:
            case Val(v):
                item = Val(_rename_value(v, order))
            case EnvSnapshot(env):
                item = EnvSnapshot(_rename_env(env, order))
        val.append(item)
    cells = {order[loc]: _rename_value(sto.cells[loc], order)
             for loc in order if loc in sto.cells}
    return c.replace(env=_rename_env(c.env, order), val=tuple(val),
                     sto=Store(FrozenMap(cells), len(order)))


# ---------------------------------------------------------------- labeling


def lookup_var(c: Configuration, var: str) -> Value | None:
    b = c.env.get(var)
    match b:
        case BVal(v):
            return v
        case BLoc(loc):
            return c.sto.cells.get(loc)
    return None


def label(c: Configuration, props) -> frozenset[AtomicProp]:
    """The propositions of ``props`` that hold in ``c``; unbound names hold nothing."""
    current: dict[str, Value | None] = {}
    held = []
    for p in props:
        if p.var not in current:
            current[p.var] = lookup_var(c, p.var)
        if current[p.var] == p.value:
            held.append(p)
    return frozenset(held)


# ---------------------------------------------------------------- kripke


@dataclass
class Kripke:
    """States, a total successor relation and a label per state.

    ``initial`` is always 0 for explored graphs; hand-built graphs used
    in tests may pass ``states=None``.
    """

    transitions: list[list[int]]
    labels: list[frozenset]
    universe: frozenset = frozenset()
    states: list[Configuration] | None = None
    initial: int = 0

    def __len__(self) -> int:
        return len(self.transitions)

    def labeler(self, sid: int) -> frozenset:
        return self.labels[sid]

    def dump(self) -> str:
        lines = [f"S{i}: {format_props(self.labels[i])}" for i in range(len(self))]
        for i, succ in enumerate(self.transitions):
            lines.extend(f"S{i} -> S{j}" for j in succ)
        return "\n".join(lines) + "\n"


def explore(initial: Configuration, max_states: int = DEFAULT_MAX_STATES, props=(),
            granularity: str = "collapsed") -> Kripke:
    """Breadth-first closure of ``initial`` under observable successors."""
    if max_states <= 0:
        raise ValueError("max_states must be positive")
    if granularity == "collapsed":
        start = safe_normalize(initial)[0]
    elif granularity == "full":
        start = initial
    else:
        raise ValueError(f"unknown granularity {granularity!r}")
    start = canonicalize_locations(start)
    index = {start: 0}
    states = [start]
    transitions: list[list[int]] = []
    frontier = deque([0])
    while frontier:
        sid = frontier.popleft()
        edges = []
        for s in successors(states[sid], granularity):
            s = canonicalize_locations(s)
            tid = index.get(s)
            if tid is None:
                if len(states) >= max_states:
                    raise StateSpaceExceeded(len(states))
                tid = index[s] = len(states)
                states.append(s)
                frontier.append(tid)
            if tid not in edges:
                edges.append(tid)
        # frontier order equals id order, so transitions[sid] lands at index sid
        transitions.append(edges)
    universe = frozenset(props)
    labels = [label(s, universe) for s in states]
    return Kripke(transitions, labels, universe, states, 0)


def relational_points(k: Kripke) -> set[Configuration]:
    """States of ``k`` sitting at a relational rule or final."""
    out = set()
    for s in k.states:
        try:
            r = step(s)
        except PiRuntimeError:
            continue
        if r.final or r.kind is StepKind.RELATIONAL:
            out.add(s)
    return out


__all__ = [
    "AtomicProp", "Kripke", "StateSpaceExceeded", "canonicalize_locations",
    "explore", "label", "lookup_var", "format_props", "relational_points",
]
