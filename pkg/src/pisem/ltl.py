"""LTL with eventually/globally over state propositions, checked on Kripke graphs.

The property is negated, put in negation normal form and translated to a
Büchi automaton by tableau expansion. The automaton synchronizes with the
graph by reading the label of each state it enters; an accepting cycle
in the product, found by nested depth-first search, is a counterexample.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

from .core import Boo, PiError, Rat
from .statespace import AtomicProp, Kripke


class LTLSyntaxError(PiError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at column {pos}")
        self.pos = pos


class UnknownProposition(PiError):
    pass


class PropositionOutsideUniverse(PiError):
    pass


class ModelCheckError(PiError):
    """A counterexample failed its own validation. Always a bug."""


# ---------------------------------------------------------------- formulas


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class Atom:
    prop: AtomicProp


@dataclass(frozen=True)
class Neg:
    sub: Formula


@dataclass(frozen=True)
class And:
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or:
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Imp:
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Eventually:
    sub: Formula


@dataclass(frozen=True)
class Globally:
    sub: Formula


Formula = Union[Top, Bot, Atom, Neg, And, Or, Imp, Eventually, Globally]


def atoms(f: Formula) -> set[AtomicProp]:
    match f:
        case Atom(p):
            return {p}
        case Neg(g) | Eventually(g) | Globally(g):
            return atoms(g)
        case And(a, b) | Or(a, b) | Imp(a, b):
            return atoms(a) | atoms(b)
    return set()


def depth(f: Formula) -> int:
    match f:
        case Neg(g) | Eventually(g) | Globally(g):
            return 1 + depth(g)
        case And(a, b) | Or(a, b) | Imp(a, b):
            return 1 + max(depth(a), depth(b))
    return 0


def _unary(op: str, g: Formula) -> str:
    s = format_formula(g)
    return op + s if s[0] in "(~<[" else f"{op} {s}"


def format_formula(f: Formula) -> str:
    """Concrete syntax with every binary operator parenthesized; re-parses to ``f``."""
    match f:
        case Top():
            return "tt"
        case Bot():
            return "ff"
        case Atom(p):
            return f"{p.var} == {p.value}"
        case Neg(g):
            return _unary("~", g)
        case Eventually(g):
            return _unary("<>", g)
        case Globally(g):
            return _unary("[]", g)
        case And(a, b):
            return f"({format_formula(a)} /\\ {format_formula(b)})"
        case Or(a, b):
            return f"({format_formula(a)} \\/ {format_formula(b)})"
        case Imp(a, b):
            return f"({format_formula(a)} -> {format_formula(b)})"
    raise TypeError(f)


# ---------------------------------------------------------------- parser

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<sym>/\\|\\/|->|<>|\[\]|==|~|\(|\))
  | (?P<num>-?\d+(?:/\d+)?)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
""", re.VERBOSE)


def _ltl_tokens(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise LTLSyntaxError(f"unexpected character {text[pos]!r}", pos + 1)
        if m.lastgroup != "ws":
            out.append((m.lastgroup, m.group(), pos + 1))
        pos = m.end()
    out.append(("eof", "", len(text) + 1))
    return out


class _LTLParser:
    def __init__(self, text, universe, consts):
        self.toks = _ltl_tokens(text)
        self.i = 0
        self.universe = universe
        self.consts = consts or {}

    def peek(self):
        return self.toks[self.i]

    def take(self, text=None):
        tok = self.toks[self.i]
        if text is not None and tok[1] != text:
            what = tok[1] or "end of formula"
            raise LTLSyntaxError(f"expected {text!r}, found {what!r}", tok[2])
        self.i += 1
        return tok

    def formula(self):
        f = self.imp()
        tok = self.peek()
        if tok[0] != "eof":
            raise LTLSyntaxError(f"unexpected {tok[1]!r}", tok[2])
        return f

    def imp(self):
        left = self.disj()
        if self.peek()[1] == "->":
            self.take()
            return Imp(left, self.imp())
        return left

    def disj(self):
        left = self.conj()
        if self.peek()[1] == "\\/":
            self.take()
            return Or(left, self.disj())
        return left

    def conj(self):
        left = self.unary()
        if self.peek()[1] == "/\\":
            self.take()
            return And(left, self.conj())
        return left

    def unary(self):
        kind, text, pos = self.peek()
        if text == "~":
            self.take()
            return Neg(self.unary())
        if text == "<>":
            self.take()
            return Eventually(self.unary())
        if text == "[]":
            self.take()
            return Globally(self.unary())
        if text == "(":
            self.take()
            f = self.imp()
            self.take(")")
            return f
        if kind == "ident" and text == "tt":
            self.take()
            return Top()
        if kind == "ident" and text == "ff":
            self.take()
            return Bot()
        if kind == "ident":
            return self.atom()
        raise LTLSyntaxError(f"expected a formula, found {text or 'end of formula'!r}", pos)

    def atom(self):
        _, var, pos = self.take()
        if self.peek()[1] == "==":
            self.take()
            value = self.value()
        else:
            value = Boo(True)
        prop = AtomicProp(var, value)
        if self.universe is not None and prop not in self.universe:
            raise UnknownProposition(f"proposition {prop} (column {pos}) is not in the universe")
        return Atom(prop)

    def value(self):
        kind, text, pos = self.take()
        if kind == "num":
            return Rat(Fraction(text))
        if text == "tt":
            return Boo(True)
        if text == "ff":
            return Boo(False)
        if kind == "ident":
            if text in self.consts:
                return self.consts[text]
            raise UnknownProposition(f"unknown constant {text!r} at column {pos}")
        raise LTLSyntaxError(f"expected a value, found {text or 'end of formula'!r}", pos)


def parse_ltl(text: str, prop_universe=None, consts=None) -> Formula:
    """Parse ``text``; atoms are ``var == value`` or a bare boolean ``var``.

    Unary ``~ <> []`` bind tightest, then ``/\\``, ``\\/``, ``->``; binary
    operators associate to the right. ``consts`` maps names to values usable
    on the right of ``==``. With ``prop_universe`` given, every atom must
    belong to it.
    """
    universe = None if prop_universe is None else frozenset(prop_universe)
    return _LTLParser(text, universe, consts).formula()


# ---------------------------------------------------------------- normal form


def to_nnf(f: Formula) -> Formula:
    """Push negations onto atoms and eliminate implication."""
    match f:
        case Top() | Bot() | Atom():
            return f
        case And(a, b):
            return And(to_nnf(a), to_nnf(b))
        case Or(a, b):
            return Or(to_nnf(a), to_nnf(b))
        case Imp(a, b):
            return Or(to_nnf(Neg(a)), to_nnf(b))
        case Eventually(g):
            return Eventually(to_nnf(g))
        case Globally(g):
            return Globally(to_nnf(g))
        case Neg(g):
            match g:
                case Top():
                    return Bot()
                case Bot():
                    return Top()
                case Atom():
                    return f
                case Neg(h):
                    return to_nnf(h)
                case And(a, b):
                    return Or(to_nnf(Neg(a)), to_nnf(Neg(b)))
                case Or(a, b):
                    return And(to_nnf(Neg(a)), to_nnf(Neg(b)))
                case Imp(a, b):
                    return And(to_nnf(a), to_nnf(Neg(b)))
                case Eventually(h):
                    return Globally(to_nnf(Neg(h)))
                case Globally(h):
                    return Eventually(to_nnf(Neg(h)))
    raise TypeError(f"not a formula: {f!r}")


def is_nnf(f: Formula) -> bool:
    match f:
        case Top() | Bot() | Atom():
            return True
        case Neg(g):
            return isinstance(g, Atom)
        case And(a, b) | Or(a, b):
            return is_nnf(a) and is_nnf(b)
        case Eventually(g) | Globally(g):
            return is_nnf(g)
    return False


# ---------------------------------------------------------------- buchi

Literal = tuple[AtomicProp, bool]


@dataclass
class BuchiAutomaton:
    """State-labelled-by-index Büchi automaton with literal-set guards.

    ``transitions[q]`` lists ``(guard, target)``; a guard is a frozenset of
    ``(prop, polarity)`` literals, empty meaning true.
    """

    states: list
    initial: list[int]
    transitions: list[list[tuple[frozenset[Literal], int]]]
    accepting: frozenset[int]

    def __len__(self) -> int:
        return len(self.states)


def guard_holds(guard: frozenset[Literal], labels) -> bool:
    return all((p in labels) == positive for p, positive in guard)


def _expand(todo: list, lits: frozenset, nxt: frozenset, sat: frozenset):
    """Yield every ``(literals, next-obligations, eventualities-met)`` cover."""
    if not todo:
        yield lits, nxt, sat
        return
    f, rest = todo[0], todo[1:]
    match f:
        case Top():
            yield from _expand(rest, lits, nxt, sat)
        case Bot():
            return
        case Atom(p) | Neg(Atom(p)):
            lit = (p, isinstance(f, Atom))
            if (p, not lit[1]) in lits:
                return
            yield from _expand(rest, lits | {lit}, nxt, sat)
        case And(a, b):
            yield from _expand([a, b] + rest, lits, nxt, sat)
        case Or(a, b):
            yield from _expand([a] + rest, lits, nxt, sat)
            yield from _expand([b] + rest, lits, nxt, sat)
        case Globally(g):
            yield from _expand([g] + rest, lits, nxt | {f}, sat)
        case Eventually(g):
            yield from _expand([g] + rest, lits, nxt, sat | {f})
            yield from _expand(rest, lits, nxt | {f}, sat)
        case _:
            raise TypeError(f"formula not in NNF: {f!r}")


def _cover_key(cover):
    lits, nxt, met = cover
    return (sorted((p.sort_key(), pos) for p, pos in lits),
            sorted(map(format_formula, nxt)), sorted(map(format_formula, met)))


def _eventualities(f: Formula) -> list[Formula]:
    out: list[Formula] = []

    def walk(g):
        match g:
            case Eventually(h):
                if g not in out:
                    out.append(g)
                walk(h)
            case Globally(h) | Neg(h):
                walk(h)
            case And(a, b) | Or(a, b):
                walk(a)
                walk(b)

    walk(f)
    return out


def to_buchi(f: Formula) -> BuchiAutomaton:
    """Tableau translation of an NNF formula.

    A tableau node is the set of obligations still owed from the current
    position on. Each eventuality contributes one acceptance condition,
    met on a transition that either fulfils it or no longer owes it; the
    generalized condition is degeneralized with a round-robin counter.
    """
    if not is_nnf(f):
        raise ValueError("to_buchi expects a formula in negation normal form")
    evs = _eventualities(f)
    k = len(evs)
    covers_cache: dict[frozenset, list] = {}

    def covers(node):
        if node not in covers_cache:
            found = {(lits, nxt, frozenset(e for e in evs if e in sat or e not in nxt))
                     for lits, nxt, sat in _expand(sorted(node, key=format_formula),
                                                   frozenset(), frozenset(), frozenset())}
            covers_cache[node] = sorted(found, key=_cover_key)
        return covers_cache[node]

    start = (frozenset([f]), 0)
    index = {start: 0}
    states = [start]
    transitions: list[list] = []
    i = 0
    while i < len(states):
        node, count = states[i]
        edges = []
        for lits, nxt, met in covers(node):
            j = count if count < k else 0
            while j < k and evs[j] in met:
                j += 1
            target = (nxt, j)
            if target not in index:
                index[target] = len(states)
                states.append(target)
            edge = (lits, index[target])
            if edge not in edges:
                edges.append(edge)
        transitions.append(edges)
        i += 1
    accepting = frozenset(q for q, (_, count) in enumerate(states) if count == k)
    return BuchiAutomaton(states, [0], transitions, accepting)


def accepts_lasso(ba: BuchiAutomaton, stem: list, cycle: list) -> bool:
    """Does ``ba`` accept the word ``stem · cycle^ω`` (lists of label sets)?

    Explores (position, state) pairs over the unrolled word and looks for a
    reachable cycle through an accepting state.
    """
    n, m = len(stem), len(cycle)
    word = list(stem) + list(cycle)

    def nxt_pos(i):
        return i + 1 if i + 1 < n + m else n

    graph: dict = {}
    frontier = []
    for q0 in ba.initial:
        for guard, q in ba.transitions[q0]:
            if guard_holds(guard, word[0]):
                frontier.append((0, q))
    seen = set(frontier)
    while frontier:
        node = frontier.pop()
        i, q = node
        j = nxt_pos(i)
        succ = [(j, t) for guard, t in ba.transitions[q] if guard_holds(guard, word[j])]
        graph[node] = succ
        for s in succ:
            if s not in seen:
                seen.add(s)
                frontier.append(s)
    for node in graph:
        if node[1] in ba.accepting and _reaches(graph, node, node):
            return True
    return False


def _reaches(graph, src, dst) -> bool:
    stack, seen = list(graph[src]), set()
    while stack:
        x = stack.pop()
        if x == dst:
            return True
        if x not in seen:
            seen.add(x)
            stack.extend(graph[x])
    return False


# ---------------------------------------------------------------- lasso semantics


@dataclass(frozen=True)
class Lasso:
    stem: tuple[int, ...]
    cycle: tuple[int, ...]

    def word(self, k: Kripke):
        return [k.labels[s] for s in self.stem], [k.labels[s] for s in self.cycle]

    def is_path_of(self, k: Kripke) -> bool:
        path = list(self.stem) + list(self.cycle) + [self.cycle[0]]
        if path[0] != k.initial:
            return False
        return all(b in k.transitions[a] for a, b in zip(path, path[1:]))


def eval_on_lasso(f: Formula, stem: list, cycle: list) -> bool:
    """Truth of ``f`` at position 0 of the word ``stem · cycle^ω``."""
    if not cycle:
        raise ValueError("cycle must be nonempty")
    word = list(stem) + list(cycle)
    n, total = len(stem), len(stem) + len(cycle)

    def vec(g) -> list[bool]:
        match g:
            case Top():
                return [True] * total
            case Bot():
                return [False] * total
            case Atom(p):
                return [p in w for w in word]
            case Neg(h):
                return [not x for x in vec(h)]
            case And(a, b):
                return [x and y for x, y in zip(vec(a), vec(b))]
            case Or(a, b):
                return [x or y for x, y in zip(vec(a), vec(b))]
            case Imp(a, b):
                return [(not x) or y for x, y in zip(vec(a), vec(b))]
            case Eventually(h) | Globally(h):
                inner = vec(h)
                combine = any if isinstance(g, Eventually) else all
                out = [combine(inner[n:])] * total
                # every cycle position sees the whole cycle in its future
                for i in range(n - 1, -1, -1):
                    out[i] = combine((inner[i], out[i + 1]))
                return out
        raise TypeError(f"not a formula: {g!r}")

    return vec(f)[0]


# ---------------------------------------------------------------- model checking


@dataclass(frozen=True)
class Verdict:
    holds: bool
    counterexample: Lasso | None = None


def _nested_dfs(inits: Iterable, succ, accepting):
    """Return ``(stack_path, cycle_tail, hit)`` for an accepting cycle, or None.

    ``stack_path`` is the outer DFS stack ending at the accepting seed;
    ``cycle_tail`` the inner search path from the seed, and ``hit`` the
    outer-stack node it closed on.
    """
    visited1: set = set()
    visited2: set = set()
    for init in inits:
        if init in visited1:
            continue
        visited1.add(init)
        stack = [(init, iter(succ(init)))]
        on_stack = {init}
        while stack:
            node, it = stack[-1]
            pushed = False
            for nxt in it:
                if nxt not in visited1:
                    visited1.add(nxt)
                    on_stack.add(nxt)
                    stack.append((nxt, iter(succ(nxt))))
                    pushed = True
                    break
            if pushed:
                continue
            if accepting(node):
                found = _inner_dfs(node, succ, on_stack, visited2)
                if found is not None:
                    return [n for n, _ in stack], found[0], found[1]
            stack.pop()
            on_stack.discard(node)
    return None


def _inner_dfs(seed, succ, on_stack, visited2):
    stack = [(seed, iter(succ(seed)))]
    visited2.add(seed)
    while stack:
        node, it = stack[-1]
        pushed = False
        for nxt in it:
            if nxt in on_stack:
                return [n for n, _ in stack], nxt
            if nxt not in visited2:
                visited2.add(nxt)
                stack.append((nxt, iter(succ(nxt))))
                pushed = True
                break
        if not pushed:
            stack.pop()
    return None


def _shorten(stem: list, cycle: list, inits, succ) -> Lasso:
    """Re-enter ``cycle`` at the node a breadth-first search reaches first."""
    on_cycle = {node: i for i, node in enumerate(cycle)}
    parent = {n: None for n in inits}
    queue = deque(parent)
    hit = next((n for n in queue if n in on_cycle), None)
    while hit is None and queue:
        node = queue.popleft()
        for nxt in succ(node):
            if nxt not in parent:
                parent[nxt] = node
                if nxt in on_cycle:
                    hit = nxt
                    break
                queue.append(nxt)
    if hit is None:  # unreachable in practice: the DFS stem is a witness
        return Lasso(tuple(s for s, _ in stem), tuple(s for s, _ in cycle))
    path = []
    node = parent[hit]
    while node is not None:
        path.append(node)
        node = parent[node]
    path.reverse()
    i = on_cycle[hit]
    rotated = cycle[i:] + cycle[:i]
    return Lasso(tuple(s for s, _ in path), tuple(s for s, _ in rotated))


def _roll_back(lasso: Lasso) -> Lasso:
    """Move stem states into the cycle while that denotes the same path."""
    stem, cycle = list(lasso.stem), list(lasso.cycle)
    while stem and stem[-1] == cycle[-1]:
        cycle = [stem.pop()] + cycle[:-1]
    return Lasso(tuple(stem), tuple(cycle))


def model_check(k: Kripke, f: Formula) -> Verdict:
    """Does every path of ``k`` from its initial state satisfy ``f``?"""
    outside = atoms(f) - k.universe
    if outside:
        raise PropositionOutsideUniverse(
            "propositions outside the universe: " + ", ".join(sorted(map(str, outside))))
    ba = to_buchi(to_nnf(Neg(f)))

    def succ(node):
        s, q = node
        for t in k.transitions[s]:
            lab = k.labels[t]
            for guard, r in ba.transitions[q]:
                if guard_holds(guard, lab):
                    yield (t, r)

    s0 = k.initial
    inits = [(s0, r) for q0 in ba.initial for guard, r in ba.transitions[q0]
             if guard_holds(guard, k.labels[s0])]
    found = _nested_dfs(inits, succ, lambda node: node[1] in ba.accepting)
    if found is None:
        return Verdict(True)
    outer, inner, hit = found
    j = outer.index(hit)
    lasso = _roll_back(_shorten(outer[:j], outer[j:] + inner[1:], inits, succ))
    if not lasso.is_path_of(k):
        raise ModelCheckError(f"counterexample {lasso} is not a path of the graph")
    if eval_on_lasso(f, *lasso.word(k)):
        raise ModelCheckError(f"counterexample {lasso} satisfies the formula")
    return Verdict(False, lasso)
