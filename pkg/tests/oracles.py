"""Independent checkers used as test oracles.

Nothing here imports the automaton construction; verdicts come from
enumerating lassos and judging each with the direct path semantics.
"""

from __future__ import annotations

import random

from pisem.core import Boo
from pisem.ltl import And, Atom, Bot, Eventually, Globally, Imp, Neg, Or, Top, eval_on_lasso
from pisem.statespace import AtomicProp, Kripke


def paths_from(k: Kripke, start: int, length: int):
    """All paths of exactly ``length`` states starting at ``start``."""
    if length == 0:
        yield ()
        return
    stack = [(start,)]
    while stack:
        p = stack.pop()
        if len(p) == length:
            yield p
            continue
        for t in k.transitions[p[-1]]:
            stack.append(p + (t,))


def simple_cycles_from(k: Kripke, start: int, limit: int):
    """Simple cycles ``start -> ... -> start`` with at most ``limit`` states."""
    stack = [(start,)]
    while stack:
        p = stack.pop()
        for t in k.transitions[p[-1]]:
            if t == start:
                yield p
            elif t not in p and len(p) < limit:
                stack.append(p + (t,))


def lassos(k: Kripke):
    """Every (stem, cycle) with stem length <= |S| and a simple cycle <= |S|."""
    n = len(k)
    for stem_len in range(n + 1):
        for stem in paths_from(k, k.initial, stem_len):
            entries = [k.initial] if not stem else k.transitions[stem[-1]]
            for c0 in set(entries):
                for cycle in simple_cycles_from(k, c0, n):
                    yield stem, cycle


def brute_force_holds(k: Kripke, f) -> bool:
    for stem, cycle in lassos(k):
        if not eval_on_lasso(f, [k.labels[s] for s in stem], [k.labels[s] for s in cycle]):
            return False
    return True


ATOMS = [AtomicProp("p", Boo(True)), AtomicProp("q", Boo(True))]


def random_kripke(rng: random.Random, max_states=6, atoms=ATOMS) -> Kripke:
    n = rng.randint(1, max_states)
    transitions = []
    for _ in range(n):
        succ = rng.sample(range(n), rng.randint(1, min(n, 3)))
        transitions.append(sorted(succ))
    labels = [frozenset(a for a in atoms if rng.random() < 0.5) for _ in range(n)]
    return Kripke(transitions, labels, frozenset(atoms))


def random_formula(rng: random.Random, depth: int, atoms=ATOMS):
    if depth == 0 or rng.random() < 0.2:
        r = rng.random()
        if r < 0.08:
            return Top()
        if r < 0.16:
            return Bot()
        return Atom(rng.choice(atoms))
    kind = rng.choice(["neg", "and", "or", "imp", "ev", "gl", "ev", "gl"])
    if kind in ("neg", "ev", "gl"):
        sub = random_formula(rng, depth - 1, atoms)
        return {"neg": Neg, "ev": Eventually, "gl": Globally}[kind](sub)
    a = random_formula(rng, depth - 1, atoms)
    b = random_formula(rng, depth - 1, atoms)
    return {"and": And, "or": Or, "imp": Imp}[kind](a, b)
