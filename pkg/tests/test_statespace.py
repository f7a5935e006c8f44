import random

import pytest
from hypothesis import given, settings, strategies as st

from pisem.core import (
    Add, Assign, BLoc, BVal, Boo, Configuration, FrozenMap, Id, Loc, Loop, BoolLit,
    NoDec, Nop, NumLit, Rat, Ref, Choice, Store, Val, initial_configuration,
)
from pisem.lib import is_final, successors
from pisem.statespace import (
    AtomicProp, StateSpaceExceeded, canonicalize_locations, explore, format_props,
    label, relational_points,
)


def cfg(env, cells, val=()):
    return Configuration({"cnt": (), "val": tuple(val), "env": FrozenMap(env),
                          "sto": Store(FrozenMap(cells), max(cells, default=-1) + 1),
                          "out": (), "exc": False})


def test_canonical_single_location():
    c = canonicalize_locations(cfg({"x": BLoc(7)}, {7: Rat(1)}))
    assert c.env["x"] == BLoc(0) and dict(c.sto.cells) == {0: Rat(1)} and c.sto.next == 1


def test_canonical_idempotent(corpus):
    for m in corpus.values():
        k = explore(initial_configuration(m.dec, m.cmd), 10_000, m.props)
        for s in k.states:
            assert canonicalize_locations(s) == s


def test_canonical_drops_unreachable():
    c = canonicalize_locations(cfg({"x": BLoc(3)}, {1: Rat(5), 3: Rat(2)}))
    assert dict(c.sto.cells) == {0: Rat(2)}


def test_canonical_follows_stored_locations():
    c = canonicalize_locations(cfg({"x": BLoc(5)}, {5: Loc(9), 9: Rat(1)}, [Val(Loc(9))]))
    assert c.env["x"] == BLoc(0) and c.sto[0] == Loc(1) and c.val == (Val(Loc(1)),)


@settings(max_examples=100)
@given(st.integers(1, 6), st.randoms(use_true_random=False))
def test_canonical_permutation_invariant(n, rnd):
    names = [f"v{i}" for i in range(n)]
    values = [Rat(rnd.randint(0, 3)) for _ in range(n)]
    def build(perm):
        env = {x: BLoc(perm[i]) for i, x in enumerate(names)}
        cells = {perm[i]: values[i] for i in range(n)}
        return cfg(env, cells)
    ids = list(range(0, 3 * n, 3))
    other = ids[:]
    rnd.shuffle(other)
    assert canonicalize_locations(build(ids)) == canonicalize_locations(build(other))


def test_explore_nop():
    k = explore(initial_configuration(NoDec(), Nop()))
    assert len(k) == 1 and k.transitions == [[0]]


def test_explore_choice():
    x = AtomicProp("x", Rat(1)), AtomicProp("x", Rat(2))
    k = explore(initial_configuration(
        Ref("x", NumLit(0)), Choice(Assign("x", NumLit(1)), Assign("x", NumLit(2)))), props=x)
    assert len(k) == 3
    assert k.transitions == [[1, 2], [1], [2]]
    assert k.labels == [frozenset(), frozenset({x[0]}), frozenset({x[1]})]


def test_explore_divergent():
    loop = Loop(BoolLit(True), Assign("x", Add(Id("x"), NumLit(1))))
    with pytest.raises(StateSpaceExceeded):
        explore(initial_configuration(Ref("x", NumLit(0)), loop), max_states=100)


def test_totality_and_relational_points(corpus):
    for m in corpus.values():
        k = explore(initial_configuration(m.dec, m.cmd), 10_000, m.props)
        assert all(k.transitions[i] for i in range(len(k)))
        # collapsed exploration only stores relational points and finals
        assert relational_points(k) == set(k.states)
        for i, s in enumerate(k.states):
            if is_final(s):
                assert k.transitions[i] == [i]


def test_full_granularity_contains_collapsed_finals(corpus):
    for m in corpus.values():
        c0 = initial_configuration(m.dec, m.cmd)
        coarse = explore(c0, 10_000)
        fine = explore(c0, 100_000, granularity="full")
        assert len(fine) >= len(coarse)
        finals = lambda k: {s for s in k.states if is_final(s)}
        assert finals(coarse) == finals(fine)


def test_label():
    c = cfg({"x": BLoc(0)}, {0: Rat(2)})
    props = {AtomicProp("x", Rat(2)), AtomicProp("x", Rat(3))}
    assert label(c, props) == {AtomicProp("x", Rat(2))}


def test_label_unbound_is_empty():
    c = initial_configuration(Ref("x", NumLit(0)), Nop())
    assert label(c, {AtomicProp("x", Rat(0))}) == frozenset()


def test_label_const_binding():
    c = cfg({"k": BVal(Boo(True))}, {})
    assert label(c, {AtomicProp("k", Boo(True))}) == {AtomicProp("k", Boo(True))}


def test_rat_and_boo_props_differ():
    assert AtomicProp("x", Rat(1)) != AtomicProp("x", Boo(True))


def test_mutex_initial_label(mutex):
    k = explore(initial_configuration(mutex.dec, mutex.cmd), 10_000, mutex.props)
    held = {str(p) for p in k.labels[0]}
    assert {"p1 == 0", "p2 == 0", "turn == 1"} <= held
    assert "p1 == 1" not in held


def test_format_props():
    ps = [AtomicProp("y", Rat(1)), AtomicProp("x", Boo(False)), AtomicProp("x", Rat(2))]
    assert format_props(ps) == "{x == 2, x == ff, y == 1}"


def test_dump_format():
    k = explore(initial_configuration(NoDec(), Nop()))
    assert k.dump() == "S0: {}\nS0 -> S0\n"


def test_successor_edges_exist(corpus):
    rng = random.Random(0)
    for m in corpus.values():
        k = explore(initial_configuration(m.dec, m.cmd), 10_000)
        for i in rng.sample(range(len(k)), min(5, len(k))):
            succ = {canonicalize_locations(s) for s in successors(k.states[i])}
            assert {k.states[j] for j in k.transitions[i]} == succ
