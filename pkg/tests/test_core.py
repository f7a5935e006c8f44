from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from pisem.core import (
    Add, Assign, Boo, CNT, EXC, FrozenMap, IllFormedTerm, KAdd,
    MissingComponent, NoDec, Nop, NumLit, Opaque, OUT, Rat, Ref, STANDARD_TAGS,
    Seq, Store, check_wellformed, get_component, initial_configuration,
    set_component,
)


def test_initial_empty_program():
    c = initial_configuration(NoDec(), Nop())
    assert c.cnt == (NoDec(), Nop())
    assert c.val == () and len(c.env) == 0 and c.out == () and c.exc is False
    assert c.sto == Store()
    assert c.tags == frozenset(STANDARD_TAGS)


def test_initial_does_not_step():
    c = initial_configuration(Ref("x", NumLit(0)), Assign("x", NumLit(1)))
    assert c.cnt == (Ref("x", NumLit(0)), Assign("x", NumLit(1)))
    assert c.sto.next == 0 and not c.sto.cells


def test_initial_seq():
    c = initial_configuration(NoDec(), Seq(Nop(), Nop()))
    assert c.cnt == (NoDec(), Seq(Nop(), Nop()))


def test_get_set_roundtrip():
    c = initial_configuration(NoDec(), Nop())
    assert get_component(set_component(c, OUT, (Rat(3),)), OUT) == (Rat(3),)
    assert get_component(c, EXC) is False


def test_missing_component():
    c = initial_configuration(NoDec(), Nop())
    with pytest.raises(MissingComponent):
        c.get("ghost")


def test_set_is_persistent():
    c = initial_configuration(NoDec(), Nop())
    d = c.set("ghost", Opaque("ghost", [1, 2]))
    assert "ghost" not in c.tags and "ghost" in d.tags
    assert c != d


def test_configuration_hash_eq():
    a = initial_configuration(NoDec(), Nop())
    b = initial_configuration(NoDec(), Nop())
    assert a == b and hash(a) == hash(b)
    assert a.set(CNT, ()) != b


def test_keyword_rejected_everywhere():
    with pytest.raises(IllFormedTerm):
        check_wellformed(KAdd())
    with pytest.raises(IllFormedTerm):
        initial_configuration(NoDec(), Assign("x", Add(NumLit(1), KAdd())))


def test_category_checked():
    with pytest.raises(IllFormedTerm):
        initial_configuration(Nop(), Nop())
    with pytest.raises(IllFormedTerm):
        check_wellformed(Assign("1x", NumLit(0)))


def test_value_display():
    assert str(Rat(3)) == "3"
    assert str(Rat(Fraction(2, 4))) == "1/2"
    assert str(Rat(Fraction(-6, 4))) == "-3/2"
    assert str(Boo(True)) == "tt" and str(Boo(False)) == "ff"


def test_store_alloc_write():
    loc, s = Store().alloc(Rat(1))
    assert loc == 0 and s.next == 1 and s[0] == Rat(1)
    s2 = s.write(0, Rat(5))
    assert s2[0] == Rat(5) and s[0] == Rat(1) and s2.next == 1


def test_frozenmap():
    m = FrozenMap({"a": 1}).set("b", 2)
    assert dict(m) == {"a": 1, "b": 2}
    assert hash(m) == hash(FrozenMap({"b": 2, "a": 1}))


ints = st.integers(-10**6, 10**6)
nonzero = ints.filter(bool)


@given(ints, nonzero, ints, nonzero)
def test_rational_normalized(a, b, c, d):
    x, y = Rat(Fraction(a, b)), Rat(Fraction(c, d))
    for r in (x.value + y.value, x.value - y.value, x.value * y.value):
        v = Rat(r).value
        assert v.denominator > 0
        assert Fraction(v.numerator, v.denominator) == v
    assert Rat(Fraction(a, b)) == Rat(Fraction(a * 3, b * 3))
