import pytest
from hypothesis import given, strategies as st

from pisem.core import (
    Add, Assign, Blk, BoolLit, Call, Choice, Cond, DSeq, Div, Eq, Exit, Id, KAdd,
    KAssign, KCall, KCond, Loop, Mul, NoDec, Nop, Not, NumLit, Or, Prc, Print, Ref,
    Bind, Seq, Sub, initial_configuration,
)
from pisem.lib import normalize
from pisem.pretty import (
    KeywordInTerm, TermSyntaxError, format_configuration, format_control, pretty_print,
    read_term,
)


def test_examples():
    assert pretty_print(Add(Id("a"), NumLit(3))) == "add(idn(a), rat(3))"
    assert pretty_print(Nop()) == "nop"
    loop = Loop(Not(Eq(Id("x"), NumLit(3))), Assign("x", Add(Id("x"), NumLit(1))))
    assert pretty_print(loop) == \
        "loop(not(eq(idn(x), rat(3))), assign(x, add(idn(x), rat(1))))"


def test_keyword_rejected():
    with pytest.raises(KeywordInTerm):
        pretty_print(Seq(Nop(), KAdd()))


def test_reader_errors():
    for bad in ["add(rat(1))", "foo(1)", "rat(1) nop", "idn(1x)", "boo(yes)"]:
        with pytest.raises(TermSyntaxError):
            read_term(bad)


def test_corpus_roundtrip(corpus):
    for m in corpus.values():
        for t in (m.dec, m.cmd):
            assert read_term(pretty_print(t)) == t


names = st.sampled_from(["x", "y", "f", "n1"])
exps = st.recursive(
    st.one_of(st.builds(NumLit, st.fractions(max_denominator=9)), st.builds(BoolLit, st.booleans()),
              st.builds(Id, names)),
    lambda e: st.one_of(st.builds(Not, e), *(st.builds(c, e, e) for c in (Add, Sub, Mul, Div, Eq, Or))),
    max_leaves=6)
cmds = st.recursive(
    st.one_of(st.just(Nop()), st.just(Exit()), st.builds(Assign, names, exps),
              st.builds(Print, exps),
              st.builds(Call, names, st.lists(exps, max_size=2).map(tuple))),
    lambda c: st.one_of(st.builds(Seq, c, c), st.builds(Choice, c, c), st.builds(Cond, exps, c, c),
                        st.builds(Loop, exps, c)),
    max_leaves=6)
decs = st.recursive(
    st.one_of(st.just(NoDec()), st.builds(Ref, names, exps), st.builds(Bind, names, exps),
              st.builds(Prc, names, st.lists(names, max_size=2, unique=True).map(tuple), cmds)),
    lambda d: st.builds(DSeq, d, d), max_leaves=4)


@given(st.one_of(exps, cmds, decs, st.builds(Blk, decs, cmds)))
def test_roundtrip_property(t):
    assert read_term(pretty_print(t)) == t


def test_format_control():
    assert format_control(KAssign("x")) == "#ASSIGN(x)"
    assert format_control(KCond(Nop(), Exit())) == "#COND(nop, exit)"
    assert format_control(KCall("f", 2)) == "#CALL(f, 2)"
    assert format_control(KAdd()) == "#ADD"


def test_format_configuration():
    c = normalize(initial_configuration(Ref("x", NumLit(1)), Print(Id("x"))))
    assert format_configuration(c) == "\n".join([
        "  cnt: []", "  val: []", "  env: {x: loc0}", "  sto: {loc0: 1}",
        "  out: [1]", "  exc: false"])
