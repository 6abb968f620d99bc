import itertools

import pytest
from hypothesis import given, strategies as st

from edt0l.nfa import BudgetExceeded, Nfa, chain

ALPHA = ("a", "b")


@st.composite
def nfas(draw, n_max=4, eps=True):
    n = draw(st.integers(1, n_max))
    labels = list(ALPHA) + ([None] if eps else [])
    edges = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1), st.sampled_from(labels)),
                          max_size=3 * n))
    starts = draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=2))
    accepts = draw(st.lists(st.integers(0, n - 1), max_size=n))
    return Nfa.build(range(n), starts, accepts, edges, ALPHA)


def all_words(n):
    for k in range(n + 1):
        yield from itertools.product(ALPHA, repeat=k)


def lang(a: Nfa, n=5) -> set:
    return {w for w in all_words(n) if a.accepts_word(w)}


@given(nfas())
def test_determinize_keeps_language(a):
    d = a.determinize()
    assert d.is_deterministic()
    assert lang(d) == lang(a)


@given(nfas())
def test_complement_flips_membership(a):
    c = a.complement()
    assert all(c.accepts_word(w) != a.accepts_word(w) for w in all_words(5))


@given(nfas(), nfas())
def test_boolean_operations(a, b):
    assert lang(a.intersect(b)) == lang(a) & lang(b)
    assert lang(a.union(b)) == lang(a) | lang(b)


@given(nfas(n_max=3), nfas(n_max=3))
def test_concat_with_joiner(a, b):
    c = a.concat(b, "#")
    expect = {u + ("#",) + v for u in lang(a, 3) for v in lang(b, 3)}
    got = {w for w in expect if c.accepts_word(w)}
    assert got == expect
    assert not any(c.accepts_word(w) for w in all_words(4))  # every word needs the joiner


@given(nfas())
def test_trim_and_epsilon_removal(a):
    assert lang(a.trim()) == lang(a)
    r = a.remove_epsilon()
    assert not r.has_epsilon
    assert lang(r) == lang(a)
    assert a.is_empty() == (not lang(a, len(a.states)))


@given(nfas())
def test_words_lists_the_language(a):
    assert set(a.words(4)) == lang(a, 4)


def test_from_words_and_chain():
    t = Nfa.from_words([("a",), ("a", "b"), ()])
    assert lang(t) == {(), ("a",), ("a", "b")}
    c = chain([t, Nfa.from_words([("b",)])], "#")
    assert c.accepts_word(("a", "b", "#", "b"))
    assert not c.accepts_word(("a", "b"))


def test_empty_and_universal():
    assert Nfa.empty(ALPHA).is_empty()
    assert lang(Nfa.universal(ALPHA), 3) == set(all_words(3))


def test_determinize_budget():
    n = 12
    # the n-th letter from the end is an a: needs 2^n subset states
    edges = [(0, 0, "a"), (0, 0, "b"), (0, 1, "a")] + [(i, i + 1, x) for i in range(1, n) for x in ALPHA]
    a = Nfa.build(range(n + 1), [0], [n], edges, ALPHA)
    with pytest.raises(BudgetExceeded):
        a.determinize(budget=100)
