import itertools
import pickle

import pytest
from hypothesis import given, strategies as st

from edt0l.groups import (BundleIntegrityError, GroupBundle, benois_reduce, build_equality_automaton,
                          build_free_bundle, dehn_reduce, equal_in_group, free_reduce, is_quasigeodesic,
                          load_bundle, parse_word, qg_acceptor, qier_closure, resolve_bundle, save_bundle,
                          shortlex_normal_form, surface_bundle)
from edt0l.nfa import Nfa

F2 = build_free_bundle(2)
letters = st.sampled_from(F2.order)


def stack_reduce(w):
    out = []
    for x in w:
        if out and F2.inverse[out[-1]] == x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


@given(st.lists(letters, max_size=16))
def test_dehn_matches_free_reduction(w):
    assert dehn_reduce(F2, w) == stack_reduce(w) == free_reduce(F2, w)


@given(st.lists(letters, max_size=8))
def test_normal_form_idempotent(w):
    v = shortlex_normal_form(F2, w)
    assert shortlex_normal_form(F2, v) == v
    assert equal_in_group(F2, v, w)


def test_surface_relator_and_normal_form(surface2):
    rel = parse_word(surface2, "a b a^-1 b^-1 c d c^-1 d^-1")
    assert dehn_reduce(surface2, rel) == ()
    assert shortlex_normal_form(surface2, parse_word(surface2, "a b a^-1 b^-1 c d c^-1")) == ("d",)
    assert dehn_reduce(surface2, parse_word(surface2, "a b")) == ("a", "b")


def test_surface_fixture_matches_builder(surface2):
    built = surface_bundle(2)
    assert set(built.dehn_pairs) == set(surface2.dehn_pairs)
    assert surface2.c_bound(3) == 3


def test_bundle_validation():
    with pytest.raises(BundleIntegrityError):
        GroupBundle(("a",), {"a": "b"}, ())
    with pytest.raises(BundleIntegrityError):
        GroupBundle(("a", "A"), {"a": "A", "A": "a"}, ((("a",), ("a",)),))


def test_bundle_files(tmp_path):
    save_bundle(F2, tmp_path / "f2.bundle")
    b = load_bundle(tmp_path / "f2.bundle")
    assert b.is_free and b.order == F2.order
    assert resolve_bundle("free2").name == "free2"
    assert pickle.loads(pickle.dumps(b)).order == b.order


def brute_qg(lam, mu, n):
    return {w for k in range(n + 1) for w in itertools.product(F2.order, repeat=k) if is_quasigeodesic(F2, w, lam, mu)}


@pytest.mark.parametrize("mu", [0, 2])
def test_qg_acceptor_matches_definition(mu):
    a = qg_acceptor(F2, 1, mu)
    assert set(a.words(5)) == brute_qg(1, mu, 5)


def test_quasigeodesic_examples():
    assert is_quasigeodesic(F2, ("a", "a^-1"), 1, 2)
    assert not is_quasigeodesic(F2, ("a", "a^-1"), 1, 0)
    assert not is_quasigeodesic(F2, ("a", "a^-1", "a", "a^-1"), 1, 2)


def _accepted_pairs(e, n):
    """Pairs (u, v) with |u|, |v| <= n accepted by a 2-tape automaton."""
    seen, out = set(), set()
    stack = [(s, (), ()) for s in e.starts]
    while stack:
        st_ = stack.pop()
        if st_ in seen:
            continue
        seen.add(st_)
        s, u, v = st_
        if s in e.accepts:
            out.add((u, v))
        for (x, y), s2 in e.out_edges(s):
            u2 = u + ((x,) if x else ())
            v2 = v + ((y,) if y else ())
            if len(u2) <= n and len(v2) <= n:
                stack.append((s2, u2, v2))
    return out


def test_equality_automaton_small():
    e = build_equality_automaton(F2, 1, 0)
    pairs = _accepted_pairs(e, 3)
    assert all(u == v and stack_reduce(u) == u for u, v in pairs)
    assert len(pairs) == len(brute_qg(1, 0, 3))


def test_qier_closure_of_a_letter():
    a = Nfa.from_words([("a",)])
    got = set(qier_closure(F2, a, 1, 2, source=(1, 0)).words(5))
    want = {w for w in brute_qg(1, 2, 5) if stack_reduce(w) == ("a",)}
    assert got == want


def test_benois_reduce():
    # (a a^-1)* b : every word represents b
    a = Nfa.build([0, 1, 2], [0], [2], [(0, 1, "a"), (1, 0, "a^-1"), (0, 2, "b")], F2.gens)
    assert set(benois_reduce(F2, a).words(4)) == {("b",)}
    # a* a^-1* : all powers of a
    a = Nfa.build([0, 1], [0], [1], [(0, 0, "a"), (0, 1, None), (1, 1, "a^-1")], F2.gens)
    assert set(benois_reduce(F2, a).words(3)) == {(), ("a",), ("a", "a"), ("a", "a", "a"), ("a^-1",),
                                                   ("a^-1", "a^-1"), ("a^-1", "a^-1", "a^-1")}
