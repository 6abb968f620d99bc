import itertools
import random

import pytest
from hypothesis import given, strategies as st

from edt0l.closures import (MarkingBijection, copy_determinize, double, finite_system, hom_image,
                            intersect_regular, inverse_hom, project_factor, split_choices, transduce,
                            union, unreduce)
from edt0l.grammar import LSystem, Table, enumerate_language, finite_language, is_deterministic
from edt0l.nfa import Nfa
from helpers import apply_hom, components, exact_language, language, random_dfa, random_system

seeds = st.integers(0, 10**6)


@given(seeds, seeds)
def test_union(s1, s2):
    a, b = random_system(random.Random(s1)), random_system(random.Random(s2))
    u = union(a, b)
    assert language(u, 7) == language(a, 7) | language(b, 7)
    assert is_deterministic(u)


def test_union_needs_same_terminals():
    a = finite_system([("a",)], "a")
    b = finite_system([("b",)], "b")
    with pytest.raises(ValueError):
        union(a, b)


@given(seeds)
def test_hom_image(seed):
    a = random_system(random.Random(seed))
    psi = {"a": ("b", "b"), "b": ("a",)}
    h = hom_image(a, psi)
    assert language(h, 7) == {apply_hom(w, psi) for w in language(a, 7) if len(apply_hom(w, psi)) <= 7}
    assert is_deterministic(h)


@given(seeds)
def test_erasing_hom_image(seed):
    a = random_system(random.Random(seed), acyclic=True)
    psi = {"a": ("a",), "b": ()}
    assert finite_language(hom_image(a, psi)) == {apply_hom(w, psi) for w in exact_language(a)}


@given(seeds)
def test_intersect_regular(seed):
    rng = random.Random(seed)
    a, n = random_system(rng), random_dfa(rng, ["a", "b"])
    x = intersect_regular(a, n)
    assert language(x, 7) == {w for w in language(a, 7) if n.accepts_word(w)}
    assert is_deterministic(x)


@given(seeds)
def test_intersect_with_nondeterministic_automaton(seed):
    rng = random.Random(seed)
    a = random_system(rng)
    n = Nfa.build([0, 1], [0], [1], [(0, 0, "a"), (0, 0, "b"), (0, 1, "b")], ["a", "b"])  # ends in b
    assert language(intersect_regular(a, n), 7) == {w for w in language(a, 7) if w and w[-1] == "b"}


@given(seeds)
def test_inverse_hom(seed):
    a = random_system(random.Random(seed))
    phi = {"x": ("a",), "y": ("b", "a")}
    src = language(a, 10)
    got = enumerate_language(inverse_hom(a, phi), 5, sentential_cap=40)
    assert got == {w for k in range(6) for w in itertools.product("xy", repeat=k) if apply_hom(w, phi) in src}


def test_inverse_hom_rejects_erasing_maps():
    a = finite_system([("a",)], "a")
    with pytest.raises(ValueError):
        inverse_hom(a, {"x": ()})


@given(seeds, st.sampled_from([(1, 1, 2), (2, 2, 2), (1, 2, 3), (2, 3, 3), (1, 2, 2)]))
def test_project_factor(seed, klr):
    k, l, r = klr
    s = random_system(random.Random(seed), terminals=("a", "b", "#"), acyclic=True, n_states=4)
    p = project_factor(s, k, l, r)
    expect = set()
    for w in exact_language(s):
        parts = components(w)
        if len(parts) == r:
            expect.add(tuple(itertools.chain(*(c + ("#",) for c in parts[k - 1:l])))[:-1])
    assert exact_language(p) == expect
    assert is_deterministic(p)


def test_project_factor_edge_cases():
    s = finite_system([("c", "d", "#", "e", "f")], "cdef#")
    assert finite_language(project_factor(s, 1, 2, 2)) == {("c", "d", "#", "e", "f")}
    assert finite_language(project_factor(s, 2, 2, 2)) == {("e", "f")}
    assert not finite_language(project_factor(s, 1, 3, 2))
    with pytest.raises(ValueError):
        project_factor(s, 2, 1, 2)


@given(seeds)
def test_double_then_copy(seed):
    a = random_system(random.Random(seed))
    f = MarkingBijection.dagger(["a", "b"])
    d = double(a, f)
    assert language(d, 8) == {w + f.word(w) for w in language(a, 4)}
    c = copy_determinize(d, f)
    assert is_deterministic(c.full) and language(c.full, 8) == language(d, 8)
    assert language(c.first, 4) == language(a, 4)


def test_double_requires_determinism():
    ctl = Nfa.build([0], [0], [0], [(0, 0, "t")])
    sys = LSystem(frozenset("aS"), frozenset("a"), ("S",), ctl, {"t": Table.from_rules([("S", ("a",)), ("S", ())])})
    with pytest.raises(ValueError):
        double(sys, MarkingBijection.dagger(["a"]))


def test_split_choices_removes_nondeterminism():
    # X -> a X a' | b X b' ; X -> empty
    ctl = Nfa.build([0, 1], [0], [1], [(0, 0, "g"), (0, 1, "e")])
    tables = {"g": Table.from_rules([("X", ("a", "X", "a'")), ("X", ("b", "X", "b'"))]), "e": Table.hom({"X": ()})}
    sys = LSystem(frozenset(["X", "a", "b", "a'", "b'"]), frozenset(["a", "b", "a'", "b'"]), ("X",), ctl, tables)
    det = split_choices(sys)
    assert is_deterministic(det)
    assert enumerate_language(det, 6) == enumerate_language(sys, 6)
    f = MarkingBijection({"a": "a'", "b": "b'"})
    c = copy_determinize(sys, f)
    assert is_deterministic(c.full) and is_deterministic(c.first)
    assert enumerate_language(c.first, 3) == {w for k in range(4) for w in itertools.product("ab", repeat=k)}


def test_copy_determinize_checks_disjointness():
    with pytest.raises(ValueError):
        MarkingBijection({"a": "b", "b": "a"})
    empty = finite_system([], ["a", "a†"])
    c = copy_determinize(empty, MarkingBijection.dagger(["a"]))
    assert is_deterministic(c.full) and not finite_language(c.full)


def test_transducer_image():
    a = finite_system([("a", "b"), ("b",)], "ab")
    # swap letters, then append c
    t = Nfa.build([0, 1], [0], [1], [(0, 0, ("a", ("b",))), (0, 0, ("b", ("a",))), (0, 1, (None, ("c",)))])
    assert finite_language(transduce(a, t, "abc")) == {("b", "a", "c"), ("a", "c")}


def test_unreduce_free_rank_one():
    gens = {"a": "a^-1", "a^-1": "a"}
    a = finite_system([()], gens)
    got = enumerate_language(unreduce(a, gens), 4)
    brute = {w for k in range(5) for w in itertools.product(gens, repeat=k) if _reduces_to_empty(w, gens)}
    assert got == brute and len(got) == 9


def _reduces_to_empty(w, gens):
    out = []
    for x in w:
        if out and gens[out[-1]] == x:
            out.pop()
        else:
            out.append(x)
    return not out
