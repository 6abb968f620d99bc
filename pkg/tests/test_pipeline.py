import pytest

from edt0l.equations import parse_system, preprocess, split_tuple
from edt0l.grammar import enumerate_language, is_deterministic
from edt0l.groups import build_free_bundle, dehn_reduce
from edt0l.pipeline import PipelineConfig, c_triples, lift_system, solve_covering, solve_full

F2 = build_free_bundle(2)


def test_c_triples():
    assert c_triples(F2, 0) == [((), (), ())]
    trip = c_triples(F2, 1)
    words = [()] + [(x,) for x in F2.order]
    assert len(trip) == sum(1 for x in words for y in words for z in words if not dehn_reduce(F2, x + y + z))
    assert len(trip) == 13  # (1,1,1) plus x, x^-1 placed in 3 position pairs


def test_surface_c_check(surface2):
    trip = c_triples(surface2, 1)
    assert (("a",), ("a^-1",), ()) in trip
    assert (("a",), ("b",), ()) not in trip


def test_lift_stream():
    sys, _ = parse_system("vars: X\neq: X a = b", F2)
    tri = preprocess(sys)
    stream = list(lift_system(F2, tri, PipelineConfig(c_bound=0)))
    assert len(stream) == 1 and stream[0][0] == (((), (), ()),)


def test_covering_examples():
    sys, _ = parse_system("vars: X\neq: X a = b", F2)
    assert enumerate_language(solve_covering(F2, sys, PipelineConfig(c_bound=0)).grammar, 5) == {("b", "a^-1")}
    sys, _ = parse_system("vars: X\nneq: X != 1", F2)
    rep = solve_covering(F2, sys, PipelineConfig(c_bound=0, solver_bound=1))
    assert enumerate_language(rep.grammar, 3) == {(x,) for x in F2.order}


def test_parallel_sweep_is_identical():
    from edt0l.grammar import serialize
    sys, _ = parse_system("vars: X\neq: X a = b", F2)
    one = solve_covering(F2, sys, PipelineConfig(c_bound=1, solver_bound=2))
    two = solve_covering(F2, sys, PipelineConfig(c_bound=1, solver_bound=2, jobs=2))
    assert serialize(one.grammar) == serialize(two.grammar)


def test_full_set_and_flags():
    sys, _ = parse_system("vars: X\neq: X a = b", F2)
    rep = solve_full(F2, sys, PipelineConfig(solver_bound=3))
    assert is_deterministic(rep.grammar) and rep.classification == "finite"
    assert {split_tuple(w) for w in enumerate_language(rep.grammar, 8)} == {(("b", "a^-1"),)}
    sys, _ = parse_system("vars: X\neq: X = a\neq: X = b", F2)
    assert solve_full(F2, sys, PipelineConfig(solver_bound=2)).classification == "empty"


def test_constraint_filter():
    from edt0l.nfa import Nfa
    sys, _ = parse_system("vars: X\neq: X a X^-1 a^-1 = 1", F2)
    sys.constraints["X"] = Nfa.build([0, 1], [0], [1], [(0, 1, "a"), (1, 1, "a")], F2.gens)  # a+
    rep = solve_full(F2, sys, PipelineConfig(solver_bound=3))
    assert {split_tuple(w) for w in enumerate_language(rep.grammar, 8)} == {(("a",) * k,) for k in (1, 2, 3)}


def test_bad_lambda():
    from edt0l.pipeline import Target
    with pytest.raises(ValueError):
        Target("acceptor", acceptor=F2.shortlex_acceptor, lam=float("inf"))
