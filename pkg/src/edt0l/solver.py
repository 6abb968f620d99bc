"""Free-group solving of triangular systems, emitting deterministic grammars.

Each triangular equation t1 t2 t3 = 1 comes with a tuple (c1, c2, c3) and is
lifted to the free group as

    t1 = y1 c1 y2^-1,   t2 = y2 c2 y3^-1,   t3 = y3 c3 y1^-1,

which is solvable exactly when t1 t2 t3 is conjugate to c1 c2 c3 in F(S).
The y's are witnesses: they are checked but not emitted.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping

from .closures import empty_system
from .equations import TriangularSystem, derive_fresh, join_tuple, normal_form_words, substitute
from .grammar import LSystem, Table
from .groups import GroupBundle, free_reduce, reduced_word_dfa
from .nfa import Nfa

SEP = "#"


@dataclass
class FreeSolverRequest:
    bundle: GroupBundle
    system: TriangularSystem
    c: tuple | None = None  # per equation (c1, c2, c3); None means all empty
    constraints: Mapping[str, Nfa] = field(default_factory=dict)
    completeness_bound: int | None = None
    emit: tuple | None = None  # variables written out, in order

    def __post_init__(self):
        if not self.bundle.is_free:
            raise ValueError(f"solve_free needs a free bundle, got {self.bundle.name}")
        if self.c is None:
            self.c = tuple(((), (), ()) for _ in self.system.equations)
        if len(self.c) != len(self.system.equations):
            raise ValueError("one c-triple per equation is required")
        if self.emit is None:
            self.emit = self.system.variables


@dataclass
class SolverReport:
    grammar: LSystem
    completeness: str
    classification: str
    solutions: tuple = ()
    notes: tuple = ()


def free_bundle_on(b: GroupBundle) -> GroupBundle:
    """The free group on the generators of ``b``, with the same order."""
    if b.is_free:
        return b
    pairs = tuple(((x, b.inverse[x]), ()) for x in b.order)
    return GroupBundle(b.gens, dict(b.inverse), pairs, order=b.order,
                       shortlex_acceptor=reduced_word_dfa(b.order, b.inverse), name=f"free-on-{b.name}")


def _cyclic_split(b: GroupBundle, w: tuple) -> tuple[tuple, tuple]:
    """w = a w' a^-1 with w' cyclically reduced; returns (a, w')."""
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == b.inverse[w[j - 1]]:
        i += 1
        j -= 1
    return w[:i], w[i:j]


def conjugator(b: GroupBundle, p: tuple, k: tuple) -> tuple | None:
    """Some y with y k y^-1 = p in the free group (inputs reduced), or None."""
    a, p1 = _cyclic_split(b, p)
    c, k1 = _cyclic_split(b, k)
    if len(p1) != len(k1):
        return None
    if not p1:
        return free_reduce(b, a + b.inv(c))
    for i in range(len(k1)):
        if k1[i:] + k1[:i] == p1:
            s = k1[:i]  # k1 = s t, p1 = t s = s^-1 k1 s
            return free_reduce(b, a + b.inv(s) + b.inv(c))
    return None


def tripod_witness(b: GroupBundle, t: tuple, c: tuple) -> tuple | None:
    t1, t2, t3 = (free_reduce(b, x) for x in t)
    c1, c2, c3 = c
    y1 = conjugator(b, free_reduce(b, t1 + t2 + t3), free_reduce(b, c1 + c2 + c3))
    if y1 is None:
        return None
    y2 = free_reduce(b, b.inv(t1) + y1 + c1)
    y3 = free_reduce(b, b.inv(t2) + y2 + c2)
    ok = (free_reduce(b, y1 + c1 + b.inv(y2)) == t1 and free_reduce(b, y2 + c2 + b.inv(y3)) == t2
          and free_reduce(b, y3 + c3 + b.inv(y1)) == t3)
    return (y1, y2, y3) if ok else None


def trie_system(words, terminals) -> LSystem:
    """Deterministic grammar for a finite language; the control is a trie."""
    words = sorted(set(map(tuple, words)))
    terminals = frozenset(terminals)
    if not words:
        return empty_system(terminals)
    s = "S"
    while s in terminals:
        s += "'"
    trie = Nfa.from_words(words)
    letters = sorted({x for w in words for x in w})
    tables = {f"push:{x}": Table.hom({s: (x, s)}) for x in letters}
    tables["end"] = Table.hom({s: ()})
    states = [f"t{q}" for q in trie.states] + ["end"]
    edges = [(f"t{p}", f"t{q}", f"push:{x}") for p, q, x in trie.edges]
    edges += [(f"t{p}", "end", "end") for p in trie.accepts]
    ctl = Nfa.build(states, [f"t{q}" for q in trie.starts], ["end"], edges)
    return LSystem(terminals | {s} | set(letters), terminals | set(letters), (s,), ctl, tables)


def _solutions(req: FreeSolverRequest, bound: int) -> list:
    b, tri = req.bundle, req.system
    words = normal_form_words(b, bound)
    domains = []
    for v in tri.originals:
        aut = req.constraints.get(v)
        dom = [w for w in words if aut is None or aut.accepts_word(w)]
        if v in tri.nontrivial:
            dom = [w for w in dom if w]
        domains.append(dom)
    fresh_checks = [v for v in tri.variables[len(tri.originals):]]
    reduce = lambda w: free_reduce(b, w)
    out = []
    for combo in itertools.product(*domains):
        values = derive_fresh(tri, dict(zip(tri.originals, combo)), reduce)
        if any(not values[v] for v in fresh_checks if v in tri.nontrivial):
            continue
        if any(v in req.constraints and not req.constraints[v].accepts_word(values[v]) for v in fresh_checks):
            continue
        ok = True
        for eq, c in zip(tri.equations, req.c):
            t = tuple(substitute((term,), values, b.inverse) for term in eq)
            if tripod_witness(b, t, c) is None:
                ok = False
                break
        if ok:
            out.append(tuple(values[v] for v in req.emit))
    return out


def solve_free(req: FreeSolverRequest, backend: str = "brute", probe: int = 2,
               probe_budget: int = 200_000) -> SolverReport:
    if backend == "structural":
        raise NotImplementedError("the structural backend is not provided; use the brute backend")
    if backend != "brute":
        raise ValueError(f"unknown backend {backend!r}")
    if req.completeness_bound is None:
        raise ValueError("the brute backend needs a completeness bound")
    bound = req.completeness_bound
    sols = sorted(set(_solutions(req, bound)))
    terminals = set(req.bundle.gens) | {SEP}
    grammar = trie_system((join_tuple(s, SEP) for s in sols), terminals)
    n_words = len(normal_form_words(req.bundle, bound + probe))
    grid = 1
    for _ in req.system.originals:
        grid *= n_words
    if probe and grid <= probe_budget:
        wider = set(_solutions(req, bound + probe))
        if wider == set(sols):
            cls = "finite" if sols else "empty"
        else:
            cls = "infinite-flagged"
    else:
        cls = "unknown-beyond-bound" if sols else "empty"
    return SolverReport(grammar, f"bounded({bound})", cls, tuple(sols))
