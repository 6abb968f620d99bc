"""Random small systems and brute-force language oracles shared by the tests."""
from __future__ import annotations

import random

from edt0l.grammar import LSystem, Table, enumerate_language, finite_language
from edt0l.nfa import Nfa


def random_word(rng: random.Random, letters, lo: int, hi: int) -> tuple:
    return tuple(rng.choice(letters) for _ in range(rng.randint(lo, hi)))


def random_system(rng: random.Random, terminals=("a", "b"), nonterminals=("S", "A"), n_tables=2,
                  n_states=3, acyclic=False, erasing=False, deterministic=True) -> LSystem:
    letters = list(terminals) + list(nonterminals)
    lo = 0 if erasing else 1
    tables = {}
    for i in range(n_tables):
        rules = []
        for c in letters:
            if c in terminals and rng.random() < 0.7:
                continue
            for _ in range(1 if deterministic else rng.randint(1, 2)):
                rules.append((c, random_word(rng, letters, lo, 2)))
        tables[f"h{i}"] = Table.from_rules(rules)
    # make sure some table can finish a derivation
    tables["fin"] = Table.from_rules([(c, random_word(rng, list(terminals), lo, 1)) for c in nonterminals])
    states = list(range(n_states))
    edges = set()
    for _ in range(n_states + 2):
        p, q = rng.randrange(n_states), rng.randrange(n_states)
        if acyclic and p >= q:
            if p == q:
                continue
            p, q = q, p
        edges.add((p, q, f"h{rng.randrange(n_tables)}"))
    last = n_states
    edges |= {(p, last, "fin") for p in states if rng.random() < 0.6} or {(0, last, "fin")}
    ctl = Nfa.build(states + [last], [0], [last], sorted(edges))
    return LSystem(frozenset(letters), frozenset(terminals), ("S",), ctl, tables)


def language(sys: LSystem, max_len: int) -> set:
    return enumerate_language(sys, max_len)


def exact_language(sys: LSystem) -> set:
    """Whole language of an acyclic system."""
    return finite_language(sys)


def random_dfa(rng: random.Random, alphabet, n: int = 3) -> Nfa:
    edges = [(p, rng.randrange(n), x) for p in range(n) for x in alphabet if rng.random() < 0.8]
    accepts = [q for q in range(n) if rng.random() < 0.5] or [0]
    return Nfa.build(range(n), [0], accepts, edges, alphabet)


def apply_hom(w, psi) -> tuple:
    return tuple(y for x in w for y in psi[x])


def components(w, sep="#") -> list:
    parts, cur = [], []
    for x in w:
        if x == sep:
            parts.append(tuple(cur))
            cur = []
        else:
            cur.append(x)
    parts.append(tuple(cur))
    return parts
