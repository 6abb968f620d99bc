"""Language-preserving constructions on L-systems.

Most constructions that have to consult a finite automaton (intersection with
a regular set, projection onto a #-factor, rational transduction) share one
engine, :func:`steer`.  It decorates every letter ``c`` with a pair of
automaton states ``[q:c:q']`` meaning "the word eventually derived from this
occurrence drives the automaton from q to q'", and only keeps decorations
that the remaining control path can honour.
"""
from __future__ import annotations

import itertools
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .grammar import (LSystem, Table, apply_table, control_is_acyclic, finite_language,
                      is_deterministic)
from .nfa import BudgetExceeded, Nfa

DAGGER = "†"
DIAMOND = "⋄"
END = "⊣"


def fresh(base: str, taken: Iterable[str]) -> str:
    taken = set(taken)
    name = base
    while name in taken:
        name += "'"
    return name


def empty_system(terminals: Iterable[str]) -> LSystem:
    terminals = frozenset(terminals)
    z = fresh("Z", terminals)
    ctl = Nfa.build(["s"], ["s"], [], [])
    return LSystem(terminals | {z}, terminals, (z,), ctl, {})


def finite_system(words: Iterable[tuple], terminals: Iterable[str]) -> LSystem:
    """Deterministic system whose language is exactly ``words``: one table per word."""
    words = sorted(set(map(tuple, words)))
    terminals = frozenset(terminals).union(*map(set, words)) if words else frozenset(terminals)
    z = fresh("Z", terminals)
    tables = {f"w{i}": Table.hom({z: w}) for i, w in enumerate(words)}
    ctl = Nfa.build(["s", "t"], ["s"], ["t"], [("s", "t", tid) for tid in tables])
    return LSystem(terminals | {z}, terminals, (z,), ctl, tables)


def rename_letters(sys: LSystem, mapping: Mapping[str, str]) -> LSystem:
    def m(c):
        return mapping.get(c, c)

    def mw(w):
        return tuple(m(c) for c in w)

    tables = {tid: Table.from_rules((m(c), mw(v)) for c, vs in t.rules.items() for v in vs)
              for tid, t in sys.tables.items()}
    return LSystem(frozenset(map(m, sys.alphabet)), frozenset(map(m, sys.terminals)), mw(sys.seed),
                   sys.control, tables)


def _tag_control(sys: LSystem, tag: str) -> tuple[Nfa, dict]:
    ctl = sys.control.rename_states(lambda s: f"{tag}{s}")
    ctl = ctl.relabel(lambda lab: f"{tag}{lab}")
    tables = {f"{tag}{tid}": t for tid, t in sys.tables.items()}
    return ctl, tables


# -- Boolean and homomorphic closures ------------------------------------------------


def union(a: LSystem, b: LSystem) -> LSystem:
    if a.terminals != b.terminals:
        raise ValueError("union needs a shared terminal alphabet "
                         f"({sorted(a.terminals ^ b.terminals)} differ)")
    return union_all([a, b], ["a.", "b."])


def union_all(systems: list[LSystem], tags: list[str] | None = None, terminals=None) -> LSystem:
    """Union of several systems; ``tags`` prefix their control nodes and table ids."""
    if terminals is None:
        terminals = systems[0].terminals if systems else frozenset()
    terminals = frozenset(terminals)
    if tags is None:
        tags = [f"{i}." for i in range(len(systems))]
    if not systems:
        return empty_system(terminals)
    for s in systems:
        if s.terminals != terminals:
            raise ValueError("union needs a shared terminal alphabet")
    alphabet = frozenset().union(*(s.alphabet for s in systems))
    star = fresh("C*", alphabet)
    states, starts, accepts, edges, tables = ["start"], ["start"], [], [], {}
    for i, (s, tag) in enumerate(zip(systems, tags)):
        ctl, tabs = _tag_control(s, tag)
        tables.update(tabs)
        bridge = f"{tag}seed"
        tables[bridge] = Table.hom({star: s.seed})
        states.extend(ctl.states)
        accepts.extend(ctl.accepts)
        edges.extend(ctl.edges)
        edges.extend(("start", p, bridge) for p in ctl.starts)
    ctl = Nfa.build(states, starts, accepts, edges)
    return LSystem(alphabet | {star}, terminals, (star,), ctl, tables)


def hom_image(a: LSystem, psi: Mapping[str, Iterable[str]]) -> LSystem:
    psi = {c: tuple(v) for c, v in psi.items()}
    missing = a.terminals - set(psi)
    if missing:
        raise ValueError(f"homomorphism undefined on {sorted(missing)}")
    out_terms = frozenset(x for c in a.terminals for x in psi[c])
    clash = out_terms & (a.alphabet - a.terminals)
    if clash:
        a = rename_letters(a, {c: fresh(c + "'", a.alphabet | out_terms) for c in clash})
    ctl = a.control
    acc = fresh("img", map(str, ctl.states))
    tid = fresh("psi", a.tables)
    tables = dict(a.tables)
    tables[tid] = Table.hom({c: psi[c] for c in a.terminals})
    edges = list(ctl.edges) + [(p, acc, tid) for p in ctl.accepts]
    new_ctl = Nfa.build(list(ctl.states) + [acc], ctl.starts, [acc], edges)
    return LSystem(a.alphabet | out_terms, out_terms, a.seed, new_ctl, tables)


# -- the steering engine -------------------------------------------------------------


def _compose(r1: frozenset, r2: frozenset) -> frozenset:
    nxt = defaultdict(list)
    for q, q2 in r2:
        nxt[q].append(q2)
    return frozenset((q, q3) for q, q2 in r1 for q3 in nxt.get(q2, ()))


def _deco(q, c, q2) -> str:
    return f"[{q}:{c}:{q2}]"


class _Decomposer:
    """State sequences through a word under a letter relation, cached per end state."""

    def __init__(self, word: tuple, rel: Callable[[str], frozenset]):
        self.word = word
        self.adj, self.radj = [], []
        for c in word:
            d, rd = defaultdict(list), defaultdict(list)
            for q, q2 in rel(c):
                d[q].append(q2)
                rd[q2].append(q)
            self.adj.append(d)
            self.radj.append(rd)
        self._alive = {}

    def alive(self, qf) -> list:
        if qf not in self._alive:
            alive = [set() for _ in range(len(self.word) + 1)]
            alive[-1] = {qf}
            for i in range(len(self.word) - 1, -1, -1):
                alive[i] = {q for q2 in alive[i + 1] for q in self.radj[i].get(q2, ())}
            self._alive[qf] = alive
        return self._alive[qf]

    def __call__(self, q0, qf) -> list[tuple]:
        word = self.word
        if not word:
            return [()] if q0 == qf else []
        alive = self.alive(qf)
        if q0 not in alive[0]:
            return []
        out = []
        adj = self.adj

        def walk(i, q, acc):
            if i == len(word):
                out.append(tuple(acc))
                return
            for q2 in adj[i].get(q, ()):
                if q2 in alive[i + 1]:
                    acc.append(_deco(q, word[i], q2))
                    walk(i + 1, q2, acc)
                    acc.pop()

        walk(0, q0, [])
        return out


def _decompositions(word: tuple, rel: Callable[[str], frozenset], q0, qf) -> list[tuple]:
    """All state sequences q0=s0,...,sn=qf with (s_i, s_i+1) in rel(word[i])."""
    return _Decomposer(word, rel)(q0, qf)


@dataclass
class SteerPlan:
    """What the engine needs to know about the automaton."""

    n_states: int
    final_rel: Mapping[str, Mapping[tuple, list]]  # terminal -> {(q, q'): [output words]}
    seed_pairs: set
    out_terminals: frozenset
    budget: int = 50_000
    stage: str = "steer"


def steer(sys: LSystem, plan: SteerPlan) -> LSystem:
    ident = frozenset((q, q) for q in range(plan.n_states))
    final = {c: frozenset(plan.final_rel.get(c, {})) for c in sys.terminals}
    final = {c: r for c, r in final.items() if r}

    def key(rel: Mapping[str, frozenset]) -> frozenset:
        return frozenset((c, r) for c, r in rel.items() if r)

    ctl = sys.control.trim()
    back = defaultdict(list)
    for p, p2, tid in ctl.edges:
        back[p2].append((p, tid))

    nodes: dict = {}
    annotations: list = []
    queue = deque()

    def intern(p, rk):
        k = (p, rk)
        if k not in nodes:
            if len(nodes) >= plan.budget:
                raise BudgetExceeded(f"{plan.stage}: more than {plan.budget} annotated control states")
            nodes[k] = len(nodes)
            annotations.append(dict(rk))
            queue.append(k)
        return nodes[k]

    final_key = key(final)
    finals = [intern(p, final_key) for p in ctl.accepts]
    edges = []  # (src_id, tid, dst_id)
    while queue:
        p2, rk2 = queue.popleft()
        dst = nodes[(p2, rk2)]
        r2 = annotations[dst]
        for p, tid in back.get(p2, ()):
            table = sys.tables[tid]
            r = dict(r2)
            cache = {}

            def word_rel(v):
                if v not in cache:
                    acc = ident
                    for c in v:
                        acc = _compose(acc, r2.get(c, frozenset()))
                        if not acc:
                            break
                    cache[v] = acc
                return cache[v]

            for c, vs in table.rules.items():
                r[c] = frozenset().union(*(word_rel(v) for v in vs))
            src = intern(p, key(r))
            edges.append((src, tid, dst))

    rel_of = lambda i: (lambda c: annotations[i].get(c, frozenset()))
    tables: dict[str, Table] = {}
    out_edges = []
    for src, tid, dst in edges:
        name = f"{tid}~{dst}"
        if name not in tables:
            h = sys.tables[tid]
            rules = []
            src_rel = annotations[src]
            dst_rel = rel_of(dst)
            for c, vs in h.rules.items():
                pairs = sorted(src_rel.get(c, ()), key=repr)
                for v in vs:
                    dec = _Decomposer(v, dst_rel)
                    for q, q2 in pairs:
                        for dv in dec(q, q2):
                            rules.append((_deco(q, c, q2), dv))
            tables[name] = Table.from_rules(rules)
        out_edges.append((f"n{src}", f"n{dst}", name))

    taken = set(plan.out_terminals)
    z = fresh("Z", taken)
    seeds = []
    for (p, rk), i in nodes.items():
        if p not in ctl.starts:
            continue
        for q0, qf in sorted(plan.seed_pairs):
            for dv in _decompositions(sys.seed, rel_of(i), q0, qf):
                seeds.append((i, dv))
    for j, (i, dv) in enumerate(sorted(seeds)):
        tables[f"z{j}"] = Table.hom({z: dv})
        out_edges.append(("start", f"n{i}", f"z{j}"))
    fin_rules = []
    for c, pairs in plan.final_rel.items():
        for (q, q2), outs in pairs.items():
            for o in outs:
                fin_rules.append((_deco(q, c, q2), tuple(o)))
    tables["fin"] = Table.from_rules(fin_rules)
    for i in finals:
        out_edges.append((f"n{i}", "done", "fin"))
    states = ["start"] + [f"n{i}" for i in range(len(nodes))] + ["done"]
    new_ctl = Nfa.build(states, ["start"], ["done"], out_edges)
    live = new_ctl._reach(["start"], True)
    new_ctl = Nfa.build([s for s in states if s in live], ["start"], ["done"] if "done" in live else [],
                        [e for e in out_edges if e[0] in live])
    used = {lab for _, _, lab in new_ctl.edges}
    tables = {tid: t for tid, t in tables.items() if tid in used}
    alphabet = {z} | set(plan.out_terminals)
    for t in tables.values():
        alphabet |= t.letters()
    return LSystem(frozenset(alphabet), frozenset(plan.out_terminals), (z,), new_ctl, tables)


def _dfa_indexed(n: Nfa, budget: int) -> tuple[Nfa, int]:
    d = n.determinize(budget=budget).renumbered()
    return d, len(d.states)


def intersect_regular(a: LSystem, n: Nfa, budget: int = 20_000) -> LSystem:
    d, size = _dfa_indexed(n, budget)
    (q0,) = d.starts
    final_rel = defaultdict(dict)
    for p, q, lab in d.edges:
        if lab in a.terminals:
            final_rel[lab][(p, q)] = [(lab,)]
    plan = SteerPlan(size, final_rel, {(q0, f) for f in d.accepts}, a.terminals, stage="intersect_regular")
    return steer(a, plan)


def project_factor(a: LSystem, k: int, l: int, r: int, sep: str = "#") -> LSystem:
    """Keep components k..l (1-based) of words u_1 sep ... sep u_r."""
    if k < 1 or k > l:
        raise ValueError(f"project_factor needs 1 <= k <= l (got k={k}, l={l})")
    if r < 1:
        raise ValueError("r must be positive")
    if l > r:
        return empty_system(a.terminals)
    # automaton states 0..r-1 count separators read
    final_rel = defaultdict(dict)
    for c in a.terminals:
        for i in range(r):
            if c == sep:
                if i + 1 < r:
                    final_rel[c][(i, i + 1)] = [(sep,) if k - 1 <= i < l - 1 else ()]
            else:
                final_rel[c][(i, i)] = [(c,) if k - 1 <= i <= l - 1 else ()]
    plan = SteerPlan(r, final_rel, {(0, r - 1)}, a.terminals, stage="project_factor")
    return steer(a, plan)


def transduce(a: LSystem, t: Nfa, out_terminals: Iterable[str], budget: int = 50_000) -> LSystem:
    """Image of L(a) under a transducer.

    Edges of ``t`` are labelled ``(inp, out)`` with ``inp`` a letter or None and
    ``out`` a tuple of output letters.  Paths reading no input must not loop.
    """
    t = t.trim().renumbered()
    eps = defaultdict(list)
    reads = defaultdict(list)
    for p, q, (inp, out) in t.edges:
        (eps if inp is None else reads)[p].append((q, tuple(out), inp))
    # all input-free paths from each state, with outputs
    color = {}

    def check(s):
        color[s] = 1
        for q, _, _ in eps[s]:
            if color.get(q) == 1:
                raise ValueError("transducer has an input-free cycle")
            if q not in color:
                check(q)
        color[s] = 2

    for s in t.states:
        if s not in color:
            check(s)
    closure_cache = {}

    def closure(s):
        if s not in closure_cache:
            res = {(s, ())}
            for q, out, _ in eps[s]:
                res |= {(x, out + o) for x, o in closure(q)}
            closure_cache[s] = res
        return closure_cache[s]

    end = fresh(END, a.alphabet)
    final_rel = defaultdict(lambda: defaultdict(set))
    for s in t.states:
        for mid, o1 in closure(s):
            for q, o2, inp in reads[mid]:
                if inp in a.terminals:
                    final_rel[inp][(s, q)].add(o1 + o2)
            if mid in t.accepts:
                final_rel[end][(s, mid)].add(o1)
    final_rel = {c: {pq: sorted(os) for pq, os in d.items()} for c, d in final_rel.items()}
    out_terminals = frozenset(out_terminals)
    a2 = LSystem(a.alphabet | {end}, a.terminals | {end}, a.seed + (end,), a.control, a.tables)
    (q0,) = t.starts if len(t.starts) == 1 else (None,)
    if q0 is None:
        raise ValueError("transducer needs a single start state")
    plan = SteerPlan(len(t.states), final_rel, {(q0, f) for f in t.accepts}, out_terminals,
                     budget=budget, stage="transduce")
    return steer(a2, plan)


def inverse_hom(a: LSystem, phi: Mapping[str, Iterable[str]]) -> LSystem:
    """Preimage of L(a) under phi: Gamma* -> Sigma*."""
    phi = {y: tuple(v) for y, v in phi.items()}
    gamma = frozenset(phi)
    if gamma & a.alphabet:
        raise ValueError(f"preimage alphabet must be fresh: {sorted(gamma & a.alphabet)}")
    for y, v in phi.items():
        if not v:
            raise ValueError(f"erasing image for {y!r} is not supported")
        if not set(v) <= a.terminals:
            raise ValueError(f"image of {y!r} leaves the terminal alphabet")
    sigma = a.terminals
    # padding: after acceptance, repeatedly surround terminal letters with Gamma letters
    opts = [()] + [(y,) for y in sorted(gamma)]
    pad = Table.from_rules((c, x + (c,) + y) for c in sigma for x in opts for y in opts)
    ctl = a.control
    p_pad = fresh("pad", map(str, ctl.states))
    tables = dict(a.tables)
    tid_in, tid_loop = fresh("enter", tables), fresh("h0", tables)
    tables[tid_in] = Table({})
    tables[tid_loop] = pad
    edges = list(ctl.edges) + [(p, p_pad, tid_in) for p in ctl.accepts] + [(p_pad, p_pad, tid_loop)]
    padded = LSystem(a.alphabet | gamma, sigma | gamma, a.seed,
                     Nfa.build(list(ctl.states) + [p_pad], ctl.starts, [p_pad], edges), tables)
    # S = {phi(y1) y1 ... phi(yn) yn : n >= 0}
    states, sedges = [0], []
    for y in sorted(gamma):
        prev = 0
        for c in phi[y]:
            nxt = len(states)
            states.append(nxt)
            sedges.append((prev, nxt, c))
            prev = nxt
        sedges.append((prev, 0, y))
    s_aut = Nfa.build(states, [0], [0], sedges, sigma | gamma)
    filtered = intersect_regular(padded, s_aut)
    return hom_image(filtered, {**{c: () for c in sigma}, **{y: (y,) for y in gamma}})


# -- doubling and copying ------------------------------------------------------------


@dataclass(frozen=True)
class MarkingBijection:
    """Letter bijection onto a disjoint marked alphabet; ``fixed`` letters map to themselves."""

    pairs: Mapping[str, str]
    fixed: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        dom = set(self.pairs) - set(self.fixed)
        rng = {v for k, v in self.pairs.items() if k not in self.fixed}
        if len(rng) != len(dom):
            raise ValueError("marking map is not injective")
        if dom & rng:
            raise ValueError(f"marked and unmarked letters overlap: {sorted(dom & rng)}")

    @classmethod
    def dagger(cls, letters: Iterable[str], fixed: Iterable[str] = ()) -> "MarkingBijection":
        fixed = frozenset(fixed)
        return cls({c: (c if c in fixed else c + DAGGER) for c in letters}, fixed)

    def __call__(self, c: str) -> str:
        return self.pairs[c]

    def word(self, w: Iterable[str]) -> tuple:
        return tuple(self.pairs[c] for c in w)

    @property
    def domain(self) -> frozenset:
        return frozenset(self.pairs)

    @property
    def marked(self) -> frozenset:
        return frozenset(v for k, v in self.pairs.items() if k not in self.fixed)


def double(a: LSystem, f: MarkingBijection) -> LSystem:
    """System for {w f(w) : w in L(a)}; requires deterministic tables."""
    if not is_deterministic(a):
        raise ValueError("double requires a deterministic system")
    if not a.terminals <= f.domain:
        raise ValueError(f"marking map undefined on {sorted(a.terminals - f.domain)}")
    if f.marked & a.alphabet:
        raise ValueError("marked letters collide with the system's alphabet")
    for c in f.fixed & a.alphabet:
        if any(t.moves(c) for t in a.used_tables.values()):
            raise ValueError(f"fixed letter {c!r} is rewritten by a table")
    full = dict(f.pairs)
    taken = set(a.alphabet) | set(f.marked)
    for c in sorted(a.alphabet - f.domain):
        full[c] = fresh(c + DAGGER, taken)
        taken.add(full[c])

    def m(w):
        return tuple(full[c] for c in w)

    tables = {}
    for tid, t in a.tables.items():
        rules = [(c, v) for c, vs in t.rules.items() for v in vs]
        rules += [(full[c], m(v)) for c, v in rules if c not in f.fixed]
        tables[tid] = Table.from_rules(rules)
    alphabet = a.alphabet | frozenset(full.values())
    terminals = a.terminals | frozenset(full[c] for c in a.terminals)
    return LSystem(alphabet, terminals, a.seed + m(a.seed), a.control, tables)


@dataclass(frozen=True)
class Copied:
    full: LSystem
    first: LSystem | None
    second: LSystem | None


def _relevant_letters(sys: LSystem, ambiguous: set) -> set:
    """Letters whose presence can still influence a choice or acceptance."""
    derives = defaultdict(set)
    for t in sys.used_tables.values():
        for c, vs in t.rules.items():
            for v in vs:
                derives[c].update(v)
    relevant = set(ambiguous) | (set(sys.alphabet) - set(sys.terminals))
    changed = True
    while changed:
        changed = False
        for c in sys.alphabet:
            if c not in relevant and derives[c] & relevant:
                relevant.add(c)
                changed = True
    return relevant


def split_choices(sys: LSystem, budget: int = 50_000) -> LSystem:
    """Deterministic equivalent of a system whose nondeterministic letters never
    occur twice in one sentential form.

    The control is refined by the multiset (counts capped at 2) of relevant
    letters in the current form; a nondeterministic table then becomes one
    deterministic table per combination of rules for the letters present.
    Raises ValueError when some ambiguous letter can occur twice.
    """
    tabs = sys.used_tables
    ambiguous = {c for t in tabs.values() for c, vs in t.rules.items() if len(vs) > 1}
    relevant = _relevant_letters(sys, ambiguous)
    nonterm = sys.alphabet - sys.terminals

    def profile(form) -> frozenset:
        cnt = defaultdict(int)
        for c in form:
            if c in relevant:
                cnt[c] = min(2, cnt[c] + 1)
        return frozenset(cnt.items())

    ctl = sys.control.trim()
    start_nodes = [(p, profile(sys.seed)) for p in ctl.starts]
    index = {n: i for i, n in enumerate(start_nodes)}
    queue = deque(start_nodes)
    edges, tables = [], {}
    table_ids = {}
    while queue:
        node = queue.popleft()
        p, prof = node
        present = dict(prof)
        for tid, p2 in ctl.out_edges(p):
            t = sys.tables[tid]
            choice_letters = sorted(c for c in present if len(t.choices(c)) > 1)
            for c in choice_letters:
                if present[c] > 1:
                    raise ValueError(f"letter {c!r} occurs twice with a nondeterministic rule")
            for combo in itertools.product(*(t.choices(c) for c in choice_letters)):
                picked = dict(zip(choice_letters, combo))
                cnt = defaultdict(int)
                for c, k in present.items():
                    v = picked.get(c, t.choices(c)[0])
                    for x in v:
                        if x in relevant:
                            cnt[x] = min(2, cnt[x] + k)
                nprof = frozenset(cnt.items())
                rules = {c: vs[0] for c, vs in t.rules.items()}
                rules.update(picked)
                tkey = (tid, tuple(sorted(picked.items())))
                if tkey not in table_ids:
                    name = tid if not picked else f"{tid}^{len(table_ids)}"
                    table_ids[tkey] = name
                    tables[name] = Table.hom(rules)
                nxt = (p2, nprof)
                if nxt not in index:
                    if len(index) >= budget:
                        raise BudgetExceeded(f"split_choices exceeded {budget} control states")
                    index[nxt] = len(index)
                    queue.append(nxt)
                edges.append((f"k{index[node]}", f"k{index[nxt]}", table_ids[tkey]))
    states = [f"k{i}" for i in range(len(index))]
    accepts = [f"k{i}" for (p, prof), i in index.items()
               if p in ctl.accepts and not any(c in nonterm for c, _ in prof)]
    new_ctl = Nfa.build(states, [f"k{index[n]}" for n in start_nodes], accepts, edges).trim()
    used = {lab for _, _, lab in new_ctl.edges}
    new_ctl = Nfa.build(new_ctl.states, new_ctl.starts, new_ctl.accepts, new_ctl.edges)
    tables = {k: v for k, v in tables.items() if k in used}
    return LSystem(sys.alphabet, sys.terminals, sys.seed, new_ctl, tables)


def copy_determinize(k: LSystem, f: MarkingBijection) -> Copied:
    """Deterministic systems for K = {w f(w)}, its first half and its marked half."""
    unmarked = f.domain - f.fixed
    marked = f.marked
    if unmarked & marked:
        raise ValueError("alphabets of the two halves are not disjoint")
    if not k.terminals <= f.domain | marked:
        raise ValueError(f"terminal letters outside both halves: {sorted(k.terminals - f.domain - marked)}")
    if is_deterministic(k):
        full = k
    elif control_is_acyclic(k):
        full = finite_system(finite_language(k), k.terminals)
    else:
        full = split_choices(k)
    if f.fixed & k.terminals:
        return Copied(full, None, None)
    first = hom_image(full, {c: ((c,) if c in unmarked else ()) for c in full.terminals})
    second = hom_image(full, {c: ((c,) if c in marked else ()) for c in full.terminals})
    return Copied(full, first, second)


# -- all words -----------------------------------------------------------------------


def unreduce(a: LSystem, gens: Mapping[str, str], sep: str = "#") -> LSystem:
    """All words obtained from words of L(a) by inserting cancelling pairs x x^-1.

    ``gens`` maps each generator to its inverse.
    """
    if not a.terminals <= set(gens) | {sep}:
        raise ValueError(f"terminals outside the generators: {sorted(a.terminals - set(gens) - {sep})}")
    d = fresh(DIAMOND, a.alphabet | set(gens))

    def spread(w):
        if not w:
            return ()
        out = [w[0]]
        for c in w[1:]:
            out += [d, c]
        return tuple(out)

    tables = {tid: Table.from_rules((c, spread(v)) for c, vs in t.rules.items() for v in vs)
              for tid, t in a.tables.items()}
    ctl = a.control
    q_loop = fresh("unreduce", map(str, ctl.states))
    q_end = fresh("erase", map(str, ctl.states))
    t_enter, t_loop, t_end = fresh("enter", tables), fresh("t", tables), fresh("drop", tables)
    tables[t_enter] = Table({})
    tables[t_loop] = Table.from_rules([(d, (d,))] + [(d, (d, x, d, gens[x], d)) for x in sorted(gens)])
    tables[t_end] = Table.hom({d: ()})
    edges = list(ctl.edges) + [(p, q_loop, t_enter) for p in ctl.accepts]
    edges += [(q_loop, q_loop, t_loop), (q_loop, q_end, t_end)]
    new_ctl = Nfa.build(list(ctl.states) + [q_loop, q_end], ctl.starts, [q_end], edges)
    seed = (d,) + spread(a.seed) + (d,) if a.seed else (d,)
    return LSystem(a.alphabet | set(gens) | {d}, a.terminals | set(gens), seed, new_ctl, tables)
