"""Finite automata over arbitrary hashable labels.

Labels are usually symbol strings; 2-tape automata use ``(top, bottom)``
tuples where ``None`` is the padding symbol.  A ``None`` label on an edge is
an epsilon move.
"""
from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Hashable, Iterable, Iterator

Label = Hashable
Word = tuple


class BudgetExceeded(RuntimeError):
    """A construction grew past its configured size budget."""


@dataclass(frozen=True, eq=False)
class Nfa:
    states: tuple
    starts: frozenset
    accepts: frozenset
    edges: tuple  # (src, dst, label); label None means epsilon
    alphabet: frozenset = field(default=None)

    def __post_init__(self):
        known = set(self.states)
        if len(known) != len(self.states):
            raise ValueError("duplicate state")
        for s in self.starts | self.accepts:
            if s not in known:
                raise ValueError(f"undeclared state {s!r}")
        labels = set()
        for src, dst, lab in self.edges:
            if src not in known or dst not in known:
                raise ValueError(f"edge {src!r}->{dst!r} uses undeclared state")
            if lab is not None:
                labels.add(lab)
        if self.alphabet is None:
            object.__setattr__(self, "alphabet", frozenset(labels))
        elif not labels <= self.alphabet:
            raise ValueError(f"labels outside alphabet: {sorted(map(str, labels - self.alphabet))}")

    @classmethod
    def build(cls, states: Iterable, starts: Iterable, accepts: Iterable,
              edges: Iterable, alphabet: Iterable | None = None) -> "Nfa":
        states = tuple(dict.fromkeys(states))
        edges = tuple(dict.fromkeys(tuple(e) for e in edges))
        return cls(states, frozenset(starts), frozenset(accepts), edges,
                   None if alphabet is None else frozenset(alphabet))

    @classmethod
    def empty(cls, alphabet: Iterable = ()) -> "Nfa":
        return cls.build([0], [0], [], [], alphabet)

    @classmethod
    def universal(cls, alphabet: Iterable) -> "Nfa":
        alphabet = frozenset(alphabet)
        return cls.build([0], [0], [0], [(0, 0, a) for a in sorted(alphabet, key=repr)], alphabet)

    @classmethod
    def from_words(cls, words: Iterable[Word], alphabet: Iterable | None = None) -> "Nfa":
        """Trie automaton accepting exactly ``words``."""
        states = [()]
        edges = []
        accepts = set()
        seen = {()}
        for w in sorted(set(map(tuple, words)), key=lambda w: (len(w), list(map(repr, w)))):
            for i in range(len(w)):
                pre = w[: i + 1]
                if pre not in seen:
                    seen.add(pre)
                    states.append(pre)
                    edges.append((w[:i], pre, w[i]))
            accepts.add(w)
        return cls.build(states, [()], accepts, edges, alphabet).renumbered()

    # -- structure -------------------------------------------------------

    @cached_property
    def _out(self) -> dict:
        out = defaultdict(list)
        for src, dst, lab in self.edges:
            out[src].append((lab, dst))
        return out

    @cached_property
    def _delta(self) -> dict:
        d = defaultdict(set)
        for src, dst, lab in self.edges:
            d[src, lab].add(dst)
        return d

    def successors(self, state, label) -> set:
        return self._delta.get((state, label), set())

    def out_edges(self, state) -> list:
        return self._out.get(state, [])

    def eps_closure(self, states: Iterable) -> frozenset:
        seen = set(states)
        stack = list(seen)
        while stack:
            s = stack.pop()
            for t in self._delta.get((s, None), ()):
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return frozenset(seen)

    @property
    def has_epsilon(self) -> bool:
        return any(lab is None for _, _, lab in self.edges)

    def is_deterministic(self) -> bool:
        if len(self.starts) > 1 or self.has_epsilon:
            return False
        return all(len(v) <= 1 for v in self._delta.values())

    def step(self, states: frozenset, label) -> frozenset:
        nxt = set()
        for s in states:
            nxt |= self._delta.get((s, label), set())
        return self.eps_closure(nxt)

    def accepts_word(self, word: Iterable) -> bool:
        cur = self.eps_closure(self.starts)
        for a in word:
            cur = self.step(cur, a)
            if not cur:
                return False
        return bool(cur & self.accepts)

    __contains__ = accepts_word

    # -- transformations ---------------------------------------------------

    def renumbered(self) -> "Nfa":
        """Copy with states renamed to 0..n-1 in declaration order."""
        idx = {s: i for i, s in enumerate(self.states)}
        return Nfa(tuple(range(len(self.states))), frozenset(idx[s] for s in self.starts),
                   frozenset(idx[s] for s in self.accepts),
                   tuple((idx[a], idx[b], lab) for a, b, lab in self.edges), self.alphabet)

    def relabel(self, fn: Callable[[Label], Label | None], alphabet: Iterable | None = None) -> "Nfa":
        edges = [(a, b, None if lab is None else fn(lab)) for a, b, lab in self.edges]
        return Nfa.build(self.states, self.starts, self.accepts, edges, alphabet)

    def rename_states(self, fn: Callable) -> "Nfa":
        return Nfa.build([fn(s) for s in self.states], [fn(s) for s in self.starts],
                         [fn(s) for s in self.accepts],
                         [(fn(a), fn(b), lab) for a, b, lab in self.edges], self.alphabet)

    def trim(self) -> "Nfa":
        fwd = self._reach(self.starts, forward=True)
        bwd = self._reach(self.accepts, forward=False)
        keep = fwd & bwd
        if not keep:
            return Nfa.empty(self.alphabet)
        return Nfa.build([s for s in self.states if s in keep], self.starts & keep, self.accepts & keep,
                         [e for e in self.edges if e[0] in keep and e[1] in keep], self.alphabet)

    def _reach(self, seeds: Iterable, forward: bool) -> set:
        adj = defaultdict(list)
        for a, b, _ in self.edges:
            if forward:
                adj[a].append(b)
            else:
                adj[b].append(a)
        seen = set(seeds)
        stack = list(seen)
        while stack:
            s = stack.pop()
            for t in adj[s]:
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return seen

    def is_empty(self) -> bool:
        return not (self._reach(self.starts, True) & set(self.accepts))

    def remove_epsilon(self) -> "Nfa":
        if not self.has_epsilon:
            return self
        edges = []
        accepts = set()
        for s in self.states:
            clo = self.eps_closure([s])
            if clo & self.accepts:
                accepts.add(s)
            for c in clo:
                for lab, t in self.out_edges(c):
                    if lab is not None:
                        edges.append((s, t, lab))
        return Nfa.build(self.states, self.starts, accepts, edges, self.alphabet)

    def determinize(self, budget: int = 20000, complete: bool = False) -> "Nfa":
        """Subset construction; states of the result are frozensets.

        With ``complete`` an empty sink subset is kept so every state has an
        edge for every alphabet letter.
        """
        letters = sorted(self.alphabet, key=repr)
        start = self.eps_closure(self.starts)
        states = [start]
        index = {start}
        edges = []
        queue = deque([start])
        while queue:
            cur = queue.popleft()
            for a in letters:
                nxt = self.step(cur, a)
                if not nxt and not complete:
                    continue
                if nxt not in index:
                    if len(index) >= budget:
                        raise BudgetExceeded(f"determinization exceeded {budget} states")
                    index.add(nxt)
                    states.append(nxt)
                    queue.append(nxt)
                edges.append((cur, nxt, a))
        accepts = [s for s in states if s & self.accepts]
        return Nfa.build(states, [start], accepts, edges, self.alphabet)

    def complement(self, alphabet: Iterable | None = None, budget: int = 20000) -> "Nfa":
        alpha = frozenset(alphabet) if alphabet is not None else self.alphabet
        base = Nfa.build(self.states, self.starts, self.accepts, self.edges, alpha)
        d = base.determinize(budget, complete=True)
        return Nfa.build(d.states, d.starts, [s for s in d.states if s not in d.accepts],
                         d.edges, alpha).renumbered()

    def intersect(self, other: "Nfa") -> "Nfa":
        """Product automaton; epsilon moves in either factor advance alone."""
        start = [(p, q) for p in self.starts for q in other.starts]
        seen = set(start)
        queue = deque(start)
        edges = []
        while queue:
            p, q = queue.popleft()
            moves = []
            for lab, p2 in self.out_edges(p):
                if lab is None:
                    moves.append(((p2, q), None))
                else:
                    for q2 in other.successors(q, lab):
                        moves.append(((p2, q2), lab))
            for lab, q2 in other.out_edges(q):
                if lab is None:
                    moves.append(((p, q2), None))
            for nxt, lab in moves:
                edges.append(((p, q), nxt, lab))
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        accepts = [s for s in seen if s[0] in self.accepts and s[1] in other.accepts]
        return Nfa.build(list(seen), start, accepts, edges, self.alphabet & other.alphabet
                         if self.alphabet is not None and other.alphabet is not None else None)

    def union(self, other: "Nfa") -> "Nfa":
        a = self.rename_states(lambda s: (0, s))
        b = other.rename_states(lambda s: (1, s))
        return Nfa.build(a.states + b.states, a.starts | b.starts, a.accepts | b.accepts,
                         a.edges + b.edges, self.alphabet | other.alphabet)

    def concat(self, other: "Nfa", joiner: Label | None = None) -> "Nfa":
        """``L(self) joiner L(other)``; ``joiner`` None joins by epsilon."""
        a = self.rename_states(lambda s: (0, s))
        b = other.rename_states(lambda s: (1, s))
        bridge = [(f, s, joiner) for f in a.accepts for s in b.starts]
        alpha = self.alphabet | other.alphabet | ({joiner} if joiner is not None else set())
        return Nfa.build(a.states + b.states, a.starts, b.accepts, a.edges + b.edges + tuple(bridge), alpha)

    # -- languages ----------------------------------------------------------

    def words(self, max_len: int) -> Iterator[Word]:
        """All accepted words of length <= max_len (each once), by length."""
        frontier = {(): self.eps_closure(self.starts)}
        for n in range(max_len + 1):
            nxt = {}
            for w in sorted(frontier, key=lambda w: list(map(repr, w))):
                cur = frontier[w]
                if cur & self.accepts:
                    yield w
                if n == max_len:
                    continue
                for a in sorted(self.alphabet, key=repr):
                    s = self.step(cur, a)
                    if s:
                        nxt[w + (a,)] = s
            frontier = nxt
            if not frontier:
                return

    def __repr__(self) -> str:
        return f"Nfa(states={len(self.states)}, edges={len(self.edges)})"


def chain(parts: list[Nfa], joiner: Label) -> Nfa:
    """``L(parts[0]) joiner L(parts[1]) joiner ...`` using disjoint copies."""
    out = parts[0]
    for p in parts[1:]:
        out = out.concat(p, joiner)
    return out.renumbered()
