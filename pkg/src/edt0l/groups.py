"""Group-side machinery: Dehn reduction, shortlex normal forms, quasigeodesics,
2-tape equality automata and constraint closures."""
from __future__ import annotations

import itertools
import math
import threading
from collections import Counter, deque
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping

from .grammar import EMPTY, nfa_from_text, nfa_to_text
from .nfa import BudgetExceeded, Nfa

INV = "^-1"


class BundleIntegrityError(RuntimeError):
    pass


def inverse_name(x: str) -> str:
    return x[: -len(INV)] if x.endswith(INV) else x + INV


@dataclass(eq=False)
class GroupBundle:
    gens: tuple
    inverse: Mapping[str, str]
    dehn_pairs: tuple  # ((u, v), ...) with |u| > |v|
    delta: float = 0
    lambda_g: Fraction = Fraction(1)
    mu_g: Fraction = Fraction(0)
    order: tuple = ()
    shortlex_acceptor: Nfa | None = None
    qg_acceptors: dict = field(default_factory=dict)  # (λ, μ) -> Nfa
    equality_automata: dict = field(default_factory=dict)
    c_bound_coeffs: tuple = (0, 0)
    radius: int | None = None
    name: str = "bundle"

    def __post_init__(self):
        self.gens = tuple(self.gens)
        self.order = tuple(self.order) or self.gens
        self.lambda_g = Fraction(self.lambda_g)
        self.mu_g = Fraction(self.mu_g)
        if set(self.order) != set(self.gens) or len(self.order) != len(self.gens):
            raise BundleIntegrityError("order must list every generator once")
        for x in self.gens:
            y = self.inverse.get(x)
            if y not in self.inverse or self.inverse[y] != x:
                raise BundleIntegrityError(f"inverse map is not an involution at {x!r}")
        for u, v in self.dehn_pairs:
            if len(u) <= len(v):
                raise BundleIntegrityError(f"Dehn pair {u}->{v} does not shorten")
            if not set(u) | set(v) <= set(self.gens):
                raise BundleIntegrityError("Dehn pair uses unknown letters")
        self._rank = {x: i for i, x in enumerate(self.order)}
        self._pairs = {tuple(u): tuple(v) for u, v in self.dehn_pairs}
        self._lengths = sorted({len(u) for u in self._pairs}, reverse=True)
        self._nf_cache: dict = {}
        self._lock = threading.Lock()
        self._abelian = all(self.exponents(u) == self.exponents(v) for u, v in self._pairs.items())

    def __getstate__(self):
        state = dict(self.__dict__)
        del state["_lock"]
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._lock = threading.Lock()

    @property
    def is_free(self) -> bool:
        cancel = {((x, self.inverse[x]), ()) for x in self.gens}
        return set(self._pairs.items()) == cancel

    def inv(self, w: Iterable[str]) -> tuple:
        return tuple(self.inverse[x] for x in reversed(tuple(w)))

    def exponents(self, w) -> tuple:
        c = Counter()
        for x in w:
            base = x[: -len(INV)] if x.endswith(INV) else x
            c[base] += -1 if x.endswith(INV) else 1
        return tuple(sorted((k, v) for k, v in c.items() if v))

    def shortlex_key(self, w) -> tuple:
        return (len(w), tuple(self._rank[x] for x in w))

    def check_word(self, w) -> tuple:
        w = tuple(w)
        for x in w:
            if x not in self.inverse:
                raise ValueError(f"letter {x!r} is not a generator")
        return w

    def c_bound(self, q: int) -> int:
        a, b = self.c_bound_coeffs
        return int(math.ceil(a * q + b))

    def __repr__(self) -> str:
        return f"GroupBundle({self.name}, |S|={len(self.gens)}, pairs={len(self._pairs)})"


# -- word problem ----------------------------------------------------------------


def free_reduce(b: GroupBundle, w: Iterable[str]) -> tuple:
    out = []
    for x in w:
        if out and out[-1] == b.inverse[x]:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def dehn_reduce(b: GroupBundle, w: Iterable[str]) -> tuple:
    """Repeatedly replace the leftmost Dehn left side (longest on ties) by its right side."""
    w = list(b.check_word(w))
    if b.is_free:
        return free_reduce(b, w)
    pairs, lengths = b._pairs, b._lengths
    longest = lengths[0] if lengths else 0
    i = 0
    while i < len(w):
        for n in lengths:
            if i + n <= len(w):
                v = pairs.get(tuple(w[i:i + n]))
                if v is not None:
                    w[i:i + n] = v
                    i = max(0, i - longest)
                    break
        else:
            i += 1
    return tuple(w)


def equal_in_group(b: GroupBundle, u, v) -> bool:
    return not dehn_reduce(b, tuple(u) + b.inv(v))


def _candidates(b: GroupBundle, n: int, target: tuple | None):
    """Words of length n in lexicographic order, pruned by exponent sums when sound."""
    order = b.order
    if target is None:
        yield from itertools.product(order, repeat=n)
        return
    need = dict(target)

    def rec(prefix, remaining, need):
        dist = sum(abs(v) for v in need.values())
        if dist > remaining or (remaining - dist) % 2:
            return
        if remaining == 0:
            yield tuple(prefix)
            return
        for x in order:
            base = x[: -len(INV)] if x.endswith(INV) else x
            step = -1 if x.endswith(INV) else 1
            need[base] = need.get(base, 0) - step
            prefix.append(x)
            yield from rec(prefix, remaining - 1, need)
            prefix.pop()
            need[base] += step

    yield from rec([], n, need)


def shortlex_normal_form(b: GroupBundle, w: Iterable[str]) -> tuple:
    w = b.check_word(w)
    if b.is_free:
        return free_reduce(b, w)
    r = dehn_reduce(b, w)
    if r in b._nf_cache:
        return b._nf_cache[r]
    target = b.exponents(r) if b._abelian else None
    winv = b.inv(r)
    acc = b.shortlex_acceptor
    for n in range(len(r) + 1):
        for v in _candidates(b, n, target):
            if acc is not None and not acc.accepts_word(v):
                continue
            if not dehn_reduce(b, v + winv):
                with b._lock:
                    b._nf_cache[r] = v
                return v
    raise BundleIntegrityError(f"no normal form found for {' '.join(w) or EMPTY}")


def word_length(b: GroupBundle, w) -> int:
    return len(shortlex_normal_form(b, w))


def is_quasigeodesic(b: GroupBundle, w: Iterable[str], lam, mu) -> bool:
    w = b.check_word(w)
    lam, mu = Fraction(lam), Fraction(mu)
    n = len(w)
    if b.is_free:
        for i in range(n):
            stack = []
            for j in range(i, n):
                x = w[j]
                if stack and stack[-1] == b.inverse[x]:
                    stack.pop()
                else:
                    stack.append(x)
                if j + 1 - i > lam * len(stack) + mu:
                    return False
        return True
    for i in range(n):
        for j in range(i + 1, n + 1):
            if j - i > lam * word_length(b, w[i:j]) + mu:
                return False
    return True


# -- free bundles ----------------------------------------------------------------


def free_generators(rank: int) -> list[str]:
    if rank < 1:
        raise ValueError("rank must be positive")
    letters = "abcdefghijklmnopqrstuvwxyz"
    return [letters[i] if i < 26 else f"x{i}" for i in range(rank)]


def reduced_word_dfa(gens: Iterable[str], inverse: Mapping[str, str]) -> Nfa:
    gens = list(gens)
    states = ["^"] + gens
    edges = [(s, x, x) for s in states for x in gens if s == "^" or inverse[s] != x]
    return Nfa.build(states, ["^"], states, edges, gens).renumbered()


def build_free_bundle(rank: int, order: Iterable[str] | None = None) -> GroupBundle:
    base = free_generators(rank)
    gens = [y for x in base for y in (x, x + INV)]
    inverse = {x: inverse_name(x) for x in gens}
    pairs = tuple(((x, inverse[x]), ()) for x in gens)
    order = tuple(order) if order is not None else tuple(gens)
    return GroupBundle(gens, inverse, pairs, 0, 1, 0, order, reduced_word_dfa(order, inverse),
                       c_bound_coeffs=(0, 0), name=f"free{rank}")


def free_qg_acceptor(b: GroupBundle, lam, mu) -> Nfa:
    """DFA for (1, mu)-quasigeodesic words of a free group.

    A state records, for every suffix start, the number of cancellations seen
    so far and the top of the reduced stack, deep enough for the cancellations
    still allowed.
    """
    if Fraction(lam) != 1:
        raise NotImplementedError("free quasigeodesic acceptors are generated for lambda = 1 only")
    c = int(Fraction(mu) // 2)
    inv = b.inverse

    def push(entries, x):
        out = {(0, ())}
        for k, top in entries:
            if top and top[-1] == inv[x]:
                if k + 1 > c:
                    return None
                out.add((k + 1, top[:-1]))
            else:
                keep = c - k + 1
                out.add((k, (top + (x,))[-keep:]))
        return frozenset(out)

    start = frozenset({(0, ())})
    index = {start: 0}
    queue = deque([start])
    edges = []
    while queue:
        s = queue.popleft()
        for x in b.order:
            t = push(s, x)
            if t is None:
                continue
            if t not in index:
                index[t] = len(index)
                queue.append(t)
            edges.append((index[s], index[t], x))
    states = list(range(len(index)))
    return Nfa.build(states, [0], states, edges, b.gens)


def qg_acceptor(b: GroupBundle, lam, mu) -> Nfa:
    key = (Fraction(lam), Fraction(mu))
    if key in b.qg_acceptors:
        return b.qg_acceptors[key]
    if b.is_free:
        if key == (1, 0) and b.shortlex_acceptor is not None:
            aut = b.shortlex_acceptor
        else:
            aut = free_qg_acceptor(b, *key)
        with b._lock:
            b.qg_acceptors[key] = aut
        return aut
    raise BundleIntegrityError(f"bundle {b.name} supplies no ({key[0]}, {key[1]})-quasigeodesic acceptor")


def default_radius(b: GroupBundle, lam, mu) -> int:
    lam, mu = Fraction(lam), Fraction(mu)
    if b.radius is not None:
        return b.radius
    if b.is_free:
        return int(math.ceil(mu / 2)) + 1
    return int(math.ceil(2 * Fraction(b.delta) + lam * mu + mu + 2))


def _one_state(gens) -> Nfa:
    return Nfa.build([0], [0], [0], [(0, 0, x) for x in gens])


def build_equality_automaton(b: GroupBundle, lam, mu, radius: int | None = None,
                             budget: int = 200_000, tapes: tuple | None = None) -> Nfa:
    """Asynchronous 2-tape automaton for pairs of equal (lam, mu)-quasigeodesics.

    Labels are (top, bottom) with None as padding.  A state is (g, s, t): g is
    the normal form of top-prefix^-1 * bottom-prefix, kept inside a ball.

    ``tapes`` replaces the quasigeodesic acceptors on the two tapes; a None
    entry leaves that tape unchecked.  Such automata are not cached.
    """
    lam, mu = Fraction(lam), Fraction(mu)
    if lam.denominator > 10**6:
        raise ValueError("lambda must be a rational with a small denominator")
    if tapes is None and radius is None and (lam, mu) in b.equality_automata:
        return b.equality_automata[(lam, mu)]
    k = default_radius(b, lam, mu) if radius is None else radius
    key = (lam, mu, k)
    if tapes is None and key in b.equality_automata:
        return b.equality_automata[key]
    if tapes is None:
        q = p = qg_acceptor(b, lam, mu).determinize().renumbered()
    else:
        p, q = (_one_state(b.order) if a is None else a.determinize().renumbered() for a in tapes)
    (p0,) = p.starts
    (q0,) = q.starts
    nf = lambda w: shortlex_normal_form(b, w)
    start = ((), p0, q0)
    index = {start: 0}
    queue = deque([start])
    edges = []
    gens = b.order
    while queue:
        st = queue.popleft()
        g, s, t = st
        moves = []
        for x in gens:
            s2 = p.successors(s, x)
            if not s2:
                continue
            (s2,) = s2
            moves.append(((x, None), nf(b.inv((x,)) + g), s2, t))
            for y in gens:
                t2 = q.successors(t, y)
                if t2:
                    moves.append(((x, y), nf(b.inv((x,)) + g + (y,)), s2, next(iter(t2))))
        for y in gens:
            t2 = q.successors(t, y)
            if t2:
                moves.append(((None, y), nf(g + (y,)), s, next(iter(t2))))
        for lab, g2, s2, t2 in moves:
            if len(g2) > k:
                continue
            nxt = (g2, s2, t2)
            if nxt not in index:
                if len(index) >= budget:
                    raise BudgetExceeded(f"equality automaton ball exceeded {budget} states")
                index[nxt] = len(index)
                queue.append(nxt)
            edges.append((index[st], index[nxt], lab))
    accepts = [i for (g, s, t), i in index.items() if not g and s in p.accepts and t in q.accepts]
    labels = {(x, y) for x in gens + (None,) for y in gens + (None,) if (x, y) != (None, None)}
    aut = Nfa.build(range(len(index)), [0], accepts, edges, labels).trim().renumbered()
    if tapes is not None:
        return aut
    with b._lock:
        b.equality_automata[key] = aut
    return aut


# -- constraint closures -----------------------------------------------------------


def qier_closure(b: GroupBundle, a: Nfa, lam, mu, source=None) -> Nfa:
    """All (lam, mu)-quasigeodesic words representing elements of pi(L(a)).

    ``source`` gives quasigeodesic constants satisfied by L(a) (defaults to the
    bundle's covering constants).
    """
    lam, mu = Fraction(lam), Fraction(mu)
    src = (b.lambda_g, b.mu_g) if source is None else tuple(map(Fraction, source))
    ls, ms = max(lam, src[0]), max(mu, src[1])
    e = build_equality_automaton(b, ls, ms)
    a = a.remove_epsilon()
    start = [(p, q) for p in a.starts for q in e.starts]
    index = {s: i for i, s in enumerate(start)}
    queue = deque(start)
    edges = []
    while queue:
        p, q = st = queue.popleft()
        for (x, y), q2 in e.out_edges(q):
            targets = [p] if x is None else a.successors(p, x)
            for p2 in targets:
                nxt = (p2, q2)
                if nxt not in index:
                    index[nxt] = len(index)
                    queue.append(nxt)
                edges.append((index[st], index[nxt], y))
    accepts = [i for (p, q), i in index.items() if p in a.accepts and q in e.accepts]
    proj = Nfa.build(range(len(index)), [index[s] for s in start], accepts, edges, b.gens)
    proj = proj.trim().remove_epsilon().trim()
    return proj.intersect(qg_acceptor(b, lam, mu)).trim().renumbered()


def benois_reduce(b: GroupBundle, a: Nfa) -> Nfa:
    """Reduced words representing the elements of pi(L(a)) in a free group."""
    edges = set(a.edges)
    while True:
        cur = Nfa.build(a.states, a.starts, a.accepts, edges, a.alphabet)
        new = set()
        for p in cur.states:
            for x in b.gens:
                mid = cur.step(cur.eps_closure([p]), x)
                for r in cur.step(mid, b.inverse[x]):
                    if (p, r, None) not in edges and p != r:
                        new.add((p, r, None))
        if not new:
            break
        edges |= new
    sat = Nfa.build(a.states, a.starts, a.accepts, edges, b.gens).remove_epsilon()
    red = reduced_word_dfa(b.gens, b.inverse)
    return sat.intersect(red).trim().renumbered()


# -- fixtures and files --------------------------------------------------------------


def surface_bundle(genus: int = 2) -> GroupBundle:
    """Closed orientable surface group with the standard one-relator presentation."""
    base = free_generators(2 * genus)
    gens = [y for x in base for y in (x, x + INV)]
    inverse = {x: inverse_name(x) for x in gens}
    rel = []
    for i in range(genus):
        x, y = base[2 * i], base[2 * i + 1]
        rel += [x, y, inverse[x], inverse[y]]
    n = len(rel)
    pairs = {((x, inverse[x])): () for x in gens}
    for word in (rel, [inverse[x] for x in reversed(rel)]):
        for shift in range(n):
            cyc = word[shift:] + word[:shift]
            for k in range(n // 2 + 1, n + 1):
                u = tuple(cyc[:k])
                v = tuple(inverse[x] for x in reversed(cyc[k:]))
                pairs.setdefault(u, v)
    return GroupBundle(gens, inverse, tuple(pairs.items()), delta=2, lambda_g=1, mu_g=2,
                       c_bound_coeffs=(1, 0), name=f"surface{genus}")


def _fmt(x) -> str:
    return str(Fraction(x))


def save_bundle(b: GroupBundle, path: str | Path, acceptors: bool = True) -> None:
    path = Path(path)
    seen, pairs = set(), []
    for x in b.gens:
        if x not in seen:
            seen |= {x, b.inverse[x]}
            pairs.append(f"{x}:{b.inverse[x]}")
    lines = [f"name: {b.name}", "gens: " + " ".join(pairs), "order: " + " ".join(b.order)]
    for u, v in b.dehn_pairs:
        lines.append(f"dehn: {' '.join(u) or EMPTY} -> {' '.join(v) or EMPTY}")
    lines += [f"delta: {_fmt(b.delta)}", f"lambdaG: {_fmt(b.lambda_g)}", f"muG: {_fmt(b.mu_g)}",
              f"cbound: {_fmt(b.c_bound_coeffs[0])} {_fmt(b.c_bound_coeffs[1])}"]
    if b.radius is not None:
        lines.append(f"radius: {b.radius}")
    if acceptors and b.shortlex_acceptor is not None:
        rel = path.with_suffix(".shortlex.nfa")
        rel.write_text(nfa_to_text(b.shortlex_acceptor))
        lines.append(f"acceptor shortlex {rel.name}")
    path.write_text("\n".join(lines) + "\n")


def load_bundle(path: str | Path) -> GroupBundle:
    path = Path(path)
    inverse, order, pairs = {}, [], []
    gens = []
    kw: dict = {"name": path.stem}
    acceptors, equality = {}, {}
    shortlex = None
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        toks = raw.split()
        if not toks or toks[0].startswith("%"):
            continue
        head, rest = toks[0], toks[1:]
        try:
            if head == "name:":
                kw["name"] = rest[0]
            elif head == "gens:":
                for tok in rest:
                    x, _, y = tok.partition(":")
                    y = y or x
                    for z in (x, y):
                        if z not in gens:
                            gens.append(z)
                    inverse[x], inverse[y] = y, x
            elif head == "order:":
                order = rest
            elif head == "dehn:":
                arrow = rest.index("->")
                u = [t for t in rest[:arrow] if t != EMPTY]
                v = [t for t in rest[arrow + 1:] if t != EMPTY]
                pairs.append((tuple(u), tuple(v)))
            elif head == "delta:":
                kw["delta"] = Fraction(rest[0])
            elif head == "lambdaG:":
                kw["lambda_g"] = Fraction(rest[0])
            elif head == "muG:":
                kw["mu_g"] = Fraction(rest[0])
            elif head == "cbound:":
                kw["c_bound_coeffs"] = (Fraction(rest[0]), Fraction(rest[1]))
            elif head == "radius:":
                kw["radius"] = int(rest[0])
            elif head == "acceptor":
                role, file = rest[0], rest[1]
                aut = nfa_from_text((path.parent / file).read_text())
                if role == "shortlex":
                    shortlex = aut
                elif role.startswith("qg:"):
                    _, lam, mu = role.split(":")
                    acceptors[(Fraction(lam), Fraction(mu))] = aut
                else:
                    raise ValueError(f"unknown acceptor role {role!r}")
            elif head == "equality":
                lam, mu, file = rest
                equality[(Fraction(lam), Fraction(mu))] = nfa_from_text((path.parent / file).read_text())
            else:
                raise ValueError(f"unknown directive {head!r}")
        except (IndexError, ValueError) as exc:
            raise BundleIntegrityError(f"{path}:{lineno}: {exc}") from exc
    b = GroupBundle(gens, inverse, tuple(pairs), order=tuple(order), shortlex_acceptor=shortlex,
                    qg_acceptors=acceptors, equality_automata=equality, **kw)
    if b.is_free and b.shortlex_acceptor is None:
        b.shortlex_acceptor = reduced_word_dfa(b.order, b.inverse)
    return b


def resolve_bundle(name: str) -> GroupBundle:
    """``free<k>``, ``surface<g>`` or a bundle file path."""
    if name.startswith("free") and name[4:].isdigit():
        return build_free_bundle(int(name[4:]))
    if name.startswith("surface") and name[7:].isdigit():
        return surface_bundle(int(name[7:]))
    return load_bundle(name)


def parse_word(b: GroupBundle | None, text: str | Iterable[str]) -> tuple:
    toks = text.split() if isinstance(text, str) else list(text)
    if toks == [EMPTY] or toks == ["1"]:
        return ()
    return b.check_word(toks) if b is not None else tuple(toks)


def show(w: Iterable[str]) -> str:
    w = tuple(w)
    return " ".join(w) if w else EMPTY
