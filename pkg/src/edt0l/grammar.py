"""ET0L / EDT0L systems with rational control.

A system rewrites a seed word by applying tables along words accepted by a
control automaton whose edges are labelled with table identifiers.  Words
are tuples of symbol strings; ``EMPTY`` (``@``) is the empty word in text.
"""
from __future__ import annotations

import itertools
from collections import defaultdict, deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

from .nfa import Nfa

EMPTY = "@"

Word = tuple


class AlphabetMismatch(ValueError):
    pass


class GrammarSyntaxError(ValueError):
    def __init__(self, msg: str, line: int | None = None, col: int | None = None):
        where = "" if line is None else f"line {line}" + ("" if col is None else f", col {col}") + ": "
        super().__init__(where + msg)
        self.line, self.col = line, col


@dataclass(frozen=True, eq=False)
class Table:
    """Rewrite rules ``letter -> word``; letters without rules are fixed."""

    rules: Mapping[str, tuple]

    @classmethod
    def from_rules(cls, pairs: Iterable[tuple[str, Iterable[str]]]) -> "Table":
        acc = defaultdict(set)
        for c, v in pairs:
            acc[c].add(tuple(v))
        return cls({c: tuple(sorted(vs)) for c, vs in sorted(acc.items())})

    @classmethod
    def hom(cls, mapping: Mapping[str, Iterable[str]]) -> "Table":
        return cls.from_rules((c, v) for c, v in mapping.items())

    def choices(self, c: str) -> tuple:
        return self.rules.get(c, ((c,),))

    @cached_property
    def deterministic(self) -> bool:
        return all(len(vs) == 1 for vs in self.rules.values())

    def letters(self) -> set:
        out = set(self.rules)
        for vs in self.rules.values():
            for v in vs:
                out.update(v)
        return out

    def moves(self, c: str) -> bool:
        """True if some rule rewrites ``c`` to something other than itself."""
        return any(v != (c,) for v in self.choices(c))


IDENTITY = Table({})


@dataclass(frozen=True, eq=False)
class LSystem:
    alphabet: frozenset
    terminals: frozenset
    seed: Word
    control: Nfa
    tables: Mapping[str, Table]

    def __post_init__(self):
        object.__setattr__(self, "alphabet", frozenset(self.alphabet))
        object.__setattr__(self, "terminals", frozenset(self.terminals))
        object.__setattr__(self, "seed", tuple(self.seed))
        if not self.terminals <= self.alphabet:
            raise AlphabetMismatch(f"terminals outside alphabet: {sorted(self.terminals - self.alphabet)}")
        if not set(self.seed) <= self.alphabet:
            raise AlphabetMismatch(f"seed letters outside alphabet: {sorted(set(self.seed) - self.alphabet)}")
        for tid, t in self.tables.items():
            extra = t.letters() - self.alphabet
            if extra:
                raise AlphabetMismatch(f"table {tid} uses letters outside alphabet: {sorted(extra)[:5]}")
        for _, _, lab in self.control.edges:
            if lab is None:
                raise ValueError("control edges must carry table identifiers")
            if lab not in self.tables:
                raise ValueError(f"control edge uses unknown table {lab!r}")

    @cached_property
    def used_tables(self) -> dict:
        return {lab: self.tables[lab] for _, _, lab in self.control.edges}

    @cached_property
    def dead_letters(self) -> frozenset:
        """Nonterminals that no table ever rewrites: forms containing them are dead."""
        tabs = self.used_tables.values()
        return frozenset(c for c in self.alphabet - self.terminals if not any(t.moves(c) for t in tabs))

    @cached_property
    def min_yield(self) -> dict:
        """Lower bound on the terminal length any occurrence of a letter can still contribute."""
        inf = float("inf")
        m = {c: (1 if c in self.terminals else inf) for c in self.alphabet}
        rules = [(c, v) for t in self.used_tables.values() for c, vs in t.rules.items() for v in vs]
        changed = True
        while changed:
            changed = False
            for c, v in rules:
                s = sum(m[x] for x in v)
                if s < m[c]:
                    m[c] = s
                    changed = True
        return m

    @cached_property
    def persistent_terminals(self) -> frozenset:
        tabs = self.used_tables.values()
        return frozenset(c for c in self.terminals if not any(t.moves(c) for t in tabs))

    def __repr__(self) -> str:
        return (f"LSystem(|C|={len(self.alphabet)}, |Σ|={len(self.terminals)}, seed={' '.join(self.seed) or EMPTY}, "
                f"nodes={len(self.control.states)}, edges={len(self.control.edges)})")


def is_deterministic(sys: LSystem) -> bool:
    return all(t.deterministic for t in sys.used_tables.values())


def apply_table(table: Table, w: Iterable[str], alphabet: Iterable[str] | None = None,
                cap: int | None = None) -> set:
    """All words obtained by rewriting every letter of ``w`` with a rule of ``table``."""
    w = tuple(w)
    if alphabet is not None:
        alphabet = set(alphabet)
        bad = [c for c in w if c not in alphabet]
        if bad:
            raise AlphabetMismatch(f"letter {bad[0]!r} outside the extended alphabet")
    if table.deterministic:
        out = tuple(itertools.chain.from_iterable(table.choices(c)[0] for c in w))
        return set() if cap is not None and len(out) > cap else {out}
    partial = {()}
    for c in w:
        opts = table.choices(c)
        nxt = set()
        for p in partial:
            for v in opts:
                q = p + v
                if cap is None or len(q) <= cap:
                    nxt.add(q)
        partial = nxt
        if not partial:
            break
    return partial


def default_cap(sys: LSystem, max_len: int) -> int:
    return 4 * max_len + len(sys.seed)


def enumerate_language(sys: LSystem, max_len: int, sentential_cap: int | None = None) -> set:
    """Terminal words of length <= max_len derivable with forms no longer than the cap."""
    if sentential_cap is None:
        # acyclic control: every derivation is finite, so no cap is needed
        cap = float("inf") if control_is_acyclic(sys) else default_cap(sys, max_len)
    else:
        cap = sentential_cap
    if cap < max_len:
        raise ValueError("sentential_cap must be >= max_len")
    least = sys.min_yield
    terms = sys.terminals

    def viable(form):
        return len(form) <= cap and sum(least[c] for c in form) <= max_len

    result = set()
    start = [(p, sys.seed) for p in sys.control.starts]
    seen = {s for s in start if viable(s[1])}
    queue = deque(seen)
    while queue:
        p, form = queue.popleft()
        if p in sys.control.accepts and len(form) <= max_len and all(c in terms for c in form):
            result.add(form)
        for tid, p2 in sys.control.out_edges(p):
            for nxt in apply_table(sys.tables[tid], form, cap=cap):
                key = (p2, nxt)
                if key not in seen and viable(nxt):
                    seen.add(key)
                    queue.append(key)
    return result


def _trimmed_control(sys: LSystem) -> Nfa:
    return sys.control.trim()


def control_is_acyclic(sys: LSystem) -> bool:
    ctl = _trimmed_control(sys)
    indeg = defaultdict(int)
    adj = defaultdict(list)
    for a, b, _ in ctl.edges:
        adj[a].append(b)
        indeg[b] += 1
    queue = deque(s for s in ctl.states if indeg[s] == 0)
    n = 0
    while queue:
        s = queue.popleft()
        n += 1
        for t in adj[s]:
            indeg[t] -= 1
            if indeg[t] == 0:
                queue.append(t)
    return n == len(ctl.states)


def finite_language(sys: LSystem, budget: int = 2_000_000) -> set:
    """Exact language of a system whose (trimmed) control is acyclic."""
    if not control_is_acyclic(sys):
        raise ValueError("finite_language needs an acyclic control automaton")
    ctl = _trimmed_control(sys)
    dead = sys.dead_letters
    result = set()
    level = {(p, sys.seed) for p in ctl.starts}
    seen = 0
    while level:
        nxt = set()
        for p, form in level:
            if p in ctl.accepts and all(c in sys.terminals for c in form):
                result.add(form)
            for tid, p2 in ctl.out_edges(p):
                for w in apply_table(sys.tables[tid], form):
                    if not any(c in dead for c in w):
                        nxt.add((p2, w))
        seen += len(nxt)
        if seen > budget:
            raise RuntimeError(f"finite_language exceeded {budget} configurations")
        level = nxt
    return result


# -- decision procedures ---------------------------------------------------------


@dataclass(frozen=True)
class Classification:
    kind: str  # "empty" | "finite" | "infinite"
    exact: bool

    def __str__(self) -> str:
        return self.kind if self.exact else f"{self.kind} (semi-decision)"


def _alph(table: Table, letters: frozenset) -> frozenset:
    out = set()
    for c in letters:
        out.update(table.choices(c)[0])
    return frozenset(out)


def _classify_deterministic(sys: LSystem) -> str:
    tables = sys.tables
    ctl = sys.control
    a0 = frozenset(sys.seed)
    fwd_edges = defaultdict(list)  # (p', A') -> [((p, A), tid)]
    reach = {(p, a0) for p in ctl.starts}
    queue = deque(reach)
    while queue:
        p, a = queue.popleft()
        for tid, p2 in ctl.out_edges(p):
            a2 = _alph(tables[tid], a)
            fwd_edges[(p2, a2)].append(((p, a), tid))
            if (p2, a2) not in reach:
                reach.add((p2, a2))
                queue.append((p2, a2))
    # backward: nodes (p, A, B) where B are the letters that survive to the end
    finals = [(p, a, a) for (p, a) in reach if p in ctl.accepts and a <= sys.terminals]
    nodes = set(finals)
    edges = []
    queue = deque(finals)
    while queue:
        p2, a2, b2 = node = queue.popleft()
        for (p, a), tid in fwd_edges.get((p2, a2), ()):
            t = tables[tid]
            b = frozenset(c for c in a if any(x in b2 for x in t.choices(c)[0]))
            growing = any(sum(x in b2 for x in t.choices(c)[0]) >= 2 for c in b)
            src = (p, a, b)
            edges.append((src, node, growing))
            if src not in nodes:
                nodes.add(src)
                queue.append(src)
    starts = {n for n in nodes if n[0] in ctl.starts and n[1] == a0}
    if not starts:
        return "empty"
    adj = defaultdict(list)
    for s, d, _ in edges:
        adj[s].append(d)
    live = set(starts)
    stack = list(starts)
    while stack:
        n = stack.pop()
        for m in adj[n]:
            if m not in live:
                live.add(m)
                stack.append(m)
    comp = _scc(live, adj)
    for s, d, growing in edges:
        if growing and s in live and d in live and comp[s] == comp[d]:
            return "infinite"
    return "finite"


def _scc(nodes: set, adj: Mapping) -> dict:
    """Tarjan's algorithm (iterative); returns node -> component id."""
    index, low, comp = {}, {}, {}
    stack, on = [], set()
    counter = itertools.count()
    cid = itertools.count()
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter([m for m in adj[root] if m in nodes]))]
        index[root] = low[root] = next(counter)
        stack.append(root)
        on.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = next(counter)
                    stack.append(w)
                    on.add(w)
                    work.append((w, iter([m for m in adj[w] if m in nodes])))
                    advanced = True
                    break
                if w in on:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                c = next(cid)
                while True:
                    w = stack.pop()
                    on.discard(w)
                    comp[w] = c
                    if w == v:
                        break
    return comp


def _nonempty_nondeterministic(sys: LSystem, budget: int = 200_000) -> bool:
    # one rule per letter suffices: occurrences evolve independently
    a0 = frozenset(sys.seed)
    seen = {(p, a0) for p in sys.control.starts}
    queue = deque(seen)
    while queue:
        p, a = queue.popleft()
        if p in sys.control.accepts and a <= sys.terminals:
            return True
        for tid, p2 in sys.control.out_edges(p):
            t = sys.tables[tid]
            options = [{frozenset(v) for v in t.choices(c)} for c in sorted(a)]
            for combo in itertools.product(*options):
                a2 = frozenset().union(*combo) if combo else frozenset()
                if (p2, a2) not in seen:
                    seen.add((p2, a2))
                    if len(seen) > budget:
                        raise RuntimeError("emptiness abstraction exceeded budget")
                    queue.append((p2, a2))
    return False


def classify(sys: LSystem, horizon: int = 12) -> Classification:
    if is_deterministic(sys):
        return Classification(_classify_deterministic(sys), True)
    if not _nonempty_nondeterministic(sys):
        return Classification("empty", True)
    if control_is_acyclic(sys):
        return Classification("finite", True)
    words = enumerate_language(sys, horizon)
    long = any(len(w) > horizon // 2 for w in words)
    return Classification("infinite" if long else "finite", False)


def classify_language(sys: LSystem) -> str:
    return classify(sys).kind


# -- text format -------------------------------------------------------------------


def _word_text(w: Word) -> str:
    return " ".join(w) if w else EMPTY


def _parse_word(tokens: list[str]) -> Word:
    if tokens == [EMPTY]:
        return ()
    if EMPTY in tokens:
        raise ValueError(f"'{EMPTY}' must stand alone")
    return tuple(tokens)


def _check_token(x) -> str:
    s = str(x)
    if not s or any(ch.isspace() for ch in s) or s == EMPTY:
        raise ValueError(f"identifier {s!r} is not serializable")
    return s


def serialize(sys: LSystem) -> str:
    lines = [
        "alphabet: " + " ".join(sorted(sys.alphabet)),
        "terminals: " + " ".join(sorted(sys.terminals)),
        "seed: " + _word_text(sys.seed),
    ]
    used = set(sys.used_tables)
    for tid in sorted(sys.tables, key=str):
        if tid not in used:
            continue
        t = sys.tables[tid]
        lines.append(f"table {_check_token(tid)}" + (" deterministic" if t.deterministic else "") + ":")
        for c in sorted(t.rules):
            for v in t.rules[c]:
                lines.append(f"  {c} -> {_word_text(v)}")
        fixed = sorted(sys.alphabet - set(t.rules))
        if fixed:
            lines.append("  fixed: " + " ".join(fixed))
    ctl = sys.control
    for s in ctl.states:
        flags = (" start" if s in ctl.starts else "") + (" accept" if s in ctl.accepts else "")
        lines.append(f"node {_check_token(s)}{flags}")
    for a, b, lab in ctl.edges:
        lines.append(f"edge {a} {b} {lab}")
    return "\n".join(lines) + "\n"


def parse(text: str) -> LSystem:
    alphabet = terminals = seed = None
    tables: dict[str, list] = {}
    current = None
    states, starts, accepts, edges = [], [], [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip()
        if not line.strip() or line.lstrip().startswith("%"):
            continue
        indented = raw[:1].isspace()
        toks = line.split()
        try:
            if indented:
                if current is None:
                    raise GrammarSyntaxError("rule outside a table", lineno, 1)
                if toks[0] == "fixed:":
                    continue
                if len(toks) < 3 or toks[1] != "->":
                    raise GrammarSyntaxError("expected 'c -> v'", lineno, len(raw) - len(raw.lstrip()) + 1)
                tables[current].append((toks[0], _parse_word(toks[2:])))
                continue
            current = None
            head = toks[0]
            if head == "alphabet:":
                alphabet = toks[1:]
            elif head == "terminals:":
                terminals = toks[1:]
            elif head == "seed:":
                seed = _parse_word(toks[1:]) if len(toks) > 1 else ()
            elif head == "table":
                if not line.endswith(":") or len(toks) < 2:
                    raise GrammarSyntaxError("expected 'table <id> [deterministic]:'", lineno, 1)
                tid = toks[1].rstrip(":")
                tables.setdefault(tid, [])
                current = tid
            elif head == "node":
                if len(toks) < 2 or set(toks[2:]) - {"start", "accept"}:
                    raise GrammarSyntaxError("expected 'node <id> [start] [accept]'", lineno, 1)
                states.append(toks[1])
                if "start" in toks[2:]:
                    starts.append(toks[1])
                if "accept" in toks[2:]:
                    accepts.append(toks[1])
            elif head == "edge":
                if len(toks) != 4:
                    raise GrammarSyntaxError("expected 'edge <from> <to> <table>'", lineno, 1)
                edges.append((toks[1], toks[2], toks[3]))
            else:
                raise GrammarSyntaxError(f"unknown directive {head!r}", lineno, 1)
        except ValueError as exc:
            if isinstance(exc, GrammarSyntaxError):
                raise
            raise GrammarSyntaxError(str(exc), lineno, 1) from exc
    if alphabet is None or terminals is None or seed is None:
        raise GrammarSyntaxError("missing alphabet/terminals/seed header")
    tabs = {tid: Table.from_rules(rules) for tid, rules in tables.items()}
    try:
        control = Nfa.build(states, starts, accepts, edges)
    except ValueError as exc:
        raise GrammarSyntaxError(str(exc)) from exc
    return LSystem(frozenset(alphabet), frozenset(terminals), seed, control, tabs)


def nfa_to_text(nfa: Nfa) -> str:
    """Line format shared with grammar files; pair labels are written ``x/y``, padding ``$``."""

    def lab(x):
        if x is None:
            return EMPTY
        if isinstance(x, tuple):
            return "/".join("$" if y is None else y for y in x)
        return x

    lines = ["alphabet: " + " ".join(sorted(lab(a) for a in nfa.alphabet))]
    for s in nfa.states:
        flags = (" start" if s in nfa.starts else "") + (" accept" if s in nfa.accepts else "")
        lines.append(f"node {s}{flags}")
    for a, b, x in nfa.edges:
        lines.append(f"edge {a} {b} {lab(x)}")
    return "\n".join(lines) + "\n"


def nfa_from_text(text: str) -> Nfa:
    def lab(x):
        if x == EMPTY:
            return None
        if "/" in x and len(x) > 1:
            top, bot = x.split("/", 1)
            return (None if top == "$" else top, None if bot == "$" else bot)
        return x

    alphabet = None
    states, starts, accepts, edges = [], [], [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        toks = raw.split()
        if not toks or toks[0].startswith("%"):
            continue
        if toks[0] == "alphabet:":
            alphabet = [lab(x) for x in toks[1:]]
        elif toks[0] == "node" and len(toks) >= 2:
            states.append(toks[1])
            if "start" in toks[2:]:
                starts.append(toks[1])
            if "accept" in toks[2:]:
                accepts.append(toks[1])
        elif toks[0] == "edge" and len(toks) == 4:
            edges.append((toks[1], toks[2], lab(toks[3])))
        else:
            raise GrammarSyntaxError(f"cannot parse {raw.strip()!r}", lineno, 1)
    return Nfa.build(states, starts, accepts, edges, alphabet)
