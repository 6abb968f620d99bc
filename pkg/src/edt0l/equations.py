"""Systems of equations and inequations over a group, with rational constraints."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .grammar import EMPTY, nfa_from_text
from .groups import (INV, GroupBundle, benois_reduce, dehn_reduce, free_reduce, inverse_name,
                     qier_closure, shortlex_normal_form)
from .nfa import Nfa


class SystemSyntaxError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {msg}")
        self.line, self.col = line, col


# A term is ("var", name, +1/-1) or ("const", word).
Term = tuple


def var(name: str, sign: int = 1) -> Term:
    return ("var", name, sign)


def const(word: Iterable[str]) -> Term:
    return ("const", tuple(word))


@dataclass(frozen=True)
class SystemSize:
    n1: int
    n2: int


@dataclass(frozen=True, eq=False)
class EquationSystem:
    variables: tuple
    equations: tuple  # tuple of term tuples, each asserted = 1
    inequations: tuple = ()  # asserted != 1
    constraints: Mapping[str, Nfa] = field(default_factory=dict)

    def size(self) -> SystemSize:
        n1 = sum(_token_count(e) for e in self.equations + self.inequations)
        return SystemSize(n1, sum(len(a.states) for a in self.constraints.values()))

    def __str__(self) -> str:
        lines = ["vars: " + " ".join(self.variables)]
        lines += ["eq: " + render(e) + " = 1" for e in self.equations]
        lines += ["neq: " + render(e) + " != 1" for e in self.inequations]
        return "\n".join(lines)


def _token_count(terms) -> int:
    return sum(1 if t[0] == "var" else len(t[1]) for t in terms)


def render(terms) -> str:
    out = []
    for t in terms:
        if t[0] == "var":
            out.append(t[1] + (INV if t[2] < 0 else ""))
        else:
            out.extend(t[1])
    return " ".join(out) or EMPTY


def invert_terms(terms) -> tuple:
    out = []
    for t in reversed(terms):
        if t[0] == "var":
            out.append(var(t[1], -t[2]))
        else:
            out.append(const(inverse_name(x) for x in reversed(t[1])))
    return tuple(out)


def substitute(terms, values: Mapping[str, tuple], inverse: Mapping[str, str]) -> tuple:
    w = []
    for t in terms:
        if t[0] == "var":
            v = values[t[1]]
            w.extend(v if t[2] > 0 else (inverse[x] for x in reversed(v)))
        else:
            w.extend(t[1])
    return tuple(w)


# -- parsing ---------------------------------------------------------------------------


def _parse_side(tokens, variables, gens, lineno, col0, raw) -> list:
    terms = []
    for tok in tokens:
        col = raw.find(tok, col0) + 1
        col0 = max(col0, col)
        if tok in (EMPTY, "1"):
            continue
        base, sign = (tok[: -len(INV)], -1) if tok.endswith(INV) else (tok, 1)
        if base in variables:
            terms.append(var(base, sign))
        elif gens is None or tok in gens:
            terms.append(const((tok,)))
        else:
            raise SystemSyntaxError(f"unknown symbol {tok!r}", lineno, col)
    return terms


def parse_system(text: str, bundle: GroupBundle | None = None,
                 base_dir: str | Path = ".") -> tuple[EquationSystem, SystemSize]:
    variables: list[str] = []
    eqs, neqs = [], []
    constraints = {}
    gens = set(bundle.gens) if bundle is not None else None
    for lineno, raw in enumerate(text.splitlines(), 1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("%"):
            continue
        head, _, rest = stripped.partition(" ")
        col0 = raw.find(head) + len(head)
        if head == "vars:":
            variables = rest.split()
            for v in variables:
                if gens is not None and v in gens:
                    raise SystemSyntaxError(f"variable {v!r} clashes with a generator", lineno, 1)
        elif head == "gens-from-bundle":
            continue
        elif head in ("eq:", "neq:"):
            sym = "=" if head == "eq:" else "!="
            toks = rest.split()
            if sym not in toks:
                raise SystemSyntaxError(f"expected '{sym}'", lineno, len(raw) + 1)
            k = toks.index(sym)
            lhs = _parse_side(toks[:k], variables, gens, lineno, col0, raw)
            rhs = _parse_side(toks[k + 1:], variables, gens, lineno, raw.find(sym, col0) + len(sym), raw)
            terms = tuple(lhs) + invert_terms(rhs)
            (eqs if head == "eq:" else neqs).append(_merge_consts(terms))
        elif head == "constraint:":
            parts = rest.split()
            if len(parts) != 2 or parts[0] not in variables:
                raise SystemSyntaxError("expected 'constraint: <var> <nfa-file>'", lineno, col0 + 2)
            path = Path(base_dir) / parts[1]
            try:
                constraints[parts[0]] = nfa_from_text(path.read_text())
            except OSError as exc:
                raise SystemSyntaxError(f"cannot read {path}: {exc.strerror}", lineno, raw.find(parts[1]) + 1)
        else:
            raise SystemSyntaxError(f"unknown directive {head!r}", lineno, raw.find(head) + 1)
    sys = EquationSystem(tuple(variables), tuple(eqs), tuple(neqs), constraints)
    return sys, sys.size()


def load_system(path: str | Path, bundle: GroupBundle | None = None) -> EquationSystem:
    path = Path(path)
    return parse_system(path.read_text(), bundle, path.parent)[0]


def _merge_consts(terms) -> tuple:
    out = []
    for t in terms:
        if t[0] == "const" and out and out[-1][0] == "const":
            out[-1] = const(out[-1][1] + t[1])
        else:
            out.append(t)
    return tuple(out)


# -- preprocessing ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TriangularSystem:
    """Every equation is a triple of terms whose product is 1.

    ``definitions`` express each fresh variable as a term sequence over the
    original variables and earlier fresh variables.
    """

    variables: tuple  # originals first, then fresh variables in creation order
    originals: tuple
    equations: tuple
    nontrivial: frozenset
    definitions: Mapping[str, tuple]
    constraints: Mapping[str, Nfa]

    def positions(self) -> dict:
        return {v: i for i, v in enumerate(self.variables)}


def _split_tokens(terms) -> list:
    """One term per token: every constant letter stands alone."""
    out = []
    for t in terms:
        if t[0] == "var":
            out.append(t)
        else:
            out.extend(const((x,)) for x in t[1])
    return out


def preprocess(sys: EquationSystem) -> TriangularSystem:
    taken = set(sys.variables)

    def fresh(base):
        i = 1
        while f"{base}{i}" in taken:
            i += 1
        taken.add(f"{base}{i}")
        return f"{base}{i}"

    definitions = {}
    fresh_vars = []
    nontrivial = set()
    eqs = [tuple(e) for e in sys.equations]
    for terms in sys.inequations:
        n = fresh("N")
        fresh_vars.append(n)
        nontrivial.add(n)
        definitions[n] = tuple(terms)
        eqs.append(tuple(terms) + (var(n, -1),))
    triangular = []
    for terms in eqs:
        toks = _split_tokens(terms)
        if not toks:
            continue
        while len(toks) < 3:
            toks.append(const(()))
        if len(toks) == 3:
            triangular.append(tuple(toks))
            continue
        prev = None
        for i in range(len(toks) - 2):
            if i == len(toks) - 3:
                triangular.append((prev, toks[-2], toks[-1]))
                break
            t = fresh("T")
            fresh_vars.append(t)
            if prev is None:
                definitions[t] = (toks[0], toks[1])
                triangular.append((toks[0], toks[1], var(t, -1)))
            else:
                definitions[t] = (prev, toks[i + 1])
                triangular.append((prev, toks[i + 1], var(t, -1)))
            prev = var(t, 1)
    return TriangularSystem(tuple(sys.variables) + tuple(fresh_vars), tuple(sys.variables), tuple(triangular),
                            frozenset(nontrivial), definitions, dict(sys.constraints))


def derive_fresh(tri: TriangularSystem, values: Mapping[str, tuple], reduce) -> dict:
    """Extend an assignment of the original variables through the definitions."""
    out = dict(values)
    for v in tri.variables[len(tri.originals):]:
        out[v] = reduce(_subst_any(tri.definitions[v], out))
    return out


def _subst_any(terms, values):
    w = []
    for t in terms:
        if t[0] == "var":
            v = values[t[1]]
            if t[2] > 0:
                w.extend(v)
            else:
                w.extend(inverse_name(x) for x in reversed(v))
        else:
            w.extend(t[1])
    return tuple(w)


# -- brute-force oracle ------------------------------------------------------------------


def normal_form_words(b: GroupBundle, max_len: int) -> list[tuple]:
    """All shortlex normal forms of length <= max_len, in shortlex order."""
    if b.is_free:
        out, layer = [()], [()]
        for _ in range(max_len):
            layer = [w + (x,) for w in layer for x in b.order if not w or b.inverse[w[-1]] != x]
            out.extend(layer)
        return out
    seen = {}
    for n in range(max_len + 1):
        for w in itertools.product(b.order, repeat=n):
            v = shortlex_normal_form(b, w)
            if len(v) <= max_len:
                seen.setdefault(v, None)
    return sorted(seen, key=b.shortlex_key)


def constraint_membership(b: GroupBundle, a: Nfa):
    """Predicate on normal-form words: does the element lie in pi(L(a))?"""
    if b.is_free:
        red = benois_reduce(b, a)
        return lambda w: red.accepts_word(free_reduce(b, w))
    closure = qier_closure(b, a, 1, 0)
    return lambda w: closure.accepts_word(shortlex_normal_form(b, w))


def oracle_solutions(b: GroupBundle, sys: EquationSystem, max_len: int) -> set:
    """Tuples of normal forms (each of length <= max_len) solving the system."""
    words = normal_form_words(b, max_len)
    members = {v: constraint_membership(b, a) for v, a in sys.constraints.items()}
    domains = [[w for w in words if v not in members or members[v](w)] for v in sys.variables]
    out = set()
    for combo in itertools.product(*domains):
        values = dict(zip(sys.variables, combo))
        if all(not dehn_reduce(b, substitute(e, values, b.inverse)) for e in sys.equations) and \
                all(dehn_reduce(b, substitute(e, values, b.inverse)) for e in sys.inequations):
            out.add(combo)
    return out


def join_tuple(t: Iterable[tuple], sep: str = "#") -> tuple:
    out = []
    for i, w in enumerate(t):
        if i:
            out.append(sep)
        out.extend(w)
    return tuple(out)


def split_tuple(w: Iterable[str], sep: str = "#") -> tuple:
    parts, cur = [], []
    for x in w:
        if x == sep:
            parts.append(tuple(cur))
            cur = []
        else:
            cur.append(x)
    parts.append(tuple(cur))
    return tuple(parts)
