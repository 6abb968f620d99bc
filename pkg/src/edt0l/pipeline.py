"""From equations over a hyperbolic group to grammars for their solution sets.

The covering stage sweeps every short tuple c of constant words (checked by
Dehn reduction), solves the lifted system in the free group on S and unions
the results.  The full stage then rewrites covering words into target
representatives and determinizes by copying.
"""
from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .closures import (MarkingBijection, copy_determinize, double, empty_system, hom_image,
                       intersect_regular, project_factor, transduce, union_all)
from .equations import EquationSystem, TriangularSystem, normal_form_words, preprocess
from .grammar import LSystem, classify_language, is_deterministic
from .groups import (BundleIntegrityError, GroupBundle, benois_reduce, build_equality_automaton, dehn_reduce,
                     qg_acceptor, qier_closure)
from .nfa import Nfa, chain
from .solver import SEP, FreeSolverRequest, SolverReport, free_bundle_on, solve_free

log = logging.getLogger(__name__)


@dataclass
class Target:
    kind: str = "shortlex"  # or "acceptor"
    acceptor: Nfa | None = None
    mode: str = "bijection"  # or "surjection"
    lam: Fraction = Fraction(1)
    mu: Fraction = Fraction(0)

    def __post_init__(self):
        if self.kind not in ("shortlex", "acceptor"):
            raise ValueError(f"unknown target kind {self.kind!r}")
        if self.mode not in ("bijection", "surjection"):
            raise ValueError(f"unknown target mode {self.mode!r}")
        if self.kind == "acceptor" and self.acceptor is None:
            raise ValueError("an acceptor target needs an automaton")
        self.lam, self.mu = _rational(self.lam), Fraction(self.mu)


def _rational(x) -> Fraction:
    if isinstance(x, float) and not math.isfinite(x):
        raise ValueError("quasigeodesic constants must be finite")
    q = Fraction(x)
    if q.denominator > 10**6:
        raise ValueError(f"lambda={x} is not a rational with a small denominator")
    return q


@dataclass
class PipelineConfig:
    c_bound: int | None = None
    lam: Fraction | None = None
    mu: Fraction | None = None
    solver_bound: int = 3
    target: Target = field(default_factory=Target)
    backend: str = "brute"
    probe: int = 2
    budget: int = 200_000
    jobs: int = 1

    def __post_init__(self):
        if self.c_bound is not None and self.c_bound < 0:
            raise ValueError("c_bound must be >= 0")


@dataclass
class CoverReport:
    grammar: LSystem
    per_c: dict  # c-tuple -> SolverReport
    classification: str
    solutions: frozenset  # tuples over the original variables
    notes: list = field(default_factory=list)


def c_words(b: GroupBundle, bound: int) -> list[tuple]:
    """Freely reduced words of length <= bound, shortlex ordered."""
    return normal_form_words(free_bundle_on(b), bound)


def c_triples(b: GroupBundle, bound: int) -> list[tuple]:
    words = c_words(b, bound)
    return [(x, y, z) for x in words for y in words for z in words if not dehn_reduce(b, x + y + z)]


def forbidden_words(b: GroupBundle) -> list[tuple]:
    """Words of length <= mu_G that are trivial in G; a nontrivial element avoids them."""
    n = int(b.mu_g)
    return [w for k in range(n + 1) for w in itertools.product(b.order, repeat=k) if not dehn_reduce(b, w)]


def _maybe_qg(b: GroupBundle, lam, mu) -> Nfa | None:
    try:
        return qg_acceptor(b, lam, mu)
    except (BundleIntegrityError, NotImplementedError):
        return None


def variable_constraints(b: GroupBundle, tri: TriangularSystem) -> tuple[dict, list]:
    """Constraint automata handed to the free solver, plus notes on what was skipped."""
    notes = []
    qg = _maybe_qg(b, b.lambda_g, b.mu_g)
    if qg is None:
        notes.append(f"no quasigeodesic acceptor for ({b.lambda_g}, {b.mu_g}); original variables unconstrained")
    out = {}
    for v in tri.originals:
        aut = qg
        user = tri.constraints.get(v)
        if user is not None:
            src = benois_reduce(b, user) if b.is_free else user
            closed = qier_closure(b, src, b.lambda_g, b.mu_g, source=(1, 0) if b.is_free else None)
            aut = closed if aut is None else aut.intersect(closed)
        if aut is not None:
            out[v] = aut
    forbid = Nfa.from_words(forbidden_words(b)).complement(b.order)
    for v in tri.nontrivial:
        out[v] = forbid if qg is None else qg.intersect(forbid)
    return out, notes


def lift_system(b: GroupBundle, tri: TriangularSystem, cfg: PipelineConfig) -> Iterator[tuple]:
    """Stream (c, request) pairs in lexicographic order of c."""
    q = len(tri.equations)
    bound = b.c_bound(q) if cfg.c_bound is None else cfg.c_bound
    triples = c_triples(b, bound)
    free = free_bundle_on(b)
    constraints, _ = variable_constraints(b, tri)
    for c in itertools.product(triples, repeat=q):
        yield c, FreeSolverRequest(free, tri, c, constraints, cfg.solver_bound, tri.variables)


def _solve_one(args):
    req, backend, probe = args
    return solve_free(req, backend, probe)


def _merge_class(labels) -> str:
    labels = set(labels)
    for k in ("infinite-flagged", "unknown-beyond-bound"):
        if k in labels:
            return k
    return "finite" if "finite" in labels else "empty"


def c_tag(c: tuple) -> str:
    return "c(" + ";".join(",".join(".".join(w) or "1" for w in t) for t in c) + ")/"


def solve_covering(b: GroupBundle, sys: EquationSystem, cfg: PipelineConfig) -> CoverReport:
    tri = preprocess(sys)
    r, m = len(tri.originals), len(tri.variables)
    if r == 0:
        raise ValueError("the system has no variables")
    stream = list(lift_system(b, tri, cfg))
    work = [(req, cfg.backend, cfg.probe) for _, req in stream]
    if cfg.jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            reports = list(pool.map(_solve_one, work, chunksize=max(1, len(work) // (4 * cfg.jobs))))
    else:
        reports = [_solve_one(w) for w in work]
    per_c, parts, tags, sols = {}, [], [], set()
    for (c, _), rep in zip(stream, reports):
        per_c[c] = rep
        if not rep.solutions:
            continue
        parts.append(rep.grammar if r == m else project_factor(rep.grammar, 1, r, m, SEP))
        tags.append(c_tag(c))
        sols |= {s[:r] for s in rep.solutions}
    terminals = set(b.gens) | {SEP}
    grammar = union_all(parts, tags, terminals) if parts else empty_system(terminals)
    _, notes = variable_constraints(b, tri)
    return CoverReport(grammar, per_c, _merge_class(rep.classification for rep in reports),
                       frozenset(sols), notes)


# -- full solution sets ----------------------------------------------------------------


def target_acceptor(b: GroupBundle, target: Target) -> tuple[Nfa, Fraction, Fraction]:
    if target.kind == "shortlex":
        if b.shortlex_acceptor is None:
            raise BundleIntegrityError(f"bundle {b.name} has no shortlex acceptor")
        return b.shortlex_acceptor, Fraction(1), Fraction(0)
    return target.acceptor, target.lam, target.mu


def constraint_chain(b: GroupBundle, sys: EquationSystem, lam, mu) -> Nfa | None:
    """Words u_1 # ... # u_r with u_i in the closure of X_i's constraint (None if unconstrained)."""
    if not sys.constraints:
        return None
    parts = []
    for v in sys.variables:
        user = sys.constraints.get(v)
        if user is None:
            parts.append(qg_acceptor(b, lam, mu))
        else:
            src = benois_reduce(b, user) if b.is_free else user
            parts.append(qier_closure(b, src, lam, mu, source=(1, 0) if b.is_free else None))
    return chain(parts, SEP)


def rewriting_transducer(b: GroupBundle, eq: Nfa, f: MarkingBijection) -> Nfa:
    """Reads u f(u); writes v f(u) with v tracked against u by the equality automaton.

    Each component is rewritten separately; '#' is copied at accepting states
    of ``eq`` and resets it.  The marked half is copied verbatim.
    """
    (e0,) = eq.starts
    edges = []
    for p, q, (x, y) in eq.edges:
        edges.append((("h1", p), ("h1", q), (x, (y,) if y is not None else ())))
    for p in eq.accepts:
        edges.append((("h1", p), ("h1", e0), (SEP, (SEP,))))
        edges.append((("h1", p), ("h2",), (None, ())))
    for x in sorted(f.marked):
        edges.append((("h2",), ("h2",), (x, (x,))))
    states = [("h1", p) for p in eq.states] + [("h2",)]
    return Nfa.build(states, [("h1", e0)], [("h2",)], edges)


def solve_full(b: GroupBundle, sys: EquationSystem, cfg: PipelineConfig) -> SolverReport:
    cover = solve_covering(b, sys, cfg)
    notes = list(cover.notes)
    lam = _rational(cfg.lam if cfg.lam is not None else b.lambda_g)
    mu = Fraction(cfg.mu if cfg.mu is not None else b.mu_g)
    tgt, lam_t, mu_t = target_acceptor(b, cfg.target)
    lam_s, mu_s = max(lam, lam_t), max(mu, mu_t)
    terminals = set(b.gens) | {SEP}
    deterministic_claim = cfg.target.mode == "bijection"
    if not cover.solutions:
        return SolverReport(empty_system(terminals), f"bounded({cfg.solver_bound})", "empty", (),
                            tuple(notes + ["covering set is empty"]))
    g = cover.grammar
    filt = constraint_chain(b, sys, lam, mu)
    if filt is not None:
        g = intersect_regular(g, filt, budget=cfg.budget)
    f = MarkingBijection.dagger(sorted(terminals))
    g = double(g, f)
    eq = build_equality_automaton(b, lam_s, mu_s, budget=cfg.budget, tapes=(None, tgt))
    g = transduce(g, rewriting_transducer(b, eq, f), terminals | f.marked, budget=cfg.budget)
    if deterministic_claim:
        copied = copy_determinize(g, f)
        out = copied.first
    else:
        out = hom_image(g, {c: (() if c in f.marked else (c,)) for c in g.terminals})
    if deterministic_claim and not is_deterministic(out):
        raise RuntimeError("copying stage did not produce deterministic tables")
    cls = cover.classification
    if classify_language(out) == "empty":
        cls = "empty"
    return SolverReport(out, f"bounded({cfg.solver_bound})", cls, tuple(sorted(cover.solutions)), tuple(notes))
