"""Command-line front end: ``python -m edt0l <command> ...``."""
from __future__ import annotations

import argparse
import logging
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import closures
from .equations import SystemSyntaxError, load_system, oracle_solutions, split_tuple
from .grammar import (AlphabetMismatch, GrammarSyntaxError, classify, enumerate_language, nfa_from_text,
                      parse, serialize)
from .groups import BundleIntegrityError, build_free_bundle, resolve_bundle, save_bundle, show
from .nfa import BudgetExceeded
from .pipeline import PipelineConfig, Target, solve_full
from .solver import SEP

FIXTURES = Path(__file__).parent / "fixtures"


class UsageError(Exception):
    pass


def _find(name: str, folder: Path, suffix: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    q = folder / (name + suffix)
    if q.exists():
        return q
    raise UsageError(f"no such file or fixture: {name}")


def load_grammar(name: str):
    return parse(_find(name, FIXTURES, ".grammar").read_text())


def parse_target(text: str, bundle) -> Target:
    """``shortlex`` or ``acceptor:<file>:<mode>[:<lambda>:<mu>]``."""
    if text == "shortlex":
        return Target()
    parts = text.split(":")
    if parts[0] != "acceptor" or len(parts) not in (3, 5):
        raise UsageError(f"bad --target {text!r}")
    aut = nfa_from_text(_find(parts[1], FIXTURES, ".nfa").read_text())
    lam, mu = (Fraction(parts[3]), Fraction(parts[4])) if len(parts) == 5 else (bundle.lambda_g, bundle.mu_g)
    return Target("acceptor", aut, parts[2], lam, mu)


def fmt_word(w) -> str:
    return show(w)


def fmt_tuple(t) -> str:
    return " # ".join(show(w) for w in t)


def _words_sorted(words):
    return sorted(words, key=lambda w: (len(w), w))


# -- commands ----------------------------------------------------------------------------


def cmd_solve(a) -> int:
    b = resolve_bundle(a.bundle)
    system = load_system(_find(a.system, FIXTURES / "systems", ".sys"), b)
    cfg = PipelineConfig(c_bound=a.c_bound, solver_bound=a.max_len, target=parse_target(a.target, b),
                         backend=a.backend, jobs=a.jobs)
    rep = solve_full(b, system, cfg)
    out = Path(a.out)
    out.with_suffix(".grammar").write_text(serialize(rep.grammar))
    lines = [f"bundle: {b.name}", f"system: {a.system}", f"target: {a.target}",
             f"completeness: {rep.completeness}", f"classification: {rep.classification}",
             f"solutions within bound: {len(rep.solutions)}"]
    lines += [f"  {fmt_tuple(s)}" for s in rep.solutions]
    lines += [f"note: {n}" for n in rep.notes]
    out.with_suffix(".report").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    print(f"wrote {out.with_suffix('.grammar')}")
    return 0


def cmd_enumerate(a) -> int:
    g = load_grammar(a.grammar)
    for w in _words_sorted(enumerate_language(g, a.max_len, a.cap)):
        print(fmt_word(w))
    return 0


def cmd_oracle(a) -> int:
    b = resolve_bundle(a.bundle)
    system = load_system(_find(a.system, FIXTURES / "systems", ".sys"), b)
    for t in sorted(oracle_solutions(b, system, a.max_len), key=lambda t: [(len(w), w) for w in t]):
        print(fmt_tuple(t))
    return 0


def cmd_classify(a) -> int:
    c = classify(load_grammar(a.grammar))
    print(c.kind)
    if not c.exact:
        print("note: semi-decision for a nondeterministic system", file=sys.stderr)
    return 0


def cmd_closure(a) -> int:
    gs = [load_grammar(g) for g in a.grammar]
    op = a.op
    if op == "union":
        if len(gs) != 2:
            raise UsageError("union takes two --grammar files")
        out = closures.union(*gs)
    elif op in ("hom", "inverse-hom"):
        mapping = {}
        for item in a.map:
            k, _, v = item.partition("=")
            mapping[k] = tuple(v.split()) if v not in ("", "@") else ()
        out = closures.hom_image(gs[0], mapping) if op == "hom" else closures.inverse_hom(gs[0], mapping)
    elif op == "intersect":
        out = closures.intersect_regular(gs[0], nfa_from_text(Path(a.nfa).read_text()))
    elif op == "project":
        k, l, r = a.factor
        out = closures.project_factor(gs[0], k, l, r, a.sep)
    elif op == "double":
        out = closures.double(gs[0], closures.MarkingBijection.dagger(sorted(gs[0].terminals)))
    elif op == "unreduce":
        b = resolve_bundle(a.bundle)
        out = closures.unreduce(gs[0], dict(b.inverse), a.sep)
    else:
        raise UsageError(f"unknown closure {op!r}")
    text = serialize(out)
    if a.out:
        Path(a.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_bundle_gen(a) -> int:
    save_bundle(build_free_bundle(a.rank), a.out)
    print(f"wrote {a.out}")
    return 0


def cmd_verify(a) -> int:
    b = resolve_bundle(a.bundle)
    system = load_system(_find(a.system, FIXTURES / "systems", ".sys"), b)
    g = load_grammar(a.grammar)
    r = len(system.variables)
    words = enumerate_language(g, r * a.max_len + r - 1, a.cap)
    got = {t for t in (split_tuple(w, SEP) for w in words) if len(t) == r and all(len(x) <= a.max_len for x in t)}
    want = oracle_solutions(b, system, a.max_len)
    for t in sorted(want - got):
        print(f"missing: {fmt_tuple(t)}")
    for t in sorted(got - want):
        print(f"extra: {fmt_tuple(t)}")
    ok = got == want
    print(f"{'match' if ok else 'MISMATCH'}: {len(got)} grammar tuples, {len(want)} oracle tuples")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="edt0l", description="EDT0L solution sets of equations in groups")
    p.add_argument("--seed", type=int, default=0, help="seed for any randomized step")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="build a grammar for the solution set")
    s.add_argument("--bundle", default="free2")
    s.add_argument("--system", required=True)
    s.add_argument("--target", default="shortlex")
    s.add_argument("--c-bound", type=int, default=None)
    s.add_argument("--max-len", type=int, default=3, help="bound of the brute solver")
    s.add_argument("--backend", choices=["brute", "structural"], default="brute")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out", default="solution")
    s.set_defaults(fn=cmd_solve)

    e = sub.add_parser("enumerate", help="print the language up to a length")
    e.add_argument("--grammar", required=True)
    e.add_argument("--max-len", type=int, required=True)
    e.add_argument("--cap", type=int, default=None)
    e.set_defaults(fn=cmd_enumerate)

    o = sub.add_parser("oracle", help="brute-force solutions")
    o.add_argument("--bundle", default="free2")
    o.add_argument("--system", required=True)
    o.add_argument("--max-len", type=int, default=3)
    o.set_defaults(fn=cmd_oracle)

    c = sub.add_parser("classify", help="empty, finite or infinite")
    c.add_argument("--grammar", required=True)
    c.set_defaults(fn=cmd_classify)

    cl = sub.add_parser("closure", help="apply a closure operation")
    cl.add_argument("op", choices=["union", "hom", "inverse-hom", "intersect", "project", "double", "unreduce"])
    cl.add_argument("--grammar", action="append", required=True)
    cl.add_argument("--map", action="append", default=[], help="letter=word (space separated)")
    cl.add_argument("--nfa")
    cl.add_argument("--factor", type=int, nargs=3, metavar=("K", "L", "R"))
    cl.add_argument("--sep", default=SEP)
    cl.add_argument("--bundle", default="free2")
    cl.add_argument("--out")
    cl.set_defaults(fn=cmd_closure)

    bg = sub.add_parser("bundle-gen", help="write a free bundle file")
    bg.add_argument("--rank", type=int, default=2)
    bg.add_argument("--out", required=True)
    bg.set_defaults(fn=cmd_bundle_gen)

    v = sub.add_parser("verify", help="compare a grammar with the oracle")
    v.add_argument("--bundle", default="free2")
    v.add_argument("--system", required=True)
    v.add_argument("--grammar", required=True)
    v.add_argument("--max-len", type=int, default=3)
    v.add_argument("--cap", type=int, default=None)
    v.set_defaults(fn=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    random.seed(args.seed)
    try:
        return args.fn(args)
    except (UsageError, GrammarSyntaxError, SystemSyntaxError, AlphabetMismatch, BundleIntegrityError,
            BudgetExceeded, NotImplementedError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
