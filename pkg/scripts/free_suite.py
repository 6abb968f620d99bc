"""Full-set pipeline on the bundled free-group systems, checked against the oracle."""
import argparse
import time

from edt0l.cli import FIXTURES
from edt0l.equations import load_system, oracle_solutions, split_tuple
from edt0l.grammar import enumerate_language, is_deterministic
from edt0l.groups import resolve_bundle
from edt0l.pipeline import PipelineConfig, solve_full

SYSTEMS = ["xa_eq_b", "x_eq_a_and_b", "commute", "abx_neq", "x_eq_1", "x_neq_1", "x_eq_x"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bundle", default="free2")
    ap.add_argument("--max-len", type=int, default=3)
    ap.add_argument("--c-bound", type=int, default=None)
    args = ap.parse_args()
    b = resolve_bundle(args.bundle)
    print(f"{'system':<14}{'tuples':>8}{'oracle':>8}  {'match':<6}{'det':<6}{'class':<18}{'secs':>6}")
    for name in SYSTEMS:
        sys_ = load_system(FIXTURES / "systems" / f"{name}.sys", b)
        t = time.perf_counter()
        rep = solve_full(b, sys_, PipelineConfig(c_bound=args.c_bound, solver_bound=args.max_len))
        r, L = len(sys_.variables), args.max_len
        got = {split_tuple(w) for w in enumerate_language(rep.grammar, r * L + r - 1)}
        want = oracle_solutions(b, sys_, L)
        dt = time.perf_counter() - t
        print(f"{name:<14}{len(got):>8}{len(want):>8}  {str(got == want):<6}{str(is_deterministic(rep.grammar)):<6}"
              f"{rep.classification:<18}{dt:>6.2f}")


if __name__ == "__main__":
    main()
