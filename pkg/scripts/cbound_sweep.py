"""How the covering stage grows with the bound on the constant words c."""
import argparse
import time

from edt0l.equations import parse_system, split_tuple
from edt0l.grammar import enumerate_language
from edt0l.groups import build_free_bundle, free_reduce
from edt0l.pipeline import PipelineConfig, solve_covering


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--system", default="vars: X\neq: X a X^-1 a^-1 = 1")
    ap.add_argument("--max-len", type=int, default=3)
    ap.add_argument("--bounds", type=int, nargs="+", default=[0, 1])
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    b = build_free_bundle(2)
    sys_, _ = parse_system(args.system, b)
    r = len(sys_.variables)
    for cb in args.bounds:
        t = time.perf_counter()
        rep = solve_covering(b, sys_, PipelineConfig(c_bound=cb, solver_bound=args.max_len, jobs=args.jobs))
        words = enumerate_language(rep.grammar, r * args.max_len + r - 1)
        elements = {tuple(free_reduce(b, x) for x in split_tuple(w)) for w in words}
        live = sum(1 for s in rep.per_c.values() if s.solutions)
        print(f"c-bound {cb}: {len(rep.per_c)} c-tuples ({live} with solutions), {len(words)} covering words, "
              f"{len(elements)} elements, {len(rep.grammar.control.states)} control states, "
              f"{time.perf_counter() - t:.2f} s")


if __name__ == "__main__":
    main()
