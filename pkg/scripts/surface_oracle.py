"""Brute-force solutions of a b X c Y = 1 in the genus-2 surface group."""
import argparse
import time

from edt0l.cli import FIXTURES
from edt0l.equations import load_system, oracle_solutions
from edt0l.groups import load_bundle, show


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-len", type=int, default=3)
    ap.add_argument("--show", action="store_true", help="print every solution")
    args = ap.parse_args()
    b = load_bundle(FIXTURES / "surface2.bundle")
    sys_ = load_system(FIXTURES / "systems" / "surface_abxcy.sys", b)
    for L in range(1, args.max_len + 1):
        t = time.perf_counter()
        sols = oracle_solutions(b, sys_, L)
        known = (("a^-1", "b^-1"), ("d", "c^-1", "d^-1")) in sols
        print(f"L={L}: {len(sols)} solutions, X=a^-1 b^-1, Y=d c^-1 d^-1 present: {known}, "
              f"{time.perf_counter() - t:.2f} s")
        if args.show:
            for x, y in sorted(sols):
                print(f"  X = {show(x):<20} Y = {show(y)}")


if __name__ == "__main__":
    main()
