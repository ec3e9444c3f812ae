"""Run verify_chain over every reflexive non-symmetric digraph up to a size.

Prints one line per input (edges, G2 size and mode, verdict, seconds) and a
summary.  Usage: python scripts/chain_sweep.py [--max-vertices 4] [--x chain2|eq2|loop]
"""
from __future__ import annotations

import argparse
import time

from permprime.chain import verify_chain
from permprime.corpus import CHAIN2, LOOP1, chain_inputs
from permprime.digraph import equality_digraph

EXPONENTS = {"chain2": CHAIN2, "eq2": equality_digraph(2), "loop": LOOP1}


def main() -> None:
    ap = argparse.ArgumentParser(description="verify_chain sweep")
    ap.add_argument("--max-vertices", type=int, default=4)
    ap.add_argument("--x", choices=sorted(EXPONENTS), default="chain2")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--quiet", action="store_true")
    args = ap.parse_args()

    X = EXPONENTS[args.x]
    inputs = chain_inputs(args.max_vertices)
    start = time.perf_counter()
    failures = []
    fibered = 0
    for G0 in inputs:
        r = verify_chain(G0, X, threads=args.threads)
        fibered += r.counters.get("g2_mode") == "fibered"
        if not r.passed:
            failures.append((G0.edges(), r.failure))
        if not args.quiet:
            print(f"{'ok  ' if r.passed else 'FAIL'} n={G0.n} g2={r.counters.get('g2_vertices')} "
                  f"({r.counters.get('g2_mode')}) {r.elapsed:.2f}s edges={G0.edges()}", flush=True)
    print(f"{len(inputs)} inputs, X={args.x}: {len(inputs) - len(failures)} pass, "
          f"{fibered} via fibers, {time.perf_counter() - start:.1f}s")
    for edges, why in failures:
        print("  failed:", edges, why)


if __name__ == "__main__":
    main()
