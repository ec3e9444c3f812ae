"""Where does the swapped-power isomorphism start to hold?

For every pair of small reflexive digraphs with a designated universal vertex
and every k, record:

* whether the quotient of the materialized power by trace equality equals the
  subset quotient built from the realizability rule,
* whether U -> transpose(U) is an isomorphism between the two sides,
* whether the two quotients are isomorphic at all (small cases only).

Usage: python scripts/power_threshold.py [--sizes 1 2 3] [--kmax 3] [--iso-limit 200]
"""
from __future__ import annotations

import argparse
import itertools
import time
from collections import Counter

import numpy as np

from permprime.corpus import universal_contexts
from permprime.digraph import Digraph
from permprime.iso import are_isomorphic
from permprime.power import PowerContext, compare_block_and_subset_quotients, quotient_power, transpose


def transpose_is_iso(ctx: PowerContext) -> bool:
    q1, sw = quotient_power(ctx), ctx.swapped()
    q2 = quotient_power(sw)
    if len(q1.masks) != len(q2.masks):
        return False
    index = {m: i for i, m in enumerate(q2.masks)}
    perm = []
    for U in q1.subsets:
        m = sw.set_to_mask(transpose(U))
        if m not in index:
            return False
        perm.append(index[m])
    perm = np.array(perm, dtype=np.intp)
    return bool(np.array_equal(q1.adj, q2.adj[np.ix_(perm, perm)]))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--kmax", type=int, default=3)
    ap.add_argument("--iso-limit", type=int, default=200, help="largest quotient tried with are_isomorphic")
    ap.add_argument("--power-limit", type=int, default=5_000, help="largest power materialized")
    args = ap.parse_args()

    start = time.perf_counter()
    ctxs = universal_contexts(tuple(args.sizes))
    tally: Counter = Counter()
    block_checked = block_failures = 0
    surprises = []
    for (G1, u1), (G2, u2) in itertools.combinations_with_replacement(ctxs, 2):
        need = max(G1.n, G2.n) - 1
        for k in range(1, args.kmax + 1):
            ctx = PowerContext(G1, u1, G2, u2, k)
            for c in (ctx, ctx.swapped()):
                if c.power_size <= args.power_limit:
                    block_checked += 1
                    if not compare_block_and_subset_quotients(c).passed:
                        block_failures += 1
            above = k >= need
            tr = transpose_is_iso(ctx)
            n1, n2 = len(quotient_power(ctx).masks), len(quotient_power(ctx.swapped()).masks)
            iso = None
            if n1 == n2 and n1 <= args.iso_limit:
                iso = are_isomorphic(Digraph(quotient_power(ctx).adj), Digraph(quotient_power(ctx.swapped()).adj)) is not None
            elif n1 != n2:
                iso = False
            tally[(above, tr, iso)] += 1
            empty_ground = not ctx.star1 or not ctx.star2
            if above != tr and not empty_ground:
                surprises.append((G1.edges(), u1, G2.edges(), u2, k, n1, n2))

    print(f"contexts: {len(ctxs)} (sizes {args.sizes}), k = 1..{args.kmax}")
    print(f"block quotient vs subset quotient: {block_checked} powers checked, {block_failures} mismatches")
    print("counts by (k >= max(|G1*|,|G2*|), transpose is iso, quotients isomorphic):")
    for key, count in sorted(tally.items(), key=str):
        print(f"  {key}: {count}")
    print("threshold disagreements with the transpose map "
          f"(ignoring empty trace ground sets): {len(surprises)}")
    for s in surprises[:10]:
        print("  ", s)
    print(f"elapsed: {time.perf_counter() - start:.1f}s")


if __name__ == "__main__":
    main()
