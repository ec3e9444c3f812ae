"""Permutability verdicts for the built-in algebra corpus.

For each algebra: size of the free algebra on two generators, whether the
Maltsev digraph is symmetric, the Maltsev term found (if any) and how many
reflexive digraphs on the universe are compatible and carry an obstruction.

Usage: python scripts/algebra_survey.py
"""
from __future__ import annotations

import time

from permprime.algebra import is_compatible, is_congruence_permutable
from permprime.chain import find_obstruction
from permprime.corpus import algebra_corpus, reflexive_digraphs


def main() -> None:
    print(f"{'algebra':22} {'|A|':>3} {'|F2|':>5} {'perm':>5} {'obstr':>5}  term")
    for name, A in algebra_corpus().items():
        start = time.perf_counter()
        v = is_congruence_permutable(A)
        obstructed = sum(
            1 for D in reflexive_digraphs(A.size, up_to_iso=False)
            if is_compatible(A, D) and find_obstruction(D) is not None
        )
        term = str(v.maltsev_term) if v.maltsev_term is not None else "-"
        print(f"{name:22} {A.size:>3} {v.free_size:>5} {str(v.permutable):>5} {obstructed:>5}  {term}"
              f"  ({time.perf_counter() - start:.2f}s)")


if __name__ == "__main__":
    main()
