"""Named small digraphs and algebras used by the tests and scripts."""
from __future__ import annotations

import itertools

from .algebra import FiniteAlgebra
from .digraph import Digraph, build_digraph, is_reflexive, is_symmetric, permute, universal_vertices


def loops(n: int) -> list[tuple[int, int]]:
    return [(i, i) for i in range(n)]


CHAIN2 = build_digraph(2, loops(2) + [(0, 1)])
PATH3 = build_digraph(3, loops(3) + [(0, 1), (1, 0), (1, 2), (2, 1)])
# reflexive, 0 universal, 2 and 3 mutually non-adjacent
FOUR_ONE_GAP = build_digraph(
    4, [(i, j) for i in range(4) for j in range(4) if {i, j} != {2, 3}]
)
LOOP1 = build_digraph(1, [(0, 0)])
POINT1 = build_digraph(1, [])


def _table(n: int, arity: int, fn) -> list[int]:
    return [fn(*args) for args in itertools.product(range(n), repeat=arity)]


def _maj(a, b, c):
    return a if a == b or a == c else b if b == c else a


def algebra_corpus() -> dict[str, FiniteAlgebra]:
    """At least twenty algebras on at most three elements."""
    A = {}

    def add(name, size, ops):
        A[name] = FiniteAlgebra(size, [(s, ar, _table(size, ar, f)) for s, ar, f in ops], name=name)

    add("trivial", 1, [("f", 2, lambda x, y: 0)])
    add("set2", 2, [])
    add("set3", 3, [])
    add("semilattice2", 2, [("meet", 2, min)])
    add("bounded_semilattice2", 2, [("meet", 2, min), ("bot", 0, lambda: 0), ("top", 0, lambda: 1)])
    add("lattice2", 2, [("meet", 2, min), ("join", 2, max)])
    add("boolean2", 2, [("and", 2, min), ("or", 2, max), ("not", 1, lambda x: 1 - x)])
    add("z2", 2, [("plus", 2, lambda x, y: (x + y) % 2), ("neg", 1, lambda x: x), ("zero", 0, lambda: 0)])
    add("z2_plus", 2, [("plus", 2, lambda x, y: (x + y) % 2)])
    add("minority2", 2, [("m", 3, lambda x, y, z: (x + y + z) % 2)])
    add("majority2", 2, [("maj", 3, _maj)])
    add("nand2", 2, [("nand", 2, lambda x, y: 1 - (x & y))])
    add("negation2", 2, [("not", 1, lambda x: 1 - x)])
    add("left_zero2", 2, [("l", 2, lambda x, y: x)])
    add("implication2", 2, [("imp", 2, lambda x, y: max(1 - x, y))])
    add("z3", 3, [("plus", 2, lambda x, y: (x + y) % 3), ("neg", 1, lambda x: (-x) % 3), ("zero", 0, lambda: 0)])
    add("z3_maltsev", 3, [("p", 3, lambda x, y, z: (x - y + z) % 3)])
    add("z3_minus", 3, [("minus", 2, lambda x, y: (x - y) % 3)])
    add("chain3_semilattice", 3, [("meet", 2, min)])
    add("chain3_lattice", 3, [("meet", 2, min), ("join", 2, max)])
    add("cycle3", 3, [("succ", 1, lambda x: (x + 1) % 3)])
    add("z3_mult", 3, [("mul", 2, lambda x, y: (x * y) % 3)])
    add("majority3", 3, [("maj", 3, _maj)])
    return A


def reflexive_digraphs(n: int, up_to_iso: bool = True):
    """All reflexive digraphs on n vertices, optionally one per isomorphism class."""
    offs = [(i, j) for i in range(n) for j in range(n) if i != j]
    seen = set()
    for mask in range(1 << len(offs)):
        D = build_digraph(n, loops(n) + [offs[t] for t in range(len(offs)) if mask >> t & 1])
        if up_to_iso:
            key = min(permute(D, p).adj.tobytes() for p in itertools.permutations(range(n)))
            if key in seen:
                continue
            seen.add(key)
        yield D


def chain_inputs(max_vertices: int = 4) -> list[Digraph]:
    """Reflexive non-symmetric digraphs up to isomorphism."""
    return [
        D for n in range(1, max_vertices + 1) for D in reflexive_digraphs(n)
        if not is_symmetric(D)
    ]


def universal_contexts(sizes=(2, 3)) -> list[tuple[Digraph, int]]:
    """(digraph, universal vertex) for reflexive digraphs with a universal vertex."""
    out = []
    for n in sizes:
        for D in reflexive_digraphs(n):
            for u in universal_vertices(D):
                out.append((D, u))
    return out


assert is_reflexive(CHAIN2) and is_reflexive(PATH3)
