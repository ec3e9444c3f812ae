"""Finite algebras, subpower closure and the two Maltsev tests.

Permutability is decided twice, independently:

* by closing ``{(x,x), (x,y), (y,y)}`` inside ``F2 x F2`` and asking whether
  the resulting reflexive digraph on ``F2`` is symmetric, and
* by closing the three ternary projections inside ``A^(A^3)`` and looking for
  an element that satisfies ``m(x,y,y) = x = m(y,y,x)``.

Here ``F2`` is the 2-generated free algebra of the variety generated by ``A``,
realized as the subalgebra of ``A^(A^2)`` generated by the two projections.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .config import closure_cap
from .digraph import Digraph, is_symmetric
from .errors import ConsistencyError, InputError, ResourceError


@dataclass(frozen=True, eq=False)
class Operation:
    symbol: str
    arity: int
    table: np.ndarray  # shape (size,) * arity

    def __call__(self, *args: int) -> int:
        return int(self.table[tuple(args)])


class FiniteAlgebra:
    """Universe ``{0..size-1}`` with named operation tables.

    ``ops`` maps a symbol to ``(arity, values)`` where ``values`` is either a
    flat sequence in lexicographic argument order or an array of shape
    ``(size,) * arity``.
    """

    def __init__(self, size: int, ops: Mapping[str, tuple[int, Sequence[int] | np.ndarray]] | Sequence = (), name: str = ""):
        if size < 0:
            raise InputError("algebra size must be non-negative")
        self.size = size
        self.name = name
        items = ops.items() if isinstance(ops, Mapping) else [(s, (a, t)) for s, a, t in ops]
        operations = []
        seen = set()
        for symbol, (arity, values) in items:
            if symbol in seen:
                raise InputError(f"duplicate operation symbol {symbol!r}")
            seen.add(symbol)
            if arity < 0:
                raise InputError(f"operation {symbol!r} has negative arity")
            flat = np.asarray(values, dtype=np.int64).reshape(-1)
            if flat.size != size**arity:
                raise InputError(
                    f"operation {symbol!r} of arity {arity} needs {size ** arity} values, got {flat.size}"
                )
            if flat.size and (flat.min() < 0 or flat.max() >= size):
                raise InputError(f"operation {symbol!r} has a value outside the universe")
            table = flat.reshape((size,) * arity).astype(np.intp)
            table.setflags(write=False)
            operations.append(Operation(symbol, arity, table))
        self.operations: tuple[Operation, ...] = tuple(operations)

    def op(self, symbol: str) -> Operation:
        for o in self.operations:
            if o.symbol == symbol:
                return o
        raise KeyError(symbol)

    @property
    def signature(self) -> tuple[tuple[str, int], ...]:
        return tuple((o.symbol, o.arity) for o in self.operations)

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"FiniteAlgebra{label}(size={self.size}, signature={self.signature})"


# ---------------------------------------------------------------- terms


@dataclass(frozen=True)
class Term:
    """A variable (``args is None``) or an operation symbol applied to subterms."""

    symbol: str
    args: tuple[Term, ...] | None = None

    @property
    def is_variable(self) -> bool:
        return self.args is None

    def depth(self) -> int:
        if self.args is None or not self.args:
            return 0
        return 1 + max(a.depth() for a in self.args)

    def evaluate(self, algebra: FiniteAlgebra, assignment: Mapping[str, int]) -> int:
        if self.args is None:
            return assignment[self.symbol]
        op = algebra.op(self.symbol)
        if op.arity != len(self.args):
            raise InputError(f"{self.symbol} has arity {op.arity}, term gives {len(self.args)}")
        return op(*(a.evaluate(algebra, assignment) for a in self.args))

    def __str__(self):
        if self.args is None:
            return self.symbol
        return f"{self.symbol}({', '.join(str(a) for a in self.args)})"


def var(name: str) -> Term:
    return Term(name)


# ---------------------------------------------------------------- subpowers


@dataclass(frozen=True)
class SubpowerElement:
    coords: tuple[int, ...]
    derivation: tuple  # ("gen", k) or (symbol, child indices)

    @property
    def is_generator(self) -> bool:
        return self.derivation[0] == "gen" and len(self.derivation) == 2 and isinstance(self.derivation[1], int)


def _apply_coordinatewise(op: Operation, vectors: Sequence[np.ndarray]) -> np.ndarray:
    return op.table[tuple(vectors)]


_BATCH_CELLS = 1 << 22


def _tail_batches(op: Operation, matrix: np.ndarray, head: tuple, tail: list[range]):
    """Results of ``op`` over ``head`` x (product of ``tail``), in lexicographic argument order.

    Yields ``(rows, positions)`` where ``positions(i)`` gives the tail
    argument indices behind row ``i``.
    """
    fixed = [matrix[i] for i in head]
    m = matrix.shape[1]
    if len(tail) == 1:
        (rg,) = tail
        out = op.table[tuple([v[None, :] for v in fixed] + [matrix[rg.start:rg.stop]])]
        yield np.ascontiguousarray(out), lambda i, s=rg.start: (s + i,)
        return
    ra, rb = tail
    b = matrix[rb.start:rb.stop]
    table = op.table.reshape(-1)
    n = op.table.shape[0]
    step = max(1, _BATCH_CELLS // max(1, len(rb) * m))
    for lo in range(ra.start, ra.stop, step):
        hi = min(lo + step, ra.stop)
        a = matrix[lo:hi]
        flat = 0
        for v in fixed:
            flat = flat * n + v
        flat = (flat * n + a)[:, None, :] * n + b[None, :, :]
        out = table[flat].reshape(-1, m)
        width = len(rb)
        yield out, lambda i, lo=lo, w=width, s=rb.start: (lo + i // w, s + i % w)


def generate_subpower(
    A: FiniteAlgebra,
    index_size: int,
    generators: Sequence[Sequence[int]],
    cap: int | None = None,
) -> list[SubpowerElement]:
    """Subalgebra of ``A^index_size`` generated by ``generators``.

    Breadth-first: generators first (duplicates dropped), then nullary
    constants, then one level per round.  Each round applies every operation
    to every argument tuple that uses at least one element of the previous
    round; the new elements of a round are sorted by coordinate vector.
    """
    if index_size <= 0:
        raise InputError("index_size must be positive")
    limit = closure_cap(cap)
    rows: list[np.ndarray] = []
    elements: list[SubpowerElement] = []
    seen: dict[bytes, int] = {}

    def add(vec: np.ndarray, derivation: tuple) -> bool:
        key = vec.astype(np.uint16).tobytes()
        if key in seen:
            return False
        if len(elements) >= limit:
            raise ResourceError(
                f"subpower closure exceeded cap {limit} ({len(elements)} elements so far)",
                required=len(elements) + 1,
                cap=limit,
            )
        seen[key] = len(elements)
        rows.append(vec)
        elements.append(SubpowerElement(tuple(vec.tolist()), derivation))
        return True

    for k, g in enumerate(generators):
        vec = np.asarray(g, dtype=np.intp)
        if vec.shape != (index_size,):
            raise InputError(f"generator {k} has length {vec.size}, expected {index_size}")
        if vec.size and (vec.min() < 0 or vec.max() >= A.size):
            raise InputError(f"generator {k} has a value outside the universe")
        add(vec, ("gen", k))
    for op in A.operations:
        if op.arity == 0:
            add(np.full(index_size, int(op.table[()]), dtype=np.intp), (op.symbol, ()))

    # integer codes make per-batch deduplication much cheaper than byte keys
    weights = None
    if A.size > 1 and index_size * np.log2(A.size) < 62:
        weights = A.size ** np.arange(index_size - 1, -1, -1, dtype=np.int64)
    frontier_start = 0
    while frontier_start < len(elements):
        frontier_end = len(elements)
        matrix = np.array(rows[:frontier_end], dtype=np.intp)
        found: dict[bytes, tuple[np.ndarray, tuple]] = {}
        for op in A.operations:
            r = op.arity
            if r == 0:
                continue
            # split tuples by the position of their first frontier argument
            for first in range(r):
                ranges = [range(0, frontier_start)] * first + [range(frontier_start, frontier_end)]
                ranges += [range(0, frontier_end)] * (r - first - 1)
                if any(len(rg) == 0 for rg in ranges):
                    continue
                # vectorize over the last two argument positions
                tail = ranges[-2:]
                head_ranges = ranges[:-len(tail)]
                for head in itertools.product(*head_ranges):
                    for out, positions in _tail_batches(op, matrix, head, tail):
                        if weights is not None:
                            codes = out @ weights
                        else:
                            codes = out.astype(np.uint16).view(np.dtype((np.void, 2 * index_size))).ravel()
                        _, firsts = np.unique(codes, return_index=True)
                        for idx in np.sort(firsts).tolist():
                            key = out[idx].astype(np.uint16).tobytes()
                            if key in seen or key in found:
                                continue
                            found[key] = (out[idx].copy(), (op.symbol, head + positions(idx)))
                            if len(seen) + len(found) > limit:
                                raise ResourceError(
                                    f"subpower closure exceeded cap {limit} "
                                    f"({len(seen) + len(found)} elements so far)",
                                    required=len(seen) + len(found),
                                    cap=limit,
                                )
        frontier_start = frontier_end
        for _, (vec, derivation) in sorted(found.items(), key=lambda kv: tuple(kv[1][0].tolist())):
            add(vec, derivation)
    return elements


def replay(A: FiniteAlgebra, elements: Sequence[SubpowerElement], generators: Sequence[Sequence[int]]) -> bool:
    """Recompute every element from its derivation and compare coordinates."""
    for k, el in enumerate(elements):
        d = el.derivation
        if d[0] == "gen" and len(d) == 2 and isinstance(d[1], int):
            value = tuple(int(v) for v in generators[d[1]])
        else:
            symbol, children = d
            if any(c >= k for c in children):
                return False
            op = A.op(symbol)
            if op.arity == 0:
                value = (int(op.table[()]),) * len(el.coords)
            else:
                args = [np.asarray(elements[c].coords, dtype=np.intp) for c in children]
                value = tuple(_apply_coordinatewise(op, args).tolist())
        if value != el.coords:
            return False
    return True


def element_term(elements: Sequence[SubpowerElement], index: int, variables: Sequence[str]) -> Term:
    """Rebuild the term recorded by an element's derivation."""
    cache: dict[int, Term] = {}

    def build(i: int) -> Term:
        if i in cache:
            return cache[i]
        d = elements[i].derivation
        if d[0] == "gen" and len(d) == 2 and isinstance(d[1], int):
            t = Term(variables[d[1]])
        else:
            t = Term(d[0], tuple(build(c) for c in d[1]))
        cache[i] = t
        return t

    return build(index)


def projections(size: int, arity: int) -> list[tuple[int, ...]]:
    """The ``arity`` projections of ``A^(A^arity)``, coordinates in lexicographic order."""
    points = list(itertools.product(range(size), repeat=arity))
    return [tuple(p[i] for p in points) for i in range(arity)]


# ---------------------------------------------------------------- compatibility


@dataclass(frozen=True)
class Compatibility:
    ok: bool
    op: str | None = None
    edges: tuple[tuple[int, int], ...] | None = None
    image: tuple[int, int] | None = None

    def __bool__(self):
        return self.ok


def is_compatible(A: FiniteAlgebra, D: Digraph) -> Compatibility:
    """Whether every operation of ``A`` preserves the edge relation of ``D``.

    On failure the first violating edge tuple (in row-major edge order) is
    reported together with the missing image pair.
    """
    if D.n != A.size:
        raise InputError(f"digraph has {D.n} vertices, algebra has {A.size} elements")
    edges = D.edges()
    src = np.array([e[0] for e in edges], dtype=np.intp)
    dst = np.array([e[1] for e in edges], dtype=np.intp)
    for op in A.operations:
        r = op.arity
        if r == 0:
            c = int(op.table[()])
            if not D.adj[c, c]:
                return Compatibility(False, op.symbol, (), (c, c))
            continue
        if not edges:
            continue
        for head in itertools.product(range(len(edges)), repeat=r - 1):
            a = op.table[tuple([src[i] for i in head] + [src])]
            b = op.table[tuple([dst[i] for i in head] + [dst])]
            bad = np.flatnonzero(~D.adj[a, b])
            if bad.size:
                j = int(bad[0])
                tup = tuple(edges[i] for i in head) + (edges[j],)
                return Compatibility(False, op.symbol, tup, (int(a[j]), int(b[j])))
    return Compatibility(True)


# ---------------------------------------------------------------- free algebra


@dataclass
class FreeAlgebra:
    algebra: FiniteAlgebra
    elements: list[SubpowerElement]
    x: int
    y: int
    index: dict[tuple[int, ...], int] = field(default_factory=dict)

    def __post_init__(self):
        self.index = {el.coords: i for i, el in enumerate(self.elements)}

    def __len__(self):
        return len(self.elements)

    def term(self, i: int) -> Term:
        return element_term(self.elements, i, ("x", "y"))

    def as_algebra(self) -> FiniteAlgebra:
        """The free algebra itself as a FiniteAlgebra on ``{0..|F2|-1}``."""
        mats = np.array([el.coords for el in self.elements], dtype=np.intp)
        ops = []
        n = len(self.elements)
        for op in self.algebra.operations:
            values = []
            for args in itertools.product(range(n), repeat=op.arity):
                if op.arity == 0:
                    vec = np.full(mats.shape[1], int(op.table[()]))
                else:
                    vec = _apply_coordinatewise(op, [mats[a] for a in args])
                values.append(self.index[tuple(vec.tolist())])
            ops.append((op.symbol, op.arity, values))
        return FiniteAlgebra(n, ops, name=f"F2({self.algebra.name})")


def free_algebra_on_two(A: FiniteAlgebra, cap: int | None = None) -> FreeAlgebra:
    if A.size < 1:
        raise InputError("free algebra needs a non-empty universe")
    gens = projections(A.size, 2)
    elements = generate_subpower(A, A.size**2, gens, cap=cap)
    return FreeAlgebra(A, elements, x=0, y=1 if gens[0] != gens[1] else 0)


def maltsev_digraph(A: FiniteAlgebra, cap: int | None = None, free: FreeAlgebra | None = None) -> Digraph:
    """Subalgebra of F2 x F2 generated by (x,x), (x,y), (y,y), as a digraph on F2."""
    F = free if free is not None else free_algebra_on_two(A, cap=cap)
    x = F.elements[F.x].coords
    y = F.elements[F.y].coords
    m = len(x)
    pairs = generate_subpower(A, 2 * m, [x + x, x + y, y + y], cap=cap)
    adj = np.zeros((len(F), len(F)), dtype=bool)
    for el in pairs:
        adj[F.index[el.coords[:m]], F.index[el.coords[m:]]] = True
    labels = tuple(str(F.term(i)) for i in range(len(F)))
    return Digraph(adj, labels)


def is_maltsev_term(A: FiniteAlgebra, term: Term, variables: Sequence[str] = ("x", "y", "z")) -> bool:
    """Check m(a,b,b) = a = m(b,b,a) pointwise by evaluating the term tree."""
    x, y, z = variables
    for a in range(A.size):
        for b in range(A.size):
            if term.evaluate(A, {x: a, y: b, z: b}) != a:
                return False
            if term.evaluate(A, {x: b, y: b, z: a}) != a:
                return False
    return True


def find_maltsev_term(A: FiniteAlgebra, cap: int | None = None) -> Term | None:
    """First element of the ternary closure of projections that is a Maltsev operation."""
    n = A.size
    if n == 0:
        return Term("x")
    points = list(itertools.product(range(n), repeat=3))
    pos = {p: i for i, p in enumerate(points)}
    first = np.array([pos[(a, b, b)] for a in range(n) for b in range(n)], dtype=np.intp)
    second = np.array([pos[(b, b, a)] for a in range(n) for b in range(n)], dtype=np.intp)
    target = np.array([a for a in range(n) for _ in range(n)], dtype=np.intp)
    elements = generate_subpower(A, n**3, projections(n, 3), cap=cap)
    for i, el in enumerate(elements):
        vec = np.asarray(el.coords, dtype=np.intp)
        if np.array_equal(vec[first], target) and np.array_equal(vec[second], target):
            return element_term(elements, i, ("x", "y", "z"))
    return None


@dataclass(frozen=True)
class CpVerdict:
    permutable: bool
    maltsev_term: Term | None
    obstruction_digraph: Digraph | None
    free_size: int
    digraph_edges: int


def is_congruence_permutable(A: FiniteAlgebra, cap: int | None = None) -> CpVerdict:
    F = free_algebra_on_two(A, cap=cap)
    D = maltsev_digraph(A, cap=cap, free=F)
    symmetric = is_symmetric(D)
    term = find_maltsev_term(A, cap=cap)
    if symmetric != (term is not None):
        raise ConsistencyError(
            f"Maltsev digraph symmetric={symmetric} but term search found {term}"
        )
    if term is not None and not is_maltsev_term(A, term):
        raise ConsistencyError(f"term {term} fails the Maltsev identities")
    return CpVerdict(
        permutable=symmetric,
        maltsev_term=term,
        obstruction_digraph=None if symmetric else D,
        free_size=len(F),
        digraph_edges=D.edge_count,
    )
