"""Finite digraphs and the digraph calculus used throughout the package.

A :class:`Digraph` on ``n`` vertices is stored as a read-only ``n x n``
boolean numpy array.  Vertices are the integers ``0..n-1``; optional labels
carry structure (tuples for products, functions for exponentials).

Index conventions:

* ``product([D1, ..., Dm])`` numbers the tuple ``(h1, ..., hm)`` row-major,
  i.e. the first coordinate is most significant.
* ``exponential(G, H)`` numbers a function ``f: H -> G`` by reading the value
  vector ``(f(0), ..., f(|H|-1))`` as a base-``|G|`` numeral, first value most
  significant.  This is the lexicographic order of value vectors.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .config import materialization_cap
from .errors import InputError, PreconditionError, ResourceError


@dataclass(frozen=True, eq=False)
class Digraph:
    adj: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        adj = np.array(self.adj, dtype=bool, copy=True)
        if adj.size == 0:
            adj = adj.reshape(0, 0)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise InputError(f"adjacency matrix must be square, got shape {adj.shape}")
        adj.setflags(write=False)
        object.__setattr__(self, "adj", adj)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != adj.shape[0]:
                raise InputError(f"{len(labels)} labels for {adj.shape[0]} vertices")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.adj.shape[0]

    def __len__(self) -> int:
        return self.n

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adj[i, j])

    def edges(self) -> list[tuple[int, int]]:
        """All edges in row-major order."""
        src, dst = np.nonzero(self.adj)
        return list(zip(src.tolist(), dst.tolist()))

    @property
    def edge_count(self) -> int:
        return int(self.adj.sum())

    def label(self, i: int) -> Hashable:
        return i if self.labels is None else self.labels[i]

    def index_of(self, label: Hashable) -> int:
        if self.labels is None:
            return int(label)  # type: ignore[arg-type]
        return self.labels.index(label)

    def without_labels(self) -> Digraph:
        return Digraph(self.adj)

    def __eq__(self, other):
        if not isinstance(other, Digraph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.adj, other.adj)
            and self.labels == other.labels
        )

    def __hash__(self):
        return hash((self.n, self.adj.tobytes(), self.labels))

    def __repr__(self):
        return f"Digraph(n={self.n}, edges={self.edges()})"


@dataclass(frozen=True)
class PropertyFlags:
    reflexive: bool
    symmetric: bool
    transitive: bool
    complete: bool


@dataclass(frozen=True)
class ComponentPartition:
    blocks: tuple[tuple[int, ...], ...]
    block_of: tuple[int, ...]

    def __len__(self):
        return len(self.blocks)


def build_digraph(n: int, edges: Iterable[tuple[int, int]], labels: Sequence | None = None) -> Digraph:
    if n < 0:
        raise InputError(f"vertex count must be non-negative, got {n}")
    adj = np.zeros((n, n), dtype=bool)
    for pair in edges:
        i, j = pair
        if not (0 <= i < n and 0 <= j < n):
            raise InputError(f"edge {tuple(pair)} out of range for {n} vertices")
        adj[i, j] = True
    return Digraph(adj, None if labels is None else tuple(labels))


def complete_digraph(n: int) -> Digraph:
    if n < 0:
        raise InputError("n must be non-negative")
    return Digraph(np.ones((n, n), dtype=bool))


def equality_digraph(n: int) -> Digraph:
    if n < 0:
        raise InputError("n must be non-negative")
    return Digraph(np.eye(n, dtype=bool))


def is_reflexive(D: Digraph) -> bool:
    return bool(np.all(np.diagonal(D.adj)))


def is_symmetric(D: Digraph) -> bool:
    return bool(np.array_equal(D.adj, D.adj.T))


def is_transitive(D: Digraph) -> bool:
    a = D.adj.astype(np.int64)
    two_step = (a @ a) > 0
    return bool(np.all(D.adj | ~two_step))


def is_complete(D: Digraph) -> bool:
    return bool(np.all(D.adj))


def classify(D: Digraph) -> PropertyFlags:
    return PropertyFlags(
        reflexive=is_reflexive(D),
        symmetric=is_symmetric(D),
        transitive=is_transitive(D),
        complete=is_complete(D),
    )


def complement(D: Digraph) -> Digraph:
    return Digraph(~D.adj, D.labels)


def _check_vertices(D: Digraph, vertices: Iterable[int]) -> list[int]:
    vs = sorted(set(int(v) for v in vertices))
    for v in vs:
        if not 0 <= v < D.n:
            raise InputError(f"vertex {v} out of range for {D.n} vertices")
    return vs


def induced(D: Digraph, S: Iterable[int]) -> Digraph:
    """Subdigraph on ``S``, reindexed in increasing vertex order."""
    vs = _check_vertices(D, S)
    idx = np.array(vs, dtype=np.intp)
    labels = None if D.labels is None else tuple(D.labels[v] for v in vs)
    return Digraph(D.adj[np.ix_(idx, idx)], labels)


def delete_vertex(D: Digraph, u: int) -> Digraph:
    if not 0 <= u < D.n:
        raise InputError(f"vertex {u} out of range for {D.n} vertices")
    return induced(D, (v for v in range(D.n) if v != u))


def universal_vertices(D: Digraph) -> list[int]:
    both = D.adj & D.adj.T
    return np.flatnonzero(both.all(axis=1)).tolist()


def is_universal(D: Digraph, u: int) -> bool:
    return bool(np.all(D.adj[u, :]) and np.all(D.adj[:, u]))


def star_reduct(D: Digraph, u: int) -> Digraph:
    """Complement of ``D - u``; ``u`` must be universal."""
    if not 0 <= u < D.n:
        raise InputError(f"vertex {u} out of range for {D.n} vertices")
    if not is_universal(D, u):
        raise PreconditionError(f"vertex {u} is not universal")
    return complement(delete_vertex(D, u))


def product(Ds: Sequence[Digraph]) -> Digraph:
    if not Ds:
        raise InputError("product of an empty list is not supported")
    adj = Ds[0].adj
    for D in Ds[1:]:
        adj = np.kron(adj, D.adj)
    labels = tuple(itertools.product(*(tuple(D.label(i) for i in range(D.n)) for D in Ds)))
    return Digraph(adj, labels)


def function_table(g: int, m: int) -> np.ndarray:
    """All maps ``range(m) -> range(g)`` as rows, in lexicographic order."""
    count = g**m
    if m == 0:
        return np.zeros((1, 0), dtype=np.intp)
    if count == 0:
        return np.zeros((0, m), dtype=np.intp)
    idx = np.arange(count, dtype=np.intp)
    table = np.empty((count, m), dtype=np.intp)
    for x in range(m - 1, -1, -1):
        table[:, x] = idx % g
        idx //= g
    return table


def function_index(values: Sequence[int], g: int) -> int:
    index = 0
    for v in values:
        index = index * g + int(v)
    return index


def power_adjacency(G: Digraph, H: Digraph, rows: np.ndarray, cols: np.ndarray | None = None) -> np.ndarray:
    """Edge predicate of G^H between the function rows ``rows`` and ``cols``."""
    if cols is None:
        cols = rows
    out = np.ones((rows.shape[0], cols.shape[0]), dtype=bool)
    for x, y in H.edges():
        out &= G.adj[np.ix_(rows[:, x], cols[:, y])]
    return out


def exponential(G: Digraph, H: Digraph, cap: int | None = None) -> Digraph:
    """The digraph G^H: maps H -> G, with f -> f' iff f(x) -> f'(y) for every edge x -> y of H."""
    size = G.n**H.n
    limit = materialization_cap(cap)
    if size > limit:
        raise ResourceError(
            f"exponential needs {size} vertices, cap is {limit}", required=size, cap=limit
        )
    table = function_table(G.n, H.n)
    labels = tuple(tuple(G.label(v) for v in row) for row in table.tolist())
    return Digraph(power_adjacency(G, H, table), labels)


class ExponentialView:
    """Edge oracle for G^H that never materializes the vertex table."""

    def __init__(self, G: Digraph, H: Digraph):
        self.G = G
        self.H = H
        self.n = G.n**H.n
        self._edges = H.edges()

    def vertex(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.n:
            raise InputError(f"vertex {index} out of range for {self.n} vertices")
        values = []
        for _ in range(self.H.n):
            index, r = divmod(index, self.G.n)
            values.append(r)
        return tuple(reversed(values))

    def has_edge(self, i: int, j: int) -> bool:
        f, g = self.vertex(i), self.vertex(j)
        return all(self.G.adj[f[x], g[y]] for x, y in self._edges)


def components(D: Digraph) -> ComponentPartition:
    """Weakly connected components, numbered by their least vertex."""
    if D.n == 0:
        return ComponentPartition((), ())
    _, raw = connected_components(csr_matrix(D.adj), directed=True, connection="weak")
    order: dict[int, int] = {}
    for label in raw.tolist():
        order.setdefault(label, len(order))
    block_of = tuple(order[label] for label in raw.tolist())
    blocks: list[list[int]] = [[] for _ in order]
    for v, b in enumerate(block_of):
        blocks[b].append(v)
    return ComponentPartition(tuple(tuple(b) for b in blocks), block_of)


def component_digraphs(D: Digraph) -> list[Digraph]:
    return [induced(D, block) for block in components(D).blocks]


def disjoint_union(Ds: Sequence[Digraph]) -> Digraph:
    n = sum(D.n for D in Ds)
    adj = np.zeros((n, n), dtype=bool)
    labels = []
    start = 0
    for k, D in enumerate(Ds):
        adj[start:start + D.n, start:start + D.n] = D.adj
        labels.extend((k, D.label(i)) for i in range(D.n))
        start += D.n
    return Digraph(adj, tuple(labels))


def permute(D: Digraph, perm: Sequence[int]) -> Digraph:
    """Relabel so that old vertex ``v`` becomes ``perm[v]``."""
    perm = np.asarray(perm, dtype=np.intp)
    if sorted(perm.tolist()) != list(range(D.n)):
        raise InputError("perm is not a permutation of the vertices")
    inv = np.empty_like(perm)
    inv[perm] = np.arange(D.n)
    labels = None if D.labels is None else tuple(D.labels[v] for v in inv.tolist())
    return Digraph(D.adj[np.ix_(inv, inv)], labels)


def constant_maps(G: Digraph, m: int) -> list[int]:
    """Indices in ``exponential(G, H)`` (with ``|H| = m``) of the constant maps."""
    return [function_index([v] * m, G.n) for v in range(G.n)]
