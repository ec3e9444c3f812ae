"""Digraph isomorphism by joint color refinement and individualization.

Both digraphs are refined together so that color indices mean the same thing
on each side; a branch dies as soon as the two color histograms differ.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .digraph import Digraph
from .errors import ConsistencyError


@dataclass(frozen=True)
class IsoWitness:
    mapping: tuple[int, ...]

    def check(self, D1: Digraph, D2: Digraph) -> bool:
        """Edge-by-edge check over all ordered pairs."""
        return check_mapping(D1, D2, self.mapping)


def check_mapping(D1: Digraph, D2: Digraph, mapping) -> bool:
    m = np.asarray(mapping, dtype=np.intp)
    if D1.n != D2.n or m.shape != (D1.n,):
        return False
    if D1.n and sorted(m.tolist()) != list(range(D2.n)):
        return False
    return bool(np.array_equal(D1.adj, D2.adj[np.ix_(m, m)]))


_WEIGHTS = np.random.default_rng(0x5EED).integers(1, 2**62, size=1 << 16, dtype=np.int64)


def _weights(k: int) -> np.ndarray:
    global _WEIGHTS
    if k > len(_WEIGHTS):
        _WEIGHTS = np.random.default_rng(0x5EED).integers(1, 2**62, size=2 * k, dtype=np.int64)
    return _WEIGHTS[:k]


def _refine(adj1, adj2, c1, c2):
    """Refine two colorings jointly to a stable partition.

    A vertex's new color is its old color together with a hash of the
    multisets of out- and in-neighbour colors.  The hash is a wrapping int64
    sum of fixed random weights, so it is exact up to collisions, and a
    collision only coarsens the (still invariant) coloring.

    Returns the new colorings, or None when the histograms diverge.
    """
    n1 = len(c1)
    a1 = adj1.astype(np.int64)
    a2 = adj2.astype(np.int64)
    while True:
        k = int(max(c1.max(initial=-1), c2.max(initial=-1))) + 1
        w_out = _weights(2 * k)[:k]
        w_in = _weights(2 * k)[k:]
        keys1 = np.stack([c1, a1 @ w_out[c1], a1.T @ w_in[c1]], axis=1)
        keys2 = np.stack([c2, a2 @ w_out[c2], a2.T @ w_in[c2]], axis=1)
        rows, inverse = np.unique(np.vstack([keys1, keys2]), axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        new1, new2 = inverse[:n1], inverse[n1:]
        if not np.array_equal(np.bincount(new1, minlength=len(rows)),
                              np.bincount(new2, minlength=len(rows))):
            return None
        if len(rows) == len(np.unique(np.concatenate([c1, c2]))):
            return new1, new2
        c1, c2 = new1, new2


def _search(adj1, adj2, c1, c2):
    refined = _refine(adj1, adj2, c1, c2)
    if refined is None:
        return None
    c1, c2 = refined
    counts = np.bincount(c1)
    if counts.max(initial=1) <= 1:
        mapping = np.empty(len(c1), dtype=np.intp)
        where2 = np.empty(len(counts), dtype=np.intp)
        where2[c2] = np.arange(len(c2))
        mapping[:] = where2[c1]
        if np.array_equal(adj1, adj2[np.ix_(mapping, mapping)]):
            return mapping
        return None
    # smallest non-singleton cell, ties broken by color index
    cell = min((int(c), color) for color, c in enumerate(counts.tolist()) if c > 1)[1]
    v = int(np.flatnonzero(c1 == cell)[0])
    fresh = len(counts)
    for w in np.flatnonzero(c2 == cell).tolist():
        d1, d2 = c1.copy(), c2.copy()
        d1[v] = fresh
        d2[w] = fresh
        found = _search(adj1, adj2, d1, d2)
        if found is not None:
            return found
    return None


def are_isomorphic(D1: Digraph, D2: Digraph) -> IsoWitness | None:
    """Return a witness bijection if the digraphs are isomorphic, else None."""
    if D1.n != D2.n or D1.edge_count != D2.edge_count:
        return None
    if D1.n == 0:
        return IsoWitness(())
    c1 = np.diagonal(D1.adj).astype(np.int64)
    c2 = np.diagonal(D2.adj).astype(np.int64)
    mapping = _search(D1.adj, D2.adj, c1, c2)
    if mapping is None:
        return None
    witness = IsoWitness(tuple(mapping.tolist()))
    if not witness.check(D1, D2):
        raise ConsistencyError("refinement search returned a non-isomorphism")
    return witness
