"""Trace sets of power vertices and the swapped-power quotients.

For digraphs G1, G2 with universal vertices u1, u2 and the complete digraph K
on ``k`` vertices, a vertex of ``G1 ** (G2* x K)`` is a map
``f: G2* x K -> G1``.  Its trace is the set of pairs ``(g1, g2)`` in
``G1* x G2*`` with ``f(g2, j) = g1`` for some ``j``.  Non-edges of the power
are decided by traces alone: ``f -/-> f'`` iff some ``(g1, g2)`` in the trace
of ``f`` and ``(g1', g2')`` in the trace of ``f'`` have ``g1 -/-> g1'`` in G1
and ``g2 -/-> g2'`` in G2.

Conventions:

* ``Gi*`` lists the vertices of Gi other than ui in increasing order.
* Power vertices are maps listed lexicographically over the coordinates
  ``(g2, j)``, ``g2`` major, matching ``exponential(G1, product([G2*, K]))``.
* A trace set is a frozenset of ``(g1, g2)`` pairs of original vertex
  numbers; internally it is a bitmask with bit ``a * |G2*| + b`` for the
  ``a``-th vertex of G1* and ``b``-th vertex of G2*.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .config import materialization_cap
from .digraph import (
    Digraph,
    complete_digraph,
    exponential,
    function_table,
    is_universal,
    product,
    star_reduct,
    universal_vertices,
)
from .errors import InputError, PreconditionError, ResourceError
from .iso import are_isomorphic

TraceSet = frozenset


@dataclass(frozen=True)
class PowerContext:
    G1: Digraph
    u1: int
    G2: Digraph
    u2: int
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise InputError(f"k must be at least 1, got {self.k}")
        for name, G, u in (("G1", self.G1, self.u1), ("G2", self.G2, self.u2)):
            if not 0 <= u < G.n:
                raise InputError(f"{name} has no vertex {u}")
            if not is_universal(G, u):
                raise PreconditionError(f"vertex {u} is not universal in {name}")

    @classmethod
    def auto(cls, G1: Digraph, G2: Digraph, k: int, u1: int | None = None, u2: int | None = None) -> PowerContext:
        """Fill in missing universal vertices with the lowest-index one."""
        if u1 is None:
            u1 = _first_universal(G1, "G1")
        if u2 is None:
            u2 = _first_universal(G2, "G2")
        return cls(G1, u1, G2, u2, k)

    @property
    def star1(self) -> list[int]:
        return [v for v in range(self.G1.n) if v != self.u1]

    @property
    def star2(self) -> list[int]:
        return [v for v in range(self.G2.n) if v != self.u2]

    @property
    def coords(self) -> list[tuple[int, int]]:
        """Exponent coordinates ``(g2, j)`` in power-vertex order."""
        return [(g2, j) for g2 in self.star2 for j in range(self.k)]

    @property
    def power_size(self) -> int:
        return self.G1.n ** (len(self.star2) * self.k)

    def swapped(self) -> PowerContext:
        return PowerContext(self.G2, self.u2, self.G1, self.u1, self.k)

    def exponent(self) -> Digraph:
        return product([star_reduct(self.G2, self.u2), complete_digraph(self.k)])

    def pair_bit(self, g1: int, g2: int) -> int:
        return self.star1.index(g1) * len(self.star2) + self.star2.index(g2)

    def mask_to_set(self, mask: int) -> TraceSet:
        s1, s2 = self.star1, self.star2
        m2 = len(s2)
        return frozenset(
            (s1[b // m2], s2[b % m2]) for b in range(len(s1) * m2) if mask >> b & 1
        )

    def set_to_mask(self, U) -> int:
        mask = 0
        for g1, g2 in U:
            mask |= 1 << self.pair_bit(g1, g2)
        return mask


def _first_universal(G: Digraph, name: str) -> int:
    us = universal_vertices(G)
    if not us:
        raise PreconditionError(f"{name} has no universal vertex")
    return us[0]


def _bad_matrix(ctx: PowerContext) -> np.ndarray:
    """bad[p, q] for pair bits p = (g1, g2), q = (g1', g2'): both coordinates are non-edges."""
    s1 = np.array(ctx.star1, dtype=np.intp)
    s2 = np.array(ctx.star2, dtype=np.intp)
    non1 = ~ctx.G1.adj[np.ix_(s1, s1)]
    non2 = ~ctx.G2.adj[np.ix_(s2, s2)]
    return np.kron(non1, non2)


def _masks_to_matrix(masks, bits: int) -> np.ndarray:
    out = np.zeros((len(masks), bits), dtype=bool)
    for i, m in enumerate(masks):
        for b in range(bits):
            if m >> b & 1:
                out[i, b] = True
    return out


def _check_function(ctx: PowerContext, f) -> np.ndarray:
    vec = np.asarray(f, dtype=np.intp).reshape(-1)
    if vec.size != len(ctx.star2) * ctx.k:
        raise InputError(f"power vertex needs {len(ctx.star2) * ctx.k} values, got {vec.size}")
    if vec.size and (vec.min() < 0 or vec.max() >= ctx.G1.n):
        raise InputError("power vertex has a value outside G1")
    return vec


def trace_mask(ctx: PowerContext, f) -> int:
    vec = _check_function(ctx, f)
    pos1 = {v: i for i, v in enumerate(ctx.star1)}
    m2 = len(ctx.star2)
    mask = 0
    for c, value in enumerate(vec.tolist()):
        if value != ctx.u1:
            mask |= 1 << (pos1[value] * m2 + c // ctx.k)
    return mask


def trace_set(ctx: PowerContext, f) -> TraceSet:
    """Pairs (g1, g2) with g1 != u1 and f(g2, j) = g1 for some j."""
    return ctx.mask_to_set(trace_mask(ctx, f))


def trace_masks(ctx: PowerContext, table: np.ndarray) -> np.ndarray:
    """Trace bitmasks of many power vertices at once (rows of ``table``)."""
    m1, m2 = len(ctx.star1), len(ctx.star2)
    if m1 * m2 > 62:
        raise ResourceError("trace ground set too large for vectorized masks", required=m1 * m2, cap=62)
    pos1 = np.full(ctx.G1.n, -1, dtype=np.int64)
    pos1[ctx.star1] = np.arange(m1)
    masks = np.zeros(table.shape[0], dtype=np.int64)
    for c in range(table.shape[1]):
        p = pos1[table[:, c]]
        hit = p >= 0
        masks[hit] |= np.left_shift(np.int64(1), p[hit] * m2 + c // ctx.k)
    return masks


def nonedge_by_claim1(ctx: PowerContext, f, f2) -> bool:
    """Non-edge test for (f, f2) in the power, decided from trace sets alone."""
    U, V = trace_set(ctx, f), trace_set(ctx, f2)
    return traces_nonadjacent(ctx, U, V)


def traces_nonadjacent(ctx: PowerContext, U, V) -> bool:
    G1, G2 = ctx.G1, ctx.G2
    return any(
        not G1.adj[g1, h1] and not G2.adj[g2, h2] for g1, g2 in U for h1, h2 in V
    )


def direct_power(ctx: PowerContext, cap: int | None = None) -> Digraph:
    """The materialized power ``G1 ** (G2* x K)``."""
    return exponential(ctx.G1, ctx.exponent(), cap=cap)


@dataclass
class Claim1Report:
    vertices: int
    pairs_checked: int
    disagreements: int
    first_disagreement: tuple[int, int] | None

    @property
    def passed(self) -> bool:
        return self.disagreements == 0


def verify_claim1(ctx: PowerContext, cap: int | None = None) -> Claim1Report:
    """Compare the power's edge predicate with the trace criterion on every ordered pair."""
    power = direct_power(ctx, cap=cap)
    table = function_table(ctx.G1.n, len(ctx.coords))
    bits = len(ctx.star1) * len(ctx.star2)
    T = _masks_to_matrix(trace_masks(ctx, table).tolist(), bits).astype(np.float64)
    bad = _bad_matrix(ctx).astype(np.float64)
    nonedge = (T @ bad @ T.T) > 0
    diff = np.argwhere(power.adj == nonedge)  # edge and non-edge must be complementary
    first = tuple(int(v) for v in diff[0]) if len(diff) else None
    n = power.n
    return Claim1Report(n, n * n, int(len(diff)), first)


def realizable_traces(ctx: PowerContext) -> list[TraceSet]:
    """Subsets U of G1* x G2* with at most k values of g1 over each g2.

    Ordered by bitmask.
    """
    return [ctx.mask_to_set(m) for m in realizable_masks(ctx)]


def realizable_masks(ctx: PowerContext) -> list[int]:
    m1, m2 = len(ctx.star1), len(ctx.star2)
    columns = []
    for b in range(m2):
        col_bits = [a * m2 + b for a in range(m1)]
        options = []
        for size in range(min(ctx.k, m1) + 1):
            for chosen in itertools.combinations(col_bits, size):
                options.append(sum(1 << c for c in chosen))
        columns.append(options)
    masks = {sum(choice) for choice in itertools.product(*columns)}
    return sorted(masks)


@dataclass
class TraceQuotient:
    masks: list[int]
    adj: np.ndarray
    ctx: PowerContext

    @property
    def subsets(self) -> list[TraceSet]:
        return [self.ctx.mask_to_set(m) for m in self.masks]

    def digraph(self) -> Digraph:
        return Digraph(self.adj, tuple(tuple(sorted(s)) for s in self.subsets))

    def edge(self, U, V) -> bool:
        i = self.masks.index(self.ctx.set_to_mask(U))
        j = self.masks.index(self.ctx.set_to_mask(V))
        return bool(self.adj[i, j])


def _quotient_adj(ctx: PowerContext, masks: list[int]) -> np.ndarray:
    bits = len(ctx.star1) * len(ctx.star2)
    T = _masks_to_matrix(masks, bits).astype(np.float64)
    bad = _bad_matrix(ctx).astype(np.float64)
    return ~((T @ bad @ T.T) > 0)


def quotient_power(ctx: PowerContext) -> TraceQuotient:
    """Digraph on realizable traces; U -> U' unless the trace criterion separates them."""
    masks = realizable_masks(ctx)
    return TraceQuotient(masks, _quotient_adj(ctx, masks), ctx)


@dataclass
class Block:
    trace: TraceSet
    mask: int
    members: list[int] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.members)


def trace_blocks(ctx: PowerContext, cap: int | None = None) -> list[Block]:
    """Partition all power vertices by trace set; blocks ordered by trace bitmask."""
    size = ctx.power_size
    limit = materialization_cap(cap)
    if size > limit:
        raise ResourceError(f"power has {size} vertices, cap is {limit}", required=size, cap=limit)
    table = function_table(ctx.G1.n, len(ctx.coords))
    masks = trace_masks(ctx, table)
    blocks: dict[int, Block] = {}
    for v, m in enumerate(masks.tolist()):
        if m not in blocks:
            blocks[m] = Block(ctx.mask_to_set(m), m)
        blocks[m].members.append(v)
    return [blocks[m] for m in sorted(blocks)]


@dataclass
class BlockQuotientReport:
    blocks: int
    well_defined: bool
    matches_subsets: bool
    identity_is_isomorphism: bool
    isomorphic: bool

    @property
    def passed(self) -> bool:
        return self.well_defined and self.matches_subsets and self.identity_is_isomorphism and self.isomorphic


def block_quotient(ctx: PowerContext, cap: int | None = None) -> tuple[list[Block], np.ndarray, bool]:
    """Quotient of the materialized power by trace equality.

    Returns the blocks, the block adjacency, and whether adjacency between
    blocks is independent of the chosen members.
    """
    power = direct_power(ctx, cap=cap)
    blocks = trace_blocks(ctx, cap=cap)
    nb = len(blocks)
    adj = np.zeros((nb, nb), dtype=bool)
    well_defined = True
    for i, bi in enumerate(blocks):
        rows = power.adj[bi.members]
        for j, bj in enumerate(blocks):
            sub = rows[:, bj.members]
            value = bool(sub[0, 0])
            adj[i, j] = value
            if well_defined and not np.all(sub == value):
                well_defined = False
    return blocks, adj, well_defined


def compare_block_and_subset_quotients(ctx: PowerContext, cap: int | None = None) -> BlockQuotientReport:
    blocks, badj, well_defined = block_quotient(ctx, cap=cap)
    q = quotient_power(ctx)
    block_masks = [b.mask for b in blocks]
    matches = block_masks == q.masks
    identity = matches and bool(np.array_equal(badj, q.adj))
    iso = are_isomorphic(Digraph(badj), Digraph(q.adj)) is not None
    return BlockQuotientReport(len(blocks), well_defined, matches, identity, iso)


def transpose(U) -> TraceSet:
    return frozenset((b, a) for a, b in U)


@dataclass
class SwapReport:
    vertices: int
    swapped_vertices: int
    pairs_checked: int
    mismatches: int
    first_mismatch: tuple | None
    elapsed: float
    block_check: BlockQuotientReport | None = None

    @property
    def passed(self) -> bool:
        block_ok = self.block_check is None or self.block_check.passed
        return self.vertices == self.swapped_vertices and self.mismatches == 0 and block_ok


def verify_power_swap(
    G1: Digraph,
    u1: int,
    G2: Digraph,
    u2: int,
    k: int,
    check_blocks: bool = False,
    cap: int | None = None,
) -> SwapReport:
    """Check that U -> transpose(U) is an isomorphism between the two trace quotients.

    With ``check_blocks`` the subset quotient of each side is also compared
    against the quotient of the materialized power (when within the cap).
    """
    start = time.perf_counter()
    ctx = PowerContext(G1, u1, G2, u2, k)
    need = max(G1.n - 1, G2.n - 1)
    if k < need:
        raise PreconditionError(f"k = {k} is below max(|G1*|, |G2*|) = {need}")
    q1 = quotient_power(ctx)
    sw = ctx.swapped()
    q2 = quotient_power(sw)
    mismatches = 0
    first = None
    if len(q1.masks) == len(q2.masks):
        index2 = {m: i for i, m in enumerate(q2.masks)}
        perm = np.array([index2[sw.set_to_mask(transpose(U))] for U in q1.subsets], dtype=np.intp)
        diff = np.argwhere(q1.adj != q2.adj[np.ix_(perm, perm)])
        mismatches = len(diff)
        if mismatches:
            i, j = (int(v) for v in diff[0])
            first = (tuple(sorted(q1.subsets[i])), tuple(sorted(q1.subsets[j])))
    block_check = None
    if check_blocks:
        limit = materialization_cap(cap)
        reports = [
            compare_block_and_subset_quotients(c, cap=cap)
            for c in (ctx, sw)
            if c.power_size <= limit
        ]
        if reports:
            block_check = BlockQuotientReport(
                blocks=sum(r.blocks for r in reports),
                well_defined=all(r.well_defined for r in reports),
                matches_subsets=all(r.matches_subsets for r in reports),
                identity_is_isomorphism=all(r.identity_is_isomorphism for r in reports),
                isomorphic=all(r.isomorphic for r in reports),
            )
    n = len(q1.masks)
    return SwapReport(
        vertices=n,
        swapped_vertices=len(q2.masks),
        pairs_checked=n * n if len(q1.masks) == len(q2.masks) else 0,
        mismatches=mismatches,
        first_mismatch=first,
        elapsed=time.perf_counter() - start,
        block_check=block_check,
    )
