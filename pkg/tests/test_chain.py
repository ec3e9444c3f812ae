import itertools

import numpy as np
import pytest
from hypothesis import given, settings

from permprime.chain import (
    ObstructionWitness,
    component_universals,
    construct_g1,
    construct_g2,
    construct_g3,
    find_obstruction,
    g2_fibers,
    g2_representative,
    g2_size,
    noncomplete_components,
    range_characterizations_agree,
    verify_chain,
)
from permprime.corpus import FOUR_ONE_GAP, LOOP1
from permprime.digraph import (
    build_digraph,
    complete_digraph,
    component_digraphs,
    components,
    equality_digraph,
    exponential,
    induced,
    is_complete,
    is_universal,
    universal_vertices,
)
from permprime.errors import PreconditionError, ResourceError
from permprime.formats import read_digraph
from permprime.iso import are_isomorphic

from conftest import FIXTURES, digraphs


def g1_oracle(G0):
    """Quadruples and edges straight from the definition."""
    E = G0.adj
    quads = [
        q for q in itertools.product(range(G0.n), repeat=4)
        if all(E[q[i], q[j]] for i in range(4) for j in range(i + 1, 4))
    ]
    edges = {
        (p, q) for p in quads for q in quads
        if p[0] == q[0] and p[3] == q[3] and E[p[1], q[2]] and E[q[1], p[2]]
    }
    return quads, edges


def g2_oracle(G1, block):
    both = G1.adj & G1.adj.T
    verts = [
        (v, g) for v in range(G1.n) for g in itertools.product(range(G1.n), repeat=len(block))
        if all(both[v, x] for x in g)
    ]
    edges = {(f, h) for f in verts for h in verts if G1.adj[f[0], h[0]] and f[1] == h[1]}
    return verts, edges


class TestG1:
    def test_chain2(self, chain2):
        G1 = construct_g1(chain2)
        assert list(G1.labels) == [(0, 0, 0, 0), (0, 0, 0, 1), (0, 0, 1, 1), (0, 1, 1, 1), (1, 1, 1, 1)]
        assert sorted(len(b) for b in components(G1).blocks) == [1, 1, 3]

    def test_known_nonedge(self, chain2):
        G1 = construct_g1(chain2)
        v, w = G1.index_of((0, 1, 1, 1)), G1.index_of((0, 0, 0, 1))
        assert not G1.has_edge(v, w)

    def test_non_reflexive(self):
        with pytest.raises(PreconditionError):
            construct_g1(build_digraph(2, [(0, 1)]))

    @settings(max_examples=30, deadline=None)
    @given(digraphs(min_n=1, max_n=3, reflexive=True))
    def test_oracle(self, G0):
        G1 = construct_g1(G0)
        quads, edges = g1_oracle(G0)
        assert list(G1.labels) == quads
        assert {(G1.labels[i], G1.labels[j]) for i, j in G1.edges()} == edges

    @settings(max_examples=30, deadline=None)
    @given(digraphs(min_n=1, max_n=4, reflexive=True))
    def test_aabb_universal(self, G0):
        G1 = construct_g1(G0)
        part = components(G1)
        for a, b in G0.edges():
            i = G1.index_of((a, a, b, b))
            block = part.blocks[part.block_of[i]]
            assert is_universal(induced(G1, block), block.index(i))
        assert all(component_universals(G1))

    @settings(max_examples=30, deadline=None)
    @given(digraphs(min_n=2, max_n=4, reflexive=True))
    def test_asymmetric_edge_gives_nonedge(self, G0):
        G1 = construct_g1(G0)
        part = components(G1)
        for a, b in G0.edges():
            if G0.has_edge(b, a):
                continue
            p, q = G1.index_of((a, b, b, b)), G1.index_of((a, a, a, b))
            home = part.block_of[G1.index_of((a, a, b, b))]
            assert part.block_of[p] == part.block_of[q] == home
            assert not G1.has_edge(p, q)
            assert noncomplete_components(G1)


class TestG2:
    def setup_method(self):
        from permprime.corpus import CHAIN2
        self.G1 = construct_g1(CHAIN2)
        self.R = noncomplete_components(self.G1)[0]
        self.block = components(self.G1).blocks[self.R]

    def test_oracle(self):
        G2 = construct_g2(self.G1, self.R)
        verts, edges = g2_oracle(self.G1, self.block)
        assert sorted(G2.labels) == sorted(verts) == list(G2.labels)
        assert {(G2.labels[i], G2.labels[j]) for i, j in G2.edges()} == edges
        assert G2.n == g2_size(self.G1, self.R) == 45

    def test_constant_universal_component_is_r(self):
        G2 = construct_g2(self.G1, self.R)
        R = induced(self.G1, self.block)
        (uR,) = [self.block[i] for i in universal_vertices(R)]
        members = [i for i, (f0, g) in enumerate(G2.labels) if set(g) == {uR}]
        part = components(G2)
        # the maps constant u_R on R form a whole component isomorphic to R
        comp = {part.block_of[i] for i in members}
        assert len(comp) == 1 and sorted(part.blocks[comp.pop()]) == sorted(members)
        assert are_isomorphic(induced(G2, members), R) is not None

    def test_identity_component_is_single_loop(self):
        G2 = construct_g2(self.G1, self.R)
        members = [i for i, (f0, g) in enumerate(G2.labels) if g == self.block]
        assert len(members) == 1 and G2.has_edge(members[0], members[0])

    def test_complete_and_noncomplete(self):
        G2 = construct_g2(self.G1, self.R)
        flags = [is_complete(C) for C in component_digraphs(G2)]
        assert any(flags) and not all(flags)
        assert all(component_universals(G2))

    def test_fibers_match(self):
        G2 = construct_g2(self.G1, self.R)
        rep = g2_representative(self.G1, self.R)
        kinds = {C.adj.tobytes() for C in component_digraphs(G2)}
        rep_kinds = {C.adj.tobytes() for C in component_digraphs(rep)}
        assert len(component_digraphs(rep)) <= len(component_digraphs(G2))
        for C in component_digraphs(G2):
            assert any(are_isomorphic(C, D) is not None for D in component_digraphs(rep))
        assert rep_kinds and kinds

    def test_fiber_supports_are_common_neighbourhoods(self):
        both = self.G1.adj & self.G1.adj.T
        for fb in g2_fibers(self.G1, self.R):
            common = np.logical_and.reduce([both[t] for t in fb.witness_range])
            assert tuple(np.flatnonzero(common).tolist()) == fb.support

    def test_complete_r_rejected(self):
        complete_idx = [i for i in range(len(components(self.G1))) if i != self.R][0]
        with pytest.raises(PreconditionError):
            construct_g2(self.G1, complete_idx)

    def test_cap(self):
        G1 = construct_g1(read_digraph(FIXTURES / "g4.dg"))
        R = noncomplete_components(G1)[0]
        with pytest.raises(ResourceError) as info:
            construct_g2(G1, R, cap=100)
        assert info.value.required == g2_size(G1, R)


class TestG3:
    def test_loop_exponent_is_identity(self, chain2):
        G1 = construct_g1(chain2)
        G2 = construct_g2(G1, noncomplete_components(G1)[0])
        G3 = construct_g3(G2, LOOP1)
        assert np.array_equal(G3.adj, G2.adj)

    def test_components_are_powers(self, chain2):
        G1 = construct_g1(chain2)
        G2 = construct_g2(G1, noncomplete_components(G1)[0])
        G3 = construct_g3(G2, chain2)
        comps = component_digraphs(G3)
        powers = [exponential(C, chain2) for C in component_digraphs(G2)]
        assert len(comps) == len(powers)
        for C, P in zip(comps, powers):
            assert are_isomorphic(C, P) is not None
        for C, B in zip(comps, component_digraphs(G2)):
            assert is_complete(C) == is_complete(B)

    def test_vertex_set_brute(self, chain2):
        G1 = construct_g1(chain2)
        G2 = construct_g2(G1, noncomplete_components(G1)[0])
        G3 = construct_g3(G2, chain2)
        comp = components(G2).block_of
        expect = [
            f for f in itertools.product(range(G2.n), repeat=2)
            if any(all(G2.adj[x, u] for x in f) for u in range(G2.n))
        ]
        assert [f for f in itertools.product(range(G2.n), repeat=2) if comp[f[0]] == comp[f[1]]] == expect
        assert list(G3.labels) == [tuple(G2.labels[v] for v in f) for f in expect]

    def test_missing_universal(self, chain2):
        with pytest.raises(PreconditionError):
            construct_g3(build_digraph(3, [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2)]), chain2)

    @settings(max_examples=40, deadline=None)
    @given(digraphs(min_n=1, max_n=6, reflexive=True))
    def test_range_characterizations(self, D):
        ok, _ = range_characterizations_agree(D, 3)
        if all(component_universals(D)):
            assert ok


class TestObstruction:
    def test_g1_component(self, chain2):
        G1 = construct_g1(chain2)
        block = max(components(G1).blocks, key=len)
        C = induced(G1, block)
        w = find_obstruction(C)
        assert (C.labels[w.v], C.labels[w.u], C.labels[w.w]) == ((0, 0, 0, 1), (0, 0, 1, 1), (0, 1, 1, 1))
        other = ObstructionWitness(*(C.index_of(q) for q in ((0, 1, 1, 1), (0, 0, 1, 1), (0, 0, 0, 1))))
        assert other.holds(C) and w.holds(C)

    def test_complete(self):
        assert find_obstruction(complete_digraph(4)) is None

    def test_path3(self, path3):
        assert find_obstruction(path3) == ObstructionWitness(0, 1, 2)

    @given(digraphs(max_n=5))
    def test_first_triple_brute(self, D):
        triples = [
            (v, u, w) for v, u, w in itertools.product(range(D.n), repeat=3)
            if D.adj[v, u] and D.adj[u, u] and D.adj[u, w] and not D.adj[v, w]
        ]
        got = find_obstruction(D)
        assert (got is None) == (not triples)
        if triples:
            assert (got.v, got.u, got.w) == triples[0]


class TestVerifyChain:
    def test_chain2(self, chain2):
        rep = verify_chain(chain2, chain2)
        assert rep.passed, rep.failure
        assert rep.witness is not None
        assert rep.counters["g2_mode"] == "materialized"

    def test_path3_symmetric(self, path3):
        with pytest.raises(PreconditionError, match="symmetric"):
            verify_chain(path3, path3)

    def test_non_reflexive(self):
        with pytest.raises(PreconditionError):
            verify_chain(build_digraph(2, [(0, 1)]), LOOP1)

    def test_edgeless_x(self, chain2):
        with pytest.raises(PreconditionError):
            verify_chain(chain2, build_digraph(1, []))

    def test_four_vertex_equality(self):
        G0 = read_digraph(FIXTURES / "g4.dg")
        rep = verify_chain(G0, equality_digraph(2))
        assert rep.passed, rep.failure
        assert rep.counters["g2_mode"] == "fibered"

    def test_threads_same_verdict(self, chain2):
        G0 = read_digraph(FIXTURES / "g4.dg")
        a = verify_chain(G0, chain2, threads=1)
        b = verify_chain(G0, chain2, threads=4)
        assert a.checks == b.checks and a.counters == b.counters and a.witness == b.witness

    def test_all_checks_named(self, chain2):
        rep = verify_chain(chain2, chain2)
        for name in (
            "g1_universal_in_every_component",
            "g1_aabb_universal_per_component",
            "g1_abbb_aaab_nonedge",
            "g2_fu_is_universal",
            "g2_has_complete_component",
            "g2_has_noncomplete_component",
            "g3_vertex_characterizations_agree",
            "g3_components_are_powers",
            "obstruction_found",
        ):
            assert rep.checks.get(name) is True, name

    def test_four_one_gap_reflexive_symmetric_rejected(self):
        with pytest.raises(PreconditionError):
            verify_chain(FOUR_ONE_GAP, LOOP1)
