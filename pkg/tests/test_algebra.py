import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permprime.algebra import (
    FiniteAlgebra,
    Term,
    element_term,
    find_maltsev_term,
    free_algebra_on_two,
    generate_subpower,
    is_compatible,
    is_congruence_permutable,
    is_maltsev_term,
    maltsev_digraph,
    projections,
    replay,
    var,
)
from permprime.corpus import CHAIN2
from permprime.digraph import build_digraph, complete_digraph, is_reflexive, is_symmetric
from permprime.errors import InputError, ResourceError

from conftest import digraphs, oracle_closure

S2 = FiniteAlgebra(2, {"meet": (2, [0, 0, 0, 1])}, name="S2")
Z2 = FiniteAlgebra(2, [("plus", 2, [0, 1, 1, 0]), ("neg", 1, [0, 1]), ("zero", 0, [0])], name="Z2")
ONE = FiniteAlgebra(1, [("f", 2, [0])])


@st.composite
def algebras(draw, max_size=3, max_arity=3):
    size = draw(st.integers(1, max_size))
    ops = []
    for k in range(draw(st.integers(0, 2))):
        arity = draw(st.integers(0, min(max_arity, 2 if size == 3 else 3)))
        values = draw(st.lists(st.integers(0, size - 1), min_size=size**arity, max_size=size**arity))
        ops.append((f"o{k}", arity, values))
    return FiniteAlgebra(size, ops)


def compatible_oracle(A, D):
    E = D.edges()
    for op in A.operations:
        for tup in itertools.product(E, repeat=op.arity):
            a = op(*(e[0] for e in tup))
            b = op(*(e[1] for e in tup))
            if not D.adj[a, b]:
                return False
    return True


class TestAlgebraValidation:
    def test_bad_table_length(self):
        with pytest.raises(InputError):
            FiniteAlgebra(2, [("f", 2, [0, 1, 1])])

    def test_value_range(self):
        with pytest.raises(InputError):
            FiniteAlgebra(2, [("f", 1, [0, 2])])

    def test_duplicate_symbol(self):
        with pytest.raises(InputError):
            FiniteAlgebra(2, [("f", 1, [0, 1]), ("f", 1, [1, 0])])

    def test_signature(self):
        assert Z2.signature == (("plus", 2), ("neg", 1), ("zero", 0))


class TestCompatible:
    def test_semilattice_chain(self):
        assert is_compatible(S2, CHAIN2)

    def test_single_edge_is_preserved(self):
        # meet((0,1),(0,1)) = (0,1), so the lone edge survives
        assert is_compatible(S2, build_digraph(2, [(0, 1)]))

    def test_failing_example(self):
        res = is_compatible(S2, build_digraph(2, [(0, 1), (1, 0)]))
        assert not res
        assert res.op == "meet"
        assert res.edges == ((0, 1), (1, 0)) and res.image == (0, 0)

    def test_size_mismatch(self):
        with pytest.raises(InputError):
            is_compatible(S2, complete_digraph(3))

    @given(algebras())
    def test_complete_always(self, A):
        assert is_compatible(A, complete_digraph(A.size))

    @settings(max_examples=200)
    @given(algebras(), st.data())
    def test_oracle(self, A, data):
        D = data.draw(digraphs(min_n=A.size, max_n=A.size))
        res = is_compatible(A, D)
        assert bool(res) == compatible_oracle(A, D)
        if not res:
            op = A.op(res.op)
            a = op(*(e[0] for e in res.edges)) if op.arity else res.image[0]
            b = op(*(e[1] for e in res.edges)) if op.arity else res.image[1]
            assert (a, b) == res.image and not D.adj[a, b]


class TestSubpower:
    def test_semilattice(self):
        gens = [(0, 0, 1, 1), (0, 1, 0, 1)]
        els = generate_subpower(S2, 4, gens)
        assert [e.coords for e in els] == [(0, 0, 1, 1), (0, 1, 0, 1), (0, 0, 0, 1)]

    def test_z2(self):
        els = generate_subpower(Z2, 4, [(0, 0, 1, 1), (0, 1, 0, 1)])
        assert {e.coords for e in els} == {(0, 0, 1, 1), (0, 1, 0, 1), (0, 1, 1, 0), (0, 0, 0, 0)}

    def test_empty_generators(self):
        assert generate_subpower(S2, 3, []) == []

    def test_nullary_only(self):
        els = generate_subpower(Z2, 2, [])
        assert [e.coords for e in els] == [(0, 0)]
        assert els[0].derivation == ("zero", ())

    def test_cap(self):
        with pytest.raises(ResourceError):
            generate_subpower(Z2, 4, [(0, 0, 1, 1), (0, 1, 0, 1)], cap=2)

    def test_bad_generator(self):
        with pytest.raises(InputError):
            generate_subpower(S2, 4, [(0, 0, 1)])

    @settings(max_examples=80, deadline=None)
    @given(algebras(max_size=2), st.integers(1, 3), st.data())
    def test_closure_oracle_and_replay(self, A, m, data):
        gens = data.draw(st.lists(
            st.tuples(*[st.integers(0, A.size - 1)] * m), max_size=3))
        els = generate_subpower(A, m, gens)
        assert {e.coords for e in els} == oracle_closure(A, gens, m)
        assert len({e.coords for e in els}) == len(els)
        assert replay(A, els, gens)

    def test_levels_sorted(self):
        A = FiniteAlgebra(2, [("j", 2, [0, 1, 1, 1]), ("m", 2, [0, 0, 0, 1])])
        els = generate_subpower(A, 4, projections(2, 2))
        level = [e.coords for e in els[2:]]
        assert level == sorted(level)


class TestTerms:
    def test_str_and_eval(self):
        t = Term("plus", (Term("plus", (var("x"), var("y"))), var("z")))
        assert str(t) == "plus(plus(x, y), z)"
        assert t.depth() == 2
        assert t.evaluate(Z2, {"x": 1, "y": 1, "z": 1}) == 1

    def test_element_term_matches_coords(self):
        els = generate_subpower(Z2, 8, projections(2, 3))
        points = list(itertools.product(range(2), repeat=3))
        for i, el in enumerate(els):
            t = element_term(els, i, ("x", "y", "z"))
            assert tuple(t.evaluate(Z2, dict(zip("xyz", p))) for p in points) == el.coords


class TestFreeAlgebra:
    def test_s2(self):
        F = free_algebra_on_two(S2)
        assert len(F) == 3
        assert [str(F.term(i)) for i in range(3)] == ["x", "y", "meet(x, y)"]

    def test_z2(self):
        assert len(free_algebra_on_two(Z2)) == 4

    def test_trivial(self):
        assert len(free_algebra_on_two(ONE)) == 1


class TestMaltsevDigraph:
    def test_s2(self):
        D = maltsev_digraph(S2)
        x, y, m = (D.index_of(s) for s in ("x", "y", "meet(x, y)"))
        expect = {(x, x), (x, y), (y, y), (x, m), (m, m), (m, y)}
        assert set(D.edges()) == expect
        assert not is_symmetric(D)

    def test_z2(self):
        assert is_symmetric(maltsev_digraph(Z2))

    def test_trivial(self):
        D = maltsev_digraph(ONE)
        assert D.n == 1 and D.has_edge(0, 0)

    def test_invariants_on_corpus(self, corpus):
        for name, A in corpus.items():
            F = free_algebra_on_two(A)
            D = maltsev_digraph(A, free=F)
            assert is_reflexive(D), name
            assert is_compatible(F.as_algebra(), D.without_labels()), name


class TestMaltsevTerm:
    def test_z2(self):
        t = find_maltsev_term(Z2)
        assert t is not None and is_maltsev_term(Z2, t)
        assert str(t) == "plus(plus(x, y), z)"

    def test_s2_none(self):
        assert find_maltsev_term(S2) is None

    def test_set_none(self):
        assert find_maltsev_term(FiniteAlgebra(2, [])) is None

    def test_trivial_projection(self):
        assert str(find_maltsev_term(ONE)) == "x"

    def test_corpus_terms_verified(self, corpus):
        for A in corpus.values():
            t = find_maltsev_term(A)
            if t is not None:
                pts = itertools.product(range(A.size), repeat=2)
                assert all(
                    t.evaluate(A, {"x": a, "y": b, "z": b}) == a
                    and t.evaluate(A, {"x": b, "y": b, "z": a}) == a
                    for a, b in pts
                )

    @settings(max_examples=40, deadline=None)
    @given(algebras(max_size=2, max_arity=2))
    def test_oracle_small(self, A):
        # brute force: does any ternary term operation satisfy the identities?
        gens = projections(A.size, 3)
        clone = oracle_closure(A, gens, A.size**3)
        pts = list(itertools.product(range(A.size), repeat=3))
        pos = {p: i for i, p in enumerate(pts)}

        def maltsev(v):
            return all(
                v[pos[(a, b, b)]] == a and v[pos[(b, b, a)]] == a
                for a in range(A.size) for b in range(A.size)
            )

        assert (find_maltsev_term(A) is not None) == any(maltsev(v) for v in clone)


class TestCrossCheck:
    def test_verdicts(self, corpus):
        permutable = {n for n, A in corpus.items() if is_congruence_permutable(A).permutable}
        assert permutable == {
            "trivial", "boolean2", "z2", "z2_plus", "minority2", "nand2", "z3", "z3_maltsev", "z3_minus",
        }

    def test_s2_verdict(self):
        v = is_congruence_permutable(S2)
        assert not v.permutable and v.maltsev_term is None
        assert v.obstruction_digraph is not None and not is_symmetric(v.obstruction_digraph)

    def test_z2_verdict(self):
        v = is_congruence_permutable(Z2)
        assert v.permutable and v.obstruction_digraph is None

    @settings(max_examples=60, deadline=None)
    @given(algebras(max_size=2, max_arity=2))
    def test_random_agree(self, A):
        v = is_congruence_permutable(A)
        assert v.permutable == (v.maltsev_term is not None)
