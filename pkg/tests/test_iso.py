import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from permprime.corpus import chain_inputs
from permprime.digraph import Digraph, build_digraph, complete_digraph, disjoint_union, permute
from permprime.iso import IsoWitness, are_isomorphic, check_mapping

from conftest import digraphs, oracle_isomorphic


def test_relabel_path3(path3):
    Q = permute(path3, [2, 1, 0])
    w = are_isomorphic(path3, Q)
    assert w is not None and w.check(path3, Q)


def test_edge_count_mismatch(path3):
    assert are_isomorphic(path3, complete_digraph(3)) is None


def test_size_mismatch_is_not_an_error(path3, chain2):
    assert are_isomorphic(path3, chain2) is None


def test_empty():
    assert are_isomorphic(Digraph(np.zeros((0, 0))), Digraph(np.zeros((0, 0)))) == IsoWitness(())


def test_regular_nonisomorphic():
    # 6-cycle vs two triangles: refinement alone cannot separate them
    c6 = build_digraph(6, [(i, (i + 1) % 6) for i in range(6)] + [((i + 1) % 6, i) for i in range(6)])
    tri = build_digraph(3, [(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)])
    assert are_isomorphic(c6, disjoint_union([tri, tri])) is None
    assert are_isomorphic(c6, permute(c6, [3, 5, 1, 0, 2, 4])) is not None


def test_check_mapping_rejects_non_bijection(path3):
    assert not check_mapping(path3, path3, [1, 1, 1])
    assert not check_mapping(path3, path3, [0, 1])


@given(digraphs(max_n=6))
def test_self_identity_compatible(D):
    w = are_isomorphic(D, D)
    assert w is not None and w.check(D, D)


@given(digraphs(max_n=6), st.data())
def test_relabel(D, data):
    perm = data.draw(st.permutations(list(range(D.n))))
    Q = permute(D, perm)
    w = are_isomorphic(D, Q)
    assert w is not None and w.check(D, Q)


@settings(max_examples=300)
@given(digraphs(max_n=5), digraphs(max_n=5))
def test_agrees_with_permutation_oracle(D1, D2):
    w = are_isomorphic(D1, D2)
    assert (w is not None) == oracle_isomorphic(D1, D2)
    assert (are_isomorphic(D2, D1) is not None) == (w is not None)
    if w is not None:
        assert w.check(D1, D2)


def test_deterministic(path3):
    Q = permute(path3, [2, 0, 1])
    assert are_isomorphic(path3, Q) == are_isomorphic(path3, Q)


def test_chain_inputs_pairwise_distinct():
    Ds = [D for D in chain_inputs(3)]
    for i, A in enumerate(Ds):
        for B in Ds[i + 1:]:
            assert are_isomorphic(A, B) is None
