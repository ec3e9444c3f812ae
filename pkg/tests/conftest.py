from __future__ import annotations

import itertools
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from permprime.corpus import CHAIN2, FOUR_ONE_GAP, PATH3, algebra_corpus
from permprime.digraph import Digraph

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def chain2():
    return CHAIN2


@pytest.fixture
def path3():
    return PATH3


@pytest.fixture
def four_one_gap():
    return FOUR_ONE_GAP


@pytest.fixture(scope="session")
def corpus():
    return algebra_corpus()


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@st.composite
def digraphs(draw, min_n=0, max_n=4, reflexive=None):
    n = draw(st.integers(min_n, max_n))
    bits = draw(st.lists(st.booleans(), min_size=n * n, max_size=n * n))
    adj = np.array(bits, dtype=bool).reshape(n, n)
    if reflexive is True:
        np.fill_diagonal(adj, True)
    return Digraph(adj)


@st.composite
def permutations_of(draw, n):
    return draw(st.permutations(list(range(n))))


# brute-force oracles, written against plain python objects only


def oracle_exponential(G: Digraph, H: Digraph):
    """(functions, edge set) of G^H by direct enumeration."""
    funcs = list(itertools.product(range(G.n), repeat=H.n))
    h_edges = [(x, y) for x in range(H.n) for y in range(H.n) if H.adj[x, y]]
    edges = {
        (i, j)
        for i, f in enumerate(funcs)
        for j, g in enumerate(funcs)
        if all(G.adj[f[x], g[y]] for x, y in h_edges)
    }
    return funcs, edges


def oracle_components(D: Digraph) -> list[frozenset]:
    n = D.n
    reach = [[D.adj[i, j] or D.adj[j, i] or i == j for j in range(n)] for i in range(n)]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                reach[i][j] = reach[i][j] or (reach[i][k] and reach[k][j])
    return sorted({frozenset(j for j in range(n) if reach[i][j]) for i in range(n)}, key=min)


def oracle_isomorphic(D1: Digraph, D2: Digraph) -> bool:
    if D1.n != D2.n:
        return False
    n = D1.n
    for p in itertools.permutations(range(n)):
        if all(D1.adj[i, j] == D2.adj[p[i], p[j]] for i in range(n) for j in range(n)):
            return True
    return False


def oracle_closure(A, gens, index_size):
    """Naive fixed point of coordinatewise application; returns a set of tuples."""
    S = {tuple(g) for g in gens}
    for op in A.operations:
        if op.arity == 0:
            S.add(tuple(int(op.table[()]) for _ in range(index_size)))
    while True:
        new = set(S)
        for op in A.operations:
            if op.arity == 0:
                continue
            for args in itertools.product(sorted(S), repeat=op.arity):
                new.add(tuple(int(op.table[tuple(a[i] for a in args)]) for i in range(index_size)))
        if new == S:
            return S
        S = new


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
