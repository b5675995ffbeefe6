from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from regmodels.errors import DegenerateLattice, InvalidInput
from regmodels.npath import (
    CrossingShape,
    Lattice2,
    farey_adjacent,
    is_aligned,
    is_n_path,
    lattice_basis,
    n_path_step_ok,
    shortest_n_path,
    solve_r,
)

F = Fraction


@pytest.mark.parametrize(
    "N, hi, lo, want",
    [
        (1, F(2, 15), F(0), [F(2, 15), F(1, 8), F(0)]),
        (5, F(4, 5), F(2, 3), [F(4, 5), F(7, 10), F(2, 3)]),
        (3, F(2, 3), F(2, 5), [F(2, 3), F(1, 2), F(4, 9), F(5, 12), F(2, 5)]),
        (1, F(1), F(0), [F(1), F(0)]),
        (8, F(1, 2), F(0), [F(1, 2), F(3, 8), F(1, 4), F(1, 8), F(0)]),
    ],
)
def test_path_goldens(N, hi, lo, want):
    assert list(shortest_n_path(N, hi, lo)) == want


def test_path_rejects_reversed_endpoints():
    with pytest.raises(InvalidInput):
        shortest_n_path(1, F(0), F(1))


@pytest.mark.parametrize(
    "N, lo, hi, want",
    [(3, F(0), F(1, 3), True), (1, F(0), F(1, 2), True), (8, F(0), F(1, 2), False)],
)
def test_is_aligned(N, lo, hi, want):
    assert is_aligned(N, lo, hi) is want


def test_solve_r():
    assert solve_r(4, 8) == 1
    assert solve_r(1, 5) == 1
    assert solve_r(3, 5) == 2
    assert solve_r(5, 5) == 0


def test_lattice_basis_closed_forms():
    sh = CrossingShape(N=2, d=8, e=4, s=2, lam=F(1), lam2=F(5, 4), r=1)
    assert lattice_basis(Lattice2.from_shape(sh)) == ((F(1, 4), F(1, 4)), (F(5, 8), F(3, 4)))
    sh = CrossingShape(N=3, d=5, e=1, s=0, lam=F(2), lam2=F(10, 3), r=1)
    assert lattice_basis(Lattice2.from_shape(sh)) == ((F(1, 3), F(1, 3)), (F(2, 5), F(2, 3)))


def test_lattice_basis_generic_and_degenerate():
    L = Lattice2(((F(1), F(1)), (F(1, 3), F(1, 2))))
    assert lattice_basis(L) == ((F(1), F(1)), (F(1, 3), F(1, 2)))
    with pytest.raises(DegenerateLattice):
        lattice_basis(Lattice2(((F(1), F(1)), (F(2), F(2)))))


def _bfs_shortest(N, hi, lo, cands):
    # shortest N-path through the candidate set, by breadth-first search
    nodes = sorted({hi, lo, *cands}, reverse=True)
    dist = {hi: 1}
    frontier = [hi]
    while frontier:
        nxt = []
        for x in frontier:
            for y in nodes:
                if y < x and y not in dist and n_path_step_ok(N, x, y):
                    dist[y] = dist[x] + 1
                    nxt.append(y)
        if lo in dist:
            return dist[lo]
        frontier = nxt
    return None


rationals = st.builds(
    lambda n, dn: F(n, dn), st.integers(-60, 60), st.integers(1, 40)
)


@settings(max_examples=500, deadline=None)
@given(N=st.integers(1, 12), a=rationals, b=rationals)
def test_n_path_identity_and_minimality(N, a, b):
    if a == b:
        return
    hi, lo = max(a, b), min(a, b)
    path = list(shortest_n_path(N, hi, lo))
    assert path[0] == hi and path[-1] == lo
    assert is_n_path(N, path)
    assert all(x > y for x, y in zip(path, path[1:]))
    if len(path) <= 8:
        # no subsequence that keeps both endpoints is itself an N-path
        inner = path[1:-1]
        for k in range(len(inner)):
            for sub in combinations(inner, k):
                assert not is_n_path(N, [hi, *sub, lo])


@settings(max_examples=60, deadline=None)
@given(a=st.integers(0, 30), b=st.integers(1, 12), c=st.integers(0, 30), e=st.integers(1, 12))
def test_one_path_is_shortest_among_small_denominators(a, b, c, e):
    x, y = F(a, b), F(c, e)
    if x == y:
        return
    hi, lo = max(x, y), min(x, y)
    path = list(shortest_n_path(1, hi, lo))
    top = max(z.denominator for z in path)
    cands = {
        F(n, dn)
        for dn in range(1, top + 1)
        for n in range(int(lo * dn) - 1, int(hi * dn) + 2)
        if lo < F(n, dn) < hi
    }
    assert _bfs_shortest(1, hi, lo, cands) == len(path)


def test_farey_adjacent():
    assert farey_adjacent(F(1, 2), F(1, 3))
    assert not farey_adjacent(F(2, 3), F(1, 3))


@settings(max_examples=300, deadline=None)
@given(N=st.integers(1, 12), a=rationals, b=rationals, j=st.integers(-30, 30))
def test_paths_commute_with_shifts_by_multiples_of_one_over_n(N, a, b, j):
    # the reason the choice of r in a crossing never matters
    if a == b:
        return
    hi, lo = max(a, b), min(a, b)
    s = F(j, N)
    assert list(shortest_n_path(N, hi + s, lo + s)) == [x + s for x in shortest_n_path(N, hi, lo)]
