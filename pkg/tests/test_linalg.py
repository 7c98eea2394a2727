from decimal import Decimal
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from flatform import oracle
from flatform.linalg import (
    InnerSpace,
    Subspace,
    decompose,
    frac_matmul,
    intersect,
    inverse,
    kernel,
    perp,
    radical,
    rank,
    scalar,
    solve,
)

W11 = InnerSpace.split(1)

small = st.integers(-4, 4)


def matrices(max_rows=5, max_cols=5):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(small, min_size=c, max_size=c), min_size=r, max_size=r)
        )
    )


@st.composite
def split_subspaces(draw, max_p=6):
    p = draw(st.integers(1, max_p))
    k = draw(st.integers(0, 2 * p))
    vecs = draw(st.lists(st.lists(st.integers(-2, 2), min_size=2 * p, max_size=2 * p), min_size=k, max_size=k))
    return Subspace.span(InnerSpace.split(p), vecs)


class TestScalar:
    def test_forms(self):
        assert scalar("3/4") == F(3, 4)
        assert scalar(0.1) == F(1, 10)
        assert scalar(Decimal("-2.50")) == F(-5, 2)
        assert scalar(7) == F(7)

    def test_rejects_garbage(self):
        with pytest.raises(ValueError):
            scalar("three")


class TestRank:
    def test_identity(self):
        assert rank([[1, 0], [0, 1]]) == 2

    def test_zero(self):
        assert rank([[0] * 4 for _ in range(3)]) == 0

    def test_dependent_rows(self):
        # hand reduction: R2 - 2 R1 = 0
        assert rank([[1, 2], [2, 4]]) == 1

    @given(matrices())
    def test_matches_oracle(self, m):
        assert rank(m) == len(oracle.rref(m, len(m[0])))

    @given(matrices())
    def test_rank_nullity(self, m):
        ker = kernel(m, len(m[0]))
        assert rank(m) + len(ker) == len(m[0])
        arr = np.array(m, dtype=object)
        for v in ker:
            assert not any(arr @ np.array(v, dtype=object))


@given(matrices(4, 4), st.lists(small, min_size=4, max_size=4))
def test_solve_consistent_or_none(m, b):
    b = b[: len(m)]
    x = solve(m, b)
    aug = [row + [v] for row, v in zip(m, b)]
    if x is None:
        assert rank(aug) > rank(m)
    else:
        assert list(np.array(m, dtype=object) @ np.array(x, dtype=object)) == [F(v) for v in b]


@given(matrices(3, 3))
def test_inverse(m):
    if len(m) != len(m[0]) or rank(m) < len(m):
        return
    inv = inverse(m)
    assert np.all(frac_matmul(m, inv) == np.identity(len(m), dtype=int))


def test_split_signature():
    for p in range(1, 5):
        assert InnerSpace.split(p).signature() == (p, p, 0)


class TestPerp:
    def test_full_space(self):
        assert perp(Subspace.full(W11)).dim == 0

    def test_isotropic_line_is_its_own_perp(self):
        line = Subspace(W11, ((1, 1),))
        assert perp(line) == line

    def test_coordinate_line(self):
        # <<(x, y), (1, 0)>> = x
        assert perp(Subspace(W11, ((1, 0),))) == Subspace(W11, ((0, 1),))

    @given(split_subspaces())
    def test_dimension_identity(self, s):
        g = np.array(s.ambient.gram_array(), dtype=object)
        b = s.matrix()
        assert perp(s).dim == s.ambient.dim - (rank((b @ g).tolist()) if s.dim else 0)


class TestRadical:
    def test_nondegenerate(self):
        assert radical(Subspace.full(W11)).dim == 0

    def test_isotropic(self):
        line = Subspace(W11, ((1, 1),))
        assert radical(line) == line

    def test_plane_in_w11(self):
        # L is all of W^{1,1}; the joint kernel <<x, l>> = 0 for l in L is zero
        l = Subspace.span(W11, [(1, 1), (1, 0)])
        g = np.array(W11.gram_array(), dtype=object)
        joint = oracle.null_space([list(np.array(v, dtype=object) @ g) for v in l.basis], 2)
        assert joint == []
        assert radical(l).dim == 0

    @given(split_subspaces())
    def test_radical_is_isotropic(self, s):
        r = radical(s)
        assert r.is_isotropic()
        assert s.contains_subspace(r)


class TestIntersect:
    def test_same(self):
        a = Subspace(InnerSpace.euclidean(3), ((1, 2, 3),))
        assert intersect(a, a) == a

    def test_complementary(self):
        e = InnerSpace.euclidean(3)
        a = Subspace(e, ((1, 0, 0),))
        b = Subspace(e, ((0, 1, 0), (0, 0, 1)))
        assert intersect(a, b).dim == 0

    def test_hand_solved(self):
        e = InnerSpace.euclidean(3)
        a = Subspace(e, ((1, 0, 1), (0, 1, 0)))
        b = Subspace(e, ((1, 1, 1),))
        assert intersect(a, b) == b

    def test_ambient_mismatch(self):
        with pytest.raises(ValueError):
            intersect(Subspace.full(InnerSpace.euclidean(2)), Subspace.full(W11))


class TestDecompose:
    def test_isotropic_line(self):
        d = decompose(Subspace(W11, ((1, 1),)))
        assert d.radical == Subspace(W11, ((1, 1),))
        assert d.dual == Subspace(W11, ((1, -1),))
        assert d.rest.dim == 0
        assert W11.pair((1, 1), (1, -1)) == 2

    def test_nondegenerate(self):
        w = InnerSpace.split(2)
        l = Subspace(w, ((1, 0, 0, 0), (0, 0, 1, 0)))
        d = decompose(l)
        assert d.radical.dim == d.dual.dim == 0
        assert d.rest.contains_subspace(l)

    def test_zero(self):
        w = InnerSpace.split(2)
        d = decompose(Subspace.zero(w))
        assert d.r == 0
        assert d.rest == Subspace.full(w)

    @given(split_subspaces())
    def test_invariants(self, l):
        d = decompose(l)
        assert d.radical == radical(l)
        assert d.radical.is_isotropic() and d.dual.is_isotropic()
        assert d.dual.dim == d.radical.dim
        both = d.radical + d.dual
        assert both.dim == 2 * d.r and not both.is_degenerate()
        assert d.rest == perp(both)
        assert (d.radical + d.rest).contains_subspace(l)

    def test_degenerate_ambient_rejected(self):
        amb = InnerSpace(np.array([[1, 0], [0, 0]], dtype=object))
        with pytest.raises(ValueError):
            decompose(Subspace.full(amb))


@given(split_subspaces())
def test_subspace_equality_ignores_basis(s):
    if s.dim == 0:
        return
    shuffled = [tuple(a + b for a, b in zip(s.basis[0], v)) for v in s.basis[1:]] + [s.basis[0]]
    assert Subspace.span(s.ambient, shuffled) == s
