from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import holomorphic_instance, irrational_instance, product_instance, standard_j
from flatform.bilinear import image, is_flat, is_null, kappa, nullity
from flatform.errors import InvariantViolation, PreconditionError
from flatform.kaehler import (
    ComplexStructure,
    KaehlerPoint,
    SplitSpace,
    check_compatibility,
    diagonalize_beta,
    even_properties,
    first_beta_space,
    nullity_intersection_identity,
    pluriharmonic_nullity,
    beta_image_identities,
    theta_parts_flat,
)
from flatform.linalg import Subspace, intersect


@st.composite
def points(draw, max_n=2, max_p=2):
    n = draw(st.integers(1, max_n))
    p = draw(st.integers(1, max_p))
    d = 2 * n
    t = np.zeros((d, d, p), dtype=object)
    for i in range(d):
        for j in range(i, d):
            for k in range(p):
                t[i, j, k] = t[j, i, k] = draw(st.integers(-2, 2))
    return KaehlerPoint.from_arrays(standard_j(n), t)


class TestComplexStructure:
    def test_standard(self):
        j = ComplexStructure.standard(2)
        assert tuple(j((1, 0, 0, 0))) == (0, 1, 0, 0)
        assert tuple(j((0, 1, 0, 0))) == (-1, 0, 0, 0)

    def test_rejects_non_square_root(self):
        with pytest.raises(ValueError):
            ComplexStructure(np.identity(2, dtype=int))

    def test_rejects_odd(self):
        with pytest.raises(ValueError):
            ComplexStructure(np.zeros((3, 3), dtype=int))

    def test_isometry(self):
        j = ComplexStructure.standard(2)
        assert j.is_isometric(np.identity(4, dtype=int))
        assert not j.is_isometric(np.diag([1, 2, 1, 1]))


class TestSplitSpace:
    @pytest.mark.parametrize("p", [1, 2, 5])
    def test_invariants(self, p):
        assert SplitSpace(p).invariants_hold()

    def test_T(self):
        sp = SplitSpace(2)
        w = sp.embed((1, 2), (3, 4))
        assert tuple(sp.T @ np.array(w, dtype=object)) == (3, 4, -1, -2)


class TestForms:
    def test_gamma_on_a_line(self):
        # alpha = diag(1, -1): gamma(e0,e0) = (1, 0), gamma(e0,e1) = (0, -1), gamma(e1,e1) = (-1, 0)
        kp = KaehlerPoint.from_arrays(standard_j(1), [[[1], [0]], [[0], [-1]]])
        g = kp.gamma
        assert tuple(g((1, 0), (1, 0))) == (1, 0)
        assert tuple(g((1, 0), (0, 1))) == (0, -1)
        assert tuple(g((0, 1), (1, 0))) == (0, -1)
        assert tuple(g((0, 1), (0, 1))) == (-1, 0)
        # pluriharmonic: beta vanishes and theta = 2 gamma
        assert image(kp.beta).dim == 0
        assert kp.theta == g.scaled(2)

    def test_umbilic_line(self):
        # alpha = identity: gamma(JX, JY) = gamma(X, Y), so theta vanishes
        kp = KaehlerPoint.from_arrays(standard_j(1), [[[1], [0]], [[0], [1]]])
        assert not kp.is_pluriharmonic()
        # gamma(e0, Je0) = (alpha(e0, e1), -alpha(e0, e0)); beta(e0, e0) = (1 + 1, 0 - 0)
        assert tuple(kp.gamma((1, 0), (0, 1))) == (0, -1)
        assert tuple(kp.beta((1, 0), (1, 0))) == (2, 0)
        assert image(kp.theta).dim == 0
        assert kp.beta == kp.gamma.scaled(2)

    def test_rejects_asymmetric_alpha(self):
        with pytest.raises(ValueError):
            KaehlerPoint.from_arrays(standard_j(1), [[[1], [1]], [[0], [1]]])

    @given(points())
    def test_identities_hold_for_any_alpha(self, kp):
        assert kp.gamma.scaled(2) == kp.beta + kp.theta
        assert kp.theta.symmetric
        assert nullity_intersection_identity(kp)
        assert kp.gamma.symmetric == kp.is_pluriharmonic()
        n = pluriharmonic_nullity(kp)
        assert n == nullity(kp.beta) and kp.J.is_invariant(n)

    @given(points())
    def test_gamma_flat_implies_theta_flat(self, kp):
        if is_flat(kp.gamma):
            assert is_flat(kp.theta)

    @given(points())
    def test_even_properties(self, kp):
        for phi in (kp.gamma, kp.beta, kp.theta):
            assert all(even_properties(phi, kp).values())


class TestHolomorphic:
    def test_gamma_null_and_beta_zero(self):
        kp = holomorphic_instance([[1, 0], [0, 2]], [[0, 1], [1, 0]])
        assert is_null(kp.gamma)
        assert nullity(kp.beta) == Subspace.full(kp.tangent)
        assert check_compatibility(kp)


class TestBetaImage:
    def test_two_hypersurfaces(self):
        kp = product_instance([(1, 0, 1), (2, 1, 1)], [1, 2])
        rep = beta_image_identities(kp)
        assert rep.ok and rep.s == 2
        assert theta_parts_flat(kp) is True

    def test_requires_compatibility(self):
        # alpha supported on (e0, e0) and (e0, e2): beta and gamma are not compatible
        t = np.zeros((4, 4, 1), dtype=int)
        t[0, 2, 0] = t[2, 0, 0] = 1
        t[0, 0, 0] = 1
        kp = KaehlerPoint.from_arrays(standard_j(2), t)
        if check_compatibility(kp):
            pytest.skip("instance happens to be compatible")
        with pytest.raises(PreconditionError):
            beta_image_identities(kp)

    def test_corpus(self, corpus):
        for g in corpus:
            rep = beta_image_identities(g.kp)
            assert rep.ok, g.spec
            assert rep.u1 == first_beta_space(g.kp)
            assert theta_parts_flat(g.kp) in (True, None)


class TestGammaNullity:
    def test_corpus(self, corpus):
        for g in corpus:
            kp = g.kp
            assert nullity(kp.gamma) == intersect(nullity(kp.beta), nullity(kp.theta))


class TestDiagonalization:
    def test_two_hypersurfaces(self):
        # beta(e2, e2) = (alpha22 + alpha33, 0) = (3, 0) has square 9; its T-image -9; likewise 4, -4
        kp = product_instance([(1, 0, 1), (2, 1, 1)], [1, 1])
        d = diagonalize_beta(kp)
        assert d.status == "ok" and d.ok
        assert d.planes == 2
        assert sorted(np.diag(d.gram)) == [-9, -4, 4, 9]
        assert all(d.gram[i, j] == 0 for i in range(4) for j in range(4) if i != j)

    def test_with_nullity(self):
        kp = product_instance([(1, 0, 1), (2, 1, 1)], [2, 1])
        d = diagonalize_beta(kp)
        assert d.ok and d.planes == 2
        assert nullity(kp.beta).dim == 2

    def test_kappa_deficient(self):
        # traceless first block: beta vanishes in that direction, kappa(beta) = 2 < 2p
        kp = product_instance([(1, 0, -1), (2, 1, 1)], [1, 1])
        assert diagonalize_beta(kp).status == "kappa_deficient"
        rel = diagonalize_beta(kp, relative=True)
        assert rel.status == "ok" and rel.ok and rel.planes == 1

    def test_irrational(self):
        kp = irrational_instance()
        assert is_flat(kp.beta) and check_compatibility(kp)
        assert kappa(kp.beta).kappa == 4 and nullity(kp.beta).dim == 0
        d = diagonalize_beta(kp)
        assert d.status == "irrational" and d.ok
        assert d.float_witness_error < 1e-12

    def test_requires_flat_beta(self):
        t = np.zeros((4, 4, 1), dtype=object)
        t[...] = 0
        t[0, 0, 0], t[2, 2, 0], t[0, 2, 0], t[2, 0, 0] = 1, 1, 2, 2
        kp = KaehlerPoint.from_arrays(standard_j(2), t)
        if is_flat(kp.beta):
            pytest.skip("beta happens to be flat")
        with pytest.raises(PreconditionError):
            diagonalize_beta(kp)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_seed_independent_outcome(self, seed):
        kp = product_instance([(1, 0, 1), (2, 1, 1)], [1, 1])
        assert diagonalize_beta(kp, seed).ok

    def test_corpus(self, corpus):
        seen = 0
        for g in corpus:
            kp = g.kp
            if not is_flat(kp.beta) or kappa(kp.beta).kappa != 2 * kp.p:
                continue
            d = diagonalize_beta(kp)
            assert d.ok, (g.spec, d.checks)
            seen += 1
        assert seen > 0


def test_scaled_fractions_survive():
    kp = product_instance([(F(1, 2), 0, F(1, 2))], [1])
    assert is_flat(kp.gamma) and check_compatibility(kp)


def test_invariant_violation_is_distinct_from_precondition():
    assert not issubclass(InvariantViolation, PreconditionError)
