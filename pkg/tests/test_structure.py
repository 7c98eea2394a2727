import numpy as np
import pytest

from conftest import holomorphic_instance, product_instance, standard_j
from flatform import structure
from flatform.bilinear import image, nullity
from flatform.errors import StructureError
from flatform.generate import FamilySpec, gen
from flatform.kaehler import KaehlerPoint
from flatform.linalg import Subspace, as_array
from flatform.structure import (
    EXIT_CODES,
    SCOPE_LIMIT,
    analyze,
    complex_relative_nullity,
    compute_Q,
    curvature_check,
    q_from_definition,
    split_and_bound,
)


def zero_point(n, p):
    t = np.zeros((2 * n, 2 * n, p), dtype=int)
    return KaehlerPoint.from_arrays(standard_j(n), t)


class TestComplexRelativeNullity:
    def test_zero(self):
        kp = zero_point(2, 1)
        assert complex_relative_nullity(kp).dim == 4

    def test_real_nullity_not_complex(self):
        # alpha(e0, e0) = 1 only: Delta = span(e1, e2, e3); J Delta misses e1, so Delta_c = span(e2, e3)
        t = np.zeros((4, 4, 1), dtype=int)
        t[0, 0, 0] = 1
        kp = KaehlerPoint.from_arrays(standard_j(2), t)
        assert nullity(kp.alpha).dim == 3
        assert complex_relative_nullity(kp) == Subspace(kp.tangent, ((0, 0, 1, 0), (0, 0, 0, 1)))


class TestQ:
    def test_holomorphic_is_first_normal_space(self):
        kp = holomorphic_instance([[1, 2, 0], [2, 0, 1], [0, 1, 1]], [[0, 1, 0], [1, 1, 0], [0, 0, 2]])
        q, jm = compute_Q(kp)
        assert q == image(kp.alpha)
        assert q.dim == 2
        assert np.all(jm.matrix @ jm.matrix == -np.identity(2, dtype=int))

    def test_product_has_no_radical(self):
        kp = product_instance([(1, 0, 1), (2, 1, 1)], [2, 2])
        q, jm = compute_Q(kp)
        assert q.dim == 0 and jm.dim == 0
        assert q_from_definition(kp) == q

    def test_not_flat_rejected(self):
        # alpha(e0, e2) = 1 with p = 1 gives a non-flat gamma
        t = np.zeros((4, 4, 1), dtype=int)
        t[0, 2, 0] = t[2, 0, 0] = 1
        kp = KaehlerPoint.from_arrays(standard_j(2), t)
        with pytest.raises(StructureError) as exc:
            compute_Q(kp)
        assert exc.value.code in ("not_flat", "incompatible")

    def test_definitions_agree_on_corpus(self, corpus):
        for g in corpus:
            if g.meta["family"] == "random_filtered":
                continue
            q, _ = compute_Q(g.kp)
            assert q == q_from_definition(g.kp)
            if g.meta["family"] == "holomorphic":
                assert q == image(g.kp.alpha)


class TestPipeline:
    @pytest.mark.parametrize("n,p,seed", [(3, 2, 1), (4, 2, 2), (5, 3, 3), (6, 4, 4)])
    def test_composition(self, n, p, seed):
        g = gen(FamilySpec("composition", n, p, seed))
        kp = g.kp
        q, jm = compute_Q(kp)
        assert q.dim == g.meta["expected_ell"]
        rep = split_and_bound(kp, q, jm)
        assert all(rep.checks.values()), rep.checks
        assert rep.bound_ok and rep.bound_q_ok
        assert jm.is_isometric(q.gram())
        assert curvature_check(kp, rep)

    def test_padding_lies_in_complex_nullity(self):
        g = gen(FamilySpec("padded", 4, 2, 5))
        nc = complex_relative_nullity(g.kp)
        pad = Subspace.span(g.kp.tangent, g.meta["padding"])
        assert pad.dim == 2
        assert nc.contains_subspace(pad)

    def test_curvature_values_on_holomorphic(self):
        # alpha_P = 0 so every X is in N(alpha_P); K(X, JX) = -2|alpha(X, X)|^2
        kp = holomorphic_instance([[1, 0], [0, 0]], [[0, 0], [0, 0]])
        q, jm = compute_Q(kp)
        rep = split_and_bound(kp, q, jm)
        assert image(rep.alpha_p).dim == 0
        x = (1, 0, 0, 0)
        jx = kp.J(x)
        a = kp.alpha
        k = sum(u * v for u, v in zip(a(x, x), a(jx, jx))) - sum(u * u for u in a(x, jx))
        assert k == -2
        assert curvature_check(kp, rep)


class TestVerdicts:
    def test_zero_alpha(self):
        a = analyze(zero_point(3, 2))
        assert a.verdict == "hypothesis_not_met"
        assert a.invariants["nu_c"] == 6
        assert a.exit_code == 0

    def test_hypersurface_product_on_boundary(self):
        g = gen(FamilySpec("hypersurface_product", 4, 2, 7))
        a = analyze(g.kp)
        assert a.invariants["nu_c"] == 2 * 4 - 2 * 2
        assert a.verdict == "hypothesis_not_met"

    def test_composition_verified(self):
        g = gen(FamilySpec("composition", 4, 2, 11))
        a = analyze(g.kp, oracle=True)
        assert a.verdict == "theorem_verified", a.messages
        assert a.report.q_dim > 0 and a.oracle_agreement

    def test_outside_scope(self):
        # twelve independent normal directions on C^3
        d, p = 6, SCOPE_LIMIT + 1
        t = np.zeros((d, d, p), dtype=int)
        pairs = [(i, j) for i in range(d) for j in range(i, d)][:p]
        for k, (i, j) in enumerate(pairs):
            t[i, j, k] = t[j, i, k] = 1
        kp = KaehlerPoint.from_arrays(standard_j(3), t)
        a = analyze(kp)
        assert a.invariants["q"] == p
        assert a.verdict == "outside_theorem_scope"
        assert a.exit_code == 0

    def test_failed_check_is_violation_candidate(self, monkeypatch):
        g = gen(FamilySpec("composition", 4, 2, 11))
        monkeypatch.setattr(structure, "curvature_check", lambda kp, rep: False)
        a = analyze(g.kp)
        assert a.verdict == "violation_candidate"
        assert a.exit_code == 2
        assert "failed check: pipeline_curvature" in a.messages

    def test_oracle_disagreement_is_violation_candidate(self, monkeypatch):
        from flatform import oracle

        g = gen(FamilySpec("composition", 4, 2, 11))
        monkeypatch.setattr(oracle, "agrees", lambda kp, seed=0: (False, ["injected"]))
        a = analyze(g.kp, oracle=True)
        assert a.verdict == "violation_candidate"

    def test_exit_codes(self):
        assert EXIT_CODES == {
            "theorem_verified": 0,
            "hypothesis_not_met": 0,
            "outside_theorem_scope": 0,
            "violation_candidate": 2,
            "input_invalid": 1,
        }

    def test_report_dict(self):
        g = gen(FamilySpec("holomorphic", 3, 2, 1))
        d = analyze(g.kp).report.as_dict()
        assert d["q_dim"] == 2 and len(d["j_matrix"]) == 2
        assert all(isinstance(x, (int, str)) for row in d["q_basis"] for x in row)

    def test_corpus_never_violates(self, corpus):
        for g in corpus:
            a = analyze(g.kp)
            assert a.verdict != "violation_candidate", (g.spec, a.messages)
            if a.verdict == "theorem_verified":
                assert as_array(a.report.j_matrix.matrix).shape == (a.report.q_dim,) * 2
