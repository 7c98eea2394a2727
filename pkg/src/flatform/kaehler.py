"""The forms gamma, beta, theta attached to a Kaehler point and their identities."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import isqrt

import numpy as np
import sympy

from .bilinear import (
    BilinearMap,
    image,
    is_flat,
    is_flat_pair,
    kappa,
    nullity,
)
from .errors import InvariantViolation, PreconditionError
from .linalg import (
    InnerSpace,
    Subspace,
    Vector,
    as_array,
    kernel,
    orthogonal_projector,
    radical,
    rank,
    solve,
    vector,
)


@dataclass(frozen=True, eq=False)
class ComplexStructure:
    """A real matrix with J^2 = -I."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_array(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("complex structure must be a square matrix")
        if m.shape[0] % 2:
            raise ValueError("complex structure needs even dimension")
        if not np.all(m @ m == -np.identity(m.shape[0], dtype=int)):
            raise ValueError("J^2 != -I")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def standard(cls, n: int) -> ComplexStructure:
        """J e_{2k} = e_{2k+1}, J e_{2k+1} = -e_{2k}."""
        m = np.zeros((2 * n, 2 * n), dtype=int)
        for k in range(n):
            m[2 * k + 1, 2 * k] = 1
            m[2 * k, 2 * k + 1] = -1
        return cls(m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, v) -> Vector:
        return tuple(self.matrix @ np.array(vector(v), dtype=object))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ComplexStructure):
            return NotImplemented
        return self.matrix.shape == other.matrix.shape and bool(np.all(self.matrix == other.matrix))

    __hash__ = None

    def is_isometric(self, gram) -> bool:
        g = as_array(gram)
        return bool(np.all(self.matrix.T @ g @ self.matrix == g))

    def is_invariant(self, sub: Subspace) -> bool:
        return sub.contains_subspace(sub.map(self.matrix))


@dataclass(frozen=True)
class SplitSpace:
    """W^{p,p} = U^p + U^p with <<(a,b),(c,d)>> = <a,c> - <b,d> and T(a,b) = (b,-a)."""

    p: int

    @cached_property
    def inner(self) -> InnerSpace:
        return InnerSpace.split(self.p)

    @cached_property
    def T(self) -> np.ndarray:
        p = self.p
        t = np.zeros((2 * p, 2 * p), dtype=int)
        for i in range(p):
            t[i, p + i] = 1
            t[p + i, i] = -1
        return as_array(t)

    def pi1(self, w) -> Vector:
        return tuple(w[: self.p])

    def pi2(self, w) -> Vector:
        return tuple(w[self.p :])

    def embed(self, a, b) -> Vector:
        return vector(tuple(a) + tuple(b))

    def doubled(self, sub: Subspace) -> Subspace:
        """sub + sub inside W."""
        zero = (0,) * self.p
        vecs = [self.embed(u, zero) for u in sub.basis] + [self.embed(zero, u) for u in sub.basis]
        return Subspace(self.inner, tuple(vecs))

    def project_first(self, sub: Subspace) -> Subspace:
        """pi_1(sub) as a subspace of U."""
        return Subspace.span(InnerSpace.euclidean(self.p), [self.pi1(w) for w in sub.basis])

    def invariants_hold(self) -> bool:
        t = self.T
        g = self.inner.gram_array()
        return bool(
            np.all(t @ t == -np.identity(2 * self.p, dtype=int)) and np.all(g @ t == (g @ t).T)
        )


@dataclass(frozen=True, eq=False)
class KaehlerPoint:
    """Pointwise data (n, p, J, alpha) with alpha: V^{2n} x V^{2n} -> U^p symmetric."""

    n: int
    p: int
    J: ComplexStructure
    alpha: BilinearMap

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValueError("need n >= 1 and p >= 1")
        if self.J.dim != 2 * self.n:
            raise ValueError(f"J has dimension {self.J.dim}, expected {2 * self.n}")
        shape = self.alpha.tensor.shape
        if shape != (2 * self.n, 2 * self.n, self.p):
            raise ValueError(f"alpha has shape {shape}, expected {(2 * self.n, 2 * self.n, self.p)}")
        if self.alpha.target != InnerSpace.euclidean(self.p):
            raise ValueError("alpha must take values in Euclidean U^p")
        if not self.alpha.symmetric:
            raise ValueError("alpha is not symmetric")

    @classmethod
    def from_arrays(cls, J, alpha) -> KaehlerPoint:
        jm = ComplexStructure(J)
        a = as_array(alpha)
        n = jm.dim // 2
        p = a.shape[2] if a.ndim == 3 else 0
        return cls(n, p, jm, BilinearMap(a, InnerSpace.euclidean(p)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, KaehlerPoint):
            return NotImplemented
        return (self.n, self.p) == (other.n, other.p) and self.J == other.J and self.alpha == other.alpha

    __hash__ = None

    @property
    def dim(self) -> int:
        return 2 * self.n

    @cached_property
    def split(self) -> SplitSpace:
        return SplitSpace(self.p)

    @cached_property
    def normal(self) -> InnerSpace:
        return InnerSpace.euclidean(self.p)

    @cached_property
    def tangent(self) -> InnerSpace:
        return InnerSpace.euclidean(self.dim)

    @cached_property
    def gamma(self) -> BilinearMap:
        return build_gamma(self)

    @cached_property
    def beta(self) -> BilinearMap:
        return build_beta(self)

    @cached_property
    def theta(self) -> BilinearMap:
        return build_theta(self)

    @cached_property
    def alpha_JY(self) -> BilinearMap:
        """(X, Y) -> alpha(X, JY)."""
        return self.alpha.pullback(_eye(self.dim), self.J.matrix)

    def is_pluriharmonic(self) -> bool:
        return self.alpha_JY == self.alpha.pullback(self.J.matrix, _eye(self.dim))

    def first_normal_space(self) -> Subspace:
        return image(self.alpha)


def _eye(n: int) -> np.ndarray:
    return as_array(np.identity(n, dtype=int))


def _JJ(phi: BilinearMap, J: ComplexStructure) -> BilinearMap:
    return phi.pullback(J.matrix, J.matrix)


def _check_T_compatible(phi: BilinearMap, kp: KaehlerPoint, name: str) -> None:
    lhs = phi.apply_target(kp.split.T)
    rhs = phi.pullback(_eye(kp.dim), kp.J.matrix)
    if lhs != rhs:
        raise InvariantViolation(f"T {name}(X,Y) != {name}(X,JY)")


# ---------------------------------------------------------------------------
# constructions


def build_gamma(kp: KaehlerPoint) -> BilinearMap:
    """gamma(X, Y) = (alpha(X, Y), alpha(X, JY))."""
    t = np.concatenate([kp.alpha.tensor, kp.alpha_JY.tensor], axis=2)
    g = BilinearMap(t, kp.split.inner)
    _check_T_compatible(g, kp, "gamma")
    return g


def build_beta(kp: KaehlerPoint) -> BilinearMap:
    """beta(X, Y) = gamma(X, Y) + gamma(JX, JY)."""
    g = kp.gamma
    b = g + _JJ(g, kp.J)
    _check_T_compatible(b, kp, "beta")
    return b


def build_theta(kp: KaehlerPoint) -> BilinearMap:
    """theta(X, Y) = gamma(X, Y) - gamma(JX, JY); symmetric and pluriharmonic."""
    g = kp.gamma
    t = g - _JJ(g, kp.J)
    _check_T_compatible(t, kp, "theta")
    if not t.symmetric:
        raise InvariantViolation("theta is not symmetric")
    if g.scaled(2) != kp.beta + t:
        raise InvariantViolation("2 gamma != beta + theta")
    return t


def check_compatibility(kp: KaehlerPoint) -> bool:
    """<<beta(X,Y), gamma(Z,T)>> = <<beta(X,T), gamma(Z,Y)>> on basis quadruples.

    When it holds, the derived identity for (beta, theta) is asserted too.
    """
    ok = is_flat_pair(kp.beta, kp.gamma)
    if ok and not is_flat_pair(kp.beta, kp.theta):
        raise InvariantViolation("compatibility holds for (beta, gamma) but not (beta, theta)")
    return ok


def pluriharmonic_nullity(kp: KaehlerPoint) -> Subspace:
    """{Y : alpha(X, JY) = alpha(JX, Y) for all X}, checked against N(beta)."""
    diff = kp.alpha_JY - kp.alpha.pullback(kp.J.matrix, _eye(kp.dim))
    direct = nullity(diff)
    nb = nullity(kp.beta)
    if direct != nb:
        raise InvariantViolation("pluriharmonic nullity differs from N(beta)")
    if not kp.J.is_invariant(direct) or direct.dim % 2:
        raise InvariantViolation("N(beta) is not J-invariant")
    return direct


def nullity_intersection_identity(kp: KaehlerPoint) -> bool:
    """N(gamma) = N(beta) cap N(theta), each kernel computed on its own."""
    ng = nullity(kp.gamma)
    nb = nullity(kp.beta)
    nt = nullity(kp.theta)
    from .linalg import intersect

    return ng == intersect(nb, nt)


# ---------------------------------------------------------------------------
# structure of S(phi) for T-compatible forms


def project_target(phi: BilinearMap, sub: Subspace, sp: SplitSpace) -> BilinearMap:
    """pi_{sub x sub} composed with phi, for a subspace ``sub`` of U."""
    pr = orthogonal_projector(sub)
    p = sp.p
    block = np.zeros((2 * p, 2 * p), dtype=object)
    block[:p, :p] = pr
    block[p:, p:] = pr
    block[block == None] = Fraction(0)  # noqa: E711
    return phi.apply_target(block)


def even_properties(phi: BilinearMap, kp: KaehlerPoint) -> dict[str, bool]:
    """Parity and invariance facts for a form satisfying T phi(X,Y) = phi(X,JY)."""
    sp = kp.split
    s = image(phi)
    u = radical(s)
    n = nullity(phi)
    omega = sp.project_first(u)
    return {
        "S_even": s.dim % 2 == 0,
        "S_T_invariant": s.contains_subspace(s.map(sp.T)),
        "U_even": u.dim % 2 == 0,
        "U_T_invariant": u.contains_subspace(u.map(sp.T)),
        "N_J_invariant": kp.J.is_invariant(n),
        "N_even": n.dim % 2 == 0,
        "dim_U_eq_dim_Omega": u.dim == omega.dim,
        "S_phi_Omega_eq_U": image(project_target(phi, omega, sp)) == u,
    }


@dataclass(frozen=True)
class BetaImageReport:
    s: int
    u1: Subspace
    image_split: bool
    nullity_match: bool

    @property
    def ok(self) -> bool:
        return self.image_split and self.nullity_match


def first_beta_space(kp: KaehlerPoint) -> Subspace:
    """U_1 = S(pi_1 o beta)."""
    return Subspace.span(kp.normal, [kp.split.pi1(v) for v in kp.beta.values()])


def beta_image_identities(kp: KaehlerPoint) -> BetaImageReport:
    """S(beta) = U_1 + U_1 and N(beta) = N(gamma_{U_1})."""
    if not check_compatibility(kp):
        raise PreconditionError("beta and gamma are not compatible")
    u1 = first_beta_space(kp)
    split_ok = image(kp.beta) == kp.split.doubled(u1)
    gamma_u1 = project_target(kp.gamma, u1, kp.split)
    null_ok = nullity(kp.beta) == nullity(gamma_u1)
    return BetaImageReport(u1.dim, u1, split_ok, null_ok)


def theta_parts(kp: KaehlerPoint) -> tuple[BilinearMap, BilinearMap]:
    """(theta_1, theta_2): theta projected onto U_1 + U_1 and U_2 + U_2."""
    from .linalg import perp

    u1 = first_beta_space(kp)
    u2 = perp(u1)
    return project_target(kp.theta, u1, kp.split), project_target(kp.theta, u2, kp.split)


def theta_parts_flat(kp: KaehlerPoint) -> bool | None:
    """theta_1 and theta_2 flat whenever nu(beta) = 2n - 2s; None if that fails."""
    s = first_beta_space(kp).dim
    if nullity(kp.beta).dim != kp.dim - 2 * s:
        return None
    t1, t2 = theta_parts(kp)
    return is_flat(t1) and is_flat(t2)


# ---------------------------------------------------------------------------
# diagonalization of flat beta


FLOAT_TOL = 1e-12


@dataclass(frozen=True)
class BetaDiagonalization:
    """Basis {X_i, JX_i} adapted to a flat beta.

    ``status`` is ``ok`` (exact basis), ``irrational`` (the adapted normal
    directions are irrational; only a floating witness is given) or
    ``kappa_deficient`` (kappa(beta) < 2p; only the nullity block is split).
    """

    status: str
    kappa: int
    planes: int
    basis: tuple[Vector, ...] = ()
    exact_orthonormal: bool = False
    gram: np.ndarray | None = None
    float_witness_error: float | None = None
    float_basis: np.ndarray | None = None
    checks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return bool(self.checks) and all(self.checks.values())


def _j_basis(sub: Subspace, J: ComplexStructure, start=()) -> list[Vector]:
    """Vectors X_j with {X_j, JX_j} extending ``start`` to span ``start + sub``."""
    from .linalg import _Echelon

    ech = _Echelon(J.dim)
    for v in start:
        ech.add(v)
        ech.add(J(v))
    xs = []
    for v in sub.basis:
        if ech.add(v):
            ech.add(J(v))
            xs.append(v)
    return xs


def _rational_fourth_root(c: Fraction) -> Fraction | None:
    def root4(k: int) -> int | None:
        r = isqrt(isqrt(k))
        for cand in (r, r + 1):
            if cand**4 == k:
                return cand
        return None

    a, b = root4(c.numerator), root4(c.denominator)
    return None if a is None or b is None else Fraction(a, b)


def _eigen(a: np.ndarray) -> tuple[str, list[Fraction]]:
    s = a.shape[0]
    m = sympy.Matrix(s, s, [sympy.Rational(x.numerator, x.denominator) for x in a.reshape(-1)])
    lam = sympy.Symbol("lam")
    poly = sympy.Poly(m.charpoly(lam).as_expr(), lam)
    _, factors = poly.factor_list()
    roots = []
    for f, mult in factors:
        if f.degree() != 1:
            return "irrational", []
        if mult > 1:
            return "repeated", []
        c1, c0 = f.all_coeffs()
        r = -sympy.Rational(c0) / sympy.Rational(c1)
        roots.append(Fraction(int(r.p), int(r.q)))
    return "ok", sorted(roots)


def diagonalize_beta(kp: KaehlerPoint, seed: int = 0, relative: bool = False) -> BetaDiagonalization:
    """Adapted basis for flat beta with kappa(beta) = 2p.

    With ``relative=True`` the requirement is kappa(beta) = dim S(beta) and
    the orthonormal basis condition is taken inside S(beta) = U_1 + U_1.
    """
    beta = kp.beta
    if not is_flat(beta):
        raise PreconditionError("beta is not flat")
    nb = nullity(beta)
    cert = kappa(beta, seed)
    k = cert.kappa
    if k != kp.dim - nb.dim:
        raise InvariantViolation(f"nu(beta) = {nb.dim} but 2n - kappa(beta) = {kp.dim - k}")
    s_img = image(beta)
    target = s_img.dim if relative else 2 * kp.p
    if k < target or k % 2:
        return BetaDiagonalization(
            "kappa_deficient", k, 0, tuple(_j_basis(nb, kp.J)), checks={}
        )
    s = k // 2
    p = kp.p
    sp = kp.split
    u1 = first_beta_space(kp) if relative else Subspace.full(kp.normal)
    if u1.dim != s:
        raise InvariantViolation("dim U_1 differs from kappa(beta)/2")

    # right inverse of beta_X onto S(beta)
    mx = beta.partial(cert.vector)
    rows = mx.tolist()

    def lift(w) -> np.ndarray:
        r = solve(rows, w)
        if r is None:
            raise InvariantViolation("beta_X is not onto S(beta) at a regular X")
        return np.array(r, dtype=object)

    lifts = [lift(sp.embed(u, (0,) * p)) for u in u1.basis]
    rng = np.random.default_rng(seed)
    status, roots, amat = "repeated", [], None
    for _ in range(32):
        z = vector(int(v) for v in rng.integers(-5, 6, size=kp.dim))
        mz = beta.partial(z)
        cols = [u1.coordinates(sp.pi1(tuple(mz @ r))) for r in lifts]
        amat = np.array(cols, dtype=object).T
        status, roots = _eigen(amat)
        if status != "repeated":
            break
    if status == "repeated":
        raise InvariantViolation("could not separate the beta-planes with 32 random elements")
    if status == "irrational":
        return _diagonalize_float(kp, nb, u1, amat, k)

    directions = []
    for lam in roots:
        shifted = amat - np.identity(s, dtype=object) * lam
        ker = kernel(shifted.tolist(), s)
        if len(ker) != 1:
            raise InvariantViolation("eigenspace of the beta-plane operator is not a line")
        coords = ker[0]
        directions.append(tuple(sum(c * b[i] for c, b in zip(coords, u1.basis)) for i in range(p)))

    xs: list[Vector] = []
    t = beta.tensor
    for e in directions:
        ortho = kernel([e], p)
        eqs = []
        for i in range(kp.dim):
            for u in ortho:
                for half in (0, p):
                    eqs.append([sum(u[w] * t[i, j, half + w] for w in range(p)) for j in range(kp.dim)])
        block = Subspace(kp.tangent, tuple(kernel(eqs, kp.dim)))
        if block.dim != 2 + nb.dim:
            raise InvariantViolation("beta-plane block has unexpected dimension")
        x = next(v for v in block.basis if v not in nb)
        xs.append(x)

    scaled = []
    exact = True
    for x in xs:
        val = beta(x, x)
        if any(val[p:]):
            raise InvariantViolation("beta(X, X) has a nonzero second component")
        c = sum(v * v for v in val[:p])
        r = _rational_fourth_root(1 / c)
        if r is None:
            exact = False
            scaled.append(x)
        else:
            scaled.append(tuple(r * v for v in x))
    xs = scaled + _j_basis(nb, kp.J, start=scaled)
    return _finish(kp, xs, s, k, nb, exact)


def _finish(kp, xs, s, k, nb, exact) -> BetaDiagonalization:
    beta = kp.beta
    J = kp.J
    checks = {}
    full = []
    for x in xs:
        full += [x, J(x)]
    checks["basis"] = rank(full) == kp.dim
    tail = Subspace.span(kp.tangent, full[2 * s :])
    checks["nullity_block"] = tail == nb
    off = True
    for i in range(len(xs)):
        for j in range(len(xs)):
            if i == j:
                continue
            for a in (xs[i], J(xs[i])):
                for b in (xs[j], J(xs[j])):
                    if any(beta(a, b)):
                        off = False
    checks["off_diagonal_zero"] = off
    vals = []
    for x in xs[:s]:
        vals += [beta(x, x), beta(x, J(x))]
    inner = kp.split.inner
    gram = np.array([[inner.pair(a, b) for b in vals] for a in vals], dtype=object)
    diag_ok = all(gram[i, j] == 0 for i in range(2 * s) for j in range(2 * s) if i != j)
    sig_ok = all(gram[2 * i, 2 * i] > 0 and gram[2 * i + 1, 2 * i + 1] == -gram[2 * i, 2 * i] for i in range(s))
    checks["gram_diagonal"] = diag_ok
    checks["signature"] = sig_ok
    checks["spans_image"] = Subspace.span(kp.split.inner, vals) == image(beta)
    exact = exact and all(gram[2 * i, 2 * i] == 1 for i in range(s))

    # floating witness: rescale X_j by c_j^(-1/4) and recompute the Gram matrix
    tf = beta.tensor.astype(float)
    g = np.diag([1.0] * kp.p + [-1.0] * kp.p)
    fvals = []
    for i, x in enumerate(xs[:s]):
        c = float(gram[2 * i, 2 * i]) if sig_ok else 1.0
        xf = np.array(x, dtype=float) * c**-0.25
        jxf = J.matrix.astype(float) @ xf
        fvals += [np.einsum("i,j,ijw->w", xf, xf, tf), np.einsum("i,j,ijw->w", xf, jxf, tf)]
    fg = np.array(fvals) @ g @ np.array(fvals).T if fvals else np.zeros((0, 0))
    target = np.diag([1.0, -1.0] * s) if s else np.zeros((0, 0))
    err = float(np.max(np.abs(fg - target))) if s else 0.0
    checks["float_orthonormal"] = err <= FLOAT_TOL
    return BetaDiagonalization(
        "ok", k, s, tuple(xs), exact, gram, err, None, checks
    )


def _diagonalize_float(kp, nb, u1, amat, k) -> BetaDiagonalization:
    """Floating-point fallback when the adapted directions are irrational."""
    p = kp.p
    s = k // 2
    b = np.array(u1.basis, dtype=float)  # s x p
    q, _ = np.linalg.qr(b.T)  # p x s, orthonormal basis of U_1
    # A acts on U_1-coordinates; move to the orthonormal frame
    change = np.linalg.lstsq(b.T, q, rcond=None)[0]  # coords of q-columns in u1 basis
    af = amat.astype(float)
    a_orth = np.linalg.inv(change) @ af @ change
    a_orth = (a_orth + a_orth.T) / 2
    _, vecs = np.linalg.eigh(a_orth)
    directions = (q @ vecs).T
    tf = kp.beta.tensor.astype(float)
    nbf = np.array(nb.basis, dtype=float).reshape(-1, kp.dim)
    jf = kp.J.matrix.astype(float)
    xs = []
    for e in directions:
        proj = np.eye(p) - np.outer(e, e)
        m1 = np.einsum("ijw,vw->ivj", tf[:, :, :p], proj).reshape(-1, kp.dim)
        m2 = np.einsum("ijw,vw->ivj", tf[:, :, p:], proj).reshape(-1, kp.dim)
        _, sv, vt = np.linalg.svd(np.vstack([m1, m2]))
        null = vt[np.sum(sv > 1e-9 * max(1.0, sv.max(initial=0.0))) :]
        if nbf.size:
            coef = np.linalg.lstsq(nbf.T, null.T, rcond=None)[0]
            resid = null - (nbf.T @ coef).T
        else:
            resid = null
        xs.append(resid[np.argmax(np.linalg.norm(resid, axis=1))])
    vals = []
    scaled = []
    for x in xs:
        v = np.einsum("i,j,ijw->w", x, x, tf)
        c = v[:p] @ v[:p]
        x = x * c**-0.25
        scaled.append(x)
        vals += [np.einsum("i,j,ijw->w", x, x, tf), np.einsum("i,j,ijw->w", x, jf @ x, tf)]
    xs = scaled
    g = np.diag([1.0] * p + [-1.0] * p)
    fg = np.array(vals) @ g @ np.array(vals).T
    err = float(np.max(np.abs(fg - np.diag([1.0, -1.0] * s))))
    tail = [np.array(v, dtype=float) for v in _j_basis(nb, kp.J)]
    full = [w for x in xs + tail for w in (x, jf @ x)]
    off = 0.0
    for i in range(len(full)):
        for j in range(len(full)):
            if i // 2 != j // 2:
                off = max(off, float(np.max(np.abs(np.einsum("i,j,ijw->w", full[i], full[j], tf)))))
    checks = {
        "basis": int(np.linalg.matrix_rank(np.array(full))) == kp.dim,
        "off_diagonal_zero": off <= FLOAT_TOL,
        "float_orthonormal": err <= FLOAT_TOL,
    }
    return BetaDiagonalization("irrational", k, s, (), False, None, err, np.array(xs), checks)
