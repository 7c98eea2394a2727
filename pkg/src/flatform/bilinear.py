"""Invariants of a bilinear map phi: V1 x V2 -> W into an inner product space."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import InvariantViolation, PreconditionError
from .linalg import (
    InnerSpace,
    Subspace,
    Vector,
    as_array,
    frac_matmul,
    int_matmul,
    integral,
    kernel,
    radical,
    rank,
    vector,
)

#: coordinates of sampled candidate regular elements lie in [-SAMPLE_BOUND, SAMPLE_BOUND]
SAMPLE_BOUND = 5
DEFAULT_SAMPLES = 64


@dataclass(frozen=True, eq=False)
class BilinearMap:
    """phi(e_i, f_j) stored as ``tensor[i, j, :]`` (target coordinates)."""

    tensor: np.ndarray
    target: InnerSpace

    def __post_init__(self):
        t = as_array(self.tensor)
        if t.ndim != 3:
            raise ValueError(f"tensor must be 3-dimensional, got shape {t.shape}")
        if t.shape[2] != self.target.dim:
            raise ValueError(
                f"tensor values have dimension {t.shape[2]}, target has {self.target.dim}"
            )
        t.setflags(write=False)
        object.__setattr__(self, "tensor", t)

    @property
    def v1dim(self) -> int:
        return self.tensor.shape[0]

    @property
    def v2dim(self) -> int:
        return self.tensor.shape[1]

    @property
    def wdim(self) -> int:
        return self.tensor.shape[2]

    @cached_property
    def symmetric(self) -> bool:
        return self.v1dim == self.v2dim and bool(
            np.all(self.tensor == self.tensor.transpose(1, 0, 2))
        )

    @cached_property
    def _int(self) -> np.ndarray:
        return integral(self.tensor)

    @cached_property
    def _int_bound(self) -> int:
        return max((abs(int(v)) for v in self._int.reshape(-1)), default=0)

    @cached_property
    def _int64(self) -> np.ndarray | None:
        if self._int_bound >= 1 << 40:
            return None
        return self._int.reshape(self.v1dim, -1).astype(np.int64)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BilinearMap):
            return NotImplemented
        return (
            self.target == other.target
            and self.tensor.shape == other.tensor.shape
            and bool(np.all(self.tensor == other.tensor))
        )

    __hash__ = None

    def __call__(self, x: Sequence, y: Sequence) -> Vector:
        a, b, w = self.tensor.shape
        xy = frac_matmul([vector(x)], self.tensor.reshape(a, b * w)).reshape(b, w)
        return tuple(frac_matmul([vector(y)], xy)[0])

    def partial(self, x: Sequence) -> np.ndarray:
        """Matrix (wdim x v2dim) of phi_X = phi(X, .)."""
        a, b, w = self.tensor.shape
        return frac_matmul([vector(x)], self.tensor.reshape(a, b * w)).reshape(b, w).T

    def _partial_int(self, x: Sequence) -> np.ndarray:
        """phi_X up to a positive scale, with Python int entries."""
        if not _is_integral(x):
            return integral(self.partial(x))
        xs = [int(v) for v in x]
        t64 = self._int64
        if t64 is not None and max(map(abs, xs), default=0) * self._int_bound * self.v1dim < 1 << 62:
            flat = (np.array(xs, dtype=np.int64) @ t64).astype(object).reshape(1, -1)
            return flat.reshape(self.v2dim, self.wdim).T
        xi = np.array(xs, dtype=object).reshape(1, -1)
        flat = int_matmul(xi, self._int.reshape(self.v1dim, -1))
        return flat.reshape(self.v2dim, self.wdim).T

    def values(self) -> list[Vector]:
        return [tuple(v) for v in self.tensor.reshape(-1, self.wdim)]

    def with_target(self, matrix: np.ndarray, target: InnerSpace) -> BilinearMap:
        """Compose with a linear map ``matrix`` (acting on columns) on the target."""
        m = as_array(matrix)
        a, b, w = self.tensor.shape
        t = frac_matmul(self.tensor.reshape(-1, w), m.T).reshape(a, b, m.shape[0])
        return BilinearMap(t, target)

    def restrict_right(self, sub: Subspace) -> BilinearMap:
        """phi restricted to V1 x sub, in the coordinates of ``sub.basis``."""
        if sub.dim == 0:
            return BilinearMap(np.empty((self.v1dim, 0, self.wdim), dtype=object), self.target)
        a, b, w = self.tensor.shape
        t = frac_matmul(self.tensor.transpose(0, 2, 1).reshape(-1, b), sub.matrix().T)
        return BilinearMap(t.reshape(a, w, sub.dim).transpose(0, 2, 1), self.target)

    def pullback(self, left: np.ndarray, right: np.ndarray) -> BilinearMap:
        """(X, Y) -> phi(left X, right Y)."""
        left = as_array(left)
        right = as_array(right)
        a, b, w = self.tensor.shape
        t = frac_matmul(self.tensor.transpose(0, 2, 1).reshape(-1, b), right)  # [i, w, j']
        k = right.shape[1]
        t = frac_matmul(left.T, t.reshape(a, -1)).reshape(left.shape[1], w, k)
        return BilinearMap(t.transpose(0, 2, 1), self.target)

    def __add__(self, other: BilinearMap) -> BilinearMap:
        return BilinearMap(self.tensor + other.tensor, self.target)

    def __sub__(self, other: BilinearMap) -> BilinearMap:
        return BilinearMap(self.tensor - other.tensor, self.target)

    def scaled(self, c) -> BilinearMap:
        return BilinearMap(self.tensor * c, self.target)

    def apply_target(self, op: np.ndarray) -> BilinearMap:
        """(X, Y) -> op phi(X, Y)."""
        return self.with_target(op, self.target)


def _is_integral(x) -> bool:
    return all(getattr(v, "denominator", 1) == 1 for v in x)


def _unit(n: int, i: int) -> Vector:
    return vector(int(i == j) for j in range(n))


def _v1_space(phi: BilinearMap) -> InnerSpace:
    return InnerSpace.euclidean(phi.v1dim)


def _v2_space(phi: BilinearMap) -> InnerSpace:
    return InnerSpace.euclidean(phi.v2dim)


# ---------------------------------------------------------------------------
# image and nullity


def image(phi: BilinearMap) -> Subspace:
    """S(phi): span of all phi(e_i, f_j)."""
    return Subspace.span(phi.target, phi.values())


def nullity(phi: BilinearMap) -> Subspace:
    """N(phi) = {Y in V2 : phi(X, Y) = 0 for all X}."""
    if phi.v2dim == 0:
        return Subspace.zero(_v2_space(phi))
    t = phi._int
    # one equation per (X-basis vector, target coordinate)
    rows = t.transpose(0, 2, 1).reshape(-1, phi.v2dim).tolist()
    return Subspace(_v2_space(phi), tuple(kernel(rows, phi.v2dim)))


def partial_image(phi: BilinearMap, x: Sequence) -> Subspace:
    """phi_X(V2)."""
    return Subspace.span(phi.target, [tuple(c) for c in phi.partial(x).T])


def partial_kernel(phi: BilinearMap, x: Sequence) -> Subspace:
    """N(X) = ker phi_X."""
    m = phi.partial(x)
    return Subspace(_v2_space(phi), tuple(kernel(m.tolist(), phi.v2dim)))


def partial_rank(phi: BilinearMap, x: Sequence) -> int:
    return rank(phi._partial_int(vector(x)).tolist())


def u_space(phi: BilinearMap, x: Sequence) -> Subspace:
    """U(X) = phi_X(V2) cap phi_X(V2)^perp."""
    return radical(partial_image(phi, x))


def _l_space(phi: BilinearMap, nx: Subspace) -> Subspace:
    return image(phi.restrict_right(nx))


# ---------------------------------------------------------------------------
# regular elements


@dataclass(frozen=True)
class RegularElementCertificate:
    """A sampled regular element X with kappa, tau(X), sigma(X).

    ``tau`` and ``sigma`` are the best (smallest) values found over all
    sampled regular candidates.
    """

    vector: Vector
    attained_rank: int
    kappa: int
    tau_at_x: int
    sigma_at_x: int
    tau: int
    sigma: int
    seed: int
    candidates: int


def regular_candidates(dim: int, seed: int, samples: int = DEFAULT_SAMPLES):
    """Basis vectors, pairwise sums, then seeded random integer points."""
    for i in range(dim):
        yield _unit(dim, i)
    for i in range(dim):
        for j in range(i + 1, dim):
            yield vector(int(k in (i, j)) for k in range(dim))
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        yield vector(int(v) for v in rng.integers(-SAMPLE_BOUND, SAMPLE_BOUND + 1, size=dim))


def kappa(
    phi: BilinearMap, seed: int = 0, samples: int = DEFAULT_SAMPLES, profiled: int = 8
) -> RegularElementCertificate:
    """Certify kappa(phi) = max_X dim phi_X(V2) by sampling.

    tau and sigma are evaluated on the first ``profiled`` candidates attaining
    the maximum; the returned vector minimizes tau among those, ties keeping
    the first one in sampling order.
    """
    cands = list(regular_candidates(phi.v1dim, seed, max(samples, DEFAULT_SAMPLES)))
    if phi.v1dim == 0:
        return RegularElementCertificate((), 0, 0, 0, 0, 0, 0, seed, 0)
    ranks = [partial_rank(phi, x) for x in cands]
    k = max(ranks)
    best = None
    sigma_min = None
    regular = [x for x, r in zip(cands, ranks) if r == k]
    for x in regular[:profiled]:
        t = u_space(phi, x).dim
        s = _l_space(phi, partial_kernel(phi, x)).dim
        sigma_min = s if sigma_min is None else min(sigma_min, s)
        if best is None or t < best[1]:
            best = (x, t, s)
    x, t, s = best
    return RegularElementCertificate(
        vector=x,
        attained_rank=k,
        kappa=k,
        tau_at_x=t,
        sigma_at_x=s,
        tau=t,
        sigma=sigma_min,
        seed=seed,
        candidates=len(cands),
    )


def l_space(phi: BilinearMap, cert: RegularElementCertificate) -> Subspace:
    """L(X) = S(phi restricted to V1 x N(X)).

    Always checks L(X) within phi_X(V2); for flat phi also within U(X).
    """
    x = cert.vector
    ell = _l_space(phi, partial_kernel(phi, x))
    img = partial_image(phi, x)
    if not img.contains_subspace(ell):
        raise InvariantViolation("L(X) is not contained in phi_X(V2); X may not be regular")
    if is_flat(phi) and not radical(img).contains_subspace(ell):
        raise InvariantViolation("flat form with L(X) outside U(X)")
    return ell


# ---------------------------------------------------------------------------
# flatness


def _gram_of_values(phi: BilinearMap, psi: BilinearMap | None = None) -> np.ndarray:
    """<<phi(X,Y), psi(Z,T)>> indexed [X, Y, Z, T] (scaled by a positive constant)."""
    psi = phi if psi is None else psi
    if phi.target != psi.target:
        raise ValueError("forms have different targets")
    g = integral(phi.target.gram_array()) if phi.wdim else np.zeros((0, 0), dtype=object)
    a = phi._int.reshape(-1, phi.wdim)
    b = psi._int.reshape(-1, psi.wdim)
    m = int_matmul(int_matmul(a, g), b.T)
    return m.reshape(phi.v1dim, phi.v2dim, psi.v1dim, psi.v2dim)


def is_flat(phi: BilinearMap) -> bool:
    """<<phi(X,Y), phi(Z,T)>> = <<phi(X,T), phi(Z,Y)>> on all basis quadruples."""
    if phi.wdim == 0 or phi.tensor.size == 0:
        return True
    m = _gram_of_values(phi)
    return bool(np.all(m == m.transpose(0, 3, 2, 1)))


def is_null(phi: BilinearMap) -> bool:
    if phi.wdim == 0 or phi.tensor.size == 0:
        return True
    return bool(np.all(_gram_of_values(phi) == 0))


def is_flat_pair(phi: BilinearMap, psi: BilinearMap) -> bool:
    """<<phi(X,Y), psi(Z,T)>> = <<phi(X,T), psi(Z,Y)>> on all basis quadruples."""
    if phi.wdim == 0 or phi.tensor.size == 0 or psi.tensor.size == 0:
        return True
    m = _gram_of_values(phi, psi)
    return bool(np.all(m == m.transpose(0, 3, 2, 1)))


# ---------------------------------------------------------------------------
# bounds and diagnostics


def satisfies_condo(phi: BilinearMap, j: np.ndarray, t: np.ndarray) -> bool:
    """T phi(X, Y) = phi(X, JY) entrywise."""
    lhs = phi.apply_target(t)
    rhs = phi.pullback(np.identity(phi.v1dim, dtype=int), j)
    return lhs == rhs


def pluriharmonic_bound_check(phi: BilinearMap, j, t: np.ndarray, seed: int = 0) -> bool:
    """4 dim S(phi) <= kappa(phi) (kappa(phi) + 2) for symmetric T-compatible phi.

    ``j`` is a complex structure on V (matrix or object with ``.matrix``).
    A False return means the bound failed, which should never happen.
    """
    jm = getattr(j, "matrix", j)
    if not phi.symmetric:
        raise PreconditionError("pluriharmonic bound needs a symmetric form")
    if not satisfies_condo(phi, as_array(jm), as_array(t)):
        raise PreconditionError("form does not satisfy T phi(X,Y) = phi(X,JY)")
    k = kappa(phi, seed).kappa
    return 4 * image(phi).dim <= k * (k + 2)


def kernel_chain(phi: BilinearMap, pivots: Sequence[Sequence]) -> list[Subspace]:
    """N(X) >= N_1 >= N_2 >= ... with N_{k+1} = ker(phi_{Z_{k+1}} restricted to N_k).

    ``pivots`` is ``[X, Z_1, Z_2, ...]``.
    """
    if not pivots:
        raise ValueError("kernel_chain needs at least one pivot")
    chain = [partial_kernel(phi, pivots[0])]
    for z in pivots[1:]:
        prev = chain[-1]
        if prev.dim == 0:
            chain.append(prev)
            continue
        m = phi.partial(z) @ prev.matrix().T
        coeffs = kernel(m.tolist(), prev.dim)
        vecs = [tuple(np.array(c, dtype=object) @ prev.matrix()) for c in coeffs]
        chain.append(Subspace(prev.ambient, tuple(vecs)))
    return chain
