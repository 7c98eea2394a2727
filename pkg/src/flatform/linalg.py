"""Exact linear algebra over the rationals.

Vectors are tuples of :class:`fractions.Fraction`; matrices are sequences of
rows.  Elimination is done on integer rows (each row cleared of denominators
and kept primitive), so no intermediate fractions are created.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from math import gcd, lcm
from numbers import Integral
from typing import Iterable, Sequence

import numpy as np

Scalar = Fraction
Vector = tuple[Fraction, ...]


def scalar(x) -> Fraction:
    """Convert ``x`` to an exact rational.

    Floats are converted as written in their shortest repr (``0.1 -> 1/10``),
    strings may be ``"a/b"`` or finite decimals.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, Integral):
        return Fraction(int(x))
    if isinstance(x, float):
        if x != x or x in (float("inf"), float("-inf")):
            raise ValueError(f"non-finite float {x!r}")
        return Fraction(Decimal(repr(x)))
    if isinstance(x, Decimal):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {type(x).__name__} to a rational scalar")


def vector(values: Iterable) -> Vector:
    return tuple(scalar(v) for v in values)


def as_array(m) -> np.ndarray:
    """Object array of Fractions with the same shape as ``m``."""
    arr = np.asarray(m, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    flat_in = arr.reshape(-1)
    flat_out = out.reshape(-1)
    for k, x in enumerate(flat_in):
        flat_out[k] = scalar(x)
    return out


def scaled_int(arr: np.ndarray) -> tuple[np.ndarray, int]:
    """(ints, d) with ints / d == arr, d the lcm of the denominators."""
    flat = arr.reshape(-1)
    den = 1
    for x in flat:
        den = lcm(den, getattr(x, "denominator", 1))
    out = np.empty(arr.shape, dtype=object)
    oflat = out.reshape(-1)
    for k, x in enumerate(flat):
        oflat[k] = int(x.numerator * (den // x.denominator)) if isinstance(x, Fraction) else int(x) * den
    return out, den


def integral(arr: np.ndarray) -> np.ndarray:
    """Scale an object array of rationals by the lcm of its denominators.

    The result holds Python ints.  Only useful for scale-invariant questions
    (ranks, kernels, vanishing of homogeneous expressions).
    """
    return scaled_int(arr)[0]


_INT64_SAFE = 1 << 62


def int_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact product of two object arrays of Python ints.

    Uses int64 when the entry bound rules out overflow.
    """
    if a.size == 0 or b.size == 0:
        return np.zeros((a.shape[0], b.shape[1]), dtype=object)
    amax = max(abs(int(x)) for x in a.reshape(-1))
    bmax = max(abs(int(x)) for x in b.reshape(-1))
    if amax * bmax * a.shape[1] < _INT64_SAFE:
        prod = a.astype(np.int64) @ b.astype(np.int64)
        return prod.astype(object)
    return a @ b


def frac_matmul(a, b) -> np.ndarray:
    """Exact product of two rational matrices, via one integer product."""
    a = np.asarray(a, dtype=object)
    b = np.asarray(b, dtype=object)
    ai, da = scaled_int(a)
    bi, db = scaled_int(b)
    prod = int_matmul(ai, bi)
    d = da * db
    out = np.empty(prod.shape, dtype=object)
    oflat = out.reshape(-1)
    for k, x in enumerate(prod.reshape(-1)):
        oflat[k] = Fraction(int(x), d)
    return out


# ---------------------------------------------------------------------------
# elimination


def _int_row(row: Sequence) -> list[int]:
    den = 1
    for x in row:
        den = lcm(den, x.denominator)
    return [x.numerator * (den // x.denominator) for x in row]


def _primitive(row: list[int]) -> list[int]:
    g = 0
    for x in row:
        if x:
            g = gcd(g, x)
            if g == 1:
                return row
    if g > 1:
        return [x // g for x in row]
    return row


def _eliminate(target: list[int], pivot_row: list[int], col: int) -> list[int]:
    a = pivot_row[col]
    b = target[col]
    g = gcd(a, b)
    fa, fb = a // g, b // g
    if fa < 0:
        fa, fb = -fa, -fb
    return _primitive([fa * x - fb * y for x, y in zip(target, pivot_row)])


def _reduce(rows: Iterable[Sequence], ncols: int) -> tuple[list[list[int]], list[int]]:
    """Fraction-free Gauss-Jordan reduction.

    Returns the nonzero reduced rows and their pivot columns; every pivot
    column is zero outside its pivot row.
    """
    work = [_primitive(_int_row(r)) for r in rows]
    work = [r for r in work if any(r)]
    pivots: list[int] = []
    top = 0
    for c in range(ncols):
        if top == len(work):
            break
        piv = next((i for i in range(top, len(work)) if work[i][c]), None)
        if piv is None:
            continue
        work[top], work[piv] = work[piv], work[top]
        prow = work[top]
        for i in range(len(work)):
            if i != top and work[i][c]:
                work[i] = _eliminate(work[i], prow, c)
        pivots.append(c)
        top += 1
    return work[:top], pivots


def rank(m: Sequence[Sequence]) -> int:
    """Exact rank of a rational matrix."""
    m = list(m)
    if not m:
        return 0
    _, pivots = _reduce(m, len(m[0]))
    return len(pivots)


def kernel(m: Sequence[Sequence], ncols: int | None = None) -> list[Vector]:
    """Basis of ``{x : m x = 0}`` as primitive integer vectors."""
    m = list(m)
    if ncols is None:
        if not m:
            raise ValueError("ncols required for an empty matrix")
        ncols = len(m[0])
    rows, pivots = _reduce(m, ncols)
    pivot_set = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivot_set:
            continue
        # x_f = L, x_c = -row[f] * L / row[c] with L clearing all denominators
        den = 1
        for row, c in zip(rows, pivots):
            if row[f]:
                den = lcm(den, abs(row[c]))
        x = [0] * ncols
        x[f] = den
        for row, c in zip(rows, pivots):
            if row[f]:
                x[c] = -row[f] * den // row[c]
        basis.append(tuple(Fraction(v) for v in _primitive(x)))
    return basis


def solve(m: Sequence[Sequence], b: Sequence) -> Vector | None:
    """One solution of ``m x = b`` (free variables zero), or None."""
    m = list(m)
    ncols = len(m[0]) if m else 0
    aug = [list(map(scalar, row)) + [scalar(v)] for row, v in zip(m, b)]
    rows, pivots = _reduce(aug, ncols + 1)
    if pivots and pivots[-1] == ncols:
        return None
    x = [Fraction(0)] * ncols
    for row, c in zip(rows, pivots):
        x[c] = Fraction(row[ncols], row[c])
    return tuple(x)


def inverse(m: Sequence[Sequence]) -> np.ndarray:
    m = as_array(m)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("inverse of a non-square matrix")
    aug = [list(m[i]) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    rows, pivots = _reduce(aug, 2 * n)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise ZeroDivisionError("matrix is singular")
    out = np.empty((n, n), dtype=object)
    for i, (row, c) in enumerate(zip(rows[:n], pivots[:n])):
        for j in range(n):
            out[c, j] = Fraction(row[n + j], row[c])
    return out


class _Echelon:
    """Incrementally maintained reduced row space (integer rows)."""

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.rows: list[list[int]] = []
        self.pivots: list[int] = []

    def reduce(self, v: Sequence) -> list[int]:
        r = _primitive(_int_row(v))
        for row, c in zip(self.rows, self.pivots):
            if r[c]:
                r = _eliminate(r, row, c)
        return r

    def add(self, v: Sequence) -> bool:
        r = self.reduce(v)
        if not any(r):
            return False
        c = next(i for i, x in enumerate(r) if x)
        for i, row in enumerate(self.rows):
            if row[c]:
                self.rows[i] = _eliminate(row, r, c)
        self.rows.append(r)
        self.pivots.append(c)
        return True

    def __contains__(self, v: Sequence) -> bool:
        return not any(self.reduce(v))


def independent(vectors: Iterable[Sequence], ncols: int) -> list[Vector]:
    """Greedy maximal independent subset, in the given order."""
    ech = _Echelon(ncols)
    out = []
    for v in vectors:
        v = vector(v)
        if ech.add(v):
            out.append(v)
            if len(out) == ncols:
                break
    return out


# ---------------------------------------------------------------------------
# inner product spaces


@dataclass(frozen=True)
class InnerSpace:
    """Coordinate space Q^dim with a symmetric (possibly indefinite) Gram matrix."""

    gram: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        g = tuple(vector(row) for row in self.gram)
        object.__setattr__(self, "gram", g)
        n = len(g)
        if any(len(row) != n for row in g):
            raise ValueError("gram matrix must be square")
        if any(g[i][j] != g[j][i] for i in range(n) for j in range(i)):
            raise ValueError("gram matrix must be symmetric")

    @classmethod
    def euclidean(cls, dim: int) -> InnerSpace:
        return cls(tuple(tuple(int(i == j) for j in range(dim)) for i in range(dim)))

    @classmethod
    def split(cls, p: int) -> InnerSpace:
        """U^p + U^p with the pairing <x1,y1> - <x2,y2>."""
        d = 2 * p
        return cls(
            tuple(
                tuple((1 if i < p else -1) if i == j else 0 for j in range(d))
                for i in range(d)
            )
        )

    @property
    def dim(self) -> int:
        return len(self.gram)

    def gram_array(self) -> np.ndarray:
        return as_array(self.gram) if self.dim else np.empty((0, 0), dtype=object)

    def pair(self, u: Sequence, v: Sequence) -> Fraction:
        g = self.gram
        total = Fraction(0)
        for i, ui in enumerate(u):
            if ui:
                row = g[i]
                for j, vj in enumerate(v):
                    if vj and row[j]:
                        total += ui * row[j] * vj
        return total

    def signature(self) -> tuple[int, int, int]:
        """(positive, negative, zero) inertia via congruence diagonalization."""
        g = [list(row) for row in self.gram]
        n = len(g)
        pos = neg = 0
        active = list(range(n))
        while active:
            i = next((k for k in active if g[k][k] != 0), None)
            if i is None:
                pair = next(
                    ((a, b) for a in active for b in active if a != b and g[a][b] != 0),
                    None,
                )
                if pair is None:
                    break
                a, b = pair
                # replace basis vector a by a + b, which is non-isotropic
                for k in range(n):
                    g[a][k] += g[b][k]
                for k in range(n):
                    g[k][a] += g[k][b]
                i = a
            d = g[i][i]
            if d > 0:
                pos += 1
            else:
                neg += 1
            active.remove(i)
            for k in active:
                f = g[k][i] / d
                if f:
                    for m in range(n):
                        g[k][m] -= f * g[i][m]
                    for m in range(n):
                        g[m][k] -= f * g[m][i]
        return pos, neg, n - pos - neg

    def is_nondegenerate(self) -> bool:
        return rank(self.gram) == self.dim if self.dim else True


@dataclass(frozen=True, eq=False)
class Subspace:
    """Span of linearly independent coordinate vectors in an InnerSpace.

    Equality is equality of spans.
    """

    ambient: InnerSpace
    basis: tuple[Vector, ...]

    def __post_init__(self):
        basis = tuple(vector(b) for b in self.basis)
        object.__setattr__(self, "basis", basis)
        if any(len(b) != self.ambient.dim for b in basis):
            raise ValueError("basis vector length does not match ambient dimension")
        if rank(basis) != len(basis):
            raise ValueError("basis vectors are linearly dependent")

    @classmethod
    def span(cls, ambient: InnerSpace, vectors: Iterable[Sequence]) -> Subspace:
        return cls(ambient, tuple(independent(vectors, ambient.dim)))

    @classmethod
    def zero(cls, ambient: InnerSpace) -> Subspace:
        return cls(ambient, ())

    @classmethod
    def full(cls, ambient: InnerSpace) -> Subspace:
        n = ambient.dim
        return cls(ambient, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __len__(self) -> int:
        return self.dim

    def _check_same(self, other: Subspace):
        if self.ambient != other.ambient:
            raise ValueError("subspaces live in different ambient spaces")

    def __contains__(self, v) -> bool:
        if self.dim == 0:
            return not any(v)
        ech = _Echelon(self.ambient.dim)
        for b in self.basis:
            ech.add(b)
        return v in ech

    def contains_subspace(self, other: Subspace) -> bool:
        self._check_same(other)
        if other.dim > self.dim:
            return False
        ech = _Echelon(self.ambient.dim)
        for b in self.basis:
            ech.add(b)
        return all(b in ech for b in other.basis)

    def __le__(self, other: Subspace) -> bool:
        return other.contains_subspace(self)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.dim == other.dim and self.contains_subspace(other)

    __hash__ = None

    def __add__(self, other: Subspace) -> Subspace:
        self._check_same(other)
        return Subspace.span(self.ambient, self.basis + other.basis)

    def gram(self) -> np.ndarray:
        """Gram matrix of the basis under the ambient pairing."""
        k = self.dim
        out = np.empty((k, k), dtype=object)
        for i in range(k):
            for j in range(i, k):
                out[i, j] = out[j, i] = self.ambient.pair(self.basis[i], self.basis[j])
        return out

    def is_isotropic(self) -> bool:
        return all(x == 0 for x in self.gram().reshape(-1))

    def is_degenerate(self) -> bool:
        return radical(self).dim > 0

    def matrix(self) -> np.ndarray:
        return as_array(self.basis) if self.dim else np.empty((0, self.ambient.dim), dtype=object)

    def coordinates(self, v: Sequence) -> Vector:
        """Coefficients of ``v`` in this basis; raises if ``v`` is outside."""
        cols = [[b[i] for b in self.basis] for i in range(self.ambient.dim)]
        if self.dim == 0:
            if any(v):
                raise ValueError("vector not in subspace")
            return ()
        x = solve(cols, v)
        if x is None:
            raise ValueError("vector not in subspace")
        return x

    def map(self, m: np.ndarray, ambient: InnerSpace | None = None) -> Subspace:
        """Image under the linear map with matrix ``m`` (acting on columns)."""
        ambient = ambient or self.ambient
        return Subspace.span(ambient, [tuple(m @ np.array(b, dtype=object)) for b in self.basis])


def perp(s: Subspace) -> Subspace:
    """{w : <<w, s>> = 0}."""
    amb = s.ambient
    if s.dim == 0:
        return Subspace.full(amb)
    rows = [[amb.pair(b, e) for e in _unit_vectors(amb.dim)] for b in s.basis]
    return Subspace(amb, tuple(kernel(rows, amb.dim)))


def _unit_vectors(n: int):
    for i in range(n):
        yield tuple(int(i == j) for j in range(n))


def intersect(a: Subspace, b: Subspace) -> Subspace:
    """Exact intersection via the kernel of the stacked system."""
    a._check_same(b)
    if a.dim == 0 or b.dim == 0:
        return Subspace.zero(a.ambient)
    n = a.ambient.dim
    # columns: a-basis then negated b-basis; kernel gives equal combinations
    cols = list(a.basis) + [tuple(-x for x in v) for v in b.basis]
    rows = [[c[i] for c in cols] for i in range(n)]
    coeffs = kernel(rows, len(cols))
    vecs = []
    for c in coeffs:
        v = [Fraction(0)] * n
        for ci, bv in zip(c[: a.dim], a.basis):
            if ci:
                for i in range(n):
                    v[i] += ci * bv[i]
        vecs.append(v)
    return Subspace.span(a.ambient, vecs)


def radical(s: Subspace) -> Subspace:
    """s intersected with its perpendicular."""
    if s.dim == 0:
        return s
    g = s.gram()
    coeffs = kernel(g.tolist(), s.dim)
    n = s.ambient.dim
    vecs = []
    for c in coeffs:
        v = [Fraction(0)] * n
        for ci, bv in zip(c, s.basis):
            if ci:
                for i in range(n):
                    v[i] += ci * bv[i]
        vecs.append(v)
    return Subspace.span(s.ambient, vecs)


def orthogonal_projector(s: Subspace) -> np.ndarray:
    """Matrix of the projection onto ``s`` along ``perp(s)``; ``s`` must be nondegenerate."""
    n = s.ambient.dim
    if s.dim == 0:
        return as_array(np.zeros((n, n), dtype=int))
    b = s.matrix()
    g = s.ambient.gram_array()
    return b.T @ inverse(s.gram()) @ b @ g


@dataclass(frozen=True)
class Decomposition:
    """W = radical + dual + rest with radical = L cap L^perp."""

    radical: Subspace
    dual: Subspace
    rest: Subspace

    @property
    def r(self) -> int:
        return self.radical.dim


def decompose(l: Subspace) -> Decomposition:
    """Split the ambient space around ``l``.

    ``radical = l cap l^perp`` and ``dual`` are isotropic and paired
    nondegenerately, ``rest`` is their common perpendicular and ``l`` lies in
    ``radical + rest``.  ``dual`` is a deterministic but non-canonical choice.
    """
    amb = l.ambient
    if not amb.is_nondegenerate():
        raise ValueError("decompose needs a nondegenerate ambient space")
    rad = radical(l)
    r = rad.dim
    if r == 0:
        return Decomposition(rad, Subspace.zero(amb), perp(Subspace.zero(amb)))
    # complement of the radical inside l
    ech = _Echelon(amb.dim)
    for b in rad.basis:
        ech.add(b)
    comp = [b for b in l.basis if ech.add(b)]
    room = perp(Subspace(amb, tuple(comp))) if comp else Subspace.full(amb)
    # inside `room` (nondegenerate, contains the radical) find w_i with <<xi_j, w_i>> = delta_ij
    m = room.matrix()
    pairing = [[amb.pair(xi, w) for w in room.basis] for xi in rad.basis]
    ws = []
    for i in range(r):
        rhs = [int(i == j) for j in range(r)]
        c = solve(pairing, rhs)
        if c is None:
            raise ArithmeticError("radical is not paired nondegenerately with its room")
        ws.append(tuple(np.array(c, dtype=object) @ m))
    # w_i <- w_i - 1/2 sum_j <<w_i, w_j>> xi_j makes the span isotropic
    h = [[amb.pair(wi, wj) for wj in ws] for wi in ws]
    dual_vecs = []
    for i, w in enumerate(ws):
        v = list(w)
        for j, xi in enumerate(rad.basis):
            f = h[i][j] / 2
            if f:
                for k in range(amb.dim):
                    v[k] -= f * xi[k]
        dual_vecs.append(tuple(v))
    dual = Subspace(amb, tuple(dual_vecs))
    rest = perp(rad + dual)
    return Decomposition(rad, dual, rest)
