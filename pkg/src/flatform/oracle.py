"""Brute-force invariant table, written independently of the main path.

Only ``fractions.Fraction`` is shared: elimination, the associated forms,
flatness and kappa are all recomputed here from the raw arrays.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

MAX_TANGENT = 12
MAX_NORMAL = 6


class OracleSizeError(ValueError):
    pass


def _f(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def rref(rows, ncols: int) -> list[list[Fraction]]:
    """Nonzero rows of the reduced row echelon form (plain Fraction elimination)."""
    m = [[_f(x) for x in r] for r in rows]
    out = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        lead = m[r][c]
        m[r] = [x / lead for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    out = [row for row in m[:r]]
    return out


def null_space(rows, ncols: int) -> list[list[Fraction]]:
    red = rref(rows, ncols)
    pivots = [next(c for c, x in enumerate(row) if x != 0) for row in red]
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for row, pc in zip(red, pivots):
            v[pc] = -row[fc]
        basis.append(v)
    return basis


def canonical(vectors, ncols: int) -> tuple:
    """Hashable canonical form of a span."""
    return tuple(tuple(r) for r in rref(vectors, ncols))


@dataclass
class OracleTable:
    n: int
    p: int
    s_alpha: tuple
    s_gamma: tuple
    s_beta: tuple
    n_alpha: tuple
    n_gamma: tuple
    n_beta: tuple
    nu_c: int
    kappa_gamma: int
    kappa_beta: int
    gamma_flat: bool
    beta_flat: bool
    compatible: bool
    q: tuple
    q_well_defined: bool

    def summary(self) -> dict:
        return {
            "dim_S_alpha": len(self.s_alpha),
            "dim_S_gamma": len(self.s_gamma),
            "nu_alpha": len(self.n_alpha),
            "nu_gamma": len(self.n_gamma),
            "nu_beta": len(self.n_beta),
            "nu_c": self.nu_c,
            "kappa_gamma": self.kappa_gamma,
            "kappa_beta": self.kappa_beta,
            "gamma_flat": self.gamma_flat,
            "beta_flat": self.beta_flat,
            "compatible": self.compatible,
            "dim_Q": len(self.q),
            "q_well_defined": self.q_well_defined,
        }


def _forms(J, alpha, d, p):
    """alpha-bar, gamma, beta as nested lists [i][j] -> list of coordinates."""
    a = [[[_f(alpha[i][j][k]) for k in range(p)] for j in range(d)] for i in range(d)]
    jm = [[_f(J[i][j]) for j in range(d)] for i in range(d)]
    # alpha(e_i, J e_j) = sum_k J[k][j] alpha(e_i, e_k)
    abar = [
        [[sum(jm[k][j] * a[i][k][w] for k in range(d)) for w in range(p)] for j in range(d)]
        for i in range(d)
    ]
    gamma = [[a[i][j] + abar[i][j] for j in range(d)] for i in range(d)]

    def gJJ(i, j):
        # gamma(J e_i, J e_j)
        return [
            sum(jm[k][i] * jm[l][j] * gamma[k][l][w] for k in range(d) for l in range(d) if jm[k][i] and jm[l][j])
            for w in range(2 * p)
        ]

    jj = [[gJJ(i, j) for j in range(d)] for i in range(d)]
    beta = [[[x + y for x, y in zip(gamma[i][j], jj[i][j])] for j in range(d)] for i in range(d)]
    return a, abar, gamma, beta, jm


def _pair(u, v, p):
    return sum(u[w] * v[w] for w in range(p)) - sum(u[p + w] * v[p + w] for w in range(p))


def _flat(phi, psi, d, p) -> bool:
    # integer Gram table: scale both forms to integers first
    def ints(t):
        den = 1
        for row in t:
            for v in row:
                for x in v:
                    den = den * x.denominator // _gcd(den, x.denominator)
        return [[[int(x * den) for x in v] for v in row] for row in t]

    a = ints(phi)
    b = ints(psi)
    g = {}
    for x, y, z, t in itertools.product(range(d), repeat=4):
        g[x, y, z, t] = _pair(a[x][y], b[z][t], p)
    return all(g[x, y, z, t] == g[x, t, z, y] for x, y, z, t in g)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def _kernel_of_form(phi, d, w):
    rows = [[phi[i][j][k] for j in range(d)] for i in range(d) for k in range(w)]
    return null_space(rows, d)


def _rank_at(phi, x, d, w) -> int:
    m = [[sum(x[i] * phi[i][j][k] for i in range(d) if x[i]) for j in range(d)] for k in range(w)]
    return len(rref(m, d))


def grid(d: int):
    vals = (-1, 0, 1) if d <= 7 else (0, 1)
    return itertools.product(vals, repeat=d)


def grid_kappa(phi, d: int, w: int, upper: int) -> int:
    best = 0
    for x in grid(d):
        if not any(x):
            continue
        r = _rank_at(phi, x, d, w)
        if r > best:
            best = r
            if best >= upper:
                break
    return best


def oracle(kp, max_tangent: int = MAX_TANGENT, max_normal: int = MAX_NORMAL) -> OracleTable:
    n, p = kp.n, kp.p
    d = 2 * n
    if d > max_tangent or p > max_normal:
        raise OracleSizeError(f"oracle limited to 2n <= {max_tangent}, p <= {max_normal}; got 2n = {d}, p = {p}")
    J = kp.J.matrix.tolist()
    alpha = kp.alpha.tensor.tolist()
    a, abar, gamma, beta, jm = _forms(J, alpha, d, p)
    vals = lambda t: [t[i][j] for i in range(d) for j in range(d)]  # noqa: E731
    s_alpha = canonical(vals(a), p)
    s_gamma = canonical(vals(gamma), 2 * p)
    s_beta = canonical(vals(beta), 2 * p)
    n_alpha = canonical(_kernel_of_form(a, d, p), d)
    n_gamma = canonical(_kernel_of_form(gamma, d, 2 * p), d)
    n_beta = canonical(_kernel_of_form(beta, d, 2 * p), d)
    # Delta cap J Delta: Y with alpha(X, Y) = 0 and alpha(X, J^{-1} Y) = 0
    jinv = [[-x for x in row] for row in jm]
    rows = [[a[i][j][k] for j in range(d)] for i in range(d) for k in range(p)]
    rows += [
        [sum(a[i][l][k] * jinv[l][j] for l in range(d)) for j in range(d)] for i in range(d) for k in range(p)
    ]
    nu_c = len(null_space(rows, d))
    kg = grid_kappa(gamma, d, 2 * p, min(len(s_gamma), d - len(n_gamma)))
    kb = grid_kappa(beta, d, 2 * p, min(len(s_beta), d - len(n_beta)))
    gflat = _flat(gamma, gamma, d, p)
    bflat = _flat(beta, beta, d, p)
    compat = _flat(beta, gamma, d, p)
    q, well = q_direct(a, abar, d, p)
    return OracleTable(
        n, p, s_alpha, s_gamma, s_beta, n_alpha, n_gamma, n_beta, nu_c, kg, kb, gflat, bflat, compat, q, well
    )


def q_direct(a, abar, d, p):
    """{eta in N_1 : <eta, alpha(Z,T)> = <eta_bar, alpha(Z,JT)>} over a spanning set of pairs."""
    pairs = []
    kept: list[list[Fraction]] = []
    for i in range(d):
        for j in range(d):
            cand = a[i][j] + abar[i][j]
            if len(rref(kept + [cand], 2 * p)) > len(kept):
                kept.append(cand)
                pairs.append((i, j))
    if not pairs:
        return (), True
    eqs = []
    for z in range(d):
        for t in range(d):
            eqs.append(
                [
                    sum(a[i][j][w] * a[z][t][w] for w in range(p))
                    - sum(abar[i][j][w] * abar[z][t][w] for w in range(p))
                    for i, j in pairs
                ]
            )
    sols = null_space(eqs, len(pairs))
    etas, both = [], []
    for c in sols:
        eta = [sum(cm * a[i][j][w] for cm, (i, j) in zip(c, pairs)) for w in range(p)]
        eta_bar = [sum(cm * abar[i][j][w] for cm, (i, j) in zip(c, pairs)) for w in range(p)]
        etas.append(eta)
        both.append(eta + eta_bar)
    q = canonical(etas, p)
    return q, len(q) == len(rref(both, 2 * p))


def agrees(kp, seed: int = 0) -> tuple[bool, list[str]]:
    """Compare the oracle table with the main path field by field.

    Returns (agreement, messages); messages starting with ``note:`` do not
    count as disagreements.
    """
    from . import kaehler, structure
    from .bilinear import image, is_flat, kappa, nullity

    tab = oracle(kp)
    d, p = kp.dim, kp.p
    diffs = []

    def same(name, sub, ref, ncols):
        if canonical([list(b) for b in sub.basis], ncols) != ref:
            diffs.append(f"{name} differs")

    same("S(alpha)", image(kp.alpha), tab.s_alpha, p)
    same("S(gamma)", image(kp.gamma), tab.s_gamma, 2 * p)
    same("S(beta)", image(kp.beta), tab.s_beta, 2 * p)
    same("N(alpha)", nullity(kp.alpha), tab.n_alpha, d)
    same("N(gamma)", nullity(kp.gamma), tab.n_gamma, d)
    same("N(beta)", nullity(kp.beta), tab.n_beta, d)
    if structure.complex_relative_nullity(kp).dim != tab.nu_c:
        diffs.append("nu_c differs")
    for name, main, ref in (
        ("gamma flat", is_flat(kp.gamma), tab.gamma_flat),
        ("beta flat", is_flat(kp.beta), tab.beta_flat),
        ("compatibility", kaehler.check_compatibility(kp), tab.compatible),
    ):
        if main != ref:
            diffs.append(f"{name} differs")
    kb = kappa(kp.beta, seed).kappa
    kg = kappa(kp.gamma, seed).kappa
    if tab.kappa_beta < kb or tab.kappa_gamma < kg:
        diffs.append("grid kappa below sampled kappa")
    notes = []
    if tab.kappa_beta != kb or tab.kappa_gamma != kg:
        notes.append(f"note: kappa: grid ({tab.kappa_gamma}, {tab.kappa_beta}) vs sampled ({kg}, {kb})")
    if tab.gamma_flat and tab.beta_flat and tab.compatible:
        q, _ = structure.compute_Q(kp)
        same("Q", q, tab.q, p)
        if not tab.q_well_defined:
            diffs.append("eta does not determine eta_bar")
    return not diffs, diffs + notes
