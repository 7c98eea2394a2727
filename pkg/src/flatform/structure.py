"""Degenerate radical of S(gamma), the complex structure on Q, and the nullity bound."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import kaehler
from .bilinear import BilinearMap, image, is_flat, kappa, nullity, pluriharmonic_bound_check
from .errors import InvariantViolation, PreconditionError, StructureError
from .kaehler import ComplexStructure, KaehlerPoint
from .linalg import (
    Subspace,
    _Echelon,
    as_array,
    independent,
    intersect,
    inverse,
    kernel,
    orthogonal_projector,
    perp,
    radical,
    solve,
)

SCOPE_LIMIT = 11

VERDICTS = (
    "theorem_verified",
    "hypothesis_not_met",
    "outside_theorem_scope",
    "violation_candidate",
    "input_invalid",
)

EXIT_CODES = {
    "theorem_verified": 0,
    "hypothesis_not_met": 0,
    "outside_theorem_scope": 0,
    "violation_candidate": 2,
    "input_invalid": 1,
}


@dataclass
class StructureReport:
    n: int
    p: int
    q: int = 0  # dim N_1
    nu_c: int = 0
    s_gamma_degenerate: bool = False
    q_dim: int = 0
    q_basis: Subspace | None = None
    j_matrix: ComplexStructure | None = None
    p_part_nullity: int | None = None
    bound_ok: bool = False
    bound_q_ok: bool = False
    hypothesis_ok: bool = False
    checks: dict[str, bool] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    alpha_q: BilinearMap | None = None
    alpha_p: BilinearMap | None = None

    def as_dict(self) -> dict:
        from .io import scalar_out

        return {
            "n": self.n,
            "p": self.p,
            "q": self.q,
            "nu_c": self.nu_c,
            "s_gamma_degenerate": self.s_gamma_degenerate,
            "q_dim": self.q_dim,
            "q_basis": None
            if self.q_basis is None
            else [[scalar_out(x) for x in v] for v in self.q_basis.basis],
            "j_matrix": None
            if self.j_matrix is None
            else [[scalar_out(x) for x in row] for row in self.j_matrix.matrix],
            "p_part_nullity": self.p_part_nullity,
            "bound_ok": self.bound_ok,
            "bound_q_ok": self.bound_q_ok,
            "hypothesis_ok": self.hypothesis_ok,
        }


def complex_relative_nullity(kp: KaehlerPoint) -> Subspace:
    """N(gamma), cross-checked against Delta cap J Delta with Delta = N(alpha)."""
    ng = nullity(kp.gamma)
    delta = nullity(kp.alpha)
    dc = intersect(delta, delta.map(kp.J.matrix))
    if ng != dc:
        raise InvariantViolation("N(gamma) differs from Delta cap J Delta")
    return ng


def _require_flat(kp: KaehlerPoint) -> None:
    if not is_flat(kp.gamma) or not is_flat(kp.beta):
        raise StructureError("not_flat", "gamma or beta is not flat")
    if not kaehler.check_compatibility(kp):
        raise StructureError("incompatible", "beta and gamma are not compatible")


def _coords(q: Subspace) -> np.ndarray:
    """Matrix sending v in U to the Q-basis coordinates of its projection onto Q."""
    b = q.matrix()
    return inverse(q.gram()) @ b


def solve_complex_structure(kp: KaehlerPoint, q: Subspace) -> ComplexStructure:
    """The l x l matrix with J coords(alpha_Q(X,Y)) = coords(alpha_Q(X,JY))."""
    ell = q.dim
    c = _coords(q)
    vals = kp.alpha.tensor.reshape(-1, kp.p)
    valsj = kp.alpha_JY.tensor.reshape(-1, kp.p)
    cmat = (vals @ c.T).tolist()  # rows are coords of alpha_Q(e_i, e_j)
    dmat = valsj @ c.T
    rows = []
    for r in range(ell):
        sol = solve(cmat, list(dmat[:, r]))
        if sol is None:
            raise StructureError("inconsistent_J", "no linear map sends alpha_Q(X,Y) to alpha_Q(X,JY)")
        rows.append(sol)
    jm = as_array(rows) if ell else np.zeros((0, 0), dtype=object)
    if not np.all(jm @ jm == -np.identity(ell, dtype=int)):
        raise InvariantViolation("the complex structure on Q does not square to -I")
    g = q.gram()
    if not np.all(jm.T @ g @ jm == g):
        raise InvariantViolation("the complex structure on Q is not an isometry")
    return ComplexStructure(jm)


def q_from_definition(kp: KaehlerPoint) -> Subspace:
    """Q as the set of eta in N_1 with <eta, alpha(Z,T)> = <eta_bar, alpha(Z,JT)>.

    eta and eta_bar are parametrized by coefficients over basis pairs whose
    gamma-values are independent; also checks that eta determines eta_bar.
    """
    n2, p = kp.dim, kp.p
    a = kp.alpha.tensor.reshape(-1, p)
    aj = kp.alpha_JY.tensor.reshape(-1, p)
    ech = _Echelon(2 * p)
    chosen = []
    for idx in range(n2 * n2):
        if ech.add(tuple(a[idx]) + tuple(aj[idx])):
            chosen.append(idx)
    if not chosen:
        return Subspace.zero(kp.normal)
    eta = a[chosen]
    eta_bar = aj[chosen]
    # equations: sum_m c_m (<eta_m, alpha(Z,T)> - <eta_bar_m, alpha(Z,JT)>) = 0
    eqs = (a @ eta.T - aj @ eta_bar.T).tolist()
    sols = kernel(eqs, len(chosen))
    pairs = [tuple(np.array(c, dtype=object) @ eta) + tuple(np.array(c, dtype=object) @ eta_bar) for c in sols]
    qs = Subspace.span(kp.normal, [v[:p] for v in pairs])
    if len(independent(pairs, 2 * p)) != qs.dim:
        raise StructureError("inconsistent_J", "eta does not determine eta_bar on Q")
    return qs


def compute_Q(kp: KaehlerPoint) -> tuple[Subspace, ComplexStructure]:
    """Q = pi_1 of the radical of S(gamma) and its complex structure."""
    _require_flat(kp)
    rad = radical(image(kp.gamma))
    q = kp.split.project_first(rad)
    if q.dim != rad.dim:
        raise InvariantViolation("pi_1 is not injective on the radical of S(gamma)")
    if q.dim % 2:
        raise InvariantViolation(f"dim Q = {q.dim} is odd")
    direct = q_from_definition(kp)
    if direct != q:
        raise InvariantViolation("the two computations of Q disagree")
    return q, solve_complex_structure(kp, q)


def _jhat(q: Subspace, jm) -> np.ndarray:
    """The complex structure on Q extended by zero to U^p."""
    return q.matrix().T @ jm.matrix @ _coords(q)


def split_and_bound(kp: KaehlerPoint, q: Subspace, jm=None) -> StructureReport:
    """P = Q-perp in N_1, the checks on gamma_P and the lower bounds on nu^c(alpha_P)."""
    if jm is None:
        jm = solve_complex_structure(kp, q)
    n, p = kp.n, kp.p
    n1 = image(kp.alpha)
    ell = q.dim
    rep = StructureReport(n=n, p=p, q=n1.dim, q_dim=ell, q_basis=q, j_matrix=jm)
    rep.nu_c = complex_relative_nullity(kp).dim
    rep.s_gamma_degenerate = ell > 0
    checks = rep.checks
    checks["Q_in_N1"] = n1.contains_subspace(q)
    if ell:
        proj = orthogonal_projector(q)
        alpha_q = kp.alpha.apply_target(proj)
    else:
        alpha_q = kp.alpha.scaled(0)
    alpha_p = kp.alpha - alpha_q
    rep.alpha_q, rep.alpha_p = alpha_q, alpha_p
    pspace = intersect(perp(q), n1)
    checks["P_dim"] = pspace.dim == n1.dim - ell
    checks["alpha_P_in_P"] = all(v in pspace for v in alpha_p.values())
    if ell:
        jhat = _jhat(q, jm)
        checks["J_alpha_Q"] = alpha_q.apply_target(jhat) == alpha_q.pullback(
            kaehler._eye(kp.dim), kp.J.matrix
        )
        checks["alpha_Q_pluriharmonic"] = alpha_q.pullback(
            kaehler._eye(kp.dim), kp.J.matrix
        ) == alpha_q.pullback(kp.J.matrix, kaehler._eye(kp.dim))
    kpp = KaehlerPoint(n, p, kp.J, alpha_p)
    gp = kpp.gamma
    sgp = image(gp)
    checks["gamma_P_flat"] = is_flat(gp)
    checks["S_gamma_P_nondegenerate"] = not sgp.is_degenerate()
    ngp = nullity(gp)
    checks["nu_gamma_P_bound"] = ngp.dim >= kp.dim - sgp.dim
    delta_p = nullity(alpha_p)
    nuc_p = intersect(delta_p, delta_p.map(kp.J.matrix))
    checks["nu_c_alpha_P_consistent"] = nuc_p == ngp
    rep.p_part_nullity = nuc_p.dim
    rep.bound_ok = nuc_p.dim >= 2 * (n - p + ell)
    rep.bound_q_ok = nuc_p.dim >= 2 * (n - rep.q + ell)
    return rep


def curvature_check(kp: KaehlerPoint, report: StructureReport) -> bool:
    """K(X,JX) <= 0 and K(X,JX) = -|alpha_Q(X,X)|^2 - |alpha_Q(X,JX)|^2 on N(alpha_P)."""
    if report.alpha_p is None or report.alpha_q is None:
        raise PreconditionError("report has no alpha_P / alpha_Q")
    a, aq = kp.alpha, report.alpha_q
    ok = True
    for x in nullity(report.alpha_p).basis:
        jx = kp.J(x)
        axx, ajj, axj = a(x, x), a(jx, jx), a(x, jx)
        k = sum(u * v for u, v in zip(axx, ajj)) - sum(u * u for u in axj)
        qxx, qxj = aq(x, x), aq(x, jx)
        rhs = -sum(u * u for u in qxx) - sum(u * u for u in qxj)
        if k != rhs or k > 0:
            ok = False
    return ok


# ---------------------------------------------------------------------------
# full analysis


@dataclass
class Analysis:
    verdict: str
    report: StructureReport | None
    checks: dict[str, bool]
    invariants: dict
    seed: int
    timing: float
    oracle_agreement: bool | None = None
    messages: list[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]


def _identity_checks(kp: KaehlerPoint, seed: int, inv: dict) -> dict[str, bool]:
    """Identities that hold for every instance satisfying their local hypotheses."""
    c: dict[str, bool] = {}
    c["split_space"] = kp.split.invariants_hold()
    c["gamma_nullity_intersection"] = kaehler.nullity_intersection_identity(kp)
    gflat = is_flat(kp.gamma)
    bflat = is_flat(kp.beta)
    tflat = is_flat(kp.theta)
    inv.update(gamma_flat=gflat, beta_flat=bflat, theta_flat=tflat)
    c["gamma_symmetric_iff_pluriharmonic"] = kp.gamma.symmetric == kp.is_pluriharmonic()
    if gflat:
        c["gamma_flat_implies_theta_flat"] = tflat
    for name in ("gamma", "beta", "theta"):
        props = kaehler.even_properties(getattr(kp, name), kp)
        for key, val in props.items():
            c[f"even_{name}_{key}"] = val
    kaehler.pluriharmonic_nullity(kp)
    c["pluriharmonic_nullity"] = True
    if bflat:
        cert = kappa(kp.beta, seed)
        inv["kappa_beta"] = cert.kappa
        c["beta_nullity_kappa"] = nullity(kp.beta).dim == kp.dim - cert.kappa
    compat = kaehler.check_compatibility(kp)
    inv["compatible"] = compat
    if compat:
        sb = kaehler.beta_image_identities(kp)
        inv["s_beta"] = sb.s
        c["beta_image_split"] = sb.image_split
        c["beta_nullity_first_space"] = sb.nullity_match
        tp = kaehler.theta_parts_flat(kp)
        if tp is not None:
            c["theta_parts_flat"] = tp
    # pluriharmonic bound on theta and on gamma when alpha is pluriharmonic
    t = kp.split.T
    c["pluri_bound_theta"] = pluriharmonic_bound_check(kp.theta, kp.J, t, seed)
    if kp.is_pluriharmonic():
        c["pluri_bound_gamma"] = pluriharmonic_bound_check(kp.gamma, kp.J, t, seed)
    if compat:
        t1, t2 = kaehler.theta_parts(kp)
        c["pluri_bound_theta_1"] = pluriharmonic_bound_check(t1, kp.J, t, seed)
        c["pluri_bound_theta_2"] = pluriharmonic_bound_check(t2, kp.J, t, seed)
    if bflat and compat and inv.get("kappa_beta") == 2 * kp.p:
        d = kaehler.diagonalize_beta(kp, seed)
        inv["diagonalization"] = d.status
        if d.status != "kappa_deficient":
            c["diagonalization"] = d.ok
    return c


def analyze(kp: KaehlerPoint, seed: int = 0, oracle: bool = False) -> Analysis:
    """Invariants, identity checks and (when the hypotheses hold) the structure pipeline."""
    start = time.perf_counter()
    inv: dict = {}
    msgs: list[str] = []
    n1 = image(kp.alpha)
    q = n1.dim
    inv["q"] = q
    nu_c = complex_relative_nullity(kp).dim
    inv["nu_c"] = nu_c
    inv["nu_gamma"] = nu_c
    try:
        checks = _identity_checks(kp, seed, inv)
    except (InvariantViolation, PreconditionError) as exc:
        msgs.append(f"identity check raised: {exc}")
        checks = {"identities": False}
        inv.setdefault("gamma_flat", is_flat(kp.gamma))
        inv.setdefault("beta_flat", is_flat(kp.beta))
        inv.setdefault("compatible", kaehler.check_compatibility(kp))
    flat_ok = inv["gamma_flat"] and inv["beta_flat"] and inv["compatible"]
    # nullity hypothesis keyed on q; the verdict's codimension gate stays on p
    hyp = 2 <= kp.p <= kp.n - 1 and nu_c < 2 * kp.n - 2 * q and flat_ok
    inv["q_within_scope"] = q <= SCOPE_LIMIT
    report = None
    if flat_ok:
        try:
            qs, jm = compute_Q(kp)
            report = split_and_bound(kp, qs, jm)
            report.checks["curvature"] = curvature_check(kp, report)
            report.checks["ell_even"] = report.q_dim % 2 == 0
        except (InvariantViolation, StructureError) as exc:
            msgs.append(f"pipeline: {exc}")
            if hyp:
                checks["pipeline"] = False
    if report is None:
        report = StructureReport(n=kp.n, p=kp.p, q=q, nu_c=nu_c)
    report.hypothesis_ok = hyp
    if hyp:
        checks.update({f"pipeline_{k}": v for k, v in report.checks.items()})
        checks["pipeline_ell_positive"] = report.q_dim > 0
        checks["pipeline_bound"] = report.bound_ok
        checks["pipeline_bound_q"] = report.bound_q_ok
    agreement = None
    if oracle:
        from .oracle import OracleSizeError, agrees

        try:
            agreement, diffs = agrees(kp, seed)
            msgs += [f"oracle: {d}" for d in diffs]
        except OracleSizeError as exc:
            msgs.append(f"oracle skipped: {exc}")
    failed = [k for k, v in checks.items() if not v]
    msgs += [f"failed check: {k}" for k in failed]
    if kp.p > SCOPE_LIMIT:
        verdict = "outside_theorem_scope"
    elif failed or agreement is False:
        verdict = "violation_candidate"
    elif not hyp:
        verdict = "hypothesis_not_met"
    else:
        verdict = "theorem_verified"
    return Analysis(verdict, report, checks, inv, seed, time.perf_counter() - start, agreement, msgs)
