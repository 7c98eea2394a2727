"""Seeded families of Kaehler points satisfying the flatness hypotheses."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kaehler
from .bilinear import image, is_flat, nullity
from .errors import RetryCapExceeded
from .kaehler import ComplexStructure, KaehlerPoint
from .linalg import as_array, inverse

FAMILIES = ("hypersurface_product", "holomorphic", "composition", "padded", "random_filtered")
RETRY_CAP = 1024


@dataclass(frozen=True)
class FamilySpec:
    family: str
    n: int
    p: int
    seed: int = 0
    coefficient_bound: int = 3
    rotate: bool | None = None  # None: decided by the seed

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {', '.join(FAMILIES)}")
        if self.n < 1 or self.p < 1:
            raise ValueError("need n >= 1 and p >= 1")
        if self.coefficient_bound < 1:
            raise ValueError("coefficient_bound must be >= 1")


@dataclass
class Generated:
    kp: KaehlerPoint
    spec: FamilySpec
    meta: dict = field(default_factory=dict)


def _coeff(rng, b: int) -> int:
    v = int(rng.integers(1, b + 1))
    return v if rng.random() < 0.5 else -v


def _partition(rng, total: int, parts: int) -> list[int]:
    """Random composition of ``total`` into ``parts`` positive integers."""
    cuts = sorted(rng.choice(np.arange(1, total), size=parts - 1, replace=False)) if parts > 1 else []
    edges = [0, *map(int, cuts), total]
    return [edges[i + 1] - edges[i] for i in range(parts)]


# raw tensors in standard coordinates: J e_{2k} = e_{2k+1}


def hypersurface_tensor(rng, n: int, factors: int, b: int, dirs: list[int], p: int) -> tuple[np.ndarray, list]:
    """One rank <= 2 block per factor, on a single complex plane of that factor."""
    t = np.zeros((2 * n, 2 * n, p), dtype=object)
    t[...] = 0
    sizes = _partition(rng, n, factors)
    start = 0
    blocks = []
    for size, k in zip(sizes, dirs):
        c = start + int(rng.integers(0, size))
        a, bb, cc = _coeff(rng, b), _coeff(rng, b), _coeff(rng, b)
        e, je = 2 * c, 2 * c + 1
        t[e, e, k] = a
        t[e, je, k] = t[je, e, k] = bb
        t[je, je, k] = cc
        blocks.append({"start": start, "size": size, "plane": c, "direction": k, "block": [a, bb, cc]})
        start += size
    return t, blocks


def holomorphic_tensor(rng, n: int, pairs: int, b: int, p: int, offset: int = 0) -> np.ndarray:
    """Real and imaginary parts of complex symmetric forms B_k on C^n."""
    t = np.zeros((2 * n, 2 * n, p), dtype=object)
    t[...] = 0
    units = [(1, 0), (0, 1), (-1, 0), (0, -1)]  # i^0..i^3
    for k in range(pairs):
        re = np.zeros((n, n), dtype=int)
        im = np.zeros((n, n), dtype=int)
        for j in range(n):
            for l in range(j, n):
                re[j, l] = re[l, j] = _coeff(rng, b)
                im[j, l] = im[l, j] = _coeff(rng, b)
        for j in range(n):
            for l in range(n):
                for s in range(2):
                    for u in range(2):
                        ur, ui = units[s + u]
                        val_re = ur * re[j, l] - ui * im[j, l]
                        val_im = ur * im[j, l] + ui * re[j, l]
                        t[2 * j + s, 2 * l + u, offset + 2 * k] = val_re
                        t[2 * j + s, 2 * l + u, offset + 2 * k + 1] = val_im
    return t


def random_tensor(rng, n: int, p: int, b: int) -> np.ndarray:
    """Sparse random symmetric tensor.

    Each normal direction is active with probability 1/2 (at least one is)
    and an active direction carries a single symmetric entry pair.
    """
    t = np.zeros((2 * n, 2 * n, p), dtype=object)
    t[...] = 0
    active = [k for k in range(p) if rng.random() < 0.5] or [int(rng.integers(0, p))]
    for k in active:
        i, j = (int(v) for v in rng.integers(0, 2 * n, size=2))
        t[i, j, k] = t[j, i, k] = _coeff(rng, b)
    return t


# orthogonal mixing keeps J isometric and the normal metric Euclidean


def _signed_permutation(rng, d: int) -> np.ndarray:
    perm = rng.permutation(d)
    m = np.zeros((d, d), dtype=int)
    for i, j in enumerate(perm):
        m[i, j] = 1 if rng.random() < 0.5 else -1
    return m


def _cayley(rng, d: int) -> np.ndarray:
    """(I - K)(I + K)^{-1} for a skew K with one nonzero pair; rational orthogonal."""
    k = np.zeros((d, d), dtype=int)
    if d >= 2:
        i, j = (int(v) for v in rng.choice(d, size=2, replace=False))
        c = int(rng.integers(1, 3))
        k[i, j], k[j, i] = c, -c
    eye = np.identity(d, dtype=int)
    return as_array(eye - k) @ inverse((eye + k).tolist())


def mix(kp_j: np.ndarray, t: np.ndarray, rng, rotate: bool) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tangent change S and normal isometry R: J' = S^T J S, alpha'(X,Y) = R alpha(SX, SY)."""
    d = kp_j.shape[0]
    p = t.shape[2]
    s = as_array(_signed_permutation(rng, d))
    r = as_array(_signed_permutation(rng, p))
    if rotate:
        s = s @ _cayley(rng, d)
        r = r @ _cayley(rng, p)
    j2 = s.T @ as_array(kp_j) @ s
    t2 = np.tensordot(as_array(t), r, axes=([2], [1]))
    t2 = np.tensordot(s, t2, axes=([0], [0]))
    t2 = np.tensordot(s, t2, axes=([0], [1])).transpose(1, 0, 2)
    return j2, t2, s


def _verified(kp: KaehlerPoint) -> bool:
    return is_flat(kp.gamma) and is_flat(kp.beta) and kaehler.check_compatibility(kp)


def _attempt(spec: FamilySpec, rng) -> tuple[np.ndarray, np.ndarray, dict]:
    n, p, b = spec.n, spec.p, spec.coefficient_bound
    jstd = ComplexStructure.standard(n).matrix
    meta: dict = {}
    fam = spec.family
    if fam == "hypersurface_product":
        if n < p:
            raise ValueError("hypersurface_product needs n >= p")
        t, blocks = hypersurface_tensor(rng, n, p, b, list(range(p)), p)
        meta["expected_nu_gamma"] = 2 * n - 2 * p
        meta["blocks"] = blocks
    elif fam == "holomorphic":
        if p % 2:
            raise ValueError("holomorphic family needs even p")
        t = holomorphic_tensor(rng, n, p // 2, b, p)
        meta["expected_ell"] = int(p)
    elif fam == "composition":
        if p < 2:
            raise ValueError("composition needs p >= 2")
        p_hol = 2 if p <= 3 else 2 * int(rng.integers(1, (p - 1) // 2 + 1))
        p_hyp = p - p_hol
        if n < p_hyp:
            raise ValueError("composition needs n >= number of hypersurface factors")
        t = holomorphic_tensor(rng, n, p_hol // 2, b, p)
        if p_hyp:
            th, _ = hypersurface_tensor(rng, n, p_hyp, b, list(range(p_hol, p)), p)
            t = t + th
        meta["p_hol"] = p_hol
        meta["expected_ell"] = p_hol
    elif fam == "padded":
        pad = 1 if n >= 2 else 0
        base_n = n - pad
        base_fam = (
            "composition"
            if p >= 2 and base_n >= p + 1
            else "hypersurface_product"
            if base_n >= p
            else "holomorphic"
        )
        if base_fam == "holomorphic" and p % 2:
            raise ValueError(f"padded family cannot build a base instance with n={base_n}, p={p}")
        inner = FamilySpec(base_fam, base_n, p, spec.seed, b, rotate=False)
        jb, tb, mb = _attempt(inner, rng)
        t = np.zeros((2 * n, 2 * n, p), dtype=object)
        t[...] = 0
        t[: 2 * base_n, : 2 * base_n, :] = tb
        meta.update(mb)
        meta["base_family"] = base_fam
        meta["padding"] = [[int(i == k) for i in range(2 * n)] for k in range(2 * base_n, 2 * n)]
        jm = np.zeros((2 * n, 2 * n), dtype=object)
        jm[...] = 0
        jm[: 2 * base_n, : 2 * base_n] = jb
        jm[2 * base_n :, 2 * base_n :] = ComplexStructure.standard(pad).matrix if pad else jm[:0, :0]
        return jm, t, meta
    else:  # random_filtered
        t = random_tensor(rng, n, p, b)
    return jstd, t, meta


def gen(spec: FamilySpec) -> Generated:
    """Generate, mix coordinates, and verify; retries with successive sub-seeds."""
    tries = 0
    last = ""
    for sub in range(RETRY_CAP):
        tries += 1
        rng = np.random.default_rng([spec.seed, sub])
        j, t, meta = _attempt(spec, rng)
        rotate = bool(rng.random() < 0.5) if spec.rotate is None else spec.rotate
        j2, t2, s = mix(j, t, rng, rotate)
        kp = KaehlerPoint.from_arrays(j2, t2)
        if not _verified(kp):
            last = "flatness or compatibility failed"
            continue
        if spec.family == "hypersurface_product":
            if nullity(kp.gamma).dim != meta["expected_nu_gamma"]:
                last = "nullity differs from 2n - 2p"
                continue
        if spec.family == "composition":
            q = image(kp.alpha).dim
            nu_c = nullity(kp.gamma).dim
            if not nu_c < 2 * spec.n - 2 * q:
                last = "complex relative nullity too large"
                continue
        if "padding" in meta:
            # padding directions in the new coordinates are S^{-1} e = S^T e
            meta["padding"] = [list(s.T @ as_array(v)) for v in meta["padding"]]
        meta.update(
            family=spec.family,
            n=spec.n,
            p=spec.p,
            seed=spec.seed,
            subseed=sub,
            tries=tries,
            rotated=rotate,
        )
        return Generated(kp, spec, meta)
    raise RetryCapExceeded(
        f"{spec.family} n={spec.n} p={spec.p} seed={spec.seed}: no verified instance after {RETRY_CAP} tries",
        {"spec": spec, "tries": tries, "last_failure": last},
    )


def acceptance_rate(spec: FamilySpec, attempts: int = 200) -> float:
    """Fraction of raw random_filtered draws passing the flatness predicates."""
    ok = 0
    for sub in range(attempts):
        rng = np.random.default_rng([spec.seed, sub])
        j, t, _ = _attempt(spec, rng)
        if _verified(KaehlerPoint.from_arrays(j, t)):
            ok += 1
    return ok / attempts


def default_corpus(seed: int = 0) -> list[FamilySpec]:
    """Small mixed corpus used by the test suite and by ``fuzz`` defaults."""
    specs = []
    k = 0
    for n, p in [(3, 2), (4, 2), (4, 3), (5, 4), (6, 3)]:
        for fam in FAMILIES:
            if fam == "holomorphic" and p % 2:
                continue
            specs.append(FamilySpec(fam, n, p, seed + k))
            k += 1
    return specs

