from __future__ import annotations

from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import settings

from flatform.generate import FamilySpec, gen
from flatform.kaehler import ComplexStructure, KaehlerPoint

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def standard_j(n: int) -> np.ndarray:
    return ComplexStructure.standard(n).matrix


def product_instance(blocks, sizes) -> KaehlerPoint:
    """Hypersurface product in standard coordinates.

    ``sizes[k]`` complex dimensions for factor k; ``blocks[k] = (a, b, c)`` is the
    symmetric block on the first complex plane of factor k, in normal direction k.
    """
    n = sum(sizes)
    p = len(blocks)
    t = np.zeros((2 * n, 2 * n, p), dtype=object)
    t[...] = 0
    start = 0
    for k, ((a, b, c), size) in enumerate(zip(blocks, sizes)):
        e, je = 2 * start, 2 * start + 1
        t[e, e, k] = a
        t[e, je, k] = t[je, e, k] = b
        t[je, je, k] = c
        start += size
    return KaehlerPoint.from_arrays(standard_j(n), t)


def holomorphic_instance(re, im) -> KaehlerPoint:
    """alpha = (Re B, Im B) for one complex symmetric matrix B = re + i im."""
    re = np.asarray(re)
    im = np.asarray(im)
    n = re.shape[0]
    t = np.zeros((2 * n, 2 * n, 2), dtype=object)
    units = [(1, 0), (0, 1), (-1, 0)]
    for j in range(n):
        for l in range(n):
            for s in range(2):
                for u in range(2):
                    ur, ui = units[s + u]
                    t[2 * j + s, 2 * l + u, 0] = int(ur * re[j, l] - ui * im[j, l])
                    t[2 * j + s, 2 * l + u, 1] = int(ur * im[j, l] + ui * re[j, l])
    return KaehlerPoint.from_arrays(standard_j(n), t)


# Conjugate pair of hypersurface factors over Q(sqrt 2): tangent planes spanned
# by (1, sqrt 2) and (1, -sqrt 2) in C^2, normal directions (1 + sqrt 2, 1) and
# (1 - sqrt 2, 1), block diag(1, 2) on each.  The sum is rational but the
# adapted normal directions are not.
IRRATIONAL_ALPHA = [
    [[F(1, 2), F(1, 2)], [0, 0], [F(1, 2), 0], [0, 0]],
    [[0, 0], [1, 1], [0, 0], [1, 0]],
    [[F(1, 2), 0], [0, 0], [F(1, 4), F(1, 4)], [0, 0]],
    [[0, 0], [1, 0], [0, 0], [F(1, 2), F(1, 2)]],
]


def irrational_instance() -> KaehlerPoint:
    return KaehlerPoint.from_arrays(standard_j(2), IRRATIONAL_ALPHA)


CORPUS_SHAPES = [(3, 2), (4, 2), (4, 3), (5, 2), (5, 4), (6, 3)]
CORPUS_FAMILIES = ("hypersurface_product", "holomorphic", "composition", "padded", "random_filtered")


def corpus_specs() -> list[FamilySpec]:
    specs = []
    k = 0
    for n, p in CORPUS_SHAPES:
        for fam in CORPUS_FAMILIES:
            if fam == "holomorphic" and p % 2:
                continue
            specs.append(FamilySpec(fam, n, p, 1000 + k))
            k += 1
    return specs


@pytest.fixture(scope="session")
def corpus():
    """Generated instances shared by the property and acceptance tests."""
    return [gen(s) for s in corpus_specs()]
