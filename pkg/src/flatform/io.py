"""Text instance format: JSON with exact rationals.

Scalars are integers or strings ``"a/b"`` in lowest terms.  As a
convenience, decimal numbers (``0.25`` or ``"0.25"``) are accepted and
converted exactly as written.
"""

from __future__ import annotations

import json
import re
from decimal import Decimal, InvalidOperation
from fractions import Fraction

import numpy as np

from .errors import InstanceFormatError
from .kaehler import KaehlerPoint

FORMAT_VERSION = 1
_RATIONAL = re.compile(r"^\s*([+-]?\d+)\s*/\s*(\d+)\s*$")


def scalar_out(x):
    """Fraction -> int or "a/b" (JSON-ready)."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def scalar_in(v, where: str) -> Fraction:
    if isinstance(v, bool):
        raise InstanceFormatError(where, "booleans are not scalars")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, Decimal):
        if not v.is_finite():
            raise InstanceFormatError(where, f"non-finite number {v}")
        return Fraction(v)
    if isinstance(v, str):
        m = _RATIONAL.match(v)
        if m:
            num, den = int(m.group(1)), int(m.group(2))
            if den == 0:
                raise InstanceFormatError(where, f"zero denominator in {v!r}")
            f = Fraction(num, den)
            if f.denominator != den:
                raise InstanceFormatError(where, f"{v!r} is not in lowest terms (expected {scalar_out(f)!r})")
            return f
        try:
            d = Decimal(v.strip())
        except InvalidOperation:
            raise InstanceFormatError(where, f"cannot read {v!r} as a rational number") from None
        if not d.is_finite():
            raise InstanceFormatError(where, f"non-finite number {v!r}")
        return Fraction(d)
    raise InstanceFormatError(where, f"expected a number, got {type(v).__name__}")


def _array(v, shape: tuple[int, ...], where: str) -> np.ndarray:
    out = np.empty(shape, dtype=object)

    def fill(node, idx):
        depth = len(idx)
        label = where + "".join(f"[{i}]" for i in idx)
        if depth == len(shape):
            out[idx] = scalar_in(node, label)
            return
        if not isinstance(node, list):
            raise InstanceFormatError(label, f"expected a list of length {shape[depth]}")
        if len(node) != shape[depth]:
            raise InstanceFormatError(label, f"expected length {shape[depth]}, got {len(node)}")
        for i, child in enumerate(node):
            fill(child, idx + (i,))

    fill(v, ())
    return out


def _int_field(doc: dict, key: str) -> int:
    if key not in doc:
        raise InstanceFormatError(key, "missing field")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise InstanceFormatError(key, f"expected an integer, got {v!r}")
    return v


def from_dict(doc) -> tuple[KaehlerPoint, dict]:
    if not isinstance(doc, dict):
        raise InstanceFormatError("<root>", "expected a JSON object")
    version = _int_field(doc, "version")
    if version != FORMAT_VERSION:
        raise InstanceFormatError("version", f"unsupported version {version}")
    n = _int_field(doc, "n")
    p = _int_field(doc, "p")
    if n < 1:
        raise InstanceFormatError("n", "n must be >= 1")
    if p < 1:
        raise InstanceFormatError("p", "p must be >= 1")
    for key in ("J", "alpha"):
        if key not in doc:
            raise InstanceFormatError(key, "missing field")
    jm = _array(doc["J"], (2 * n, 2 * n), "J")
    alpha = _array(doc["alpha"], (2 * n, 2 * n, p), "alpha")
    if not np.all(jm @ jm == -np.identity(2 * n, dtype=int)):
        raise InstanceFormatError("J", "J^2 != -I")
    bad = np.argwhere(alpha != alpha.transpose(1, 0, 2))
    if len(bad):
        i, j, k = (int(x) for x in bad[0])
        raise InstanceFormatError(
            f"alpha[{i}][{j}][{k}]", f"alpha is not symmetric: entry differs from alpha[{j}][{i}][{k}]"
        )
    meta = doc.get("meta", {})
    if not isinstance(meta, dict):
        raise InstanceFormatError("meta", "expected an object")
    return KaehlerPoint.from_arrays(jm, alpha), meta


def loads(text: str) -> tuple[KaehlerPoint, dict]:
    try:
        doc = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from None
    return from_dict(doc)


def load(path) -> tuple[KaehlerPoint, dict]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InstanceFormatError(str(path), exc.strerror or str(exc)) from None
    return loads(text)


def plain(obj):
    """Recursively convert numbers and containers to JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (Fraction, int, np.integer, bool, np.bool_)):
        return scalar_out(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _row(values) -> str:
    return "[" + ", ".join(json.dumps(scalar_out(x)) for x in values) + "]"


def dumps(kp: KaehlerPoint, meta: dict | None = None) -> str:
    """Deterministic text form: one matrix row (or alpha row) per line."""
    d = kp.dim
    lines = ["{", f'  "version": {FORMAT_VERSION},', f'  "n": {kp.n},', f'  "p": {kp.p},', '  "J": [']
    rows = [_row(kp.J.matrix[i]) for i in range(d)]
    lines += [f"    {r}," for r in rows[:-1]] + [f"    {rows[-1]}", "  ],", '  "alpha": [']
    arows = ["[" + ", ".join(_row(kp.alpha.tensor[i, j]) for j in range(d)) + "]" for i in range(d)]
    lines += [f"    {r}," for r in arows[:-1]] + [f"    {arows[-1]}"]
    if meta:
        lines.append("  ],")
        lines.append('  "meta": ' + json.dumps(plain(meta), sort_keys=True))
    else:
        lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def dump(kp: KaehlerPoint, path, meta: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(kp, meta))
