"""JSON/CSV conversion for series, scalars and per-degree tables.

Series documents look like::

    {"basis": "zzbar", "terms": [{"degree": 2, "coeffs": [[0.25, 0], "1/8", 1]}]}

In the ``zzbar`` basis ``coeffs[k]`` multiplies z^k zbar^(m-k); in the ``xy``
basis ``coeffs[i]`` multiplies x^i y^(m-i).  A coefficient is a real number,
an exact string such as ``"-3/8"``, or a ``[re, im]`` pair of either.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from fractions import Fraction

import mpmath
import numpy as np

from .homog_poly import FormalSeries, HomogPoly, from_xy_monomials, xy_coefficients
from .scalars import Backend, GaussianRational, parse_rational

BASES = ("zzbar", "xy")


def _parse_real(v):
    if isinstance(v, bool):
        raise ValueError("booleans are not coefficients")
    if isinstance(v, str):
        return parse_rational(v)
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        return v
    raise ValueError(f"cannot read coefficient {v!r}")


def parse_scalar(v, backend: Backend):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError(f"complex coefficient must be [re, im], got {v!r}")
        return backend.scalar((_parse_real(v[0]), _parse_real(v[1])))
    return backend.scalar(_parse_real(v))


def series_from_json(doc, backend: Backend, N: int | None = None) -> FormalSeries:
    """Read a series document; missing degrees are zero."""
    if doc is None:
        return FormalSeries.zeros(0 if N is None else N, backend)
    basis = doc.get("basis", "zzbar")
    if basis not in BASES:
        raise ValueError(f"unknown basis {basis!r}; expected one of {BASES}")
    terms = doc.get("terms", [])
    if not isinstance(terms, list):
        raise ValueError("'terms' must be a list")
    top = 0
    parsed = []
    for t in terms:
        m = int(t["degree"])
        coeffs = t["coeffs"]
        if m < 0 or len(coeffs) != m + 1:
            raise ValueError(f"degree {m} needs {m + 1} coefficients, got {len(coeffs)}")
        parsed.append((m, [parse_scalar(c, backend) for c in coeffs]))
        top = max(top, m)
    N = top if N is None else N
    if basis == "zzbar":
        acc = {m: HomogPoly.zero(m, backend) for m in range(N + 1)}
        for m, cs in parsed:
            if m <= N:
                acc[m] = acc[m] + HomogPoly(backend.array(cs), backend)
        return FormalSeries.from_terms(acc, N, backend)
    entries = [(i, m - i, c) for m, cs in parsed for i, c in enumerate(cs)]
    return from_xy_monomials(entries, backend, N)


def is_empty_series(doc) -> bool:
    return doc is None or not doc.get("terms")


def scalar_to_json(v, digits: int = 17):
    """[re, im] as floats, exact "p/q" strings, or decimal strings for mpc."""
    if isinstance(v, GaussianRational):
        return [str(v.re), str(v.im)]
    if hasattr(v, "_mpc_") or hasattr(v, "_mpf_"):
        return [mpmath.nstr(v.real, digits, strip_zeros=False), mpmath.nstr(v.imag, digits, strip_zeros=False)]
    c = complex(v)
    return [float_to_json(c.real), float_to_json(c.imag)]


def float_to_json(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(format(x, ".17g"))


def series_to_json(s: FormalSeries, basis: str = "zzbar", skip_zero: bool = True, digits: int = 17) -> dict:
    terms = []
    for poly in s.terms:
        if skip_zero and poly.is_zero():
            continue
        cs = poly.coeffs if basis == "zzbar" else xy_coefficients(poly)
        terms.append({"degree": poly.degree, "coeffs": [scalar_to_json(c, digits) for c in cs]})
    return {"basis": basis, "terms": terms}


def fmt(x) -> str:
    """Fixed 17-significant-digit text for CSV cells."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    if hasattr(x, "_mpf_"):
        x = float(x)
    return format(float(x), ".17g")


def write_csv(path, header: list[str], rows) -> None:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def clean(doc):
    """Recursively make a document JSON-safe (non-finite floats become strings)."""
    if isinstance(doc, dict):
        return {str(k): clean(v) for k, v in doc.items()}
    if isinstance(doc, (list, tuple)):
        return [clean(v) for v in doc]
    if isinstance(doc, (bool, np.bool_)):
        return bool(doc)
    if isinstance(doc, (int, np.integer)):
        return int(doc)
    if isinstance(doc, (float, np.floating)) or hasattr(doc, "_mpf_"):
        return float_to_json(doc)
    if isinstance(doc, Fraction):
        return str(doc)
    return doc


def dumps(doc) -> str:
    return json.dumps(clean(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, doc) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(doc))
