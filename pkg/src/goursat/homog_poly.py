"""Homogeneous polynomials in the complexified basis z^k zbar^l.

A degree-m polynomial is stored densely: ``coeffs[k]`` multiplies
``z**k * zbar**(m-k)`` with ``z = x + iy``.  In this basis multiplication is a
plain convolution of coefficient arrays and the Laplacian ``4 d/dz d/dzbar``
is diagonal, which is what makes the per-degree solver cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np

from .errors import InvalidDivisor
from .scalars import BINARY64, EXACT, Backend, GaussianRational, is_exact_real, parse_rational


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class HomogPoly:
    coeffs: np.ndarray
    backend: Backend = BINARY64

    def __post_init__(self):
        c = self.coeffs
        if not isinstance(c, np.ndarray) or c.dtype != np.dtype(self.backend.dtype):
            c = self.backend.array(c)
        elif c.flags.writeable:
            c = c.copy()
        if c.ndim != 1 or c.size == 0:
            raise ValueError("a degree-m polynomial needs m+1 coefficients")
        object.__setattr__(self, "coeffs", _frozen(c))

    @classmethod
    def zero(cls, m: int, backend: Backend = BINARY64) -> "HomogPoly":
        return cls(backend.zeros(m + 1), backend)

    @classmethod
    def monomial(cls, k: int, l: int, coeff=1, backend: Backend = BINARY64) -> "HomogPoly":
        c = backend.zeros(k + l + 1)
        c[k] = backend.scalar(coeff)
        return cls(c, backend)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __len__(self):
        return self.coeffs.size

    def __getitem__(self, k):
        return self.coeffs[k]

    def coeff(self, k: int, l: int):
        """Coefficient of z^k zbar^l."""
        if k + l != self.degree:
            raise IndexError(f"({k},{l}) is not a degree-{self.degree} monomial")
        return self.coeffs[k]

    def is_zero(self) -> bool:
        return not any(bool(c) for c in self.coeffs)

    def _check(self, other: "HomogPoly"):
        if other.degree != self.degree:
            raise ValueError(f"degree mismatch: {self.degree} vs {other.degree}")

    def __add__(self, other):
        if not isinstance(other, HomogPoly):
            return NotImplemented
        self._check(other)
        return HomogPoly(self.coeffs + other.coeffs, self.backend)

    def __sub__(self, other):
        if not isinstance(other, HomogPoly):
            return NotImplemented
        self._check(other)
        return HomogPoly(self.coeffs - other.coeffs, self.backend)

    def __neg__(self):
        return HomogPoly(-self.coeffs, self.backend)

    def __mul__(self, other):
        if isinstance(other, HomogPoly):
            return multiply(self, other)
        return HomogPoly(self.coeffs * self.backend.scalar(other), self.backend)

    def __rmul__(self, other):
        return HomogPoly(self.coeffs * self.backend.scalar(other), self.backend)

    def conjugate(self) -> "HomogPoly":
        """The pointwise complex conjugate as a function of (x, y)."""
        return HomogPoly(np.array([self.backend.conj(c) for c in self.coeffs[::-1]], dtype=self.coeffs.dtype),
                         self.backend)

    def is_real(self, tol: float | None = None) -> bool:
        """True iff f_{lk} = conj(f_{kl}), i.e. f is real-valued on R^2."""
        diff = self.coeffs - self.conjugate().coeffs
        if self.backend.exact:
            return not any(bool(d) for d in diff)
        tol = self.backend.rel_tol if tol is None else tol
        scale = max((abs(c) for c in self.coeffs), default=0)
        return all(abs(d) <= tol * scale for d in diff)

    def to_backend(self, backend: Backend) -> "HomogPoly":
        return HomogPoly(backend.array(self.coeffs), backend)

    def astype_complex(self) -> np.ndarray:
        return np.array([complex(c) for c in self.coeffs], dtype=np.complex128)

    def __repr__(self):
        return f"HomogPoly(degree={self.degree}, coeffs={list(self.coeffs)!r})"


def rel_error(a: HomogPoly, b: HomogPoly) -> float:
    """max_k |a_k - b_k| / max_k |b_k| (0 when both vanish)."""
    a._check(b)
    diff = max((abs(x) for x in (a.coeffs - b.coeffs)), default=0)
    scale = max((abs(x) for x in b.coeffs), default=0)
    if scale == 0:
        return 0.0 if diff == 0 else math.inf
    return float(diff / scale)


def multiply(f: HomogPoly, g: HomogPoly) -> HomogPoly:
    return HomogPoly(np.convolve(f.coeffs, g.coeffs), f.backend)


def laplacian(poly: HomogPoly, times: int = 1) -> HomogPoly:
    """Apply the Laplacian ``times`` times.

    One application sends the coefficient of z^(k+1) zbar^(l+1) to
    4(k+1)(l+1) times itself at z^k zbar^l.
    """
    backend = poly.backend
    c = poly.coeffs
    for _ in range(times):
        m = c.size - 1
        if m < 2:
            return HomogPoly.zero(0, backend)
        k = np.arange(1, m)
        c = c[1:m] * backend.ints(4 * k * (m - k))
    return HomogPoly(np.array(c), backend)


def fischer_norm_log(poly: HomogPoly) -> float:
    """log of the Fischer norm, ``-inf`` for the zero polynomial."""
    s = poly.backend.log_abs2_sum(poly.coeffs)
    if s == -math.inf:
        return s
    return 0.5 * (math.log(math.pi) + math.lgamma(poly.degree + 1) + s)


def fischer_norm(poly: HomogPoly):
    """sqrt(pi * m! * sum |f_kl|^2), the Gaussian-weighted L2 norm.

    Returns a float (an ``mpf`` on the extended backend).  The factorial is
    taken in log space; a float result that would overflow raises
    OverflowError, in which case use :func:`fischer_norm_log`.
    """
    backend = poly.backend
    if getattr(backend, "ctx", None) is not None:
        ctx = backend.ctx
        s = sum((backend.abs2(c) for c in poly.coeffs), ctx.mpf(0))
        return ctx.sqrt(ctx.pi * ctx.factorial(poly.degree) * s)
    lg = fischer_norm_log(poly)
    if lg == -math.inf:
        return 0.0
    return math.exp(lg)


@dataclass(frozen=True, eq=False)
class LineDivisor:
    """The 2p lines y = 0 and x = a_j y, j = 1..2p-1.

    ``a`` entries given as int/float/Fraction/str are held exactly as
    Fractions; ``mpf`` entries (irrational slopes) are kept as they are.
    """

    a: tuple
    backend: Backend = BINARY64

    def __post_init__(self):
        vals = []
        for v in self.a:
            vals.append(parse_rational(v) if is_exact_real(v) else v)
        if len(vals) % 2 != 1:
            raise InvalidDivisor(f"need 2p-1 slopes, got {len(vals)}")
        for i in range(len(vals)):
            for j in range(i):
                if vals[i] == vals[j]:
                    raise InvalidDivisor(f"slopes a_{j + 1} and a_{i + 1} coincide ({vals[i]})")
        object.__setattr__(self, "a", tuple(vals))
        object.__setattr__(self, "A", tuple(unimodular(v, self.backend) for v in vals))

    @property
    def p(self) -> int:
        return (len(self.a) + 1) // 2

    @property
    def n_lines(self) -> int:
        return 2 * self.p

    def line_values(self):
        """A_0 = 1 for y = 0 followed by A_1..A_{2p-1}."""
        return (self.backend.one,) + self.A

    def with_backend(self, backend: Backend) -> "LineDivisor":
        return LineDivisor(self.a, backend)

    def hypothesis_warnings(self) -> list[str]:
        out = []
        for j, v in enumerate(self.a, 1):
            if v == 0:
                out.append(f"a_{j} = 0: zero slopes are accepted but usually excluded")
        return out

    def a_strings(self) -> list[str]:
        out = []
        for v in self.a:
            out.append(str(v) if isinstance(v, Fraction) else mpmath.nstr(v, 30))
        return out

    def __repr__(self):
        return f"LineDivisor(p={self.p}, a={self.a_strings()}, backend={self.backend.describe()})"


def unimodular(a, backend: Backend = BINARY64):
    """A(a) = (a + i)/(a - i), computed exactly when a is rational."""
    if isinstance(a, Fraction):
        d = a * a + 1
        return backend.scalar(GaussianRational((a * a - 1) / d, 2 * a / d))
    ar = backend.real(a)
    num = backend.scalar(ar) + backend.i
    den = backend.scalar(ar) - backend.i
    return num / den


def _linear_factor(a, backend: Backend) -> np.ndarray:
    """x - a*y in the z-basis: ((1 - ia)/2) zbar + ((1 + ia)/2) z."""
    half = backend.scalar(Fraction(1, 2))
    ia = backend.i * backend.scalar(a)
    return backend.array([half - ia * half, half + ia * half])


def _y_factor(backend: Backend) -> np.ndarray:
    """y = (z - zbar)/(2i)."""
    half_i = backend.i * backend.scalar(Fraction(1, 2))
    return backend.array([half_i, -half_i])


def divisor_poly(d: LineDivisor) -> HomogPoly:
    """P_a = y * prod_j (x - a_j y), degree 2p.

    In binary64 the product is formed exactly from the stored slopes and
    rounded once; repeated rounding in the convolution can cost several
    digits in the dense operator built from P_a.
    """
    backend = d.backend
    work = EXACT if backend is BINARY64 else backend
    c = _y_factor(work)
    for a in d.a:
        c = np.convolve(c, _linear_factor(a, work))
    if work is not backend:
        c = backend.array([complex(v) for v in c])
    return HomogPoly(c, backend)


def restrict_to_line(poly: HomogPoly, d: LineDivisor, line: int):
    """Normalised restriction of a homogeneous polynomial to one line.

    Line 0 is y = 0, where the value is ``sum_k f_k`` times x^m.  Line j >= 1
    is x = a_j y; substituting z = (a_j + i)y, zbar = (a_j - i)y and dividing
    by (a_j - i)^m leaves ``sum_k f_k A_j^k``.
    """
    if not 0 <= line < d.n_lines:
        raise IndexError(f"line index {line} out of range for {d.n_lines} lines")
    c = poly.coeffs
    if line == 0:
        return np.sum(c) if c.dtype != object else sum(c[1:], c[0])
    A = d.A[line - 1]
    acc = c[-1]
    for k in range(c.size - 2, -1, -1):
        acc = acc * A + c[k]
    return acc


@dataclass(frozen=True, eq=False)
class FormalSeries:
    """Truncated homogeneous expansion; ``terms[m]`` has degree m."""

    terms: tuple
    backend: Backend = BINARY64

    def __post_init__(self):
        terms = tuple(self.terms)
        for m, t in enumerate(terms):
            if t.degree != m:
                raise ValueError(f"term {m} has degree {t.degree}")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def zeros(cls, N: int, backend: Backend = BINARY64) -> "FormalSeries":
        return cls(tuple(HomogPoly.zero(m, backend) for m in range(N + 1)), backend)

    @classmethod
    def from_terms(cls, terms: dict | Sequence, N: int | None = None, backend: Backend | None = None):
        """Build from ``{degree: HomogPoly}`` or a list, zero-filling gaps."""
        if not isinstance(terms, dict):
            terms = {t.degree: t for t in terms}
        if backend is None:
            backend = next(iter(terms.values())).backend if terms else BINARY64
        if N is None:
            N = max(terms, default=0)
        out = [terms[m] if m in terms else HomogPoly.zero(m, backend) for m in range(N + 1)]
        return cls(tuple(out), backend)

    @property
    def truncation(self) -> int:
        return len(self.terms) - 1

    def __getitem__(self, m: int) -> HomogPoly:
        return self.terms[m]

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def term(self, m: int) -> HomogPoly:
        """Term of degree m, zero beyond the truncation."""
        if m < len(self.terms):
            return self.terms[m]
        return HomogPoly.zero(m, self.backend)

    def resized(self, N: int) -> "FormalSeries":
        return FormalSeries(tuple(self.term(m) for m in range(N + 1)), self.backend)

    def is_zero(self) -> bool:
        return all(t.is_zero() for t in self.terms)

    def __add__(self, other: "FormalSeries"):
        N = max(self.truncation, other.truncation)
        return FormalSeries(tuple(self.term(m) + other.term(m) for m in range(N + 1)), self.backend)

    def __sub__(self, other: "FormalSeries"):
        N = max(self.truncation, other.truncation)
        return FormalSeries(tuple(self.term(m) - other.term(m) for m in range(N + 1)), self.backend)

    def __neg__(self):
        return FormalSeries(tuple(-t for t in self.terms), self.backend)

    def scale(self, s) -> "FormalSeries":
        return FormalSeries(tuple(t * s for t in self.terms), self.backend)

    def times(self, other: "FormalSeries", N: int | None = None) -> "FormalSeries":
        """Cauchy product truncated at degree N."""
        N = min(self.truncation, other.truncation) if N is None else N
        out = []
        for m in range(N + 1):
            acc = HomogPoly.zero(m, self.backend)
            for j in range(m + 1):
                a, b = self.term(j), other.term(m - j)
                if a.is_zero() or b.is_zero():
                    continue
                acc = acc + multiply(a, b)
            out.append(acc)
        return FormalSeries(tuple(out), self.backend)

    def laplacian(self, times: int = 1) -> "FormalSeries":
        """Term m of the result is the iterated Laplacian of term m + 2*times."""
        N = self.truncation - 2 * times
        return FormalSeries(tuple(laplacian(self.terms[m + 2 * times], times) for m in range(N + 1)),
                            self.backend)

    def to_backend(self, backend: Backend) -> "FormalSeries":
        return FormalSeries(tuple(t.to_backend(backend) for t in self.terms), backend)

    def __repr__(self):
        return f"FormalSeries(N={self.truncation}, backend={self.backend.describe()})"


def divides(d: LineDivisor, s: FormalSeries | HomogPoly, tol: float | None = None) -> bool:
    """Whether P_a divides the series, tested by vanishing on every line.

    A homogeneous polynomial is divisible by the product of 2p distinct
    linear forms iff it vanishes on each of the lines, so each term is
    checked against ``tol * fischer_norm(term)`` (exact zero on the exact
    backend).
    """
    terms = [s] if isinstance(s, HomogPoly) else s.terms
    exact = d.backend.exact
    tol = d.backend.rel_tol if tol is None else tol
    for t in terms:
        if t.is_zero():
            continue
        bound = None if exact else tol * fischer_norm(t)
        for j in range(d.n_lines):
            r = restrict_to_line(t, d, j)
            if exact:
                if r != 0:
                    return False
            elif abs(r) > bound:
                return False
    return True


def evaluate(s: FormalSeries | HomogPoly, x, y):
    """Partial sum of the series at the real point (x, y)."""
    terms = [s] if isinstance(s, HomogPoly) else s.terms
    if not terms:
        return 0
    backend = terms[0].backend
    xr, yr = backend.real(x), backend.real(y)
    z = backend.scalar(xr) + backend.i * backend.scalar(yr)
    zb = backend.conj(z)
    N = max(t.degree for t in terms)
    zp = [backend.one]
    zbp = [backend.one]
    for _ in range(N):
        zp.append(zp[-1] * z)
        zbp.append(zbp[-1] * zb)
    total = backend.zero
    for t in terms:
        m = t.degree
        for k, c in enumerate(t.coeffs):
            if c:
                total = total + c * zp[k] * zbp[m - k]
    return total


# -- basis conversion -------------------------------------------------------

def _powers(base: np.ndarray, n: int, backend: Backend) -> list[np.ndarray]:
    out = [backend.array([1])]
    for _ in range(n):
        out.append(np.convolve(out[-1], base))
    return out


def from_xy_monomials(entries: Iterable, backend: Backend = BINARY64, N: int | None = None) -> FormalSeries:
    """Convert ``[(i, j, coeff), ...]`` meaning sum coeff x^i y^j to a series.

    Uses x = (z + zbar)/2 and y = (z - zbar)/(2i).
    """
    entries = list(entries)
    for i, j, _ in entries:
        if i < 0 or j < 0:
            raise ValueError(f"negative exponent in ({i}, {j})")
    top = max((i + j for i, j, _ in entries), default=0)
    N = top if N is None else N
    half = backend.scalar(Fraction(1, 2))
    xb = backend.array([half, half])
    yb = _y_factor(backend)
    xp = _powers(xb, top, backend)
    yp = _powers(yb, top, backend)
    acc = [backend.zeros(m + 1) for m in range(N + 1)]
    for i, j, c in entries:
        if i + j > N:
            continue
        acc[i + j] = acc[i + j] + np.convolve(xp[i], yp[j]) * backend.scalar(c)
    return FormalSeries(tuple(HomogPoly(a, backend) for a in acc), backend)


def xy_coefficients(poly: HomogPoly) -> np.ndarray:
    """Dense xy coefficients: entry i multiplies x^i y^(m-i)."""
    backend = poly.backend
    m = poly.degree
    zx = backend.array([backend.i, 1])            # z = x + iy, index = power of x
    zbx = backend.array([-backend.i, 1])          # zbar = x - iy
    zp = _powers(zx, m, backend)
    zbp = _powers(zbx, m, backend)
    out = backend.zeros(m + 1)
    for k, c in enumerate(poly.coeffs):
        if c:
            out = out + np.convolve(zp[k], zbp[m - k]) * c
    return out


def to_xy(poly: HomogPoly, tol: float = 0.0) -> list[tuple[int, int, object]]:
    """Nonzero (i, j, coeff) triples of the polynomial in powers of x and y.

    Entries with ``|coeff| <= tol * max|coeff|`` are dropped; the default
    keeps everything that is not exactly zero.
    """
    c = xy_coefficients(poly)
    m = poly.degree
    scale = max((abs(v) for v in c), default=0)
    out = []
    for i in range(m, -1, -1):
        v = c[i]
        if not v or abs(v) <= tol * scale:
            continue
        out.append((i, m - i, v))
    return out
