"""Scalar backends.

Every polynomial and matrix in the package is stored as a 1-D or 2-D numpy
array whose element type is decided by a :class:`Backend`:

* ``binary64`` -- ``complex128`` arrays, the default.
* ``extended(digits)`` -- object arrays of :mod:`mpmath` ``mpc`` values bound
  to a private context, so the working precision never leaks into the global
  ``mpmath.mp`` state.
* ``exact`` -- object arrays of :class:`GaussianRational`.  Because
  ``A(a) = (a+i)/(a-i)`` is a Gaussian rational for every rational slope
  ``a``, this backend solves rational problems with no rounding at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import mpmath
import numpy as np


def parse_rational(value) -> Fraction:
    """Parse an exact real input: int, Fraction, float, or a string such as
    ``"3/7"``, ``"-0.125"`` or ``"1e-11"``."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, (float, np.floating)):
        return Fraction(float(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    raise TypeError(f"not an exact real: {value!r}")


def is_exact_real(value) -> bool:
    return isinstance(value, (int, np.integer, Fraction, str, float, np.floating)) and not isinstance(value, bool)


@dataclass(frozen=True)
class GaussianRational:
    """A complex number whose real and imaginary parts are Fractions."""

    re: Fraction
    im: Fraction = Fraction(0)

    def __post_init__(self):
        if not isinstance(self.re, Fraction):
            object.__setattr__(self, "re", Fraction(self.re))
        if not isinstance(self.im, Fraction):
            object.__setattr__(self, "im", Fraction(self.im))

    @classmethod
    def coerce(cls, other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, np.integer, Fraction)):
            return cls(Fraction(other))
        if isinstance(other, complex) and other.real.is_integer() and other.imag.is_integer():
            return cls(Fraction(int(other.real)), Fraction(int(other.imag)))
        return None

    def __add__(self, other):
        o = self.coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self.coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self.coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self.coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self.coerce(other)
        if o is None:
            return NotImplemented
        n = o.abs2()
        if n == 0:
            raise ZeroDivisionError("division by exact zero")
        num = self * o.conjugate()
        return GaussianRational(num.re / n, num.im / n)

    def __rtruediv__(self, other):
        o = self.coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, n: int):
        if not isinstance(n, (int, np.integer)):
            return NotImplemented
        return int_power(self, int(n), GaussianRational(Fraction(1)))

    def __eq__(self, other):
        o = self.coerce(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __abs__(self) -> float:
        return math.sqrt(self.abs2())

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        return f"({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i)"


def int_power(x, n: int, one):
    """x**n by repeated squaring (n >= 0)."""
    if n < 0:
        return int_power(one / x, -n, one)
    result = one
    base = x
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


class Backend:
    """Scalar contract shared by all polynomial and linear-algebra code."""

    name: str
    dtype: object
    exact: bool = False

    def scalar(self, value):
        raise NotImplementedError

    def real(self, value):
        """Convert a real input (possibly an exact string/Fraction)."""
        raise NotImplementedError

    @property
    def zero(self):
        return self.scalar(0)

    @property
    def one(self):
        return self.scalar(1)

    @property
    def i(self):
        return self.scalar((0, 1))

    def zeros(self, n: int) -> np.ndarray:
        if self.dtype is object:
            out = np.empty(n, dtype=object)
            z = self.zero
            for k in range(n):
                out[k] = z
            return out
        return np.zeros(n, dtype=self.dtype)

    def array(self, values) -> np.ndarray:
        values = list(values)
        if self.dtype is object:
            out = np.empty(len(values), dtype=object)
            for k, v in enumerate(values):
                out[k] = self.scalar(v)
            return out
        return np.array([self.scalar(v) for v in values], dtype=self.dtype)

    def ints(self, values) -> np.ndarray:
        """Integer multipliers in a dtype that mixes safely with this backend."""
        values = [int(v) for v in values]
        if self.dtype is object:
            out = np.empty(len(values), dtype=object)
            out[:] = values
            return out
        return np.array(values, dtype=np.float64)

    def power(self, x, n: int):
        return int_power(x, n, self.one)

    def conj(self, x):
        return x.conjugate()

    def abs(self, x):
        return abs(x)

    def abs2(self, x):
        return (x * self.conj(x)).real

    def to_complex(self, x) -> complex:
        return complex(x)

    def log_abs2_sum(self, coeffs: np.ndarray) -> float:
        """log of sum |c_k|^2 as a float (``-inf`` for the zero vector)."""
        raise NotImplementedError

    @property
    def degeneracy_unit(self) -> float:
        """Multiplier of (2p)! below which a determinant counts as zero."""
        raise NotImplementedError

    @property
    def rel_tol(self) -> float:
        """Default relative tolerance for vanishing checks."""
        raise NotImplementedError

    @property
    def division_tol(self) -> float:
        """Relative remainder allowed when dividing by P_a.

        Looser than ``rel_tol``: back-substitution error grows when two lines
        nearly coincide even though the dividend vanishes on them to roundoff.
        """
        return self.rel_tol

    def describe(self) -> str:
        return self.name

    def __repr__(self):
        return f"<Backend {self.describe()}>"


class Binary64(Backend):
    name = "binary64"
    dtype = np.complex128

    def scalar(self, value):
        if isinstance(value, tuple):
            re, im = value
            return complex(float(self.real(re)), float(self.real(im)))
        if isinstance(value, GaussianRational):
            return complex(value)
        if isinstance(value, (str, Fraction)):
            return complex(float(parse_rational(value)))
        if isinstance(value, (mpmath.mpf, mpmath.mpc)):
            return complex(value)
        return complex(value)

    def real(self, value):
        if isinstance(value, (str, Fraction)):
            return float(parse_rational(value))
        return float(value)

    def conj(self, x):
        return np.conj(x)

    def abs2(self, x):
        return float(x.real * x.real + x.imag * x.imag)

    def log_abs2_sum(self, coeffs):
        c = np.asarray(coeffs, dtype=np.complex128)
        scale = float(np.max(np.abs(c))) if c.size else 0.0
        if scale == 0.0:
            return -math.inf
        s = float(np.sum(np.abs(c / scale) ** 2))
        return 2.0 * math.log(scale) + math.log(s)

    @property
    def degeneracy_unit(self):
        return 1e-12

    @property
    def rel_tol(self):
        return 1e-9

    @property
    def division_tol(self):
        return 1e-6


class Extended(Backend):
    """Software complex arithmetic at a fixed number of decimal digits."""

    dtype = object

    def __init__(self, digits: int = 50):
        if digits < 17:
            raise ValueError("extended precision needs at least 17 digits")
        self.digits = int(digits)
        self.ctx = mpmath.MPContext()
        self.ctx.dps = self.digits

    @property
    def name(self):
        return "extended"

    def describe(self):
        return f"extended({self.digits})"

    def _real(self, value):
        ctx = self.ctx
        if isinstance(value, (str, Fraction)) or (isinstance(value, Rational) and not isinstance(value, int)):
            q = parse_rational(value)
            return ctx.mpf(q.numerator) / q.denominator
        if isinstance(value, mpmath.mpf) or hasattr(value, "_mpf_"):
            return ctx.mpf(value)
        return ctx.mpf(value)

    def scalar(self, value):
        ctx = self.ctx
        if isinstance(value, tuple):
            re, im = value
            return ctx.mpc(self._real(re), self._real(im))
        if isinstance(value, GaussianRational):
            return ctx.mpc(self._real(value.re), self._real(value.im))
        if hasattr(value, "_mpc_"):
            return ctx.mpc(value)
        if isinstance(value, complex):
            return ctx.mpc(value.real, value.imag)
        return ctx.mpc(self._real(value))

    def real(self, value):
        return self._real(value)

    def conj(self, x):
        return x.conjugate()

    def abs2(self, x):
        return x.real * x.real + x.imag * x.imag

    def log_abs2_sum(self, coeffs):
        s = self.ctx.mpf(0)
        for c in coeffs:
            s += c.real * c.real + c.imag * c.imag
        if s == 0:
            return -math.inf
        return float(self.ctx.log(s))

    @property
    def degeneracy_unit(self):
        return 10.0 ** -(self.digits - 4)

    @property
    def rel_tol(self):
        return 10.0 ** -(self.digits // 2 + 2)

    @property
    def division_tol(self):
        return 10.0 ** -(self.digits // 2)

    def __eq__(self, other):
        return isinstance(other, Extended) and other.digits == self.digits

    def __hash__(self):
        return hash(("extended", self.digits))


class Exact(Backend):
    name = "exact"
    dtype = object
    exact = True

    def scalar(self, value):
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, tuple):
            re, im = value
            return GaussianRational(parse_rational(re), parse_rational(im))
        if isinstance(value, complex):
            return GaussianRational(Fraction(value.real), Fraction(value.imag))
        return GaussianRational(parse_rational(value))

    def real(self, value):
        return parse_rational(value)

    def abs2(self, x):
        return x.abs2()

    def log_abs2_sum(self, coeffs):
        s = sum((c.abs2() for c in coeffs), Fraction(0))
        if s == 0:
            return -math.inf
        return math.log(s.numerator) - math.log(s.denominator)

    @property
    def degeneracy_unit(self):
        return 0.0

    @property
    def rel_tol(self):
        return 0.0


BINARY64 = Binary64()
EXACT = Exact()


def get_backend(choice=None) -> Backend:
    """Resolve a precision selector.

    Accepts a Backend, ``None``/``"binary64"``, ``"exact"``, an int number of
    decimal digits (<= 16 means binary64), ``"extended(50)"``, or
    ``{"extended": 50}``.
    """
    if choice is None or isinstance(choice, Backend):
        return choice or BINARY64
    if isinstance(choice, dict):
        if "extended" in choice:
            return Extended(int(choice["extended"]))
        raise ValueError(f"unknown precision {choice!r}")
    if isinstance(choice, (int, np.integer)):
        return BINARY64 if choice <= 16 else Extended(int(choice))
    s = str(choice).strip().lower()
    if s in ("binary64", "double", "float64", ""):
        return BINARY64
    if s in ("exact", "rational", "gaussian"):
        return EXACT
    if s.startswith("extended"):
        digits = s[len("extended"):].strip("()[]: ") or "50"
        return Extended(int(digits))
    if s.isdigit():
        return get_backend(int(s))
    raise ValueError(f"unknown precision {choice!r}")
