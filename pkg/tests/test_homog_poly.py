import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from goursat.errors import InvalidDivisor
from goursat.homog_poly import (
    FormalSeries,
    HomogPoly,
    LineDivisor,
    divides,
    divisor_poly,
    evaluate,
    fischer_norm,
    fischer_norm_log,
    from_xy_monomials,
    laplacian,
    multiply,
    rel_error,
    restrict_to_line,
    to_xy,
    unimodular,
    xy_coefficients,
)
from goursat.scalars import EXACT, Extended, GaussianRational

from conftest import random_poly

X, Y = sp.symbols("x y", real=True)


def to_sympy(poly):
    z, zb = X + sp.I * Y, X - sp.I * Y
    m = poly.degree
    out = 0
    for k, c in enumerate(poly.coeffs):
        if isinstance(c, GaussianRational):
            cs = sp.Rational(c.re) + sp.I * sp.Rational(c.im)
        else:
            cs = sp.Rational(c.real) + sp.I * sp.Rational(c.imag)
        out += cs * z**k * zb**(m - k)
    return sp.expand(out)


def xy_poly(entries, m):
    return from_xy_monomials(entries, EXACT).term(m)


def test_frozen_xy_laplacian():
    # g = 3x^4 - 2x^3y + xy^3 + 5y^4; sympy gives the values below.
    g = xy_poly([(4, 0, 3), (3, 1, -2), (1, 3, 1), (0, 4, 5)], 4)
    lap = laplacian(g)
    assert to_xy(lap) == [(2, 0, 36), (1, 1, -6), (0, 2, 60)]
    assert to_xy(laplacian(g, 2)) == [(0, 0, 192)]


@given(st.lists(st.integers(-9, 9), min_size=6, max_size=6), st.integers(1, 2))
def test_laplacian_matches_sympy(ints, times):
    m = 5
    entries = [(i, m - i, c) for i, c in enumerate(ints)]
    poly = xy_poly(entries, m)
    ref = sum(c * X**i * Y**j for i, j, c in entries)
    for _ in range(times):
        ref = sp.diff(ref, X, 2) + sp.diff(ref, Y, 2)
    assert sp.expand(to_sympy(laplacian(poly, times)) - ref) == 0


def test_laplacian_low_degree_is_zero():
    assert laplacian(HomogPoly([1, 2])).is_zero()
    assert laplacian(HomogPoly([3])).degree == 0


def test_multiply_matches_sympy(rng):
    f = HomogPoly(EXACT.array([(1, 2), ("1/3", 0), (0, -1)]), EXACT)
    g = HomogPoly(EXACT.array([2, (0, "1/2")]), EXACT)
    assert sp.expand(to_sympy(multiply(f, g)) - to_sympy(f) * to_sympy(g)) == 0


def test_xy_round_trip(rng):
    f = random_poly(rng, 7)
    back = from_xy_monomials([(i, 7 - i, c) for i, c in enumerate(xy_coefficients(f))], N=7).term(7)
    assert rel_error(back, f) < 1e-13


def test_real_polynomials_have_conjugate_symmetry(rng):
    f = random_poly(rng, 6, real=True)
    assert f.is_real()
    assert np.allclose(np.imag(xy_coefficients(f)), 0, atol=1e-13)
    assert not HomogPoly([1j, 0, 0]).is_real()


def test_fischer_norm_gauss_hermite_small():
    # int |z|^2 e^{-|z|^2} dx dy = pi, so ||z|| = sqrt(pi).
    assert fischer_norm(HomogPoly([0, 1])) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    t, w = np.polynomial.hermite.hermgauss(20)
    W = np.outer(w, w)
    f = HomogPoly([1, 2j, -1])
    vals = np.array([[evaluate(f, a, b) for b in t] for a in t])
    assert fischer_norm(f) == pytest.approx(math.sqrt(np.sum(W * np.abs(vals) ** 2)), rel=1e-12)


def test_fischer_norm_log_large_degree():
    f = HomogPoly.monomial(300, 300, 1.0)
    with pytest.raises(OverflowError):
        fischer_norm(f)
    assert fischer_norm_log(f) == pytest.approx(0.5 * (math.log(math.pi) + math.lgamma(601)))
    assert fischer_norm_log(HomogPoly.zero(4)) == -math.inf


def test_fischer_norm_extended():
    b = Extended(40)
    f = HomogPoly(b.array([1, 0, 1]), b)
    assert float(fischer_norm(f)) == pytest.approx(math.sqrt(math.pi * 2 * 2))


def test_unimodular_exact_values():
    assert unimodular(Fraction(1), EXACT) == GaussianRational(0, 1)
    assert unimodular(Fraction(0), EXACT) == GaussianRational(-1)
    A = unimodular(Fraction(2), EXACT)
    assert A == GaussianRational(Fraction(3, 5), Fraction(4, 5))
    assert A * A.conjugate() == 1


def test_unimodular_modulus(rng):
    for a in rng.uniform(-50, 50, 1000):
        assert abs(abs(unimodular(float(a))) - 1) < 1e-14


def test_line_divisor_validation():
    with pytest.raises(InvalidDivisor):
        LineDivisor((1, 2))
    with pytest.raises(InvalidDivisor):
        LineDivisor((1, "2/2", 3))
    d = LineDivisor((0, 2, "1/2"))
    assert d.p == 2 and d.n_lines == 4
    assert d.hypothesis_warnings() and "a_1" in d.hypothesis_warnings()[0]


def test_divisor_poly_matches_sympy():
    d = LineDivisor(("1/2", -3, 2), EXACT)
    ref = sp.expand(Y * (X - sp.Rational(1, 2) * Y) * (X + 3 * Y) * (X - 2 * Y))
    assert sp.expand(to_sympy(divisor_poly(d)) - ref) == 0


def test_divisor_vanishes_on_its_lines(rng):
    d = LineDivisor((0.3, -1.7, 2.2))
    q = random_poly(rng, 5)
    u = multiply(divisor_poly(d), q)
    for j in range(d.n_lines):
        assert abs(restrict_to_line(u, d, j)) < 1e-12 * fischer_norm(u)
    assert divides(d, u)
    assert not divides(d, q)
    with pytest.raises(IndexError):
        restrict_to_line(u, d, 4)


def test_restriction_is_value_on_line(rng):
    d = LineDivisor((1.5,))
    f = random_poly(rng, 4)
    # Normalised value on x = a y at y = 1 times (a - i)^m is the true value.
    a = 1.5
    assert restrict_to_line(f, d, 1) * (a - 1j) ** 4 == pytest.approx(evaluate(f, a, 1.0))
    assert restrict_to_line(f, d, 0) == pytest.approx(evaluate(f, 1.0, 0.0))


def test_series_algebra(rng):
    s = FormalSeries((HomogPoly([1]), HomogPoly([1, 1])))
    t = s.times(s, 2)
    assert t.term(2).coeffs.tolist() == [1, 2, 1]
    assert (s - s).is_zero()
    assert s.resized(4).truncation == 4
    assert s.term(9).is_zero()
    lap = FormalSeries.from_terms([HomogPoly([0, 1, 0])], 2).laplacian()
    assert lap.term(0).coeffs[0] == 4


def test_to_xy_drops_small_terms():
    f = from_xy_monomials([(2, 0, 1.0), (0, 2, 1e-20)]).term(2)
    assert [t[:2] for t in to_xy(f, tol=1e-12)] == [(2, 0)]
