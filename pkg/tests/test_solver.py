import math

import numpy as np
import pytest

from goursat.errors import AllZeroSeries, DegenerateDivisor
from goursat.homog_poly import FormalSeries, HomogPoly, LineDivisor, divides, divisor_poly, from_xy_monomials, multiply
from goursat.scalars import EXACT
from goursat.solver import (
    GoursatProblem,
    radius_estimate,
    reduce_data,
    residual,
    residual_values,
    solve,
    solve_homogeneous,
    solve_perturbed,
)

from conftest import random_divisor, random_series


def const_series(N, value=1.0, backend=None):
    kw = {} if backend is None else {"backend": backend}
    b = backend or FormalSeries.zeros(0).backend
    return FormalSeries.from_terms({0: HomogPoly(b.array([value]), b)}, N, **kw)


def test_worked_example_degenerate_with_partial_report():
    prob = GoursatProblem(LineDivisor((1,)), const_series(4))
    with pytest.raises(DegenerateDivisor) as exc:
        solve_homogeneous(prob)
    rep = exc.value.report
    assert exc.value.m == 2 and rep.status == "degenerate_at(2)" and rep.degenerate_degree == 2
    assert np.allclose(rep.u.term(2).coeffs, [-0.125 - 0.125j, 0.25, -0.125 + 0.125j])


def test_worked_example_below_degenerate_degree():
    prob = GoursatProblem(LineDivisor((1,), EXACT), const_series(3, 1, EXACT))
    rep = solve(prob)
    assert rep.solved and rep.u.term(2).coeffs[1] == EXACT.scalar("1/4")
    assert rep.radius_estimate == math.inf


def test_truncation_below_2p_rejected():
    with pytest.raises(ValueError):
        GoursatProblem(LineDivisor((1, 2, 3)), const_series(3))


def test_zero_data_gives_zero(rng):
    d = random_divisor(rng, 2)
    rep = solve(GoursatProblem(d, FormalSeries.zeros(12)))
    assert rep.u.is_zero() and all(r == 0 for r in rep.residual_norms)
    assert rep.radius_estimate == math.inf


def test_reduce_data_consistent(rng):
    d = LineDivisor((2.0,))
    g = random_series(rng, 8)
    prob = GoursatProblem(d, g.laplacian().resized(8), g=g)
    red = reduce_data(prob)
    assert all(np.max(np.abs(t.coeffs)) < 1e-12 for t in red.f.terms[:7])
    rep = solve(prob)
    assert max(np.max(np.abs((rep.u - g).terms[m].coeffs)) for m in range(9)) < 1e-12
    plain = GoursatProblem(d, g)
    assert reduce_data(plain) is plain


def test_reduce_data_symbolic_oracle():
    # g = x^3 y - 2 y^4 + x^2, Delta g = 6xy - 24 y^2 + 2; f = x y.
    g = from_xy_monomials([(3, 1, 1), (0, 4, -2), (2, 0, 1)], EXACT, 4)
    f = from_xy_monomials([(1, 1, 1)], EXACT, 4)
    red = reduce_data(GoursatProblem(LineDivisor((3,), EXACT), f, g=g))
    ref = from_xy_monomials([(1, 1, -5), (0, 2, 24), (0, 0, -2)], EXACT, 4)
    for m in range(3):
        assert list(red.f.term(m).coeffs) == list(ref.term(m).coeffs)


@pytest.mark.parametrize("p", [1, 2])
def test_round_trip_homogeneous(rng, p):
    d = random_divisor(rng, p)
    N = 24
    q = random_series(rng, N - 2 * p, decay=0.8)
    P = divisor_poly(d)
    u_star = FormalSeries.from_terms({m + 2 * p: multiply(P, q.term(m)) for m in range(N - 2 * p + 1)}, N)
    f = u_star.laplacian(p).resized(N)
    rep = solve(GoursatProblem(d, f))
    for m in range(N + 1):
        scale = max(1e-300, np.max(np.abs(u_star.term(m).coeffs)))
        assert np.max(np.abs(rep.u.term(m).coeffs - u_star.term(m).coeffs)) <= 1e-9 * max(scale, 1.0)
    assert divides(d, rep.u)


def test_perturbed_with_zero_c_matches_homogeneous(rng):
    d = random_divisor(rng, 1)
    f = random_series(rng, 15)
    a = solve_homogeneous(GoursatProblem(d, f))
    b = solve_perturbed(GoursatProblem(d, f))
    for s, t in zip(a.u.terms, b.u.terms):
        assert np.allclose(s.coeffs, t.coeffs, rtol=0, atol=1e-14)


def test_perturbed_degenerate_at_2():
    prob = GoursatProblem(LineDivisor((1,)), const_series(8), c=const_series(8))
    with pytest.raises(DegenerateDivisor) as exc:
        solve_perturbed(prob)
    assert exc.value.m == 2 and exc.value.report.status == "degenerate_at(2)"


def test_degenerate_degree_independent_of_data(rng):
    d = LineDivisor((1,))
    for _ in range(4):
        prob = GoursatProblem(d, random_series(rng, 10), c=random_series(rng, 10), g=random_series(rng, 10))
        with pytest.raises(DegenerateDivisor) as exc:
            solve(prob)
        assert exc.value.m == 2


def test_linearity(rng):
    d = random_divisor(rng, 2)
    c = random_series(rng, 20, decay=0.5)
    f1, f2 = random_series(rng, 20), random_series(rng, 20)
    g1, g2 = random_series(rng, 20), random_series(rng, 20)
    u1 = solve(GoursatProblem(d, f1, c, g1)).u
    u2 = solve(GoursatProblem(d, f2, c, g2)).u
    u12 = solve(GoursatProblem(d, f1 + f2, c, g1 + g2)).u
    for m in range(21):
        ref = (u1 + u2).term(m).coeffs
        assert np.max(np.abs(u12.term(m).coeffs - ref)) <= 1e-9 * max(1.0, np.max(np.abs(ref)))


def test_residual_detects_perturbation(rng):
    d = LineDivisor((2.0,))
    f = random_series(rng, 12)
    prob = GoursatProblem(d, f)
    rep = solve(prob)
    assert max(residual(rep, prob)) < 1e-12
    terms = list(rep.u.terms)
    c = terms[7].coeffs.copy()
    c[3] += 1
    terms[7] = HomogPoly(c)
    bad = residual_values(FormalSeries(tuple(terms)), prob)
    assert [m for m, r in enumerate(bad) if r > 1e-9] == [5]
    assert len(residual(rep, prob, relative=False)) == 11


def test_radius_estimate_geometric():
    for R in (0.5, 2.0):
        s = FormalSeries.from_terms({k: HomogPoly.monomial(k, 0, R ** -k) for k in range(201)}, 200)
        assert abs(radius_estimate(s, 50) - R) <= 0.1 * R


def test_radius_estimate_edge_cases():
    poly = FormalSeries.from_terms({1: HomogPoly([1.0, 1.0])}, 10)
    assert radius_estimate(poly, 3) == math.inf
    with pytest.raises(AllZeroSeries):
        radius_estimate(FormalSeries.zeros(10), 3)
    with pytest.raises(ValueError):
        radius_estimate(poly, 11)


def test_radius_estimate_divergent_series():
    def est(N):
        s = FormalSeries.from_terms(
            {k: HomogPoly.monomial(k, 0, math.exp(math.lgamma(k + 1) - 0.5 * math.log(math.pi)))
             for k in range(N + 1)}, N)
        return radius_estimate(s, max(1, N // 4))
    vals = [est(N) for N in (20, 60, 150)]
    assert vals[0] > vals[1] > vals[2] and vals[2] < 0.05
