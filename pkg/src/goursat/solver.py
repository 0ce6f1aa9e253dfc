"""Series solver for (Delta^p + c) u = f with P_a | (u - g).

The data is first reduced to g = 0 by writing u = g + P_a q.  Writing
u_n = P_a q_{n-2p} for the degree-n part, the equation becomes one Fischer
problem per degree,

    Delta^p(P_a q_m) = f_m - sum_{k=0}^{m-2p} c_{m-k-2p} P_a q_k,

so q_m is found degree by degree.  Arrays in a :class:`SolveReport` are
indexed by the source degree m (``per_degree[m]`` produced ``u`` at degree
m + 2p).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AllZeroSeries, DegenerateDivisor
from .fischer import DegreeSolveRecord, solve_degree, stability_diagnostic
from .homog_poly import (
    FormalSeries,
    HomogPoly,
    LineDivisor,
    divisor_poly,
    fischer_norm_log,
    laplacian,
    multiply,
)


@dataclass(frozen=True)
class GoursatProblem:
    divisor: LineDivisor
    f: FormalSeries
    c: FormalSeries | None = None
    g: FormalSeries | None = None
    truncation: int | None = None

    def __post_init__(self):
        b = self.divisor.backend
        N = self.truncation
        if N is None:
            N = self.f.truncation
        if N < 2 * self.divisor.p:
            raise ValueError(f"truncation N={N} is below 2p={2 * self.divisor.p}")
        object.__setattr__(self, "truncation", N)
        object.__setattr__(self, "f", self.f.resized(N))
        object.__setattr__(self, "c", (self.c or FormalSeries.zeros(0, b)).resized(N))
        object.__setattr__(self, "g", (self.g or FormalSeries.zeros(0, b)).resized(N))

    @property
    def p(self) -> int:
        return self.divisor.p

    @property
    def backend(self):
        return self.divisor.backend

    def has_zero_c(self) -> bool:
        return self.c.is_zero()


@dataclass
class SolveReport:
    u: FormalSeries
    q: FormalSeries
    per_degree: list[DegreeSolveRecord]
    residual_norms: list[float]
    radius_estimate: float
    status: str = "solved"
    degenerate_degree: int | None = None
    diagnostics: list[float] = field(default_factory=list)

    @property
    def solved(self) -> bool:
        return self.status == "solved"


def _apply_operator(u: FormalSeries, c: FormalSeries, p: int, m: int, backend) -> HomogPoly:
    """(Delta^p u + c u) at degree m."""
    out = laplacian(u.term(m + 2 * p), p)
    for j in range(m + 1):
        cj, uj = c.term(m - j), u.term(j)
        if cj.is_zero() or uj.is_zero():
            continue
        out = out + multiply(cj, uj)
    return out


def reduce_data(prob: GoursatProblem) -> GoursatProblem:
    """Replace f by f - (Delta^p + c) g and set g = 0."""
    if prob.g.is_zero():
        return prob
    b = prob.backend
    N, p = prob.truncation, prob.p
    terms = []
    for m in range(N + 1):
        if m <= N - 2 * p:
            terms.append(prob.f.term(m) - _apply_operator(prob.g, prob.c, p, m, b))
        else:
            # Delta^p g_{m+2p} lies beyond the truncation; these degrees never feed u.
            cg = HomogPoly.zero(m, b)
            for j in range(m + 1):
                cg = cg + multiply(prob.c.term(m - j), prob.g.term(j))
            terms.append(prob.f.term(m) - cg)
    return GoursatProblem(prob.divisor, FormalSeries(tuple(terms), b), prob.c,
                          FormalSeries.zeros(N, b), N)


def _neumaier(parts: list[np.ndarray]) -> np.ndarray:
    """Compensated elementwise sum of complex128 arrays."""
    s = np.zeros_like(parts[0])
    comp = np.zeros_like(parts[0])
    for x in parts:
        for attr in ("real", "imag"):
            sv, cv, xv = getattr(s, attr), getattr(comp, attr), getattr(x, attr)
            t = sv + xv
            big = np.abs(sv) >= np.abs(xv)
            cv += np.where(big, (sv - t) + xv, (xv - t) + sv)
            sv[...] = t
    return s + comp


def _assemble(prob, records, reduced_prob, status="solved", bad=None) -> SolveReport:
    b = prob.backend
    N, p = prob.truncation, prob.p
    q_terms = {rec.m: rec.q for rec in records}
    u = prob.g
    u_terms = list(u.terms)
    for rec in records:
        u_terms[rec.m + 2 * p] = u_terms[rec.m + 2 * p] + rec.u
    u = FormalSeries(tuple(u_terms), b)
    q = FormalSeries.from_terms(q_terms, N=max(N - 2 * p, 0), backend=b)
    res = residual_values(u, prob, upto=(bad - 1) if bad is not None else None)
    try:
        window = max(1, len(records) // 4)
        radius = radius_estimate(u, window)
    except AllZeroSeries:
        radius = math.inf
    diag = [stability_diagnostic(rec, prob.divisor) for rec in records]
    return SolveReport(u=u, q=q, per_degree=list(records), residual_norms=res, radius_estimate=radius,
                       status=status, degenerate_degree=bad, diagnostics=diag)


def solve_homogeneous(prob: GoursatProblem) -> SolveReport:
    """Solve Delta^p u = f, P_a | (u - g): every degree independently."""
    if not prob.has_zero_c():
        raise ValueError("solve_homogeneous needs c = 0; use solve_perturbed")
    red = reduce_data(prob)
    records = []
    for m in range(prob.truncation - 2 * prob.p + 1):
        try:
            records.append(solve_degree(red.f.term(m), prob.divisor))
        except DegenerateDivisor as exc:
            exc.report = _assemble(prob, records, red, status=f"degenerate_at({m})", bad=m)
            raise
    return _assemble(prob, records, red)


def solve_perturbed(prob: GoursatProblem) -> SolveReport:
    """Solve (Delta^p + c) u = f, P_a | (u - g) by the degree recursion."""
    b = prob.backend
    p = prob.p
    d = prob.divisor
    P = divisor_poly(d)
    red = reduce_data(prob)
    c = prob.c
    records: list[DegreeSolveRecord] = []
    Pq: list[HomogPoly] = []
    for m in range(prob.truncation - 2 * p + 1):
        rhs = red.f.term(m)
        if m >= 2 * p:
            parts = []
            for k in range(m - 2 * p + 1):
                ck = c.term(m - k - 2 * p)
                if ck.is_zero() or Pq[k].is_zero():
                    continue
                parts.append(multiply(ck, Pq[k]).coeffs)
            if parts:
                if b.dtype is object:
                    acc = parts[0]
                    for x in parts[1:]:
                        acc = acc + x
                else:
                    acc = _neumaier(parts)
                rhs = rhs - HomogPoly(acc, b)
        try:
            rec = solve_degree(rhs, d)
        except DegenerateDivisor as exc:
            exc.report = _assemble(prob, records, red, status=f"degenerate_at({m})", bad=m)
            raise
        records.append(rec)
        Pq.append(multiply(P, rec.q))
    return _assemble(prob, records, red)


def solve(prob: GoursatProblem) -> SolveReport:
    return solve_homogeneous(prob) if prob.has_zero_c() else solve_perturbed(prob)


def radius_estimate(s: FormalSeries, window: int) -> float:
    """Empirical radius: min over the last ``window`` degrees of
    (sqrt(k!)/||s_k||)^(1/k).

    A series in A(B_rho) has ||s_k|| <= B rho^-k sqrt(k!), so this is a
    proxy from below for the radius of convergence.  Zero terms are skipped;
    a nonzero series whose window is all zero (a polynomial) gives +inf.
    """
    N = s.truncation
    if window < 1 or window > N:
        raise ValueError(f"window must be in [1, {N}]")
    if s.is_zero():
        raise AllZeroSeries("series is identically zero")
    best = math.inf
    for k in range(N - window + 1, N + 1):
        if k == 0:
            continue
        ln = fischer_norm_log(s.terms[k])
        if ln == -math.inf:
            continue
        best = min(best, math.exp((0.5 * math.lgamma(k + 1) - ln) / k))
    return best


def residual_values(u: FormalSeries, prob: GoursatProblem, upto: int | None = None,
                    relative: bool = True) -> list[float]:
    """Per-degree Fischer norm of (Delta^p u + c u - f)_m, m <= N - 2p.

    With ``relative`` each entry is divided by the largest of the norms of
    f_m, (Delta^p u)_m and (c u)_m.
    """
    b = prob.backend
    p = prob.p
    top = prob.truncation - 2 * p if upto is None else upto
    out = []
    for m in range(top + 1):
        lap = laplacian(u.term(m + 2 * p), p)
        cu = HomogPoly.zero(m, b)
        for j in range(m + 1):
            cj, uj = prob.c.term(m - j), u.term(j)
            if cj.is_zero() or uj.is_zero():
                continue
            cu = cu + multiply(cj, uj)
        fm = prob.f.term(m)
        r = lap + cu - fm
        lr = fischer_norm_log(r)
        if lr == -math.inf:
            out.append(0.0)
            continue
        if relative:
            scale = max(fischer_norm_log(fm), fischer_norm_log(lap), fischer_norm_log(cu))
            out.append(math.exp(lr - scale))
        else:
            out.append(math.exp(lr))
    return out


def residual(report: SolveReport, prob: GoursatProblem, relative: bool = True) -> list[float]:
    upto = None if report.degenerate_degree is None else report.degenerate_degree - 1
    return residual_values(report.u, prob, upto=upto, relative=relative)
