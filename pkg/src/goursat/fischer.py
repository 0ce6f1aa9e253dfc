"""Per-degree solution of Delta^p (P_a q) = f_m.

The structured route splits u = P_a q into a particular part
w = (z zbar)^p s with Delta^p w = f_m, and a polyharmonic part

    v = sum_{t<p} b_{p-1-t} zbar^t z^(n-t) + c_t z^t zbar^(n-t),   n = m + 2p,

whose 2p unknowns are fixed by making u vanish on the 2p lines.  That is a
2p x 2p system with matrix M_m.  The dense route builds the (m+1)x(m+1)
matrix of q -> Delta^p(P_a q) directly and is kept as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DegenerateDivisor, NotDivisible, SingularOperator
from .homog_poly import (
    HomogPoly,
    LineDivisor,
    divisor_poly,
    fischer_norm_log,
    laplacian,
    multiply,
    restrict_to_line,
)

SMALL_DIVISOR_FLAG = 1e-6


def exponents(m: int, p: int) -> list[int]:
    """Column exponents of M_m: 0..p-1 then m+p+1..m+2p."""
    return list(range(p)) + list(range(m + p + 1, m + 2 * p + 1))


def build_M(m: int, d: LineDivisor) -> np.ndarray:
    if m < 0:
        raise ValueError("m must be non-negative")
    b = d.backend
    p = d.p
    ex = exponents(m, p)
    rows = [[b.one] * (2 * p)]
    for A in d.A:
        rows.append([b.power(A, s) for s in ex])
    out = np.empty((2 * p, 2 * p), dtype=b.dtype)
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            out[i, j] = v
    return out


def build_M_reduced(m: int, d: LineDivisor) -> np.ndarray:
    """The (2p-1)x(2p-1) matrix of A_j^s - 1, s ranging over the nonzero exponents."""
    b = d.backend
    ex = exponents(m, d.p)[1:]
    n = len(ex)
    out = np.empty((n, n), dtype=b.dtype)
    for i, A in enumerate(d.A):
        for j, s in enumerate(ex):
            out[i, j] = b.power(A, s) - b.one
    return out


def det_M(m: int, d: LineDivisor):
    return linalg.det(build_M(m, d), d.backend)


def det_M_reduced(m: int, d: LineDivisor):
    return linalg.det(build_M_reduced(m, d), d.backend)


def degeneracy_threshold(d: LineDivisor) -> float:
    return d.backend.degeneracy_unit * math.factorial(2 * d.p)


def is_degenerate(det, d: LineDivisor) -> bool:
    if d.backend.exact:
        return det == 0
    return abs(det) < degeneracy_threshold(d)


def particular_w(f_m: HomogPoly, p: int) -> HomogPoly:
    """w = (z zbar)^p sum s_kl z^k zbar^l with Delta^p w = f_m.

    s_kl = f_kl / (4^p (k+1)...(k+p) (l+1)...(l+p)).
    """
    b = f_m.backend
    m = f_m.degree
    denom = []
    for k in range(m + 1):
        l = m - k
        v = 4 ** p
        for j in range(1, p + 1):
            v *= (k + j) * (l + j)
        denom.append(v)
    c = b.zeros(m + 2 * p + 1)
    if b.dtype is object:
        for k in range(m + 1):
            c[k + p] = f_m.coeffs[k] / denom[k]
    else:
        c[p:p + m + 1] = f_m.coeffs / np.array(denom, dtype=np.float64)
    return HomogPoly(c, b)


def rhs_vector(w: HomogPoly, d: LineDivisor) -> np.ndarray:
    """Minus the normalised restriction of w to each of the 2p lines."""
    b = d.backend
    out = b.zeros(d.n_lines)
    for j in range(d.n_lines):
        out[j] = -restrict_to_line(w, d, j)
    return out


def polyharmonic_v(sol: np.ndarray, n: int, p: int, backend) -> HomogPoly:
    """v from d = (c_0..c_{p-1}, b_0..b_{p-1}) at degree n = m + 2p."""
    c = backend.zeros(n + 1)
    for t in range(p):
        c[t] = c[t] + sol[t]                    # c_t z^t zbar^(n-t)
        c[n - t] = c[n - t] + sol[p + p - 1 - t]  # b_{p-1-t} z^(n-t) zbar^t
    return HomogPoly(c, backend)


def divide_by(u: HomogPoly, P: HomogPoly, tol: float | None = None) -> tuple[HomogPoly, float]:
    """Exact division u / P by back-substitution from the zbar-end.

    Returns (q, relative remainder).  Raises NotDivisible when the remainder
    exceeds ``tol`` relative to the largest coefficient of u.
    """
    b = u.backend
    n, k = u.degree, P.degree
    m = n - k
    if m < 0:
        raise NotDivisible(f"degree {n} is below the divisor degree {k}")
    uc, pc = u.coeffs, P.coeffs
    q = b.zeros(m + 1)
    p0 = pc[0]
    for i in range(m + 1):
        acc = uc[i]
        for j in range(1, min(i, k) + 1):
            acc = acc - pc[j] * q[i - j]
        q[i] = acc / p0
    qpoly = HomogPoly(q, b)
    rem = uc - np.convolve(q, pc)
    scale = max((abs(v) for v in uc), default=0)
    if b.exact:
        rel = 0.0 if not any(bool(v) for v in rem) else math.inf
    else:
        top = max((abs(v) for v in rem), default=0)
        rel = float(top / scale) if scale else float(top)
    tol = b.division_tol if tol is None else tol
    if rel > tol:
        raise NotDivisible(f"remainder {rel:.3e} exceeds tolerance {tol:.1e}")
    return qpoly, rel


@dataclass
class DegreeSolveRecord:
    m: int
    detM: object
    w: HomogPoly
    v: HomogPoly
    d: np.ndarray
    e: np.ndarray
    u: HomogPoly
    q: HomogPoly
    condition: float = math.nan
    small_divisor: bool = False
    remainder: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def b_coeffs(self) -> np.ndarray:
        p = len(self.d) // 2
        return self.d[p:]

    @property
    def c_coeffs(self) -> np.ndarray:
        p = len(self.d) // 2
        return self.d[:p]


def solve_degree(f_m: HomogPoly, d: LineDivisor, tol: float | None = None) -> DegreeSolveRecord:
    """Solve Delta^p u = f_m with u vanishing on all 2p lines, u = P_a q."""
    b = d.backend
    p = d.p
    m = f_m.degree
    M = build_M(m, d)
    detM = linalg.det(M, b)
    if is_degenerate(detM, d):
        raise DegenerateDivisor(m, detM)
    w = particular_w(f_m, p)
    e = rhs_vector(w, d)
    if p <= 2:
        sol = linalg.cramer_solve(M, e, b, det_a=detM)
    else:
        sol = linalg.solve(M, e, b)
    v = polyharmonic_v(sol, m + 2 * p, p, b)
    u = w + v
    q, rem = divide_by(u, divisor_poly(d), tol)
    return DegreeSolveRecord(
        m=m, detM=detM, w=w, v=v, d=sol, e=e, u=u, q=q,
        condition=linalg.cond_estimate(M),
        small_divisor=bool(abs(detM) < SMALL_DIVISOR_FLAG),
        remainder=rem,
    )


def fischer_matrix(m: int, d: LineDivisor) -> np.ndarray:
    """Matrix of q -> Delta^p(P_a q) on the z-basis of degree-m polynomials."""
    b = d.backend
    P = divisor_poly(d)
    out = np.empty((m + 1, m + 1), dtype=b.dtype)
    for k in range(m + 1):
        col = laplacian(multiply(P, HomogPoly.monomial(k, m - k, 1, b)), d.p)
        out[:, k] = col.coeffs
    return out


def dense_fischer_solve(f_m: HomogPoly, d: LineDivisor, pivot_tol: float | None = None) -> HomogPoly:
    """Solve Delta^p(P_a q) = f_m for q by row-equilibrated dense LU."""
    b = d.backend
    m = f_m.degree
    F = fischer_matrix(m, d)
    rhs = f_m.coeffs.copy()
    if not b.exact:
        for i in range(m + 1):
            s = max(abs(v) for v in F[i])
            if s:
                F[i] = F[i] / s
                rhs[i] = rhs[i] / s
    fac = linalg.lu_factor(F, b)
    ratio = fac.pivot_ratio()
    if b.exact:
        singular = ratio == 0
    else:
        pivot_tol = b.degeneracy_unit if pivot_tol is None else pivot_tol
        singular = ratio < pivot_tol
    if singular:
        raise SingularOperator(m, ratio)
    return HomogPoly(np.asarray(linalg.lu_solve(fac, rhs), dtype=b.dtype), b)


def stability_diagnostic(rec: DegreeSolveRecord, d: LineDivisor) -> float:
    """||P_a q|| * |det M| / ||Delta^p(P_a q)||, zero for f = 0."""
    lu = fischer_norm_log(rec.u)
    lf = fischer_norm_log(laplacian(rec.u, d.p))
    if lf == -math.inf or lu == -math.inf:
        return 0.0
    return math.exp(lu - lf) * float(abs(rec.detM))
