"""Angles, continued fractions and small-divisor analysis of a line divisor.

Real inputs to the number-theoretic routines are treated as intervals with
Fraction endpoints: exact inputs (Fraction, int, decimal strings) are
degenerate intervals, floats and mpf values carry their rounding error, and
:class:`LiouvilleBeta` carries its explicit tail bound.  Nothing is ever
declared rational from a floating-point value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .errors import PrecisionExhausted, RootOfUnity, ScaleExceeded, UninformativeInterval
from .fischer import det_M, is_degenerate
from .homog_poly import FormalSeries, HomogPoly, LineDivisor, unimodular
from .io import scalar_to_json
from .scalars import BINARY64, Backend, Extended, GaussianRational, is_exact_real, parse_rational
from .solver import GoursatProblem, solve

# Beyond this many digits an astronomically small tail bound is replaced by 10**-MAX_TAIL_DIGITS.
MAX_TAIL_DIGITS = 4000


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo


@dataclass(frozen=True)
class LiouvilleBeta:
    """Truncation r_K = sum_{k<=K} 10^-p_k with p_1 = 1, p_{k+1} = p_k + k 10^p_k.

    The true value lies in [value, value + 2 * 10^-next_exponent].
    """

    K: int
    exponents: tuple
    next_exponent: int
    value: Fraction

    @property
    def tail_bound_log10(self) -> float:
        return math.log10(2) - self.next_exponent

    def interval(self, max_digits: int = MAX_TAIL_DIGITS) -> Interval:
        if self.next_exponent <= max_digits:
            tail = Fraction(2, 10 ** self.next_exponent)
        else:
            tail = Fraction(1, 10 ** max_digits)
        return Interval(self.value, self.value + tail)


def liouville_beta(K: int) -> LiouvilleBeta:
    if K < 1:
        raise ValueError("K must be at least 1")
    if K >= 3:
        raise ScaleExceeded(f"K={K} needs the term 10^-(11 + 2*10^11), far beyond representable decimals")
    exps = [1]
    while len(exps) <= K:
        k = len(exps)
        exps.append(exps[-1] + k * 10 ** exps[-1])
    value = sum((Fraction(1, 10 ** e) for e in exps[:K]), Fraction(0))
    return LiouvilleBeta(K=K, exponents=tuple(exps[:K]), next_exponent=exps[K], value=value)


def as_interval(beta) -> Interval:
    """Enclose a real input by an interval with Fraction endpoints."""
    if isinstance(beta, Interval):
        return beta
    if isinstance(beta, LiouvilleBeta):
        return beta.interval()
    if isinstance(beta, tuple) and len(beta) == 2:
        return Interval(parse_rational(beta[0]), parse_rational(beta[1]))
    if isinstance(beta, (float, np.floating)):
        x = Fraction(float(beta))
        ulp = Fraction(math.ulp(float(beta)))
        return Interval(x - ulp, x + ulp)
    if hasattr(beta, "_mpf_"):
        man, exp = beta.man_exp
        x = Fraction(int(man)) * (Fraction(2) ** int(exp)) if man else Fraction(0)
        prec = beta.context.prec
        err = abs(x) * Fraction(1, 2 ** (prec - 2)) if x else Fraction(1, 2 ** prec)
        return Interval(x - err, x + err)
    if is_exact_real(beta):
        x = parse_rational(beta)
        return Interval(x, x)
    raise TypeError(f"cannot interpret {beta!r} as a real number")


def continued_fraction(beta, depth: int) -> list[int]:
    """Partial quotients a_1..a_depth of beta = [0; a_1, a_2, ...], 0 < beta < 1.

    Stops early (and only then) when an exact rational input terminates.
    Raises PrecisionExhausted when the input interval cannot pin down the
    next quotient.
    """
    iv = as_interval(beta)
    lo, hi = iv.lo, iv.hi
    if not (0 < lo and hi < 1):
        raise ValueError("beta must lie in (0, 1)")
    out: list[int] = []
    while len(out) < depth:
        if lo == 0 and hi == 0:
            break
        if lo <= 0:
            raise PrecisionExhausted(f"precision exhausted after {len(out)} quotients")
        y_lo, y_hi = 1 / hi, 1 / lo
        a = math.floor(y_lo)
        if math.floor(y_hi) != a:
            raise PrecisionExhausted(f"precision exhausted after {len(out)} quotients")
        out.append(a)
        lo, hi = y_lo - a, y_hi - a
    return out


def convergents(quotients: list[int]) -> list[Fraction]:
    h_prev, h = 1, 0
    k_prev, k = 0, 1
    out = []
    for a in quotients:
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev
        out.append(Fraction(h, k))
    return out


@dataclass
class DiophantineVerdict:
    rational: bool | None
    badly_approximable_up_to_depth: bool
    C_estimate: float
    mu_fit: float
    depth: int
    quotients: list = field(default_factory=list)
    applicable: bool = True
    max_quotient: int = 0
    note: str = ""


def badly_approximable_check(beta, depth: int, quotient_bound: int = 1000) -> DiophantineVerdict:
    """Bounded-quotient test up to ``depth`` plus the empirical constant

        C = min_i m_i^2 |beta - n_i/m_i|

    over the convergents n_i/m_i.  ``mu_fit`` is the least-squares slope of
    -log|beta - n_i/m_i| against log m_i.
    """
    iv = as_interval(beta)
    if iv.exact:
        qs = continued_fraction(iv.mid, depth + 1)
        if len(qs) <= depth:
            return DiophantineVerdict(rational=True, badly_approximable_up_to_depth=False, C_estimate=0.0,
                                      mu_fit=math.nan, depth=len(qs), quotients=qs, applicable=False,
                                      max_quotient=max(qs, default=0),
                                      note="rational: continued fraction terminates")
    qs = continued_fraction(iv, depth)
    conv = convergents(qs)
    x = iv.mid
    cs, logs_m, logs_e = [], [], []
    for r in conv:
        err = abs(x - r)
        if err == 0:
            continue
        cs.append(float(r.denominator ** 2 * err))
        if r.denominator > 1:
            logs_m.append(math.log(r.denominator))
            logs_e.append(math.log(err.numerator) - math.log(err.denominator))
    C = min(cs) if cs else 0.0
    mu = math.nan
    if len(logs_m) >= 2:
        slope, _ = np.polyfit(logs_m, logs_e, 1)
        mu = float(-slope)
    bounded = max(qs, default=0) <= quotient_bound
    return DiophantineVerdict(rational=None, badly_approximable_up_to_depth=bounded, C_estimate=C, mu_fit=mu,
                              depth=len(qs), quotients=qs, max_quotient=max(qs, default=0))


@dataclass
class AngleData:
    a: object
    A: object
    beta: float
    alpha: float
    beta_exact: Fraction | None = None
    beta_rational: bool | None = None
    acute_angle: float = math.nan


def _beta_of(A: complex) -> float:
    b = math.atan2(A.imag, A.real) / (2 * math.pi)
    return b + 1 if b <= 0 else b


def angle_data(a, backend: Backend = BINARY64, digits: int = 60) -> AngleData:
    """A = (a+i)/(a-i) = exp(2 pi i beta) with beta in (0, 1); alpha = beta/2.

    For a rational slope, A is a Gaussian rational, and the only roots of
    unity in Q(i) are 1, -1, i, -i, so rationality of beta is decided
    exactly: beta is rational iff a is 0 or +-1.
    """
    A = unimodular(parse_rational(a) if is_exact_real(a) else a, backend)
    beta_exact = None
    rational = None
    if is_exact_real(a):
        q = parse_rational(a)
        table = {Fraction(0): Fraction(1, 2), Fraction(1): Fraction(1, 4), Fraction(-1): Fraction(3, 4)}
        beta_exact = table.get(q)
        rational = beta_exact is not None
        ctx = mpmath.MPContext()
        ctx.dps = digits
        ar = ctx.mpf(q.numerator) / q.denominator
        beta_hi = ctx.atan2(2 * ar, ar * ar - 1) / (2 * ctx.pi)
        beta = float(beta_hi + 1 if beta_hi <= 0 else beta_hi)
        if beta_exact is not None:
            beta = float(beta_exact)
    else:
        beta = _beta_of(complex(A))
    af = float(a) if not isinstance(a, str) else float(parse_rational(a))
    line = math.atan2(1.0, af)
    acute = min(line, math.pi - line)
    return AngleData(a=a, A=A, beta=beta, alpha=beta / 2, beta_exact=beta_exact, beta_rational=rational,
                     acute_angle=acute)


def beta_interval_for_slope(a, digits: int = 60) -> Interval:
    """Enclosure of beta(a) at the given working precision."""
    ad = angle_data(a)
    if ad.beta_exact is not None:
        return Interval(ad.beta_exact, ad.beta_exact)
    ctx = mpmath.MPContext()
    ctx.dps = digits + 10
    ar = ctx.mpf(parse_rational(a).numerator) / parse_rational(a).denominator if is_exact_real(a) else ctx.mpf(a)
    b = ctx.atan2(2 * ar, ar * ar - 1) / (2 * ctx.pi)
    if b <= 0:
        b += 1
    x = Fraction(int(ctx.nint(b * ctx.mpf(10) ** (digits + 5))), 10 ** (digits + 5))
    err = Fraction(1, 10 ** digits)
    return Interval(x - err, x + err)


def slope_for_beta(beta, backend: Backend) -> object:
    """The slope a = cot(pi beta) whose A(a) equals exp(2 pi i beta)."""
    ctx = getattr(backend, "ctx", None)
    if ctx is None:
        ctx = mpmath.MPContext()
        ctx.dps = 30
    x = as_interval(beta).mid if not hasattr(beta, "_mpf_") else beta
    xr = ctx.mpf(x.numerator) / x.denominator if isinstance(x, Fraction) else ctx.mpf(x)
    a = ctx.cot(ctx.pi * xr)
    return a if backend.dtype is object else float(a)


@dataclass
class TauEstimate:
    window_min: float
    trend: list
    verdict: str
    zeros: list = field(default_factory=list)
    floor: float = 0.25


def tau_estimate(d: LineDivisor, m_max: int, window: int, floor: float = 0.25,
                 positive: float = 0.5) -> TauEstimate:
    """Trend of |det M_m|^(1/m), m = 1..m_max, and its windowed minimum.

    The windowed minimum over the last ``window`` degrees stands in for the
    liminf.  Verdict ``vanishing`` when any determinant is degenerate or the
    windowed minimum drops below ``floor``; ``positive`` when it stays above
    ``positive``; otherwise ``inconclusive``.
    """
    if window < 1 or m_max < window:
        raise ValueError("need 1 <= window <= m_max")
    trend = []
    zeros = []
    for m in range(1, m_max + 1):
        det = det_M(m, d)
        if is_degenerate(det, d):
            zeros.append(m)
            trend.append((m, 0.0, 0.0))
            continue
        mag = abs(det)
        lg = float(mpmath.log(mag)) if not isinstance(mag, float) else math.log(mag)
        trend.append((m, float(mag), math.exp(lg / m)))
    tail = [r for (_, _, r) in trend[m_max - window:]]
    wmin = min(tail)
    if zeros or wmin < floor:
        verdict = "vanishing"
    elif wmin >= positive:
        verdict = "positive"
    else:
        verdict = "inconclusive"
    return TauEstimate(window_min=wmin, trend=trend, verdict=verdict, zeros=zeros, floor=floor)


def p2_closed_form_det(m: int, t, backend: Backend = BINARY64):
    """det M_{m-4} for the lines x = 0, y = 0, x = t y, x = y/t (p = 2).

    With A = A(t): A^m N_m = 4A(A^m - 1)(A^(m-2) - 1) for even m and
    -2(A^(m-1) - 1)^2 (A^2 + 1) for odd m.
    """
    if m < 4:
        raise ValueError("m must be at least 4")
    A = unimodular(parse_rational(t) if is_exact_real(t) else t, backend)
    one = backend.one
    pw = backend.power
    if m % 2 == 0:
        num = 4 * A * (pw(A, m) - one) * (pw(A, m - 2) - one)
    else:
        num = -2 * (pw(A, m - 1) - one) ** 2 * (A * A + one)
    return num / pw(A, m)


@dataclass
class ProbeInterval:
    m: int
    lo: object
    hi: object
    dist_lo: Fraction = field(repr=False)
    dist_hi: Fraction = field(repr=False)


def small_divisor_probe(beta, m: int) -> ProbeInterval:
    """Rigorous enclosure of |A^m - 1| = 2 sin(pi ||m beta||).

    ||x|| is the distance to the nearest integer; the enclosure of beta
    (exact value plus tail) is propagated exactly in rationals and the sine
    is evaluated with mpmath interval arithmetic.
    """
    iv = as_interval(beta)
    if m * iv.width >= Fraction(1, 4):
        raise UninformativeInterval(f"m * width = {float(m * iv.width):.3g} >= 1/4")
    u, v = m * iv.lo, m * iv.hi

    def dist(x: Fraction) -> Fraction:
        return abs(x - round(x))

    cands = [dist(u), dist(v)]
    if math.floor(u) != math.floor(v) or u == math.floor(u):
        cands.append(Fraction(0))
    hu, hv = u - Fraction(1, 2), v - Fraction(1, 2)
    if math.floor(hu) != math.floor(hv) or hu == math.floor(hu):
        cands.append(Fraction(1, 2))
    dlo, dhi = min(cands), max(cands)
    ctx = mpmath.iv
    with mpmath.workdps(40):
        lo_iv = 2 * ctx.sin(ctx.pi * ctx.mpf(dlo.numerator) / dlo.denominator)
        hi_iv = 2 * ctx.sin(ctx.pi * ctx.mpf(dhi.numerator) / dhi.denominator)
    lo = max(lo_iv.a, 0) if dlo else mpmath.mpf(0)
    hi = hi_iv.b if dhi else mpmath.mpf(0)
    return ProbeInterval(m=m, lo=mpmath.mpf(lo), hi=mpmath.mpf(hi), dist_lo=dlo, dist_hi=dhi)


@dataclass
class LerayParameters:
    lam: float
    beta: float
    a: float
    alpha_stated: float
    alpha_geometric: float
    near_singular: bool


def leray_map(lam, singular_tol: float = 1e-12) -> LerayParameters:
    """Map lambda in (-2, 2) of lambda d^2/dxdy + Delta to the two-line problem.

    beta in [-1/4, 1/4] solves lambda = 2 sin(2 pi beta); the slope is
    a = (lambda/2)/sqrt(1 - (lambda/2)^2) = tan(2 pi beta).  Two angle
    parameters are returned: (1 - 2 beta)/4 and the one read off the
    transformed lines directly, (pi/2 - 2 pi |beta|)/(2 pi).
    """
    lam = float(parse_rational(lam)) if isinstance(lam, str) else float(lam)
    if not -2 < lam < 2:
        raise ValueError("lambda must lie strictly between -2 and 2")
    h = lam / 2
    gap = 1 - h * h
    beta = math.asin(h) / (2 * math.pi)
    a = h / math.sqrt(gap)
    line = math.atan2(1.0, a)
    acute = min(line, math.pi - line)
    return LerayParameters(lam=lam, beta=beta, a=a, alpha_stated=(1 - 2 * beta) / 4,
                           alpha_geometric=acute / (2 * math.pi), near_singular=gap < singular_tol)


def closed_form_bm(m: int, A, R, threshold: float | None = None):
    """z^m coefficient of the polyharmonic part for p = 1 and data
    f_m = R^-m zbar^m, g = 0:

        b_m = (A - 1) / ((1 - A^m) * 4 R^(m-2) (m - 1)).
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    if isinstance(A, GaussianRational):
        one = GaussianRational(Fraction(1))
        Am = A ** m
        gap = one - Am
        if gap == 0:
            raise RootOfUnity(f"A^{m} = 1")
        Rq = parse_rational(R)
        return (A - one) / (gap * (4 * Rq ** (m - 2) * (m - 1)))
    if hasattr(A, "_mpc_"):
        ctx = A.context
        Am = A ** m
        gap = 1 - Am
        thr = ctx.mpf(10) ** -(ctx.dps - 4) if threshold is None else threshold
        Rv = ctx.mpf(parse_rational(R).numerator) / parse_rational(R).denominator if is_exact_real(R) else ctx.mpf(R)
    else:
        A = complex(A)
        Am = A ** m
        gap = 1 - Am
        thr = 1e-12 if threshold is None else threshold
        Rv = float(parse_rational(R)) if is_exact_real(R) else float(R)
    if abs(gap) < thr:
        raise RootOfUnity(f"|1 - A^{m}| = {float(abs(gap)):.3e} below {float(thr):.1e}")
    return (A - 1) / (gap * (4 * Rv ** (m - 2) * (m - 1)))


def divergence_run(K: int = 2, R="1", mmax: int = 30, digits: int = 50, baseline_a="2", probe_m: int = 10):
    """Solve p = 1 with f_m = R^-m zbar^m and g = 0 on the slope a = cot(pi beta).

    Returns a dict with the per-degree rows (n, |b_n|, |closed form|, relative
    error, |b_n|^(1/n)) and the small-divisor comparison at ``probe_m``.
    """
    b = Extended(digits)
    lb = liouville_beta(K)
    a = slope_for_beta(lb.value, b)
    Rq = parse_rational(R)

    def run(slope):
        d = LineDivisor((slope,), b)
        f_terms = []
        for m in range(mmax - 1):
            c = b.zeros(m + 1)
            c[0] = b.scalar(1 / Rq ** m)
            f_terms.append(HomogPoly(c, b))
        prob = GoursatProblem(d, FormalSeries.from_terms(f_terms, mmax, b), truncation=mmax)
        return d, solve(prob)

    d, rep = run(a)
    rows = []
    worst = 0.0
    bvals = {}
    for rec in rep.per_degree:
        n = rec.m + 2
        bn = rec.b_coeffs[0]
        cf = closed_form_bm(n, d.A[0], Rq)
        err = float(abs(bn - cf) / abs(cf))
        worst = max(worst, err)
        bvals[n] = bn
        root = float(abs(bn) ** (b.ctx.mpf(1) / n)) if bn else 0.0
        rows.append((n, abs(bn), abs(cf), err, root))
    _, base = run(parse_rational(baseline_a))
    base_b = {rec.m + 2: rec.b_coeffs[0] for rec in base.per_degree}
    probe = small_divisor_probe(lb, probe_m)
    out = {
        "K": K,
        "beta": str(lb.value),
        "beta_tail_log10": lb.tail_bound_log10,
        "a": mpmath.nstr(a, 30),
        "A": scalar_to_json(d.A[0], 30),
        "R": str(Rq),
        "mmax": mmax,
        "precision": b.describe(),
        "max_rel_err_vs_closed_form": worst,
        "rows": rows,
    }
    if probe_m in bvals and probe_m in base_b:
        out.update({
            f"abs_b{probe_m}": float(abs(bvals[probe_m])),
            f"baseline_abs_b{probe_m}": float(abs(base_b[probe_m])),
            "baseline_a": str(parse_rational(baseline_a)),
            "blowup_ratio": float(abs(bvals[probe_m]) / abs(base_b[probe_m])),
            "probe_m": probe_m,
            "probe_interval": [float(probe.lo), float(probe.hi)],
        })
    return out
