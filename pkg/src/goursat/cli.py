"""Command-line front end.

Every subcommand reads one JSON config (``--config``), optionally patched
by flags, and writes deterministic JSON/CSV artifacts into ``--out``.

Exit codes: 0 success, 2 invalid input, 3 degenerate divisor, 4 precision
exhausted.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import mpmath

from . import diophantine as dio
from .errors import (
    DegenerateDivisor,
    InvalidDivisor,
    NotDivisible,
    PrecisionExhausted,
    ScaleExceeded,
    UninformativeInterval,
)
from .fischer import det_M, is_degenerate
from .homog_poly import LineDivisor, fischer_norm_log
from .io import dumps, fmt, is_empty_series, scalar_to_json, series_from_json, series_to_json, write_csv, write_json
from .scalars import Extended, get_backend, parse_rational
from .solver import GoursatProblem, solve

COMMANDS = ("solve", "analyze", "detseq", "probe", "leray", "demo-divergence")
EXIT_OK, EXIT_INVALID, EXIT_DEGENERATE, EXIT_PRECISION = 0, 2, 3, 4
ENV_PRECISION = "GOURSAT_PRECISION"


@dataclass
class Diagnostic:
    code: str
    message: str

    def __str__(self):
        return f"{self.code}: {self.message}"


@dataclass
class RunConfig:
    command: str
    problem: dict = field(default_factory=dict)
    precision: object = None
    tol: float | None = None
    mmax: int | None = None
    window: int | None = None
    out: Path = Path(".")


class ConfigError(ValueError):
    pass


def _default_precision(command: str):
    return "extended(50)" if command == "demo-divergence" else "binary64"


def build_config(args: argparse.Namespace, env=None) -> RunConfig:
    env = os.environ if env is None else env
    problem: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                problem = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(problem, dict):
            raise ConfigError("config must be a JSON object")
    for key in ("a", "N", "lam", "liouville", "beta", "R", "depth", "m"):
        v = getattr(args, key, None)
        if v is not None:
            problem[key] = v
    precision = problem.get("precision", _default_precision(args.command))
    if env.get(ENV_PRECISION):
        precision = env[ENV_PRECISION]
    if args.precision is not None:
        precision = args.precision
    return RunConfig(
        command=args.command,
        problem=problem,
        precision=precision,
        tol=args.tol if args.tol is not None else problem.get("tol"),
        mmax=args.mmax if args.mmax is not None else problem.get("mmax"),
        window=args.window if args.window is not None else problem.get("window"),
        out=Path(args.out),
    )


def _slopes(problem: dict):
    a = problem.get("a", problem.get("divisor", {}).get("a") if isinstance(problem.get("divisor"), dict) else None)
    if a is None:
        return None
    if not isinstance(a, list):
        a = [a]
    return [parse_rational(v) for v in a]


def _truncation(problem: dict):
    return problem.get("N", problem.get("truncation"))


def validate(config: RunConfig) -> list[Diagnostic]:
    """All problems with ``config``; an empty list means it can run."""
    out: list[Diagnostic] = []
    pr = config.problem
    cmd = config.command
    if cmd not in COMMANDS:
        return [Diagnostic("command", f"unknown command {cmd!r}")]
    try:
        backend = get_backend(config.precision)
    except (ValueError, TypeError) as exc:
        out.append(Diagnostic("precision", str(exc)))
        backend = None
    p = None
    if cmd in ("solve", "analyze", "detseq"):
        try:
            a = _slopes(pr)
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            out.append(Diagnostic("InvalidDivisor", f"unreadable slope: {exc}"))
            a = []
        if a is None:
            out.append(Diagnostic("InvalidDivisor", "missing slope list 'a'"))
        elif a:
            try:
                p = LineDivisor(tuple(a)).p
            except InvalidDivisor as exc:
                out.append(Diagnostic("InvalidDivisor", str(exc)))
    if cmd == "solve":
        N = _truncation(pr)
        if N is None:
            out.append(Diagnostic("truncation", "missing truncation 'N'"))
        elif p is not None and int(N) < 2 * p:
            out.append(Diagnostic("truncation", f"N={N} is below 2p={2 * p}"))
        if is_empty_series(pr.get("f")):
            out.append(Diagnostic("empty_series", "series 'f' has no terms"))
        for key in ("f", "c", "g"):
            doc = pr.get(key)
            if doc is not None and backend is not None:
                try:
                    series_from_json(doc, backend)
                except (ValueError, KeyError, TypeError, ZeroDivisionError) as exc:
                    out.append(Diagnostic("series", f"{key}: {exc}"))
    if cmd in ("analyze", "detseq"):
        mmax = config.mmax or pr.get("mmax") or 200
        window = config.window or max(1, int(mmax) // 4)
        if int(window) < 1 or int(mmax) < int(window):
            out.append(Diagnostic("window", f"need 1 <= window <= mmax, got window={window}, mmax={mmax}"))
    if cmd in ("probe", "demo-divergence"):
        K = pr.get("liouville", 2 if cmd == "demo-divergence" else None)
        if K is not None:
            try:
                dio.liouville_beta(int(K))
            except (ScaleExceeded, ValueError) as exc:
                out.append(Diagnostic("scale", f"liouville K={K}: {exc}"))
        elif cmd == "probe" and pr.get("beta") is None:
            out.append(Diagnostic("beta", "probe needs 'beta' or 'liouville'"))
    if cmd == "demo-divergence" and backend is not None:
        if not isinstance(backend, Extended) or backend.digits < 40:
            out.append(Diagnostic("precision", f"demo-divergence needs extended precision of at least 40 digits, "
                                                f"got {backend.describe()}"))
    if cmd == "leray":
        lam = pr.get("lam", pr.get("lambda"))
        if lam is None:
            out.append(Diagnostic("lambda", "missing 'lambda'"))
        else:
            try:
                if not abs(float(parse_rational(lam))) < 2:
                    out.append(Diagnostic("lambda", f"|lambda| must be below 2, got {lam}"))
            except (ValueError, TypeError, ZeroDivisionError) as exc:
                out.append(Diagnostic("lambda", str(exc)))
    return out


# -- commands ---------------------------------------------------------------


def _divisor(config: RunConfig) -> LineDivisor:
    return LineDivisor(tuple(_slopes(config.problem)), get_backend(config.precision))


def _divisor_meta(d: LineDivisor) -> dict:
    return {"p": d.p, "a": d.a_strings(), "A": [scalar_to_json(A) for A in d.A],
            "warnings": d.hypothesis_warnings()}


def _per_degree_rows(report, d: LineDivisor):
    p = d.p
    for rec, res, diag in zip(report.per_degree, report.residual_norms, report.diagnostics):
        un = fischer_norm_log(rec.u)
        yield (rec.m, abs(rec.detM), math.exp(un) if un > -math.inf else 0.0, res, diag, rec.m + 2 * p,
               rec.small_divisor)


def cmd_solve(config: RunConfig) -> int:
    b = get_backend(config.precision)
    pr = config.problem
    d = _divisor(config)
    N = int(_truncation(pr))
    prob = GoursatProblem(d, series_from_json(pr.get("f"), b, N), series_from_json(pr.get("c"), b, N),
                          series_from_json(pr.get("g"), b, N), N)
    code = EXIT_OK
    message = None
    try:
        report = solve(prob)
    except DegenerateDivisor as exc:
        report = exc.report
        code = EXIT_DEGENERATE
        message = str(exc)
    tol = config.tol if config.tol is not None else max(b.rel_tol, 1e-9) if not b.exact else 0.0
    max_res = max(report.residual_norms, default=0.0)
    digits = getattr(b, "digits", 17)
    doc = {
        "status": report.status,
        "degenerate_degree": report.degenerate_degree,
        "message": message,
        "precision": b.describe(),
        "divisor": _divisor_meta(d),
        "truncation": N,
        "radius_estimate": report.radius_estimate,
        "max_residual": max_res,
        "residual_ok": bool(max_res <= tol),
        "tol": tol,
        "per_degree_csv": "per_degree.csv",
        "u": series_to_json(report.u, "zzbar", digits=digits),
        "u_xy": series_to_json(report.u, "xy", digits=digits),
        "q": series_to_json(report.q, "zzbar", digits=digits),
    }
    config.out.mkdir(parents=True, exist_ok=True)
    write_json(config.out / "report.json", doc)
    write_csv(config.out / "per_degree.csv",
              ["m", "abs_det_M", "norm_u", "residual", "diagnostic", "u_degree", "small_divisor"],
              _per_degree_rows(report, d))
    if message:
        print(f"error: {message}", file=sys.stderr)
    print(f"{report.status}: radius_estimate={fmt(report.radius_estimate)} max_residual={fmt(max_res)}")
    return code


def _analysis_depth(problem: dict) -> int:
    return int(problem.get("depth", 30))


def cmd_analyze(config: RunConfig) -> int:
    d = _divisor(config)
    pr = config.problem
    mmax = int(config.mmax or pr.get("mmax") or 200)
    window = int(config.window or max(1, mmax // 4))
    depth = _analysis_depth(pr)
    digits = max(60, 2 * depth + 20)
    lines = []
    for a in d.a:
        ad = dio.angle_data(a)
        if ad.beta_exact is not None:
            verdict = dio.badly_approximable_check(ad.beta_exact, depth)
        else:
            verdict = dio.badly_approximable_check(dio.beta_interval_for_slope(a, digits), depth)
            if isinstance(a, Fraction):
                verdict.rational = False
                verdict.note = "irrational: A(a) is a Gaussian rational that is not a root of unity"
        lines.append({
            "a": str(a) if isinstance(a, Fraction) else mpmath.nstr(a, 30),
            "A": scalar_to_json(ad.A),
            "beta": ad.beta,
            "beta_exact": None if ad.beta_exact is None else str(ad.beta_exact),
            "alpha": ad.alpha,
            "rational": verdict.rational,
            "badly_approximable_up_to_depth": verdict.badly_approximable_up_to_depth,
            "applicable": verdict.applicable,
            "C_estimate": verdict.C_estimate,
            "mu_fit": verdict.mu_fit,
            "depth": verdict.depth,
            "max_quotient": verdict.max_quotient,
            "quotients": verdict.quotients,
            "note": verdict.note,
        })
    tau = dio.tau_estimate(d, mmax, window)
    doc = {
        "precision": d.backend.describe(),
        "divisor": _divisor_meta(d),
        "lines": lines,
        "tau": {"window_min": tau.window_min, "window": window, "mmax": mmax, "verdict": tau.verdict,
                "floor": tau.floor, "zero_determinants": tau.zeros},
        "trend_csv": "tau_trend.csv",
    }
    config.out.mkdir(parents=True, exist_ok=True)
    write_json(config.out / "verdict.json", doc)
    write_csv(config.out / "tau_trend.csv", ["m", "abs_det_M", "root"], tau.trend)
    zeros = ",".join(str(m) for m in tau.zeros) or "none"
    print(f"tau verdict: {tau.verdict}; window_min={fmt(tau.window_min)}; zero determinants at m={zeros}")
    return EXIT_OK


def cmd_detseq(config: RunConfig) -> int:
    d = _divisor(config)
    mmax = int(config.mmax or config.problem.get("mmax") or 200)
    rows = []
    for m in range(mmax + 1):
        det = det_M(m, d)
        mag = abs(det)
        degenerate = is_degenerate(det, d)
        if m == 0 or degenerate:
            root = 0.0 if degenerate else float(mag)
        else:
            root = math.exp(float(mpmath.log(mag)) / m)
        rows.append((m, mag, root, degenerate))
    config.out.mkdir(parents=True, exist_ok=True)
    write_csv(config.out / "detseq.csv", ["m", "abs_det_M", "root", "degenerate"], rows)
    print(f"wrote {mmax + 1} determinants to {config.out / 'detseq.csv'}")
    return EXIT_OK


def _beta_source(problem: dict):
    if problem.get("liouville") is not None:
        return dio.liouville_beta(int(problem["liouville"]))
    return problem["beta"]


def cmd_probe(config: RunConfig) -> int:
    pr = config.problem
    beta = _beta_source(pr)
    ms = pr.get("m")
    if ms is None:
        ms = list(range(1, int(config.mmax or 30) + 1))
    elif not isinstance(ms, list):
        ms = [ms]
    rows = []
    for m in ms:
        pi = dio.small_divisor_probe(beta, int(m))
        rows.append((int(m), pi.lo, pi.hi))
    liouville = isinstance(beta, dio.LiouvilleBeta)
    doc = {
        "beta": str(beta.value) if liouville else str(dio.as_interval(beta).mid),
        "beta_tail_log10": beta.tail_bound_log10 if liouville else None,
        "intervals": [{"m": m, "lo": mpmath.nstr(lo, 17), "hi": mpmath.nstr(hi, 17)} for m, lo, hi in rows],
    }
    config.out.mkdir(parents=True, exist_ok=True)
    write_json(config.out / "probe.json", doc)
    write_csv(config.out / "probe.csv", ["m", "lo", "hi"], rows)
    print(f"wrote {len(rows)} intervals to {config.out / 'probe.csv'}")
    return EXIT_OK


def cmd_leray(config: RunConfig) -> int:
    pr = config.problem
    lp = dio.leray_map(pr.get("lam", pr.get("lambda")))
    doc = {"lambda": lp.lam, "beta": lp.beta, "a": lp.a, "alpha": lp.alpha_stated,
           "alpha_geometric": lp.alpha_geometric, "near_singular": lp.near_singular}
    text = dumps(doc)
    sys.stdout.write(text)
    if str(config.out) != ".":
        config.out.mkdir(parents=True, exist_ok=True)
        (config.out / "leray.json").write_text(text, encoding="utf-8")
    return EXIT_OK


def cmd_demo_divergence(config: RunConfig) -> int:
    pr = config.problem
    b = get_backend(config.precision)
    res = dio.divergence_run(K=int(pr.get("liouville", 2)), R=pr.get("R", "1"), mmax=int(config.mmax or 30),
                         digits=b.digits, baseline_a=pr.get("baseline_a", "2"))
    rows = res.pop("rows")
    config.out.mkdir(parents=True, exist_ok=True)
    write_csv(config.out / "divergence.csv", ["n", "abs_b_solver", "abs_b_closed_form", "rel_err", "root"], rows)
    write_json(config.out / "divergence.json", res)
    print(f"max relative error vs closed form: {fmt(res['max_rel_err_vs_closed_form'])}; "
          f"blowup ratio at m={res.get('probe_m')}: {fmt(res.get('blowup_ratio', float('nan')))}")
    return EXIT_OK


HANDLERS = {
    "solve": cmd_solve,
    "analyze": cmd_analyze,
    "detseq": cmd_detseq,
    "probe": cmd_probe,
    "leray": cmd_leray,
    "demo-divergence": cmd_demo_divergence,
}


def run(config: RunConfig) -> int:
    diags = validate(config)
    if diags:
        for dg in diags:
            print(f"invalid input: {dg}", file=sys.stderr)
        return EXIT_INVALID
    try:
        return HANDLERS[config.command](config)
    except DegenerateDivisor as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (PrecisionExhausted, UninformativeInterval, NotDivisible) as exc:
        print(f"precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (InvalidDivisor, ScaleExceeded, ValueError, KeyError, TypeError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


def _slope_list(text: str) -> list[str]:
    return [s for s in text.split(",") if s.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--precision", help="binary64, exact, or a digit count / extended(N)")
    common.add_argument("--tol", type=float, help="residual tolerance")
    common.add_argument("--mmax", type=int, help="largest degree examined")
    common.add_argument("--window", type=int, help="trailing window for liminf proxies")

    parser = argparse.ArgumentParser(prog="goursat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    slopes = argparse.ArgumentParser(add_help=False)
    slopes.add_argument("--a", type=_slope_list, help="comma-separated slopes, e.g. 1,2/3,-4")

    p = sub.add_parser("solve", parents=[common, slopes], help="solve a Goursat problem")
    p.add_argument("--N", type=int, help="truncation degree")
    p = sub.add_parser("analyze", parents=[common, slopes], help="angle and determinant analysis")
    p.add_argument("--depth", type=int, help="continued-fraction depth")
    sub.add_parser("detseq", parents=[common, slopes], help="determinant sequence CSV")
    p = sub.add_parser("probe", parents=[common], help="small-divisor intervals")
    p.add_argument("--beta", help="exact beta, e.g. 1/4")
    p.add_argument("--liouville", type=int, help="Liouville truncation K")
    p.add_argument("--m", type=int, nargs="+", help="degrees to probe")
    p = sub.add_parser("leray", parents=[common], help="Leray parameter correspondence")
    p.add_argument("--lambda", dest="lam", help="lambda in (-2, 2)")
    p = sub.add_parser("demo-divergence", parents=[common], help="divergent formal solution demo")
    p.add_argument("--liouville", type=int, help="Liouville truncation K (default 2)")
    p.add_argument("--R", help="data radius R (default 1)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = build_config(args)
    except ConfigError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
